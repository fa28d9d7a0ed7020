//! Flux configurations and validation of the geometric hypotheses.
//!
//! Singular sets are single points in the plane. A configuration is a finite
//! list of such points, each carrying an Aharonov-Bohm flux `alpha`, an
//! inverse-square strength `p` and a Coulomb strength `q`, together with the
//! deficiency index of the background operator.

use std::collections::HashSet;
use std::fmt;

use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize, Serializer};
use thiserror::Error;

/// A nonnegative integer or `"infinite"`.
///
/// Used both for the user-declared background index and for totals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum IndexValue {
    Finite(u64),
    Infinite,
}

impl IndexValue {
    pub fn is_infinite(self) -> bool {
        matches!(self, IndexValue::Infinite)
    }

    /// Adds a finite count; infinity absorbs.
    pub fn plus(self, n: u64) -> IndexValue {
        match self {
            IndexValue::Finite(k) => IndexValue::Finite(k + n),
            IndexValue::Infinite => IndexValue::Infinite,
        }
    }
}

impl Default for IndexValue {
    fn default() -> Self {
        IndexValue::Finite(0)
    }
}

impl fmt::Display for IndexValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IndexValue::Finite(k) => write!(f, "{k}"),
            IndexValue::Infinite => f.write_str("infinite"),
        }
    }
}

impl Serialize for IndexValue {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            IndexValue::Finite(k) => serializer.serialize_u64(*k),
            IndexValue::Infinite => serializer.serialize_str("infinite"),
        }
    }
}

impl<'de> Deserialize<'de> for IndexValue {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct IndexVisitor;

        impl Visitor<'_> for IndexVisitor {
            type Value = IndexValue;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a nonnegative integer or the string \"infinite\"")
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> Result<IndexValue, E> {
                Ok(IndexValue::Finite(v))
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> Result<IndexValue, E> {
                u64::try_from(v)
                    .map(IndexValue::Finite)
                    .map_err(|_| E::custom("index must be nonnegative"))
            }

            fn visit_str<E: de::Error>(self, v: &str) -> Result<IndexValue, E> {
                if v == "infinite" {
                    Ok(IndexValue::Infinite)
                } else {
                    Err(E::invalid_value(de::Unexpected::Str(v), &self))
                }
            }
        }

        deserializer.deserialize_any(IndexVisitor)
    }
}

/// One flux point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Singularity {
    pub id: String,
    pub position: (f64, f64),
    pub alpha: f64,
    pub p: f64,
    pub q: f64,
}

impl Singularity {
    pub fn new(id: impl Into<String>, position: (f64, f64), alpha: f64, p: f64, q: f64) -> Self {
        Singularity {
            id: id.into(),
            position,
            alpha,
            p,
            q,
        }
    }

    /// A flux at the origin; handy where position is irrelevant.
    pub fn at_origin(id: impl Into<String>, alpha: f64, p: f64, q: f64) -> Self {
        Singularity::new(id, (0.0, 0.0), alpha, p, q)
    }

    /// Field-level violations of this singularity alone.
    pub fn field_violations(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let finite = [
            ("x", self.position.0),
            ("y", self.position.1),
            ("alpha", self.alpha),
            ("p", self.p),
            ("q", self.q),
        ];
        let nonfinite: Vec<&str> = finite
            .iter()
            .filter(|(_, v)| !v.is_finite())
            .map(|(name, _)| *name)
            .collect();
        if !nonfinite.is_empty() {
            out.push(Violation::new(
                ViolationCode::NonfiniteField,
                format!("singularity '{}': non-finite {}", self.id, nonfinite.join(", ")),
            ));
            return out;
        }
        if self.p < 0.0 {
            out.push(Violation::new(
                ViolationCode::NegativeP,
                format!("singularity '{}': p = {} is negative", self.id, self.p),
            ));
        } else if self.q < 0.0 && self.p == 0.0 {
            out.push(Violation::new(
                ViolationCode::UnboundedPotential,
                format!(
                    "singularity '{}': q = {} < 0 with p = 0 makes q/r unbounded below",
                    self.id, self.q
                ),
            ));
        }
        out
    }
}

/// Hypothesis a violation is filed under.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Rule {
    H1,
    H2,
    H3,
    #[serde(rename = "LOWER_BOUND")]
    LowerBound,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ViolationCode {
    DuplicateId,
    NonfiniteField,
    DuplicatePosition,
    NegativeP,
    UnboundedPotential,
}

impl ViolationCode {
    pub fn rule(self) -> Rule {
        match self {
            ViolationCode::DuplicateId => Rule::H1,
            ViolationCode::NonfiniteField => Rule::H2,
            ViolationCode::DuplicatePosition => Rule::H3,
            ViolationCode::NegativeP | ViolationCode::UnboundedPotential => Rule::LowerBound,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Violation {
    pub rule: Rule,
    pub code: ViolationCode,
    pub message: String,
}

impl Violation {
    fn new(code: ViolationCode, message: String) -> Self {
        Violation {
            rule: code.rule(),
            code,
            message,
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{:?}/{:?}] {}", self.rule, self.code, self.message)
    }
}

/// Minimum pairwise distance of a point set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Separation {
    Distance(f64),
    NoConstraint,
}

/// Outcome of the cutoff construction check: a gap `0 < delta < r/2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CutoffFeasibility {
    pub feasible: bool,
    pub delta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub ok: bool,
    pub violations: Vec<Violation>,
    pub cutoff: CutoffFeasibility,
}

impl ValidationReport {
    pub fn has(&self, code: ViolationCode) -> bool {
        self.violations.iter().any(|v| v.code == code)
    }
}

/// A validated, finite flux configuration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Configuration {
    singularities: Vec<Singularity>,
    background_index: IndexValue,
    min_separation: Separation,
}

impl Configuration {
    pub fn singularities(&self) -> &[Singularity] {
        &self.singularities
    }

    pub fn background_index(&self) -> IndexValue {
        self.background_index
    }

    pub fn min_separation(&self) -> Separation {
        self.min_separation
    }
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("malformed configuration: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("configuration violates {} rule(s): {}", .0.violations.len(), summarize(&.0.violations))]
    Invalid(ValidationReport),
}

fn summarize(violations: &[Violation]) -> String {
    violations
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}

/// Wire format of a single singularity in the configuration file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawSingularity {
    pub id: String,
    pub x: f64,
    pub y: f64,
    pub alpha: f64,
    #[serde(default)]
    pub p: f64,
    #[serde(default)]
    pub q: f64,
}

/// Wire format of the configuration file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfiguration {
    #[serde(default)]
    pub background_index: IndexValue,
    pub singularities: Vec<RawSingularity>,
}

impl RawConfiguration {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn from_singularities(background_index: IndexValue, list: &[Singularity]) -> Self {
        RawConfiguration {
            background_index,
            singularities: list
                .iter()
                .map(|s| RawSingularity {
                    id: s.id.clone(),
                    x: s.position.0,
                    y: s.position.1,
                    alpha: s.alpha,
                    p: s.p,
                    q: s.q,
                })
                .collect(),
        }
    }

    fn singularities(&self) -> Vec<Singularity> {
        self.singularities
            .iter()
            .map(|r| Singularity::new(r.id.clone(), (r.x, r.y), r.alpha, r.p, r.q))
            .collect()
    }
}

/// Minimum pairwise Euclidean distance; `NoConstraint` for fewer than two points.
pub fn min_separation(positions: &[(f64, f64)]) -> Separation {
    let mut best: Option<f64> = None;
    for (i, a) in positions.iter().enumerate() {
        for b in &positions[i + 1..] {
            let d = (a.0 - b.0).hypot(a.1 - b.1);
            best = Some(best.map_or(d, |m| m.min(d)));
        }
    }
    best.map_or(Separation::NoConstraint, Separation::Distance)
}

/// `delta = r/4`; a lone flux has nothing to separate and gets `delta = 1`.
pub fn cutoff_for(separation: Separation) -> CutoffFeasibility {
    match separation {
        Separation::NoConstraint => CutoffFeasibility {
            feasible: true,
            delta: 1.0,
        },
        Separation::Distance(r) => {
            let delta = r / 4.0;
            CutoffFeasibility {
                feasible: delta > 0.0 && delta < r / 2.0,
                delta,
            }
        }
    }
}

pub fn cutoff_feasibility(config: &Configuration) -> CutoffFeasibility {
    cutoff_for(config.min_separation)
}

/// Checks every hypothesis without building anything.
///
/// Violations are sorted, so the report does not depend on list order.
pub fn validate(raw: &RawConfiguration) -> ValidationReport {
    let singularities = raw.singularities();
    let mut violations: Vec<Violation> = singularities
        .iter()
        .flat_map(Singularity::field_violations)
        .collect();

    let mut seen = HashSet::new();
    let mut reported = HashSet::new();
    for s in &singularities {
        if !seen.insert(s.id.as_str()) && reported.insert(s.id.as_str()) {
            violations.push(Violation::new(
                ViolationCode::DuplicateId,
                format!("singularity id '{}' is used more than once", s.id),
            ));
        }
    }

    for (i, a) in singularities.iter().enumerate() {
        for b in &singularities[i + 1..] {
            if a.position == b.position {
                let (first, second) = if a.id <= b.id { (a, b) } else { (b, a) };
                violations.push(Violation::new(
                    ViolationCode::DuplicatePosition,
                    format!(
                        "singularities '{}' and '{}' share position ({}, {})",
                        first.id, second.id, a.position.0, a.position.1
                    ),
                ));
            }
        }
    }
    violations.sort();

    let positions: Vec<_> = singularities.iter().map(|s| s.position).collect();
    let cutoff = if violations.iter().any(|v| v.code == ViolationCode::NonfiniteField) {
        CutoffFeasibility {
            feasible: false,
            delta: 0.0,
        }
    } else {
        cutoff_for(min_separation(&positions))
    };

    ValidationReport {
        ok: violations.is_empty(),
        violations,
        cutoff,
    }
}

/// Validates a raw description and returns the configuration it describes.
pub fn build_configuration(raw: &RawConfiguration) -> Result<Configuration, ConfigError> {
    let report = validate(raw);
    if !report.ok {
        return Err(ConfigError::Invalid(report));
    }
    let singularities = raw.singularities();
    let positions: Vec<_> = singularities.iter().map(|s| s.position).collect();
    Ok(Configuration {
        min_separation: min_separation(&positions),
        background_index: raw.background_index,
        singularities,
    })
}

/// Parses and validates a JSON configuration.
pub fn parse_configuration(text: &str) -> Result<Configuration, ConfigError> {
    build_configuration(&RawConfiguration::from_json(text)?)
}
