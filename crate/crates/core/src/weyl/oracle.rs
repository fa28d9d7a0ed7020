use serde::ser::SerializeMap;
use serde::{Serialize, Serializer};

use super::endpoints::{count_l2_solutions_at_infinity, count_l2_solutions_at_zero, EndpointReport};
use super::{OracleSettings, RadialProblem, SpectralSign, WeylError};
use crate::calculus::{scanned_couplings, singularity_index};
use crate::model::Singularity;
use crate::parallel::{map_ordered, Execution};

/// Per-harmonic outcome: `index = m0 + m_inf - 2`, absent when either
/// endpoint is inconclusive.
#[derive(Debug, Clone, PartialEq)]
pub struct HarmonicOutcome {
    pub ell: i64,
    pub nu_squared: f64,
    pub m0: Option<u8>,
    pub minf: Option<u8>,
    pub index: Option<u8>,
    pub zero: EndpointReport,
    pub infinity: EndpointReport,
}

impl HarmonicOutcome {
    pub fn wronskian_drift(&self) -> Option<f64> {
        match (
            self.zero.evidence.wronskian_drift,
            self.infinity.evidence.wronskian_drift,
        ) {
            (Some(a), Some(b)) => Some(a.max(b)),
            (a, b) => a.or(b),
        }
    }
}

impl Serialize for HarmonicOutcome {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(4))?;
        map.serialize_entry("ell", &self.ell)?;
        map.serialize_entry("m0", &self.m0)?;
        map.serialize_entry("minf", &self.minf)?;
        match self.index {
            Some(index) => map.serialize_entry("index", &index)?,
            None => {
                let reason = self
                    .zero
                    .evidence
                    .note
                    .clone()
                    .filter(|_| self.m0.is_none())
                    .or_else(|| self.infinity.evidence.note.clone())
                    .unwrap_or_else(|| "inconclusive".into());
                map.serialize_entry("inconclusive", &reason)?
            }
        }
        map.end()
    }
}

/// Index of one radial operator from its two endpoint counts.
pub fn numerical_harmonic_index(
    problem: &RadialProblem,
    settings: &OracleSettings,
) -> Result<(Option<u8>, EndpointReport, EndpointReport), WeylError> {
    let zero = count_l2_solutions_at_zero(problem, settings)?;
    let infinity = count_l2_solutions_at_infinity(problem, settings)?;
    let index = match (zero.l2_count, infinity.l2_count) {
        (Some(m0), Some(minf)) => Some(m0 + minf - 2),
        _ => None,
    };
    Ok((index, zero, infinity))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Agreement {
    Agree,
    Disagree,
    NotRun,
}

impl Agreement {
    pub fn is_disagreement(self) -> bool {
        self == Agreement::Disagree
    }
}

impl Serialize for Agreement {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            Agreement::Agree => serializer.serialize_bool(true),
            Agreement::Disagree => serializer.serialize_bool(false),
            Agreement::NotRun => serializer.serialize_str("not_run"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    pub id: String,
    pub sign: SpectralSign,
    pub harmonics: Vec<HarmonicOutcome>,
    /// Sum of per-harmonic indices; `None` if any harmonic is inconclusive.
    pub total: Option<u32>,
    pub closed_form: u8,
    pub agreement: Agreement,
}

impl OracleResult {
    pub fn is_inconclusive(&self) -> bool {
        self.total.is_none()
    }

    pub fn max_wronskian_drift(&self) -> Option<f64> {
        self.harmonics
            .iter()
            .filter_map(HarmonicOutcome::wronskian_drift)
            .fold(None, |acc, d| Some(acc.map_or(d, |a: f64| a.max(d))))
    }
}

impl Serialize for OracleResult {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(5))?;
        map.serialize_entry("id", &self.id)?;
        map.serialize_entry("lambda", &self.sign)?;
        map.serialize_entry("harmonics", &self.harmonics)?;
        match self.total {
            Some(t) => map.serialize_entry("total", &t)?,
            None => map.serialize_entry("total", "inconclusive")?,
        }
        map.serialize_entry("agreement", &self.agreement)?;
        map.end()
    }
}

/// Runs the oracle on every harmonic of the scan window of `s`.
pub fn numerical_singularity_index(
    s: &Singularity,
    sign: SpectralSign,
    settings: &OracleSettings,
    execution: Execution,
) -> Result<OracleResult, WeylError> {
    settings.validate()?;
    let couplings = scanned_couplings(s.alpha, s.p);
    let harmonics = map_ordered(&couplings, execution, |h| {
        let problem = RadialProblem::new(h.nu_squared, s.q, sign);
        numerical_harmonic_index(&problem, settings).map(|(index, zero, infinity)| {
            HarmonicOutcome {
                ell: h.ell,
                nu_squared: h.nu_squared,
                m0: zero.l2_count,
                minf: infinity.l2_count,
                index,
                zero,
                infinity,
            }
        })
    })
    .into_iter()
    .collect::<Result<Vec<_>, _>>()?;

    let total = harmonics
        .iter()
        .map(|h| h.index.map(u32::from))
        .sum::<Option<u32>>();
    let closed_form = singularity_index(s).index;
    let agreement = match total {
        Some(t) if t == u32::from(closed_form) => Agreement::Agree,
        Some(_) => Agreement::Disagree,
        None => Agreement::NotRun,
    };
    Ok(OracleResult {
        id: s.id.clone(),
        sign,
        harmonics,
        total,
        closed_form,
        agreement,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn harmonic(nu2: f64, q: f64) -> Option<u8> {
        numerical_harmonic_index(
            &RadialProblem::new(nu2, q, SpectralSign::Plus),
            &OracleSettings::default(),
        )
        .unwrap()
        .0
    }

    fn singular(alpha: f64, p: f64, q: f64) -> OracleResult {
        numerical_singularity_index(
            &Singularity::at_origin("s", alpha, p, q),
            SpectralSign::Plus,
            &OracleSettings::default(),
            Execution::Sequential,
        )
        .unwrap()
    }

    #[test]
    fn harmonic_examples() {
        assert_eq!(harmonic(0.25, 0.0), Some(1));
        assert_eq!(harmonic(1.44, 0.0), Some(0));
        assert_eq!(harmonic(0.5, 7.0), Some(1));
        assert_eq!(harmonic(1.004, 0.0), None);
    }

    #[test]
    fn singularity_examples() {
        let r = singular(0.5, 0.0, 0.0);
        assert_eq!((r.total, r.agreement), (Some(2), Agreement::Agree));
        let r = singular(0.5, 0.8, 0.0);
        assert_eq!((r.total, r.agreement), (Some(0), Agreement::Agree));
        let r = singular(0.0, 0.0, 0.0);
        assert_eq!((r.total, r.agreement), (Some(1), Agreement::Agree));
        let r = singular(0.2, 0.5, 1.0);
        assert_eq!((r.total, r.agreement), (Some(1), Agreement::Agree));
    }

    #[test]
    fn inconclusive_harmonic_propagates() {
        // ell = 0 has nu^2 = 0.25 + 0.753 = 1.003
        let r = singular(0.5, 0.753, 0.0);
        assert_eq!(r.total, None);
        assert_eq!(r.agreement, Agreement::NotRun);
        let json = serde_json::to_value(&r).unwrap();
        assert_eq!(json["total"], "inconclusive");
        assert_eq!(json["agreement"], "not_run");
        assert!(json["harmonics"]
            .as_array()
            .unwrap()
            .iter()
            .any(|h| h.get("inconclusive").is_some()));
    }

    #[test]
    fn wire_format() {
        let r = singular(0.5, 0.0, 0.0);
        let json = serde_json::to_value(&r).unwrap();
        assert_eq!(json["id"], "s");
        assert_eq!(json["lambda"], "+i");
        assert_eq!(json["total"], 2);
        assert_eq!(json["agreement"], true);
        let first = &json["harmonics"][0];
        assert_eq!(first["ell"], -3);
        assert_eq!(first["m0"], 1);
        assert_eq!(first["minf"], 1);
        assert_eq!(first["index"], 0);
    }
}
