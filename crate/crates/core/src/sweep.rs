//! Closed form against oracle, over parameter grids and configurations.

use std::io::Write;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use crate::calculus::singularity_index;
use crate::model::Singularity;
use crate::parallel::{map_ordered, Execution};
use crate::weyl::{numerical_singularity_index, OracleResult, OracleSettings, SpectralSign, WeylError};

/// Exact CSV header of grid output.
pub const GRID_HEADER: [&str; 7] = [
    "alpha",
    "p",
    "q",
    "closed_form",
    "oracle_plus",
    "oracle_minus",
    "agree",
];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RangeError {
    #[error("empty range '{0}'")]
    Empty(String),
    #[error("step must be positive in '{0}'")]
    BadStep(String),
    #[error("cannot parse '{0}' as a number")]
    Number(String),
}

/// A list of parameter values: `start:stop:step` or `a,b,c`.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueRange(pub Vec<f64>);

fn snap(x: f64) -> f64 {
    let y = (x * 1e12).round() / 1e12;
    if y == 0.0 {
        0.0
    } else {
        y
    }
}

impl FromStr for ValueRange {
    type Err = RangeError;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let text = text.trim();
        let num = |s: &str| {
            s.trim()
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| RangeError::Number(s.trim().to_string()))
        };
        if text.is_empty() {
            return Err(RangeError::Empty(text.into()));
        }
        if text.contains(':') {
            let parts: Vec<&str> = text.split(':').collect();
            let [start, stop, step] = parts[..] else {
                return Err(RangeError::Number(text.into()));
            };
            let (start, stop, step) = (num(start)?, num(stop)?, num(step)?);
            if step <= 0.0 {
                return Err(RangeError::BadStep(text.into()));
            }
            if stop < start {
                return Err(RangeError::Empty(text.into()));
            }
            let n = ((stop - start) / step + 1e-9).floor() as usize + 1;
            Ok(ValueRange(
                (0..n).map(|i| snap(start + i as f64 * step)).collect(),
            ))
        } else {
            let values = text
                .split(',')
                .filter(|s| !s.trim().is_empty())
                .map(num)
                .collect::<Result<Vec<_>, _>>()?;
            if values.is_empty() {
                return Err(RangeError::Empty(text.into()));
            }
            Ok(ValueRange(values))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridPoint {
    pub alpha: f64,
    pub p: f64,
    pub q: f64,
}

impl GridPoint {
    /// Outside the supported family: attractive Coulomb without a barrier.
    pub fn is_skipped(&self) -> bool {
        self.p == 0.0 && self.q < 0.0
    }

    pub fn singularity(&self) -> Singularity {
        Singularity::at_origin("grid", self.alpha, self.p, self.q)
    }
}

/// Cartesian product in alpha-major, then p, then q order.
pub fn grid_points(alphas: &[f64], ps: &[f64], qs: &[f64]) -> Vec<GridPoint> {
    let mut out = Vec::with_capacity(alphas.len() * ps.len() * qs.len());
    for &alpha in alphas {
        for &p in ps {
            for &q in qs {
                out.push(GridPoint { alpha, p, q });
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Agree,
    Disagree,
    Inconclusive,
    Skipped,
}

/// Closed form and both oracle runs for one singularity.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Comparison {
    pub id: String,
    pub closed_form: u8,
    pub plus: OracleResult,
    pub minus: OracleResult,
}

impl Comparison {
    /// Disagreement: an oracle total differs from the closed form or the
    /// two signs differ. Inconclusive only when nothing disagrees.
    pub fn outcome(&self) -> Outcome {
        let cf = u32::from(self.closed_form);
        let totals = [self.plus.total, self.minus.total];
        let disagrees = totals.iter().flatten().any(|&t| t != cf)
            || matches!(totals, [Some(a), Some(b)] if a != b);
        if disagrees {
            Outcome::Disagree
        } else if totals.iter().any(Option::is_none) {
            Outcome::Inconclusive
        } else {
            Outcome::Agree
        }
    }

    pub fn max_wronskian_drift(&self) -> Option<f64> {
        match (self.plus.max_wronskian_drift(), self.minus.max_wronskian_drift()) {
            (Some(a), Some(b)) => Some(a.max(b)),
            (a, b) => a.or(b),
        }
    }
}

/// Runs the oracle for both signs of the spectral parameter.
pub fn compare_singularity(
    s: &Singularity,
    settings: &OracleSettings,
    execution: Execution,
) -> Result<Comparison, WeylError> {
    let run = |sign| numerical_singularity_index(s, sign, settings, execution);
    Ok(Comparison {
        id: s.id.clone(),
        closed_form: singularity_index(s).index,
        plus: run(SpectralSign::Plus)?,
        minus: run(SpectralSign::Minus)?,
    })
}

/// Compares every singularity of a list, preserving its order.
pub fn compare_all(
    list: &[Singularity],
    settings: &OracleSettings,
    execution: Execution,
) -> Result<Vec<Comparison>, WeylError> {
    map_ordered(list, execution, |s| {
        compare_singularity(s, settings, Execution::Sequential)
    })
    .into_iter()
    .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridRow {
    pub point: GridPoint,
    pub comparison: Option<Comparison>,
}

impl GridRow {
    pub fn outcome(&self) -> Outcome {
        self.comparison
            .as_ref()
            .map_or(Outcome::Skipped, Comparison::outcome)
    }

    fn record(&self) -> [String; 7] {
        let head = [
            self.point.alpha.to_string(),
            self.point.p.to_string(),
            self.point.q.to_string(),
        ];
        let total = |t: Option<u32>| t.map_or_else(|| "inconclusive".to_string(), |t| t.to_string());
        let tail = match &self.comparison {
            None => std::array::from_fn(|_| "SKIPPED".to_string()),
            Some(c) => [
                c.closed_form.to_string(),
                total(c.plus.total),
                total(c.minus.total),
                match c.outcome() {
                    Outcome::Agree => "true",
                    Outcome::Disagree => "false",
                    _ => "inconclusive",
                }
                .to_string(),
            ],
        };
        let [a, p, q] = head;
        let [cf, plus, minus, agree] = tail;
        [a, p, q, cf, plus, minus, agree]
    }
}

/// Evaluates every grid point; rows come back in input order regardless of
/// scheduling.
pub fn evaluate_grid(
    points: &[GridPoint],
    settings: &OracleSettings,
    execution: Execution,
) -> Result<Vec<GridRow>, WeylError> {
    map_ordered(points, execution, |point| {
        if point.is_skipped() {
            return Ok(GridRow {
                point: *point,
                comparison: None,
            });
        }
        compare_singularity(&point.singularity(), settings, Execution::Sequential).map(|c| {
            GridRow {
                point: *point,
                comparison: Some(c),
            }
        })
    })
    .into_iter()
    .collect()
}

pub fn write_grid_csv<W: Write>(rows: &[GridRow], writer: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(GRID_HEADER)?;
    for row in rows {
        w.write_record(row.record())?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct Tally {
    pub agree: usize,
    pub disagree: usize,
    pub inconclusive: usize,
    pub skipped: usize,
}

impl Tally {
    pub fn of(outcomes: impl IntoIterator<Item = Outcome>) -> Self {
        let mut t = Tally::default();
        for o in outcomes {
            match o {
                Outcome::Agree => t.agree += 1,
                Outcome::Disagree => t.disagree += 1,
                Outcome::Inconclusive => t.inconclusive += 1,
                Outcome::Skipped => t.skipped += 1,
            }
        }
        t
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges() {
        let r: ValueRange = "0.1:0.9:0.1".parse().unwrap();
        assert_eq!(r.0.len(), 9);
        assert_eq!(r.0[2], 0.3);
        assert_eq!(r.0[8], 0.9);
        let r: ValueRange = "0,0.5,1.5".parse().unwrap();
        assert_eq!(r.0, vec![0.0, 0.5, 1.5]);
        assert_eq!("-1".parse::<ValueRange>().unwrap().0, vec![-1.0]);
        assert!(matches!("".parse::<ValueRange>(), Err(RangeError::Empty(_))));
        assert!(matches!("1:0:0.1".parse::<ValueRange>(), Err(RangeError::Empty(_))));
        assert!(matches!("0:1:0".parse::<ValueRange>(), Err(RangeError::BadStep(_))));
        assert!(matches!("a,b".parse::<ValueRange>(), Err(RangeError::Number(_))));
    }

    #[test]
    fn skipped_rows_are_marked() {
        let points = grid_points(&[0.5], &[0.0, 0.5], &[-1.0]);
        let rows = evaluate_grid(&points, &OracleSettings::default(), Execution::Parallel).unwrap();
        assert_eq!(rows[0].outcome(), Outcome::Skipped);
        assert_eq!(rows[1].outcome(), Outcome::Agree);
        let mut buf = Vec::new();
        write_grid_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "alpha,p,q,closed_form,oracle_plus,oracle_minus,agree");
        assert_eq!(lines[1], "0.5,0,-1,SKIPPED,SKIPPED,SKIPPED,SKIPPED");
        assert_eq!(lines[2], "0.5,0.5,-1,2,2,2,true");
    }
}
