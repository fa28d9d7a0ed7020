use serde::Serialize;

use super::{OdeError, Trajectory};

/// Least-squares line `y = slope * x + intercept`; `residual` is the RMS
/// deviation per sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub residual: f64,
}

pub fn fit_line(xs: &[f64], ys: &[f64]) -> Option<LineFit> {
    let n = xs.len();
    if n < 2 || n != ys.len() {
        return None;
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    if sxx == 0.0 || !sxx.is_finite() {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| {
            let d = y - (slope * x + intercept);
            d * d
        })
        .sum();
    Some(LineFit {
        slope,
        intercept,
        residual: (ss / nf).sqrt(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum GrowthKind {
    Growing,
    Decaying,
    PowerLaw,
    Unresolved,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GrowthReport {
    pub kind: GrowthKind,
    /// Slope of `ln|u|` against `r`.
    pub rate: f64,
    /// Slope of `ln|u|` against `ln r`.
    pub exponent: f64,
    pub exp_residual: f64,
    pub power_residual: f64,
}

const MIN_SAMPLES: usize = 8;
const MIN_LENGTH: f64 = 10.0;
const MIN_DECADES: f64 = 3.0;
const RESIDUAL_SEPARATION: f64 = 0.10;
const FLAT_RATE: f64 = 1e-6;

/// Exponential versus power-law behaviour of `|u|` along a trajectory.
pub fn growth_monitor(traj: &Trajectory) -> Result<GrowthReport, OdeError> {
    let samples = traj.ascending();
    if samples.len() < MIN_SAMPLES {
        return Err(OdeError::DegenerateSamples(format!(
            "{} samples, need {MIN_SAMPLES}",
            samples.len()
        )));
    }
    let lo = samples[0].r;
    let hi = samples[samples.len() - 1].r;
    if hi - lo < MIN_LENGTH && (hi / lo).log10() < MIN_DECADES {
        return Err(OdeError::DegenerateSamples(format!(
            "range [{lo}, {hi}] spans neither {MIN_LENGTH} units nor {MIN_DECADES} decades"
        )));
    }
    let ln_u: Vec<f64> = samples.iter().map(|s| s.ln_abs_u()).collect();
    if ln_u.iter().any(|v| !v.is_finite()) {
        return Err(OdeError::DegenerateSamples("solution vanishes".into()));
    }
    let rs: Vec<f64> = samples.iter().map(|s| s.r).collect();
    let ln_r: Vec<f64> = rs.iter().map(|r| r.ln()).collect();
    let degenerate = || OdeError::DegenerateSamples("collinear abscissae".into());
    let exp_fit = fit_line(&rs, &ln_u).ok_or_else(degenerate)?;
    let pow_fit = fit_line(&ln_r, &ln_u).ok_or_else(degenerate)?;

    let (best, worst) = if exp_fit.residual <= pow_fit.residual {
        (exp_fit.residual, pow_fit.residual)
    } else {
        (pow_fit.residual, exp_fit.residual)
    };
    let kind = if worst == 0.0 || (worst - best) / worst < RESIDUAL_SEPARATION {
        GrowthKind::Unresolved
    } else if exp_fit.residual < pow_fit.residual {
        if exp_fit.slope > FLAT_RATE {
            GrowthKind::Growing
        } else if exp_fit.slope < -FLAT_RATE {
            GrowthKind::Decaying
        } else {
            GrowthKind::Unresolved
        }
    } else {
        GrowthKind::PowerLaw
    };
    Ok(GrowthReport {
        kind,
        rate: exp_fit.slope,
        exponent: pow_fit.slope,
        exp_residual: exp_fit.residual,
        power_residual: pow_fit.residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::odeflow::Sample;
    use num_complex::Complex64;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn traj(rs: impl Iterator<Item = f64>, u: impl Fn(f64) -> Complex64) -> Trajectory {
        Trajectory::from_samples(
            rs.map(|r| Sample {
                r,
                u: u(r),
                du: Complex64::new(0.0, 0.0),
                log_scale: 0.0,
            })
            .collect(),
        )
    }

    #[test]
    fn line_fit_is_exact_on_lines() {
        let xs: Vec<f64> = (0..10).map(f64::from).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 * x - 1.0).collect();
        let f = fit_line(&xs, &ys).unwrap();
        assert!((f.slope - 3.0).abs() < 1e-14 && (f.intercept + 1.0).abs() < 1e-13);
        assert!(f.residual < 1e-13);
        assert!(fit_line(&[1.0, 1.0], &[0.0, 1.0]).is_none());
    }

    #[test]
    fn exponential_growth_and_decay() {
        let phase = |r: f64| Complex64::from_polar(1.0, -r * FRAC_1_SQRT_2);
        let rs = || (0..=156).map(|j| 1.0 + 0.25 * f64::from(j));
        let up = growth_monitor(&traj(rs(), |r| phase(r) * (r * FRAC_1_SQRT_2).exp())).unwrap();
        assert_eq!(up.kind, GrowthKind::Growing);
        assert!((up.rate - FRAC_1_SQRT_2).abs() < 0.01);
        let down = growth_monitor(&traj(rs(), |r| (-r * FRAC_1_SQRT_2).exp().into())).unwrap();
        assert_eq!(down.kind, GrowthKind::Decaying);
        assert!((down.rate + FRAC_1_SQRT_2).abs() < 0.01);
    }

    #[test]
    fn power_law_near_zero() {
        let rs = (0..=128).map(|j| 10f64.powf(-6.0 + f64::from(j) / 32.0));
        let rep = growth_monitor(&traj(rs, |r| (r * r).into())).unwrap();
        assert_eq!(rep.kind, GrowthKind::PowerLaw);
        assert!((rep.exponent - 2.0).abs() < 0.01);
    }

    #[test]
    fn degenerate_inputs() {
        let few = traj((0..5).map(f64::from), |_| 1.0.into());
        assert!(matches!(growth_monitor(&few), Err(OdeError::DegenerateSamples(_))));
        let short = traj((0..20).map(|j| 1.0 + 0.1 * f64::from(j)), |_| 1.0.into());
        assert!(matches!(growth_monitor(&short), Err(OdeError::DegenerateSamples(_))));
    }
}
