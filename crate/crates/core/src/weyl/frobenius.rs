//! Local analysis at the regular singular point `r = 0`.

use num_complex::Complex64;
use serde::Serialize;

use super::{RadialProblem, WeylError};
use crate::odeflow::{fit_line, State};

/// Roots of `mu (mu - 1) = nu^2 - 1/4`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FrobeniusExponents {
    pub mu_plus: f64,
    pub mu_minus: f64,
    /// Repeated root; the second solution carries `ln r`.
    pub log_case: bool,
}

pub fn frobenius_exponents(nu_squared: f64) -> FrobeniusExponents {
    let nu = nu_squared.max(0.0).sqrt();
    FrobeniusExponents {
        mu_plus: 0.5 + nu,
        mu_minus: 0.5 - nu,
        log_case: nu_squared == 0.0,
    }
}

/// Stop once a term is this small relative to the partial sum.
pub const SERIES_TOLERANCE: f64 = 1e-10;
const MAX_TERMS: usize = 60;
// largest term over final sum beyond which cancellation has eaten the tolerance
const MAX_CANCELLATION: f64 = 1e4;

/// `u(r0), u'(r0)` of `u = r^mu (1 + c1 r + c2 r^2 + ...)`.
///
/// The coefficients obey `k (2 mu + k - 1) c_k = q c_{k-1} - lambda c_{k-2}`.
pub fn seed_solution_near_zero(
    problem: &RadialProblem,
    mu: f64,
    r0: f64,
) -> Result<State, WeylError> {
    let indicial = mu * (mu - 1.0) - (problem.nu_squared - 0.25);
    if indicial.abs() > 1e-9 * (1.0 + mu.abs()).powi(2) || !(r0 > 0.0) {
        return Err(WeylError::NotAnExponent { mu });
    }
    let q = Complex64::new(problem.q, 0.0);
    let lambda = problem.lambda;
    let zero = Complex64::new(0.0, 0.0);

    let (mut prev2, mut prev1) = (zero, Complex64::new(1.0, 0.0));
    let mut value = Complex64::new(1.0, 0.0);
    let mut slope = Complex64::new(mu, 0.0);
    let mut power = 1.0;
    let mut small_run = 0;
    let mut largest: f64 = 1.0;
    for k in 1..=MAX_TERMS {
        let kf = k as f64;
        let rhs = q * prev1 - lambda * prev2;
        let denom = kf * (2.0 * mu + kf - 1.0);
        let ck = if denom.abs() < 1e-12 {
            if rhs.norm() > 1e-14 * (prev1.norm() + prev2.norm()).max(1.0) {
                return Err(WeylError::LogarithmicResonance { mu, k });
            }
            zero
        } else {
            rhs / denom
        };
        power *= r0;
        let term = ck * power;
        value += term;
        slope += term * (mu + kf);
        largest = largest.max(term.norm());
        (prev2, prev1) = (prev1, ck);
        if term.norm() < SERIES_TOLERANCE * value.norm() {
            small_run += 1;
            // two consecutive small terms: odd coefficients vanish when q = 0
            if small_run >= 2 {
                if largest > MAX_CANCELLATION * value.norm() {
                    return Err(WeylError::SeriesNotConverged { r0 });
                }
                let scale = r0.powf(mu);
                return Ok(State::new(value * scale, slope * scale / r0));
            }
        } else {
            small_run = 0;
        }
    }
    Err(WeylError::SeriesNotConverged { r0 })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExponentFit {
    pub mu_hat: f64,
    pub residual: f64,
}

const MIN_POINTS: usize = 8;
const MIN_DECADES: f64 = 3.0;

/// Least-squares slope of `ln|u|` against `ln r`.
pub fn estimate_exponent(samples: &[(f64, f64)]) -> Result<ExponentFit, WeylError> {
    if samples.len() < MIN_POINTS {
        return Err(WeylError::DegenerateSamples(format!(
            "{} points, need {MIN_POINTS}",
            samples.len()
        )));
    }
    if samples.iter().any(|&(r, u)| !(r > 0.0 && u > 0.0 && u.is_finite())) {
        return Err(WeylError::DegenerateSamples(
            "radii and magnitudes must be positive".into(),
        ));
    }
    let (lo, hi) = samples
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), &(r, _)| (lo.min(r), hi.max(r)));
    if (hi / lo).log10() < MIN_DECADES - 1e-9 {
        return Err(WeylError::DegenerateSamples(format!(
            "samples span {:.2} decades, need {MIN_DECADES}",
            (hi / lo).log10()
        )));
    }
    let xs: Vec<f64> = samples.iter().map(|(r, _)| r.ln()).collect();
    let ys: Vec<f64> = samples.iter().map(|(_, u)| u.ln()).collect();
    let fit = fit_line(&xs, &ys)
        .ok_or_else(|| WeylError::DegenerateSamples("collinear radii".into()))?;
    Ok(ExponentFit {
        mu_hat: fit.slope,
        residual: fit.residual,
    })
}
