//! Numerical deficiency-index oracle for the radial operators
//! `h = -d^2/dr^2 + (nu^2 - 1/4)/r^2 + q/r` on the half-line.
//!
//! For non-real `lambda` the index of `h` is `m0 + m_inf - 2`, where `m0` and
//! `m_inf` count the solutions of `h u = lambda u` that are square integrable
//! near `0` and near infinity. Both counts are obtained by integrating the
//! equation and classifying the behaviour of the solutions; the closed-form
//! rule in [`crate::calculus`] is never consulted except to report agreement.

mod endpoints;
mod frobenius;
mod oracle;

use std::fmt;

use num_complex::Complex64;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::odeflow::OdeError;

pub use endpoints::{
    count_l2_solutions_at_infinity, count_l2_solutions_at_zero, Basis, Endpoint, EndpointReport,
    Evidence, Verdict,
};
pub use frobenius::{
    estimate_exponent, frobenius_exponents, seed_solution_near_zero, ExponentFit,
    FrobeniusExponents, SERIES_TOLERANCE,
};
pub use oracle::{
    numerical_harmonic_index, numerical_singularity_index, Agreement, HarmonicOutcome,
    OracleResult,
};

/// Sign of the spectral parameter `lambda = +i` or `-i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SpectralSign {
    Plus,
    Minus,
}

impl SpectralSign {
    pub const BOTH: [SpectralSign; 2] = [SpectralSign::Plus, SpectralSign::Minus];

    pub fn lambda(self) -> Complex64 {
        match self {
            SpectralSign::Plus => Complex64::new(0.0, 1.0),
            SpectralSign::Minus => Complex64::new(0.0, -1.0),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            SpectralSign::Plus => "+i",
            SpectralSign::Minus => "-i",
        }
    }
}

impl fmt::Display for SpectralSign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl Serialize for SpectralSign {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.as_str())
    }
}

/// One angular harmonic's radial operator at a spectral parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RadialProblem {
    pub nu_squared: f64,
    pub q: f64,
    pub lambda: Complex64,
}

impl RadialProblem {
    pub fn new(nu_squared: f64, q: f64, sign: SpectralSign) -> Self {
        RadialProblem::with_lambda(nu_squared, q, sign.lambda())
    }

    pub fn with_lambda(nu_squared: f64, q: f64, lambda: Complex64) -> Self {
        RadialProblem {
            nu_squared,
            q,
            lambda,
        }
    }

    pub fn potential(&self, r: f64) -> f64 {
        (self.nu_squared - 0.25) / (r * r) + self.q / r
    }

    /// `c(r) = V(r) - lambda`, so that `h u = lambda u` reads `u'' = c u`.
    pub fn coefficient(&self, r: f64) -> Complex64 {
        Complex64::new(self.potential(r), 0.0) - self.lambda
    }

    pub fn exponents(&self) -> FrobeniusExponents {
        frobenius_exponents(self.nu_squared)
    }
}

/// Numerical knobs of the oracle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OracleSettings {
    pub rel_tol: f64,
    pub r_min: f64,
    pub r_mid: f64,
    pub r_max: f64,
    /// `|nu^2 - 1|` below this (but nonzero) is reported inconclusive.
    pub boundary_band: f64,
    /// Required clearance of an exponent estimate from `-1/2`.
    pub exponent_margin: f64,
    /// Decades above `r_min` used for the regressions at zero.
    pub fit_decades: f64,
    pub samples_per_decade: u32,
    /// Sample spacing on `[r_mid, r_max]`.
    pub far_spacing: f64,
}

impl Default for OracleSettings {
    fn default() -> Self {
        OracleSettings {
            rel_tol: 1e-10,
            r_min: 1e-8,
            r_mid: 1.0,
            r_max: 40.0,
            boundary_band: 1e-2,
            exponent_margin: 1e-3,
            fit_decades: 4.0,
            samples_per_decade: 32,
            far_spacing: 0.25,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WeylError {
    #[error("integration failed: {0}")]
    Integration(#[from] OdeError),
    #[error("{mu} is not a Frobenius exponent of this problem")]
    NotAnExponent { mu: f64 },
    #[error("Frobenius series did not converge at r0 = {r0}")]
    SeriesNotConverged { r0: f64 },
    #[error("Frobenius recurrence for mu = {mu} resonates at order {k} (logarithmic solution)")]
    LogarithmicResonance { mu: f64, k: usize },
    #[error("degenerate samples: {0}")]
    DegenerateSamples(String),
    #[error("invalid oracle settings: {0}")]
    InvalidSettings(String),
}

impl OracleSettings {
    pub fn validate(&self) -> Result<(), WeylError> {
        let bad = |m: &str| Err(WeylError::InvalidSettings(m.to_string()));
        if !(self.r_min > 0.0 && self.r_min < self.r_mid && self.r_mid < self.r_max) {
            return bad("need 0 < r_min < r_mid < r_max");
        }
        if self.r_max.is_infinite() {
            return bad("r_max must be finite");
        }
        if self.r_max - self.r_mid < 10.0 {
            return bad("r_max - r_mid must cover at least 10 length units");
        }
        if (self.r_mid / self.r_min).log10() < self.fit_decades + 1.0 || self.fit_decades < 3.0 {
            return bad("need fit_decades >= 3 and one spare decade below r_mid");
        }
        if !(self.boundary_band >= 0.0 && self.boundary_band < 1.0) {
            return bad("boundary band must lie in [0, 1)");
        }
        if !(self.exponent_margin > 0.0 && self.exponent_margin < 0.5) {
            return bad("exponent margin must lie in (0, 0.5)");
        }
        if !(self.far_spacing > 0.0) || self.samples_per_decade < 8 {
            return bad("sample spacing too coarse");
        }
        Ok(())
    }
}
