//! Closed-form deficiency-index calculus.
//!
//! Each flux point decouples into radial operators indexed by the angular
//! harmonic `ell`. A harmonic contributes one to the index exactly when its
//! coupling `nu^2 = (ell + alpha)^2 + p` lies in `[0, 1)`, independently of
//! the Coulomb strength. Per-singularity indices then add up, on top of the
//! background index, to the index of the full operator.

use std::fmt;
use std::ops::RangeInclusive;

use serde::Serialize;

use crate::model::{Configuration, IndexValue, Singularity};
use crate::parallel::{map_ordered, Execution};

/// Fractional parts this close to 0 or 1 are treated as integer flux.
pub const INTEGER_FLUX_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReducedFlux {
    /// `alpha - floor(alpha)`, in `[0, 1)`; snapped to 0 for integer flux.
    pub fractional: f64,
    pub is_integer: bool,
}

pub fn reduced_flux(alpha: f64) -> ReducedFlux {
    let fractional = alpha - alpha.floor();
    if fractional.abs() <= INTEGER_FLUX_TOLERANCE
        || (fractional - 1.0).abs() <= INTEGER_FLUX_TOLERANCE
    {
        ReducedFlux {
            fractional: 0.0,
            is_integer: true,
        }
    } else {
        ReducedFlux {
            fractional,
            is_integer: false,
        }
    }
}

/// Flux value the harmonic couplings are computed from: integer fluxes are
/// rounded so that near-integer input cannot leak a spurious harmonic.
pub fn effective_flux(alpha: f64) -> f64 {
    if reduced_flux(alpha).is_integer {
        alpha.round()
    } else {
        alpha
    }
}

/// `(ell + alpha)^2 + p`.
pub fn radial_coupling(ell: i64, alpha: f64, p: f64) -> f64 {
    let shifted = ell as f64 + alpha;
    shifted * shifted + p
}

/// One harmonic's contribution. The Coulomb strength is accepted and ignored.
pub fn classify_harmonic(nu_squared: f64, _q: f64) -> u8 {
    u8::from(nu_squared < 1.0)
}

/// Harmonics worth scanning for a flux `alpha`.
///
/// Outside `[ceil(-alpha-1), floor(-alpha+1)]` one has `|ell + alpha| >= 1`;
/// the window is widened by two on each side.
pub fn harmonic_window(alpha: f64) -> RangeInclusive<i64> {
    let alpha = effective_flux(alpha);
    let lo = (-alpha - 1.0).ceil() as i64 - 2;
    let hi = (-alpha + 1.0).floor() as i64 + 2;
    lo..=hi
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HarmonicCoupling {
    pub ell: i64,
    pub nu_squared: f64,
}

impl HarmonicCoupling {
    pub fn new(ell: i64, alpha: f64, p: f64) -> Self {
        HarmonicCoupling {
            ell,
            nu_squared: radial_coupling(ell, effective_flux(alpha), p),
        }
    }
}

/// Couplings of every harmonic in the scan window.
pub fn scanned_couplings(alpha: f64, p: f64) -> Vec<HarmonicCoupling> {
    harmonic_window(alpha)
        .map(|ell| HarmonicCoupling::new(ell, alpha, p))
        .collect()
}

/// Integers `ell` with `(ell + alpha)^2 + p < 1`, ascending.
pub fn contributing_harmonics(alpha: f64, p: f64) -> Vec<i64> {
    scanned_couplings(alpha, p)
        .into_iter()
        .filter(|h| classify_harmonic(h.nu_squared, 0.0) == 1)
        .map(|h| h.ell)
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum SingularityClass {
    J2,
    J1,
    Y,
    #[serde(rename = "POINT_INTERACTION")]
    PointInteraction,
}

impl SingularityClass {
    pub fn index(self) -> u8 {
        match self {
            SingularityClass::J2 => 2,
            SingularityClass::J1 | SingularityClass::PointInteraction => 1,
            SingularityClass::Y => 0,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            SingularityClass::J2 => "J2",
            SingularityClass::J1 => "J1",
            SingularityClass::Y => "Y",
            SingularityClass::PointInteraction => "POINT_INTERACTION",
        }
    }
}

impl fmt::Display for SingularityClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Set membership from the two nearest shifted fluxes `f` and `f - 1`.
pub fn classify_singularity(alpha: f64, p: f64) -> SingularityClass {
    let reduced = reduced_flux(alpha);
    if reduced.is_integer && p == 0.0 {
        return SingularityClass::PointInteraction;
    }
    let near = reduced.fractional * reduced.fractional;
    let far = (reduced.fractional - 1.0) * (reduced.fractional - 1.0);
    let (lo, hi) = if near <= far { (near, far) } else { (far, near) };
    if hi + p < 1.0 {
        SingularityClass::J2
    } else if lo + p < 1.0 {
        SingularityClass::J1
    } else {
        SingularityClass::Y
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SingularityIndex {
    pub index: u8,
    pub class: SingularityClass,
    pub harmonics: Vec<i64>,
}

/// Index, class and contributing harmonics of a single flux point.
pub fn singularity_index(s: &Singularity) -> SingularityIndex {
    let harmonics = contributing_harmonics(s.alpha, s.p);
    let class = classify_singularity(s.alpha, s.p);
    debug_assert_eq!(
        usize::from(class.index()),
        harmonics.len(),
        "class {class} disagrees with harmonics {harmonics:?} for alpha = {}, p = {}",
        s.alpha,
        s.p
    );
    SingularityIndex {
        index: harmonics.len() as u8,
        class,
        harmonics,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SingularityEntry {
    pub id: String,
    pub index: u8,
    pub class: SingularityClass,
    pub harmonics: Vec<i64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DeficiencyReport {
    pub total: IndexValue,
    pub background_index: IndexValue,
    pub per_singularity: Vec<SingularityEntry>,
    pub nplus_equals_nminus: bool,
}

impl DeficiencyReport {
    pub fn singular_sum(&self) -> u64 {
        self.per_singularity.iter().map(|e| u64::from(e.index)).sum()
    }
}

/// Background index plus the sum of per-singularity indices.
pub fn total_index(config: &Configuration) -> DeficiencyReport {
    total_index_with(config, Execution::default())
}

pub fn total_index_with(config: &Configuration, execution: Execution) -> DeficiencyReport {
    let per_singularity = map_ordered(config.singularities(), execution, |s| {
        let SingularityIndex {
            index,
            class,
            harmonics,
        } = singularity_index(s);
        SingularityEntry {
            id: s.id.clone(),
            index,
            class,
            harmonics,
        }
    });
    let sum: u64 = per_singularity.iter().map(|e| u64::from(e.index)).sum();
    DeficiencyReport {
        total: config.background_index().plus(sum),
        background_index: config.background_index(),
        per_singularity,
        // the construction is symmetric in the sign of the spectral parameter
        nplus_equals_nminus: true,
    }
}
