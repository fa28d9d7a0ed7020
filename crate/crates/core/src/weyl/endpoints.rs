//! Limit-point / limit-circle classification of the two endpoints.

use num_complex::Complex64;
use serde::Serialize;

use super::frobenius::{estimate_exponent, seed_solution_near_zero};
use super::{OracleSettings, RadialProblem, WeylError};
use crate::odeflow::{
    fit_line, growth_monitor, integrate_with, log_transform_integrate_with, GrowthKind,
    IntegrateOptions, LinearOde, SampleGrid, State, Trajectory,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Endpoint {
    Zero,
    Infinity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    LimitPoint,
    LimitCircle,
    Inconclusive,
}

/// What a verdict rests on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Basis {
    Analytic,
    BoundaryPolicy,
    Numerical,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Evidence {
    pub basis: Basis,
    pub note: Option<String>,
    /// Zero side: dominant exponents of the inward solutions, then the
    /// exponent of the Frobenius-seeded recessive solution.
    pub exponents: Vec<f64>,
    pub residuals: Vec<f64>,
    /// Decay exponent `2 mu + 1` of the decade integrals of `|u|^2`.
    pub integral_exponent: Option<f64>,
    /// Infinity side: `ln|u|` slopes of the outward and inward solutions.
    pub rates: Vec<f64>,
    pub wronskian_drift: Option<f64>,
    pub renormalized: bool,
}

impl Evidence {
    fn bare(basis: Basis, note: impl Into<String>) -> Self {
        Evidence {
            basis,
            note: Some(note.into()),
            exponents: Vec::new(),
            residuals: Vec::new(),
            integral_exponent: None,
            rates: Vec::new(),
            wronskian_drift: None,
            renormalized: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EndpointReport {
    pub endpoint: Endpoint,
    pub verdict: Verdict,
    /// Number of independent L² solutions near the endpoint; absent when
    /// inconclusive.
    pub l2_count: Option<u8>,
    pub evidence: Evidence,
}

impl EndpointReport {
    fn decided(endpoint: Endpoint, l2_count: u8, evidence: Evidence) -> Self {
        EndpointReport {
            endpoint,
            verdict: if l2_count == 2 {
                Verdict::LimitCircle
            } else {
                Verdict::LimitPoint
            },
            l2_count: Some(l2_count),
            evidence,
        }
    }

    fn inconclusive(endpoint: Endpoint, evidence: Evidence) -> Self {
        EndpointReport {
            endpoint,
            verdict: Verdict::Inconclusive,
            l2_count: None,
            evidence,
        }
    }
}

fn ode_for<'a>(
    problem: &'a RadialProblem,
    settings: &OracleSettings,
) -> Result<LinearOde<impl Fn(f64) -> Complex64 + 'a>, WeylError> {
    Ok(LinearOde::new(
        move |r| problem.coefficient(r),
        settings.r_min,
        settings.r_max,
    )?)
}

fn magnitudes(samples: &[crate::odeflow::Sample]) -> Vec<(f64, f64)> {
    // rescale by the largest log scale so renormalized stretches stay finite
    let top = samples
        .iter()
        .map(|s| s.log_scale)
        .fold(f64::NEG_INFINITY, f64::max);
    samples
        .iter()
        .map(|s| (s.r, s.u.norm() * (s.log_scale - top).exp()))
        .collect()
}

/// `2 mu + 1` from how the integrals of `|u|^2` over successive decades shrink
/// towards `r = 0`; positive means the integral converges.
fn decade_integral_exponent(samples: &[crate::odeflow::Sample], decades: usize) -> Option<f64> {
    let lo = samples.first()?.r;
    let mut centers = Vec::new();
    let mut logs = Vec::new();
    for k in 0..decades {
        let a = lo * 10f64.powi(k as i32);
        let b = a * 10.0;
        let slice: Vec<_> = samples
            .iter()
            .filter(|s| s.r >= a * (1.0 - 1e-12) && s.r <= b * (1.0 + 1e-12))
            .collect();
        if slice.len() < 3 {
            return None;
        }
        // integrand |u|^2 r in t = ln r, accumulated in log space
        let ln_f: Vec<f64> = slice
            .iter()
            .map(|s| 2.0 * s.ln_abs_u() + s.r.ln())
            .collect();
        let top = ln_f.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut acc = 0.0;
        for w in 0..slice.len() - 1 {
            let dt = slice[w + 1].r.ln() - slice[w].r.ln();
            acc += 0.5 * dt * ((ln_f[w] - top).exp() + (ln_f[w + 1] - top).exp());
        }
        centers.push((k as f64 + 0.5) * std::f64::consts::LN_10);
        logs.push(acc.ln() + top);
    }
    fit_line(&centers, &logs).map(|f| f.slope)
}

/// Counts solutions of `h u = lambda u` that are square integrable near `0`.
pub fn count_l2_solutions_at_zero(
    problem: &RadialProblem,
    settings: &OracleSettings,
) -> Result<EndpointReport, WeylError> {
    settings.validate()?;
    let nu2 = problem.nu_squared;
    if nu2 == 0.0 {
        return Ok(EndpointReport::decided(
            Endpoint::Zero,
            2,
            Evidence::bare(
                Basis::Analytic,
                "repeated exponent 1/2: r^{1/2} and r^{1/2} ln r are both square integrable",
            ),
        ));
    }
    if nu2 == 1.0 {
        return Ok(EndpointReport::decided(
            Endpoint::Zero,
            1,
            Evidence::bare(
                Basis::Analytic,
                "exponents 3/2 and -1/2: |r^{-1/2}|^2 = 1/r is not integrable at 0",
            ),
        ));
    }
    if (nu2 - 1.0).abs() < settings.boundary_band {
        return Ok(EndpointReport::inconclusive(
            Endpoint::Zero,
            Evidence::bare(
                Basis::BoundaryPolicy,
                format!(
                    "boundary-inconclusive: |nu^2 - 1| = {:.3e} inside band {:.1e}",
                    (nu2 - 1.0).abs(),
                    settings.boundary_band
                ),
            ),
        ));
    }

    let ode = ode_for(problem, settings)?;
    let options = IntegrateOptions::new(settings.rel_tol).with_grid(SampleGrid::Logarithmic {
        per_decade: settings.samples_per_decade,
    });
    let inward = [State::new(1.0, 0.0), State::new(0.0, 1.0)]
        .into_iter()
        .map(|s| log_transform_integrate_with(&ode, settings.r_mid, s, settings.r_min, &options))
        .collect::<Result<Vec<_>, _>>()?;
    let mu_plus = problem.exponents().mu_plus;
    let seed = seed_solution_near_zero(problem, mu_plus, settings.r_min)?;
    let recessive =
        log_transform_integrate_with(&ode, settings.r_min, seed, settings.r_mid, &options)?;

    let fit_hi = settings.r_min * 10f64.powf(settings.fit_decades);
    let fit = |t: &Trajectory| estimate_exponent(&magnitudes(&t.window(settings.r_min, fit_hi)));
    let inward_fits = inward.iter().map(fit).collect::<Result<Vec<_>, _>>()?;
    let recessive_fit = fit(&recessive)?;

    let dominant = if inward_fits[0].mu_hat <= inward_fits[1].mu_hat { 0 } else { 1 };
    let mu_dom = inward_fits[dominant].mu_hat;
    let integral_exponent = decade_integral_exponent(
        &inward[dominant].window(settings.r_min, fit_hi),
        settings.fit_decades.floor() as usize,
    );

    let margin = settings.exponent_margin;
    let exponent_vote = if mu_dom > -0.5 + margin {
        Some(true)
    } else if mu_dom < -0.5 - margin {
        Some(false)
    } else {
        None
    };
    let integral_vote = integral_exponent.and_then(|g| {
        if g > 2.0 * margin {
            Some(true)
        } else if g < -2.0 * margin {
            Some(false)
        } else {
            None
        }
    });
    let recessive_ok = recessive_fit.mu_hat > -0.5 + margin;

    let drift = inward
        .iter()
        .filter_map(|t| t.wronskian_drift(&recessive))
        .fold(None, |acc: Option<f64>, d| Some(acc.map_or(d, |a| a.max(d))));
    let mut evidence = Evidence {
        basis: Basis::Numerical,
        note: None,
        exponents: vec![inward_fits[0].mu_hat, inward_fits[1].mu_hat, recessive_fit.mu_hat],
        residuals: vec![
            inward_fits[0].residual,
            inward_fits[1].residual,
            recessive_fit.residual,
        ],
        integral_exponent,
        rates: Vec::new(),
        wronskian_drift: drift,
        renormalized: inward
            .iter()
            .chain(std::iter::once(&recessive))
            .any(|t| !t.renormalizations().is_empty()),
    };

    match (exponent_vote, integral_vote) {
        (Some(a), Some(b)) if a == b && recessive_ok => Ok(EndpointReport::decided(
            Endpoint::Zero,
            1 + u8::from(a),
            evidence,
        )),
        _ => {
            evidence.note = Some(if !recessive_ok {
                "recessive solution failed the L² test".into()
            } else {
                "exponent and integral criteria disagree or sit within the margin".into()
            });
            Ok(EndpointReport::inconclusive(Endpoint::Zero, evidence))
        }
    }
}

/// Minimum gap between the outward and inward growth rates.
const RATE_SEPARATION: f64 = 0.1;

/// Counts solutions of `h u = lambda u` that are square integrable near infinity.
pub fn count_l2_solutions_at_infinity(
    problem: &RadialProblem,
    settings: &OracleSettings,
) -> Result<EndpointReport, WeylError> {
    settings.validate()?;
    let ode = ode_for(problem, settings)?;
    let options = IntegrateOptions::new(settings.rel_tol).with_grid(SampleGrid::Uniform {
        spacing: settings.far_spacing,
    });
    // both seeds start with u != 0 so ln|u| is defined on the whole range
    let outward = [State::new(1.0, 0.0), State::new(1.0, 1.0)]
        .into_iter()
        .map(|s| integrate_with(&ode, settings.r_mid, s, settings.r_max, &options))
        .collect::<Result<Vec<_>, _>>()?;
    // WKB data of the branch that decays outward; integrating inward keeps it dominant
    let mut k = problem.coefficient(settings.r_max).sqrt();
    if k.re < 0.0 {
        k = -k;
    }
    let inward = integrate_with(
        &ode,
        settings.r_max,
        State::new(Complex64::new(1.0, 0.0), -k),
        settings.r_mid,
        &options,
    )?;

    let outward_growth = outward
        .iter()
        .map(growth_monitor)
        .collect::<Result<Vec<_>, _>>()?;
    let inward_growth = growth_monitor(&inward)?;
    let fastest = if outward_growth[0].rate >= outward_growth[1].rate { 0 } else { 1 };
    let growing = outward_growth[fastest];

    let mut evidence = Evidence {
        basis: Basis::Numerical,
        note: None,
        exponents: Vec::new(),
        residuals: vec![growing.exp_residual, inward_growth.exp_residual],
        integral_exponent: None,
        rates: vec![growing.rate, inward_growth.rate],
        wronskian_drift: outward[fastest].wronskian_drift(&inward),
        renormalized: outward
            .iter()
            .chain(std::iter::once(&inward))
            .any(|t| !t.renormalizations().is_empty()),
    };

    let decaying_count = [growing.kind, inward_growth.kind]
        .iter()
        .filter(|k| **k == GrowthKind::Decaying)
        .count() as u8;
    let resolved = [growing.kind, inward_growth.kind]
        .iter()
        .all(|k| matches!(k, GrowthKind::Growing | GrowthKind::Decaying));
    if !resolved || (growing.rate - inward_growth.rate).abs() < RATE_SEPARATION {
        evidence.note = Some("growth rates not distinguishable".into());
        return Ok(EndpointReport::inconclusive(Endpoint::Infinity, evidence));
    }
    if decaying_count == 0 {
        evidence.note = Some("no decaying direction found".into());
        return Ok(EndpointReport::inconclusive(Endpoint::Infinity, evidence));
    }
    Ok(EndpointReport::decided(
        Endpoint::Infinity,
        decaying_count,
        evidence,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weyl::SpectralSign;

    fn zero(nu2: f64, q: f64) -> EndpointReport {
        count_l2_solutions_at_zero(
            &RadialProblem::new(nu2, q, SpectralSign::Plus),
            &OracleSettings::default(),
        )
        .unwrap()
    }

    fn infinity(nu2: f64, q: f64, sign: SpectralSign) -> EndpointReport {
        count_l2_solutions_at_infinity(
            &RadialProblem::new(nu2, q, sign),
            &OracleSettings::default(),
        )
        .unwrap()
    }

    #[test]
    fn zero_side_examples() {
        let r = zero(0.25, 0.0);
        assert_eq!((r.verdict, r.l2_count), (Verdict::LimitCircle, Some(2)));
        assert_eq!(r.evidence.basis, Basis::Numerical);
        let r = zero(2.25, 0.0);
        assert_eq!((r.verdict, r.l2_count), (Verdict::LimitPoint, Some(1)));
        assert!((r.evidence.exponents[0].min(r.evidence.exponents[1]) + 1.0).abs() < 0.01);
        assert!((r.evidence.exponents[2] - 2.0).abs() < 0.01);
        let r = zero(0.0, 0.0);
        assert_eq!((r.verdict, r.l2_count), (Verdict::LimitCircle, Some(2)));
        assert_eq!(r.evidence.basis, Basis::Analytic);
    }

    #[test]
    fn near_boundary_outside_band_is_resolved() {
        let r = zero(1.0 + 1.1e-2, 3.0);
        assert_eq!(r.verdict, Verdict::LimitPoint, "{:?}", r.evidence);
        let r = zero(1.0 - 1.1e-2, -2.0);
        assert_eq!(r.verdict, Verdict::LimitCircle, "{:?}", r.evidence);
    }

    #[test]
    fn boundary_band_and_exact_boundary() {
        let r = zero(1.0 + 5e-3, 0.0);
        assert_eq!(r.verdict, Verdict::Inconclusive);
        assert_eq!(r.l2_count, None);
        assert_eq!(r.evidence.basis, Basis::BoundaryPolicy);
        let r = zero(1.0, 0.0);
        assert_eq!((r.verdict, r.l2_count), (Verdict::LimitPoint, Some(1)));
    }

    #[test]
    fn infinity_examples() {
        for (nu2, q, sign) in [
            (0.25, 0.0, SpectralSign::Plus),
            (0.25, 0.0, SpectralSign::Minus),
            (4.0, -1.0, SpectralSign::Plus),
        ] {
            let r = infinity(nu2, q, sign);
            assert_eq!((r.verdict, r.l2_count), (Verdict::LimitPoint, Some(1)));
            let rates = &r.evidence.rates;
            assert!((rates[0] - std::f64::consts::FRAC_1_SQRT_2).abs() < 0.05, "{rates:?}");
            assert!((rates[1] + std::f64::consts::FRAC_1_SQRT_2).abs() < 0.05, "{rates:?}");
        }
    }

    #[test]
    fn wronskians_are_tight() {
        for nu2 in [0.04, 0.25, 0.81, 1.44, 6.25] {
            let z = zero(nu2, 1.5);
            assert!(z.evidence.wronskian_drift.unwrap() < 1e-8, "{nu2}: {:?}", z.evidence);
            let i = infinity(nu2, 1.5, SpectralSign::Minus);
            assert!(i.evidence.wronskian_drift.unwrap() < 1e-8, "{nu2}: {:?}", i.evidence);
        }
    }

    #[test]
    fn long_range_triggers_renormalization() {
        let settings = OracleSettings {
            r_max: 400.0,
            ..OracleSettings::default()
        };
        let r = count_l2_solutions_at_infinity(
            &RadialProblem::new(0.25, 0.0, SpectralSign::Plus),
            &settings,
        )
        .unwrap();
        assert!(r.evidence.renormalized);
        assert_eq!(r.l2_count, Some(1));
    }
}
