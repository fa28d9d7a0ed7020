//! Dormand–Prince 5(4) stepping for `y'' = g(x) y` with complex state,
//! PI step-size control, dense output and overflow renormalization.

use num_complex::Complex64;

use super::{OdeError, Renormalization, StepStats};

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

// fifth-order solution minus embedded fourth-order solution
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

// continuous extension
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

const SAFETY: f64 = 0.9;
const BETA: f64 = 0.04;
const EXPO: f64 = 0.2 - BETA * 0.75;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;

pub(crate) const RENORMALIZE_ABOVE: f64 = 1e100;
pub(crate) const MIN_STEP_FRACTION: f64 = 1e-14;

pub(crate) type Pair = [Complex64; 2];

#[derive(Debug, Clone, Copy)]
pub(crate) struct RawSample {
    pub x: f64,
    pub y: Pair,
    pub log_scale: f64,
}

pub(crate) struct RawRun {
    pub samples: Vec<RawSample>,
    pub renormalizations: Vec<Renormalization>,
    pub stats: StepStats,
}

#[inline]
fn rhs(g: &dyn Fn(f64) -> Complex64, x: f64, y: &Pair) -> Result<Pair, OdeError> {
    let c = g(x);
    if !(c.re.is_finite() && c.im.is_finite()) {
        return Err(OdeError::NonFinite { at: x });
    }
    Ok([y[1], c * y[0]])
}

#[inline]
fn combo(y: &Pair, h: f64, terms: &[(f64, &Pair)]) -> Pair {
    let mut out = *y;
    for (w, k) in terms {
        out[0] += k[0] * (h * w);
        out[1] += k[1] * (h * w);
    }
    out
}

#[inline]
fn norm(y: &Pair) -> f64 {
    y[0].norm().max(y[1].norm())
}

/// Integrates `y'' = g(x) y` from `x0` to `x1`, recording the state at every
/// point of `sample_xs` (ordered along the direction of integration).
pub(crate) fn drive(
    g: &dyn Fn(f64) -> Complex64,
    x0: f64,
    y0: Pair,
    x1: f64,
    rel_tol: f64,
    sample_xs: &[f64],
    renormalize: bool,
) -> Result<RawRun, OdeError> {
    let span = x1 - x0;
    let dir = span.signum();
    let min_step = MIN_STEP_FRACTION * span.abs();
    let mut stats = StepStats::default();
    let mut samples = Vec::with_capacity(sample_xs.len());
    let mut renormalizations = Vec::new();
    let mut log_scale = 0.0;

    let mut x = x0;
    let mut y = y0;
    let mut next_sample = 0;
    while next_sample < sample_xs.len() && (sample_xs[next_sample] - x0) * dir <= 0.0 {
        samples.push(RawSample { x: sample_xs[next_sample], y, log_scale });
        next_sample += 1;
    }
    if span == 0.0 {
        return Ok(RawRun { samples, renormalizations, stats });
    }

    let mut k1 = rhs(g, x, &y)?;
    stats.evaluations += 1;
    let mut h = {
        // crude first guess; the controller corrects it within a few steps
        let scale = norm(&y).max(f64::MIN_POSITIVE);
        let slope = norm(&k1).max(f64::MIN_POSITIVE);
        let guess = 0.01 * (scale / slope).max(1e-6 * span.abs());
        guess.min(span.abs() * 0.1) * dir
    };
    let mut fac_old: f64 = 1e-4;
    let mut last = false;

    loop {
        if (x + h - x1) * dir >= 0.0 {
            h = x1 - x;
            last = true;
        }
        if h.abs() < min_step {
            return Err(OdeError::StepCollapse { at: x, step: h.abs() });
        }

        let k2 = rhs(g, x + C2 * h, &combo(&y, h, &[(A21, &k1)]))?;
        let k3 = rhs(g, x + C3 * h, &combo(&y, h, &[(A31, &k1), (A32, &k2)]))?;
        let k4 = rhs(
            g,
            x + C4 * h,
            &combo(&y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]),
        )?;
        let k5 = rhs(
            g,
            x + C5 * h,
            &combo(&y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
        )?;
        let k6 = rhs(
            g,
            x + h,
            &combo(
                &y,
                h,
                &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
            ),
        )?;
        let y_new = combo(
            &y,
            h,
            &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)],
        );
        let x_new = if last { x1 } else { x + h };
        let k7 = rhs(g, x_new, &y_new)?;
        stats.evaluations += 6;

        let err_vec = combo(
            &[Complex64::new(0.0, 0.0); 2],
            h,
            &[(E1, &k1), (E3, &k3), (E4, &k4), (E5, &k5), (E6, &k6), (E7, &k7)],
        );
        let scale = rel_tol * norm(&y).max(norm(&y_new)).max(f64::MIN_POSITIVE);
        let err = norm(&err_vec) / scale;
        if !err.is_finite() {
            return Err(OdeError::NonFinite { at: x });
        }

        let fac11 = err.powf(EXPO);
        if err <= 1.0 {
            stats.accepted += 1;
            // dense output over (x, x_new]
            let rc1 = y;
            let rc2 = [y_new[0] - y[0], y_new[1] - y[1]];
            let rc3 = [k1[0] * h - rc2[0], k1[1] * h - rc2[1]];
            let rc4 = [
                rc2[0] - k7[0] * h - rc3[0],
                rc2[1] - k7[1] * h - rc3[1],
            ];
            let rc5 = combo(
                &[Complex64::new(0.0, 0.0); 2],
                h,
                &[(D1, &k1), (D3, &k3), (D4, &k4), (D5, &k5), (D6, &k6), (D7, &k7)],
            );
            while next_sample < sample_xs.len() {
                let xs = sample_xs[next_sample];
                if (xs - x_new) * dir > 0.0 {
                    break;
                }
                let value = if xs == x_new {
                    y_new
                } else {
                    let theta = (xs - x) / h;
                    let theta1 = 1.0 - theta;
                    let mut v = [Complex64::new(0.0, 0.0); 2];
                    for i in 0..2 {
                        v[i] = rc1[i]
                            + (rc2[i]
                                + (rc3[i] + (rc4[i] + rc5[i] * theta1) * theta) * theta1)
                                * theta;
                    }
                    v
                };
                samples.push(RawSample { x: xs, y: value, log_scale });
                next_sample += 1;
            }

            x = x_new;
            y = y_new;
            k1 = k7;
            if last {
                break;
            }

            let magnitude = y[0].norm();
            if renormalize && magnitude > RENORMALIZE_ABOVE {
                y = [y[0] / magnitude, y[1] / magnitude];
                k1 = [k1[0] / magnitude, k1[1] / magnitude];
                log_scale += magnitude.ln();
                renormalizations.push(Renormalization { r: x, factor: magnitude });
            }

            let fac = (fac11 / fac_old.powf(BETA) / SAFETY).clamp(1.0 / FAC_MAX, 1.0 / FAC_MIN);
            fac_old = err.max(1e-4);
            h /= fac;
        } else {
            stats.rejected += 1;
            last = false;
            h /= (fac11 / SAFETY).min(1.0 / FAC_MIN);
        }
    }

    Ok(RawRun { samples, renormalizations, stats })
}
