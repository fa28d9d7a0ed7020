//! Complex linear second-order ODE integration: `u'' = c(r) u`.
//!
//! Two drivers share one adaptive Dormand–Prince 5(4) engine:
//!
//! * [`integrate`] steps directly in `r`;
//! * [`log_transform_integrate`] steps in `t = ln r` on the Liouville form
//!   `y'' = (1/4 + r^2 c(r)) y`, `u = r^{1/2} y`, which turns an inverse-square
//!   coefficient into a bounded one and makes `r -> 0` cheap.
//!
//! Trajectories are sampled on a fixed lattice (logarithmic or uniform) that
//! depends only on the covered range, so two runs over the same range can be
//! compared point by point, e.g. for Wronskians.

mod dopri;
mod growth;

use std::io::Write;

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

pub use growth::{fit_line, growth_monitor, GrowthKind, GrowthReport, LineFit};

use dopri::{drive, RawRun};

pub const DEFAULT_SAMPLES_PER_DECADE: u32 = 32;
const MIN_REL_TOL: f64 = 1e-13;
const MAX_REL_TOL: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OdeError {
    #[error("step size collapsed to {step:e} at r = {at}")]
    StepCollapse { at: f64, step: f64 },
    #[error("r = {r} lies outside the domain ({a}, {b})")]
    DomainViolation { r: f64, a: f64, b: f64 },
    #[error("relative tolerance {0:e} outside [1e-13, 1e-3]")]
    InvalidTolerance(f64),
    #[error("non-finite value encountered at {at}")]
    NonFinite { at: f64 },
    #[error("degenerate samples: {0}")]
    DegenerateSamples(String),
}

/// `u'' = c(r) u` on `(a, b)`, `0 < a < b`.
pub struct LinearOde<F> {
    coefficient: F,
    domain: (f64, f64),
}

impl<F: Fn(f64) -> Complex64> LinearOde<F> {
    pub fn new(coefficient: F, a: f64, b: f64) -> Result<Self, OdeError> {
        if !(a > 0.0 && b > a && b.is_finite()) {
            return Err(OdeError::DomainViolation { r: a, a, b });
        }
        Ok(LinearOde {
            coefficient,
            domain: (a, b),
        })
    }

    pub fn coefficient(&self, r: f64) -> Complex64 {
        (self.coefficient)(r)
    }

    pub fn domain(&self) -> (f64, f64) {
        self.domain
    }

    fn check(&self, r: f64) -> Result<(), OdeError> {
        let (a, b) = self.domain;
        if r.is_finite() && r >= a && r <= b {
            Ok(())
        } else {
            Err(OdeError::DomainViolation { r, a, b })
        }
    }
}

/// `(u, u')`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct State {
    pub u: Complex64,
    pub du: Complex64,
}

impl State {
    pub fn new(u: impl Into<Complex64>, du: impl Into<Complex64>) -> Self {
        State {
            u: u.into(),
            du: du.into(),
        }
    }

    pub fn scaled(self, a: Complex64) -> State {
        State {
            u: self.u * a,
            du: self.du * a,
        }
    }

    pub fn plus(self, other: State) -> State {
        State {
            u: self.u + other.u,
            du: self.du + other.du,
        }
    }
}

/// A recorded point; the true solution is `(u, du) * exp(log_scale)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Sample {
    pub r: f64,
    pub u: Complex64,
    pub du: Complex64,
    pub log_scale: f64,
}

impl Sample {
    pub fn ln_abs_u(&self) -> f64 {
        self.u.norm().ln() + self.log_scale
    }

    /// The unscaled state; may overflow if renormalization was heavy.
    pub fn state(&self) -> State {
        let s = self.log_scale.exp();
        State {
            u: self.u * s,
            du: self.du * s,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Renormalization {
    pub r: f64,
    pub factor: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct StepStats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    samples: Vec<Sample>,
    renormalizations: Vec<Renormalization>,
    stats: StepStats,
}

impl Trajectory {
    /// Wraps externally produced samples, sorted by `r` in either direction.
    pub fn from_samples(samples: Vec<Sample>) -> Self {
        Trajectory {
            samples,
            renormalizations: Vec::new(),
            stats: StepStats::default(),
        }
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn renormalizations(&self) -> &[Renormalization] {
        &self.renormalizations
    }

    pub fn stats(&self) -> StepStats {
        self.stats
    }

    pub fn last(&self) -> &Sample {
        self.samples.last().expect("trajectories hold at least one sample")
    }

    /// Samples sorted by increasing `r`.
    pub fn ascending(&self) -> Vec<Sample> {
        let mut out = self.samples.clone();
        if out.len() > 1 && out[0].r > out[out.len() - 1].r {
            out.reverse();
        }
        out
    }

    /// Samples with `lo <= r <= hi`, ascending.
    pub fn window(&self, lo: f64, hi: f64) -> Vec<Sample> {
        self.ascending()
            .into_iter()
            .filter(|s| s.r >= lo && s.r <= hi)
            .collect()
    }

    /// `u1 u2' - u2 u1'` at every radius the two trajectories share.
    pub fn wronskian_with(&self, other: &Trajectory) -> Vec<(f64, Complex64)> {
        let a = self.ascending();
        let b = other.ascending();
        let (mut i, mut j) = (0, 0);
        let mut out = Vec::new();
        while i < a.len() && j < b.len() {
            if a[i].r < b[j].r {
                i += 1;
            } else if b[j].r < a[i].r {
                j += 1;
            } else {
                let (sa, sb) = (&a[i], &b[j]);
                let w = (sa.u * sb.du - sb.u * sa.du) * (sa.log_scale + sb.log_scale).exp();
                out.push((sa.r, w));
                i += 1;
                j += 1;
            }
        }
        out
    }

    /// Largest `|W(r) - W(r_ref)| / |W(r_ref)|` over shared radii, with the
    /// reference taken where `|W|` is largest.
    pub fn wronskian_drift(&self, other: &Trajectory) -> Option<f64> {
        let w = self.wronskian_with(other);
        let reference = w
            .iter()
            .map(|(_, v)| *v)
            .max_by(|x, y| x.norm().total_cmp(&y.norm()))?;
        if reference.norm() == 0.0 {
            return None;
        }
        w.iter()
            .map(|(_, v)| (v - reference).norm() / reference.norm())
            .max_by(f64::total_cmp)
    }

    /// CSV with columns `r,re_u,im_u,re_du,im_du,scale_exponent`, where
    /// `scale_exponent` is the base-10 exponent of the removed scale factor.
    pub fn write_csv<W: Write>(&self, writer: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["r", "re_u", "im_u", "re_du", "im_du", "scale_exponent"])?;
        for s in &self.samples {
            w.write_record(&[
                s.r.to_string(),
                s.u.re.to_string(),
                s.u.im.to_string(),
                s.du.re.to_string(),
                s.du.im.to_string(),
                (s.log_scale / std::f64::consts::LN_10).to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Where samples are recorded.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SampleGrid {
    /// `r = 10^(j / per_decade)`.
    Logarithmic { per_decade: u32 },
    /// `r = j * spacing`.
    Uniform { spacing: f64 },
}

impl Default for SampleGrid {
    fn default() -> Self {
        SampleGrid::Logarithmic {
            per_decade: DEFAULT_SAMPLES_PER_DECADE,
        }
    }
}

impl SampleGrid {
    /// Lattice points between `from` and `to` (inclusive of both endpoints),
    /// ordered from `from` towards `to`.
    pub fn points(&self, from: f64, to: f64) -> Vec<f64> {
        let (lo, hi) = if from <= to { (from, to) } else { (to, from) };
        let near_end = |x: f64| ((x - lo) / lo).abs() < 1e-9 || ((x - hi) / hi).abs() < 1e-9;
        let mut pts = vec![lo];
        match *self {
            SampleGrid::Logarithmic { per_decade } => {
                let n = f64::from(per_decade.max(1));
                let j0 = (lo.log10() * n).ceil() as i64;
                let j1 = (hi.log10() * n).floor() as i64;
                pts.extend(
                    (j0..=j1)
                        .map(|j| 10f64.powf(j as f64 / n))
                        .filter(|&x| x > lo && x < hi && !near_end(x)),
                );
            }
            SampleGrid::Uniform { spacing } => {
                let j0 = (lo / spacing).ceil() as i64;
                let j1 = (hi / spacing).floor() as i64;
                pts.extend(
                    (j0..=j1)
                        .map(|j| j as f64 * spacing)
                        .filter(|&x| x > lo && x < hi && !near_end(x)),
                );
            }
        }
        if hi > lo {
            pts.push(hi);
        }
        if from > to {
            pts.reverse();
        }
        pts
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrateOptions {
    pub rel_tol: f64,
    pub grid: SampleGrid,
    /// Rescale `(u, u')` whenever `|u|` exceeds 1e100.
    pub renormalize: bool,
}

impl IntegrateOptions {
    pub fn new(rel_tol: f64) -> Self {
        IntegrateOptions {
            rel_tol,
            grid: SampleGrid::default(),
            renormalize: true,
        }
    }

    pub fn with_grid(mut self, grid: SampleGrid) -> Self {
        self.grid = grid;
        self
    }

    fn check(&self) -> Result<(), OdeError> {
        if (MIN_REL_TOL..=MAX_REL_TOL).contains(&self.rel_tol) {
            Ok(())
        } else {
            Err(OdeError::InvalidTolerance(self.rel_tol))
        }
    }
}

fn assemble(run: RawRun, to_sample: impl Fn(f64, [Complex64; 2], f64) -> Sample) -> Trajectory {
    Trajectory {
        samples: run
            .samples
            .into_iter()
            .map(|s| to_sample(s.x, s.y, s.log_scale))
            .collect(),
        renormalizations: run.renormalizations,
        stats: run.stats,
    }
}

/// Direct integration in `r`, sampled on the default logarithmic lattice.
pub fn integrate<F: Fn(f64) -> Complex64>(
    ode: &LinearOde<F>,
    from: f64,
    state: State,
    to: f64,
    rel_tol: f64,
) -> Result<Trajectory, OdeError> {
    integrate_with(ode, from, state, to, &IntegrateOptions::new(rel_tol))
}

pub fn integrate_with<F: Fn(f64) -> Complex64>(
    ode: &LinearOde<F>,
    from: f64,
    state: State,
    to: f64,
    options: &IntegrateOptions,
) -> Result<Trajectory, OdeError> {
    options.check()?;
    ode.check(from)?;
    ode.check(to)?;
    let xs = options.grid.points(from, to);
    let g = |r: f64| ode.coefficient(r);
    let run = drive(
        &g,
        from,
        [state.u, state.du],
        to,
        options.rel_tol,
        &xs,
        options.renormalize,
    )?;
    Ok(assemble(run, |r, y, log_scale| Sample {
        r,
        u: y[0],
        du: y[1],
        log_scale,
    }))
}

/// Integration in `t = ln r` on the Liouville-transformed equation.
///
/// Works in either direction; samples are placed on the logarithmic lattice
/// and reported in the original `(u, u')` variables.
pub fn log_transform_integrate<F: Fn(f64) -> Complex64>(
    ode: &LinearOde<F>,
    from: f64,
    state: State,
    to: f64,
    rel_tol: f64,
) -> Result<Trajectory, OdeError> {
    log_transform_integrate_with(ode, from, state, to, &IntegrateOptions::new(rel_tol))
}

pub fn log_transform_integrate_with<F: Fn(f64) -> Complex64>(
    ode: &LinearOde<F>,
    from: f64,
    state: State,
    to: f64,
    options: &IntegrateOptions,
) -> Result<Trajectory, OdeError> {
    options.check()?;
    ode.check(from)?;
    ode.check(to)?;
    let grid = match options.grid {
        g @ SampleGrid::Logarithmic { .. } => g,
        SampleGrid::Uniform { .. } => SampleGrid::default(),
    };
    let ts: Vec<f64> = grid.points(from, to).into_iter().map(f64::ln).collect();
    let g = |t: f64| {
        let r = t.exp();
        Complex64::new(0.25, 0.0) + ode.coefficient(r) * (r * r)
    };
    // y = u r^{-1/2}, y_t = u' r^{1/2} - y/2
    let sqrt_r = from.sqrt();
    let y0 = state.u / sqrt_r;
    let yt0 = state.du * sqrt_r - y0 * 0.5;
    let run = drive(
        &g,
        from.ln(),
        [y0, yt0],
        to.ln(),
        options.rel_tol,
        &ts,
        options.renormalize,
    )?;
    let lattice = grid.points(from, to);
    let mut run = run;
    for (s, &r) in run.samples.iter_mut().zip(&lattice) {
        // report the exact lattice radius rather than exp(ln r)
        s.x = r;
    }
    Ok(assemble(run, |r, y, log_scale| {
        let sqrt_r = r.sqrt();
        Sample {
            r,
            u: y[0] * sqrt_r,
            du: (y[1] + y[0] * 0.5) / sqrt_r,
            log_scale,
        }
    }))
}
