//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::f64::consts::{E, PI};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};

use deficiency::calculus::{scanned_couplings, singularity_index, total_index, SingularityClass};
use deficiency::model::{build_configuration, Configuration, IndexValue, RawConfiguration, Singularity};
use deficiency::odeflow::{integrate, log_transform_integrate, LinearOde, State};
use deficiency::sweep::{evaluate_grid, GridPoint, GridRow, Outcome};
use deficiency::weyl::{
    estimate_exponent, seed_solution_near_zero, OracleSettings, RadialProblem, SpectralSign,
};
use deficiency::Execution;

type Verdict = Result<String, String>;

fn check(cond: bool, what: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(what())
    }
}

fn config(n0: IndexValue, list: &[Singularity]) -> Configuration {
    build_configuration(&RawConfiguration::from_singularities(n0, list)).expect("valid configuration")
}

/// Harmonic count straight from the definition, over a generous window.
fn brute_index(alpha: f64, p: f64) -> u64 {
    (-60i64..=60)
        .filter(|&l| {
            let a = if (alpha - alpha.round()).abs() <= 1e-12 {
                alpha.round()
            } else {
                alpha
            };
            (l as f64 + a).powi(2) + p < 1.0
        })
        .count() as u64
}

fn within(limit: Duration, start: Instant) -> Result<(), String> {
    let spent = start.elapsed();
    check(spent < limit, || format!("took {spent:?}, limit {limit:?}"))
}

fn pure_flux() -> Verdict {
    let start = Instant::now();
    for k in 1..=9 {
        let alpha = k as f64 / 10.0;
        let s = singularity_index(&Singularity::at_origin("a", alpha, 0.0, 0.0));
        check(s.index == 2, || format!("alpha = {alpha}: index {}", s.index))?;
        check(s.class == SingularityClass::J2, || format!("alpha = {alpha}: class {}", s.class))?;
    }
    let pair = config(
        IndexValue::Finite(0),
        &[
            Singularity::new("a", (0.0, 0.0), 0.5, 0.0, 0.0),
            Singularity::new("b", (1.0, 0.0), 0.5, 0.0, 0.0),
        ],
    );
    let total = total_index(&pair).total;
    check(total == IndexValue::Finite(4), || format!("two fluxes total {total}"))?;
    within(Duration::from_secs(1), start)?;
    Ok(format!("9 fractional fluxes give 2, pair totals 4 in {:?}", start.elapsed()))
}

fn point_interaction() -> Verdict {
    let start = Instant::now();
    for alpha in [-2.0, -1.0, 0.0, 1.0, 2.0] {
        let s = singularity_index(&Singularity::at_origin("z", alpha, 0.0, 0.0));
        check(s.index == 1, || format!("alpha = {alpha}: index {}", s.index))?;
        check(s.class == SingularityClass::PointInteraction, || {
            format!("alpha = {alpha}: class {}", s.class)
        })?;
    }
    within(Duration::from_secs(1), start)?;
    Ok(format!("5 integer fluxes give 1, POINT_INTERACTION in {:?}", start.elapsed()))
}

fn coulomb_independence() -> Verdict {
    let start = Instant::now();
    let mut cases = 0;
    for alpha in [0.3, 0.7] {
        for p in [0.0, 0.5, 1.2] {
            let qs: &[f64] = if p > 0.0 { &[-2.0, 0.0, 1.0, 7.0] } else { &[0.0, 1.0, 7.0] };
            let indices: Vec<u8> = qs
                .iter()
                .map(|&q| singularity_index(&Singularity::at_origin("c", alpha, p, q)).index)
                .collect();
            cases += indices.len();
            check(indices.iter().all(|&i| i == indices[0]), || {
                format!("alpha = {alpha}, p = {p}: indices {indices:?} over q = {qs:?}")
            })?;
            check(u64::from(indices[0]) == brute_index(alpha, p), || {
                format!("alpha = {alpha}, p = {p}: index {} vs direct count", indices[0])
            })?;
        }
    }
    within(Duration::from_secs(1), start)?;
    Ok(format!("{cases} cases constant in q in {:?}", start.elapsed()))
}

/// Grid points whose every scanned harmonic keeps `|nu^2 - 1| > 1e-2`.
fn agreement_grid() -> Vec<GridPoint> {
    let alphas = [-1.35, -0.6, 0.05, 0.15, 0.25, 0.35, 0.45, 0.55, 0.65, 0.75, 0.85, 0.95, 1.3, 2.7];
    let ps = [0.0, 0.1, 0.3, 0.6, 1.2, 2.5];
    let qs = [-2.0, 0.0, 1.0, 7.0];
    let mut points = Vec::new();
    for &alpha in &alphas {
        for &p in &ps {
            for &q in &qs {
                let point = GridPoint { alpha, p, q };
                let clear = scanned_couplings(alpha, p)
                    .iter()
                    .all(|h| (h.nu_squared - 1.0).abs() > 1e-2);
                if clear && !point.is_skipped() {
                    points.push(point);
                }
            }
        }
    }
    points
}

fn oracle_agreement(rows: &[GridRow], elapsed: Duration) -> Verdict {
    check(rows.len() >= 200, || format!("only {} grid points", rows.len()))?;
    let mut agree = 0;
    for row in rows {
        let p = row.point;
        match row.outcome() {
            Outcome::Agree => agree += 1,
            other => return Err(format!("({}, {}, {}): {other:?}", p.alpha, p.p, p.q)),
        }
    }
    check(elapsed < Duration::from_secs(300), || format!("took {elapsed:?}"))?;
    Ok(format!("{agree}/{} points agree, 0 inconclusive, in {elapsed:?}", rows.len()))
}

fn conjugation_symmetry(rows: &[GridRow]) -> Verdict {
    let mut harmonics = 0;
    for row in rows {
        let c = row.comparison.as_ref().ok_or("grid point without comparison")?;
        check(c.plus.total == c.minus.total, || {
            format!("({}, {}, {}): totals differ", row.point.alpha, row.point.p, row.point.q)
        })?;
        for (a, b) in c.plus.harmonics.iter().zip(&c.minus.harmonics) {
            harmonics += 1;
            check(
                a.ell == b.ell
                    && a.m0 == b.m0
                    && a.minf == b.minf
                    && a.index == b.index
                    && a.zero.verdict == b.zero.verdict
                    && a.infinity.verdict == b.infinity.verdict,
                || format!("({}, {}, {}), ell = {}: verdicts differ", row.point.alpha, row.point.p, row.point.q, a.ell),
            )?;
        }
    }
    Ok(format!("{harmonics} harmonic verdicts identical for +i and -i"))
}

fn random_singularity(rng: &mut StdRng, id: usize) -> Singularity {
    let alpha = if rng.gen_bool(0.15) {
        rng.gen_range(-3i32..=3) as f64
    } else {
        rng.gen_range(-3.0..3.0)
    };
    let p = if rng.gen_bool(0.3) { 0.0 } else { rng.gen_range(0.0..2.0) };
    let q = if p > 0.0 { rng.gen_range(-3.0..8.0) } else { rng.gen_range(0.0..8.0) };
    let position = (rng.gen_range(-10.0..10.0), rng.gen_range(-10.0..10.0));
    Singularity::new(format!("s{id}"), position, alpha, p, q)
}

fn summation() -> Verdict {
    let mut rng = StdRng::seed_from_u64(0x5eed_2024);
    for trial in 0..50 {
        let n = rng.gen_range(0..=8);
        let list: Vec<Singularity> = (0..n).map(|i| random_singularity(&mut rng, i)).collect();
        let n0 = if rng.gen_bool(0.1) {
            IndexValue::Infinite
        } else {
            IndexValue::Finite(rng.gen_range(0..5))
        };
        let report = total_index(&config(n0, &list));
        let expected = n0.plus(list.iter().map(|s| brute_index(s.alpha, s.p)).sum());
        check(report.total == expected, || {
            format!("trial {trial}: total {} expected {expected}", report.total)
        })?;

        let mut shuffled = list.clone();
        shuffled.shuffle(&mut rng);
        let theta = rng.gen_range(0.0..2.0 * PI);
        let shift = (rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0));
        let moved: Vec<Singularity> = shuffled
            .iter()
            .map(|s| {
                let (x, y) = s.position;
                let position = (
                    theta.cos() * x - theta.sin() * y + shift.0,
                    theta.sin() * x + theta.cos() * y + shift.1,
                );
                Singularity { position, ..s.clone() }
            })
            .collect();
        let other = total_index(&config(n0, &moved));
        check(other.total == report.total, || format!("trial {trial}: total changed under motion"))?;
        for entry in &report.per_singularity {
            let twin = other.per_singularity.iter().find(|e| e.id == entry.id);
            check(twin.map(|e| e.index) == Some(entry.index), || {
                format!("trial {trial}: index of {} changed", entry.id)
            })?;
        }
    }
    Ok("50 random configurations sum exactly, invariant under permutation and rigid motion".into())
}

fn planted_exponent(mu: f64) -> Result<f64, String> {
    let nu = (mu - 0.5).abs();
    let problem = RadialProblem::new(nu * nu, 0.0, SpectralSign::Plus);
    let ode = LinearOde::new(|r| problem.coefficient(r), 1e-9, 1.0).map_err(|e| e.to_string())?;
    let (r_lo, r_hi) = (1e-8, 1e-2);
    let traj = if mu < 0.5 {
        let seed = seed_solution_near_zero(&problem, mu, r_hi).map_err(|e| e.to_string())?;
        log_transform_integrate(&ode, r_hi, seed, r_lo, 1e-10)
    } else {
        let seed = seed_solution_near_zero(&problem, mu, r_lo).map_err(|e| e.to_string())?;
        log_transform_integrate(&ode, r_lo, seed, r_hi, 1e-10)
    }
    .map_err(|e| e.to_string())?;
    let points: Vec<(f64, f64)> = traj
        .window(r_lo, 1e-4)
        .iter()
        .map(|s| (s.r, s.ln_abs_u().exp()))
        .collect();
    estimate_exponent(&points).map(|f| f.mu_hat).map_err(|e| e.to_string())
}

fn kernel_fidelity(rows: &[GridRow]) -> Verdict {
    let mut worst_mu = 0.0f64;
    for mu in [-1.0, -0.5 + 0.02, 0.0, 0.5, 1.0, 2.0] {
        let hat = planted_exponent(mu)?;
        check((hat - mu).abs() < 0.05, || format!("planted {mu}, recovered {hat}"))?;
        worst_mu = worst_mu.max((hat - mu).abs());
    }

    let mut worst_drift = 0.0f64;
    for row in rows {
        if let Some(d) = row.comparison.as_ref().and_then(|c| c.max_wronskian_drift()) {
            worst_drift = worst_drift.max(d);
        }
    }
    check(worst_drift < 1e-8, || format!("Wronskian drift {worst_drift:e}"))?;

    let one = |_: f64| Complex64::new(1.0, 0.0);
    let ode = LinearOde::new(one, 0.05, 2.0).map_err(|e| e.to_string())?;
    let end = integrate(&ode, 0.1, State::new(1.0, 1.0), 1.1, 1e-10)
        .map_err(|e| e.to_string())?
        .last()
        .u;
    let e_err = ((end.re - E) / E).abs();
    check(e_err < 1e-10, || format!("exponential fixture error {e_err:e}"))?;

    let minus_one = |_: f64| Complex64::new(-1.0, 0.0);
    let ode = LinearOde::new(minus_one, 0.5, 10.0).map_err(|e| e.to_string())?;
    let end = integrate(&ode, 1.0, State::new(1.0, 0.0), 1.0 + PI, 1e-10)
        .map_err(|e| e.to_string())?
        .last()
        .u;
    let cos_err = (end.re + 1.0).abs();
    check(cos_err < 1e-10, || format!("cosine fixture error {cos_err:e}"))?;

    Ok(format!(
        "exponent error <= {worst_mu:.2e}, Wronskian drift <= {worst_drift:.2e}, e {e_err:.1e}, cos {cos_err:.1e}"
    ))
}

fn mixed_configuration() -> Verdict {
    let list = [
        Singularity::new("half", (0.0, 0.0), 0.5, 0.0, 0.0),
        Singularity::new("one", (2.0, 0.0), 1.0, 0.0, 0.0),
        Singularity::new("single", (0.0, 2.0), 0.2, 0.5, 0.0),
        Singularity::new("none", (2.0, 2.0), 0.5, 0.8, 0.0),
    ];
    let report = total_index(&config(IndexValue::Finite(3), &list));
    let indices: Vec<u8> = report.per_singularity.iter().map(|e| e.index).collect();
    check(indices == [2, 1, 1, 0], || format!("indices {indices:?}"))?;
    check(report.total == IndexValue::Finite(7), || format!("total {}", report.total))?;
    Ok("indices [2, 1, 1, 0], total 7".into())
}

fn main() -> ExitCode {
    let mut results: Vec<(u32, &str, Verdict)> = vec![
        (1, "pure flux", pure_flux()),
        (2, "point interaction", point_interaction()),
        (3, "Coulomb independence", coulomb_independence()),
    ];

    let points = agreement_grid();
    let start = Instant::now();
    let rows = evaluate_grid(&points, &OracleSettings::default(), Execution::Parallel);
    let elapsed = start.elapsed();
    match &rows {
        Ok(rows) => {
            results.push((4, "oracle agreement grid", oracle_agreement(rows, elapsed)));
            results.push((5, "conjugation symmetry", conjugation_symmetry(rows)));
        }
        Err(e) => {
            results.push((4, "oracle agreement grid", Err(format!("oracle failed: {e}"))));
            results.push((5, "conjugation symmetry", Err(format!("oracle failed: {e}"))));
        }
    }
    results.push((6, "summation", summation()));
    results.push((
        7,
        "numerical kernel",
        match &rows {
            Ok(rows) => kernel_fidelity(rows),
            Err(e) => Err(format!("oracle failed: {e}")),
        },
    ));
    results.push((8, "mixed configuration", mixed_configuration()));

    let mut failed = 0;
    for (n, name, verdict) in &results {
        match verdict {
            Ok(detail) => println!("criterion {n} PASS  {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("criterion {n} FAIL  {name}: {detail}");
            }
        }
    }
    println!("{} passed, {failed} failed", results.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
