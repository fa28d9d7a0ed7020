use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use deficiency::model::{build_configuration, RawConfiguration};
use deficiency::sweep::{evaluate_grid, grid_points};
use deficiency::{total_index, IndexValue, OracleSettings, Singularity};
use deficiency::calculus::total_index_with;
use deficiency::Execution;

const MODES: [(&str, Execution); 2] = [
    ("sequential", Execution::Sequential),
    ("parallel", Execution::Parallel),
];

fn oracle_grid(c: &mut Criterion) {
    let mut group = c.benchmark_group("oracle_grid");
    group.sample_size(10);
    let settings = OracleSettings::default();
    for n in [4usize, 16] {
        let alphas: Vec<f64> = (0..n).map(|i| 0.05 + 0.9 * i as f64 / n as f64).collect();
        let points = grid_points(&alphas, &[0.0, 0.35], &[0.0, 2.0]);
        for (name, mode) in MODES {
            group.bench_with_input(BenchmarkId::new(name, points.len()), &points, |b, pts| {
                b.iter(|| black_box(evaluate_grid(pts, &settings, mode).unwrap()))
            });
        }
    }
    group.finish();
}

fn closed_form(c: &mut Criterion) {
    let mut group = c.benchmark_group("closed_form");
    for n in [100usize, 10_000] {
        let list: Vec<Singularity> = (0..n)
            .map(|i| {
                let t = i as f64;
                Singularity::new(format!("s{i}"), (t, 0.5 * t), 0.37 * t, (t * 0.1) % 1.3, 1.0)
            })
            .collect();
        let config =
            build_configuration(&RawConfiguration::from_singularities(IndexValue::Finite(0), &list))
                .unwrap();
        assert_eq!(total_index(&config).per_singularity.len(), n);
        for (name, mode) in MODES {
            group.bench_with_input(BenchmarkId::new(name, n), &config, |b, cfg| {
                b.iter(|| black_box(total_index_with(cfg, mode)))
            });
        }
    }
    group.finish();
}

criterion_group!(benches, oracle_grid, closed_form);
criterion_main!(benches);
