use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use varwave::reconstruct::extract_level_curve;
use varwave::solution::{default_refine, domain_margin};
use varwave::{solve_domain, BoundaryCurve, Execution, InitialData, SolverConfig, WaveSpeed};

fn setup(h: f64, horizon: f64) -> (WaveSpeed, BoundaryCurve) {
    let ws = WaveSpeed::liquid_crystal(1.5, 0.5).unwrap();
    let data = InitialData::gaussian(1.0, 1.0, 0.0).unwrap();
    let curve = BoundaryCurve::build(&data, &ws, default_refine(&data, h), domain_margin(&ws, horizon, 0.5)).unwrap();
    (ws, curve)
}

fn lattice(c: &mut Criterion) {
    let mut group = c.benchmark_group("lattice");
    group.sample_size(10);
    for h in [0.04, 0.02] {
        let (ws, curve) = setup(h, 1.0);
        for (name, execution) in [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)] {
            let mut cfg = SolverConfig::new(h, 1.0);
            cfg.execution = execution;
            group.bench_with_input(BenchmarkId::new(name, h), &cfg, |b, cfg| {
                b.iter(|| solve_domain(black_box(&curve), cfg, &ws).unwrap())
            });
        }
    }
    group.finish();
}

fn level_curves(c: &mut Criterion) {
    let (ws, curve) = setup(0.02, 1.0);
    let grid = solve_domain(&curve, &SolverConfig::new(0.02, 1.0), &ws).unwrap();
    c.bench_function("level_curve_sweep", |b| {
        b.iter(|| {
            (0..=10)
                .map(|k| extract_level_curve(&grid, 0.1 * k as f64).unwrap().total())
                .sum::<f64>()
        })
    });
}

criterion_group!(benches, lattice, level_curves);
criterion_main!(benches);
