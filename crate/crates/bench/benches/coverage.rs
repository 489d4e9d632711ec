use std::time::Duration;

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use std::hint::black_box;

use tiltcov_bench::{dense_mixture, sparse_ground, sparse_mixture, sweep_tolerances};
use tiltcov_core::{
    coverage_probability, estimate_coverage, inner_expectation, pgfl_exponent, McCampaign,
    QuadratureSpec,
};

fn bench_primitives(c: &mut Criterion) {
    let cfg = sparse_mixture();
    c.bench_function("vertical_gain", |b| {
        b.iter(|| black_box(cfg.pattern.vertical_gain(black_box(13.7))))
    });
    c.bench_function("inner_expectation_64_nodes", |b| {
        b.iter(|| {
            black_box(
                inner_expectation(&cfg, 30.5, black_box(600.0), 300.0, 1, 2.5119).unwrap(),
            )
        })
    });
    c.bench_function("pgfl_exponent", |b| {
        let quad = QuadratureSpec::default();
        b.iter(|| black_box(pgfl_exponent(&cfg, &quad, black_box(400.0), 1, 2.5119).unwrap()))
    });
}

fn bench_coverage(c: &mut Criterion) {
    let mut group = c.benchmark_group("coverage_probability");
    group.sample_size(10).measurement_time(Duration::from_secs(20));
    let quad = sweep_tolerances();
    group.bench_function("sparse_ground_atom", |b| {
        let cfg = sparse_ground();
        b.iter(|| black_box(coverage_probability(&cfg, &quad).unwrap().p_cov))
    });
    group.bench_function("sparse_full_mixture", |b| {
        let cfg = sparse_mixture();
        b.iter(|| black_box(coverage_probability(&cfg, &quad).unwrap().p_cov))
    });
    group.bench_function("dense_full_mixture", |b| {
        let cfg = dense_mixture();
        b.iter(|| black_box(coverage_probability(&cfg, &quad).unwrap().p_cov))
    });
    group.finish();
}

fn bench_monte_carlo(c: &mut Criterion) {
    let mut group = c.benchmark_group("monte_carlo");
    group.sample_size(10).measurement_time(Duration::from_secs(20));
    group.bench_function("estimate_10k_trials", |b| {
        let cfg = sparse_mixture();
        b.iter_batched(
            || McCampaign::new(10_000, 7),
            |campaign| black_box(estimate_coverage(&cfg, &campaign, &[4.0]).unwrap()),
            BatchSize::SmallInput,
        )
    });
    group.finish();
}

criterion_group!(benches, bench_primitives, bench_coverage, bench_monte_carlo);
criterion_main!(benches);
