use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use vrpca_core::data::sparse_random;
use vrpca_core::solvers::sampler::solver_rng;
use vrpca_core::solvers::{vrpca_epoch, EpochKernel};
use vrpca_core::{covariance_apply, random_init, synth_generate, SolverConfig, SpectrumSpec};

fn covariance(c: &mut Criterion) {
    let dense = synth_generate(&SpectrumSpec::desk(0.1, 1)).unwrap();
    let sparse = sparse_random(5000, 2000, 0.01, 1).unwrap();
    let mut group = c.benchmark_group("covariance_apply");
    for k in [1, 4] {
        let b = random_init(dense.dim(), k, 1).unwrap();
        group.bench_with_input(BenchmarkId::new("dense_100x1000", k), &b, |bench, b| {
            bench.iter(|| covariance_apply(black_box(&dense), b.block()).unwrap())
        });
        let b = random_init(sparse.dim(), k, 1).unwrap();
        group.bench_with_input(BenchmarkId::new("sparse_5000x2000_1pct", k), &b, |bench, b| {
            bench.iter(|| covariance_apply(black_box(&sparse), b.block()).unwrap())
        });
    }
    group.finish();
}

fn epoch(c: &mut Criterion) {
    let mut group = c.benchmark_group("vrpca_epoch");
    group.sample_size(20);
    for d in [1000, 10000] {
        let x = sparse_random(d, 2000, 10.0 / d as f64, 2).unwrap();
        let anchor = random_init(d, 1, 2).unwrap();
        for kernel in [EpochKernel::Naive, EpochKernel::Amortized] {
            let mut cfg = SolverConfig::heuristic(&x, 1, 2).unwrap();
            cfg.epoch_kernel = kernel;
            let name = format!("{kernel:?}").to_lowercase();
            group.bench_with_input(BenchmarkId::new(name, d), &cfg, |bench, cfg| {
                bench.iter(|| vrpca_epoch(&x, &anchor, cfg, &mut solver_rng(2, 0)).unwrap())
            });
        }
    }
    group.finish();
}

criterion_group!(benches, covariance, epoch);
criterion_main!(benches);
