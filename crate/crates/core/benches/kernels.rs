//! Row-parallel kernels against their sequential baselines, and one full
//! training step per loss on the same backbone.
//!
//! Build with `--no-default-features` to make the "parallel" variants fall
//! back to sequential loops as well.

use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use jbgnn::graph::{sbm_generate, PropagationOperator, SbmConfig};
use jbgnn::model::{ModelConfig, StepRunner};
use jbgnn::{DenseMatrix, LossKind};

fn problem(nodes_per_block: usize) -> (jbgnn::SparseGraph, DenseMatrix) {
    let cfg = SbmConfig {
        feature_dim: 64,
        noise_sigma: 1.0,
        seed: 0,
        ..SbmConfig::uniform(4, nodes_per_block, 8.0 / nodes_per_block as f64, 0.5 / nodes_per_block as f64)
    };
    let (g, x, _) = sbm_generate(&cfg).unwrap();
    (g, x)
}

fn spmm(c: &mut Criterion) {
    let mut group = c.benchmark_group("spmm");
    for size in [500, 2500] {
        let (g, x) = problem(size);
        let op = PropagationOperator::new(&g, 0.85).unwrap();
        group.bench_with_input(BenchmarkId::new("parallel", 4 * size), &x, |b, x| {
            b.iter(|| op.matrix().spmm(black_box(x)).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("sequential", 4 * size), &x, |b, x| {
            b.iter(|| op.matrix().spmm_seq(black_box(x)).unwrap())
        });
    }
    group.finish();
}

fn matmul(c: &mut Criterion) {
    let mut group = c.benchmark_group("matmul");
    let w = jbgnn::autodiff::glorot_init(64, 64, 1);
    for size in [500, 2500] {
        let (_, x) = problem(size);
        group.bench_with_input(BenchmarkId::new("parallel", 4 * size), &x, |b, x| {
            b.iter(|| black_box(x).matmul(&w).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("sequential", 4 * size), &x, |b, x| {
            b.iter(|| black_box(x).matmul_seq(&w).unwrap())
        });
    }
    group.finish();
}

fn train_step(c: &mut Criterion) {
    let mut group = c.benchmark_group("train_step");
    group.sample_size(20);
    let (g, x) = problem(500);
    for kind in LossKind::ALL {
        let cfg = ModelConfig {
            loss: kind,
            ..ModelConfig::new(4)
        };
        let mut runner = StepRunner::new(&g, &x, &cfg).unwrap();
        group.bench_function(kind.as_str(), |b| b.iter(|| runner.step().unwrap()));
    }
    group.finish();
}

criterion_group!(benches, spmm, matmul, train_step);
criterion_main!(benches);
