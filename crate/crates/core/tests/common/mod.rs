//! Shared oracles for the integration suites.
#![allow(dead_code)]

use jbgnn::autodiff::ParamId;
use jbgnn::graph::{PropagationOperator, SparseGraph};
use jbgnn::losses::{AssignmentMatrix, LossContext};
use jbgnn::model::{Model, ModelConfig};
use jbgnn::{DenseMatrix, LossKind};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const FD_STEP: f64 = 1e-5;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_matrix(rows: usize, cols: usize, rng: &mut impl Rng) -> DenseMatrix {
    let data = (0..rows * cols).map(|_| rng.gen_range(-1.0..1.0)).collect();
    DenseMatrix::from_vec(rows, cols, data).unwrap()
}

/// Rows drawn uniformly-ish from the open simplex.
pub fn random_stochastic(n: usize, k: usize, rng: &mut impl Rng) -> AssignmentMatrix {
    let mut s = DenseMatrix::zeros(n, k);
    for r in 0..n {
        let row: Vec<f64> = (0..k).map(|_| rng.gen_range(0.05..1.0)).collect();
        let total: f64 = row.iter().sum();
        for (c, v) in row.into_iter().enumerate() {
            s[(r, c)] = v / total;
        }
    }
    AssignmentMatrix::new(s).unwrap()
}

pub fn random_graph(n: usize, p: f64, rng: &mut impl Rng) -> SparseGraph {
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen_bool(p) {
                edges.push((u, v));
            }
        }
    }
    // A ring keeps every node connected.
    edges.extend((0..n).map(|u| (u, (u + 1) % n)));
    SparseGraph::from_edges(n, edges).unwrap()
}

/// Central differences of `f` with respect to every entry of `at`.
pub fn central_differences(at: &DenseMatrix, mut f: impl FnMut(&DenseMatrix) -> f64) -> DenseMatrix {
    let mut grad = DenseMatrix::zeros(at.rows(), at.cols());
    let mut probe = at.clone();
    for i in 0..at.as_slice().len() {
        let orig = probe.as_slice()[i];
        probe.as_mut_slice()[i] = orig + FD_STEP;
        let up = f(&probe);
        probe.as_mut_slice()[i] = orig - FD_STEP;
        let down = f(&probe);
        probe.as_mut_slice()[i] = orig;
        grad.as_mut_slice()[i] = (up - down) / (2.0 * FD_STEP);
    }
    grad
}

/// `max |analytic - numeric| / max |numeric|`, the gradient's relative error in the sup norm.
pub fn relative_error(analytic: &DenseMatrix, numeric: &DenseMatrix) -> f64 {
    let scale = numeric.max_abs().max(1e-12);
    analytic.sub(numeric).max_abs() / scale
}

/// Max relative error of the loss gradient with respect to `S`.
pub fn loss_gradient_error(ctx: &LossContext<'_>, kind: LossKind, s: &AssignmentMatrix) -> f64 {
    let analytic = ctx.evaluate(kind, s).unwrap().grad_s;
    let numeric = central_differences(s.matrix(), |probe| {
        ctx.evaluate(kind, &AssignmentMatrix::new_unchecked(probe.clone()))
            .unwrap()
            .value
    });
    relative_error(&analytic, &numeric)
}

/// Max relative error over all parameters of a full model forward + loss.
pub fn model_gradient_error(
    g: &SparseGraph,
    x: &DenseMatrix,
    cfg: &ModelConfig,
) -> f64 {
    let op = PropagationOperator::new(g, cfg.delta).unwrap();
    let ctx = LossContext::new(g);
    let model = Model::build(cfg, x.cols()).unwrap();
    let (_, _, grads) = model.loss_and_grads(&op, x, cfg.loss, &ctx).unwrap();
    let ids: Vec<ParamId> = model.params().ids().collect();
    let mut worst = 0.0f64;
    for (id, analytic) in ids.into_iter().zip(&grads) {
        let at = model.params().value(id).clone();
        let numeric = central_differences(&at, |probe| {
            let mut m = model.clone();
            *m.params_mut().value_mut(id) = probe.clone();
            m.loss_and_grads(&op, x, cfg.loss, &ctx).unwrap().0
        });
        worst = worst.max(relative_error(analytic, &numeric));
    }
    worst
}

/// A 2-MP-layer model small enough for exhaustive finite differences.
pub fn small_model_config(kind: LossKind, seed: u64) -> ModelConfig {
    ModelConfig {
        mp_layers: 2,
        mp_channels: 6,
        mlp_hidden_layers: 1,
        mlp_channels: 5,
        loss: kind,
        seed,
        ..ModelConfig::new(3)
    }
}
