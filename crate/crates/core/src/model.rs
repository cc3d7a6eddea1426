//! The clustering network and its training loop.
//!
//! A stack of message-passing layers `X ← relu((P X) Θ + b)` on the
//! propagation operator `P` produces node embeddings; an MLP with ReLU
//! hidden layers maps them to K logits, and a row softmax turns those into
//! soft assignments `S`. Training is full-batch Adam on one of the three
//! losses.

use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::autodiff::{glorot_init_with, AdamConfig, NodeId, ParamId, ParameterSet, Tape};
use crate::error::{Error, Result};
use crate::graph::{PropagationOperator, SparseGraph};
use crate::linalg::DenseMatrix;
use crate::losses::{AssignmentMatrix, LossContext, LossKind};
use crate::metrics::{self, LabelVector};
use crate::par;

/// NMI is sampled on epochs divisible by this (and on the last epoch).
pub const NMI_EVERY: usize = 10;

#[derive(Debug, Clone, PartialEq)]
pub struct ModelConfig {
    pub delta: f64,
    pub mp_layers: usize,
    pub mp_channels: usize,
    pub mlp_hidden_layers: usize,
    pub mlp_channels: usize,
    pub k: usize,
    pub lr: f64,
    pub epochs: usize,
    pub loss: LossKind,
    pub seed: u64,
    /// Divide `ddᵀ` by `2E` in the DMoN modularity matrix.
    pub dmon_normalize: bool,
    /// L1-normalize feature rows before training.
    pub row_normalize_features: bool,
}

impl ModelConfig {
    /// Default hyperparameters for `k` clusters.
    pub fn new(k: usize) -> Self {
        ModelConfig {
            delta: 0.85,
            mp_layers: 10,
            mp_channels: 64,
            mlp_hidden_layers: 1,
            mlp_channels: 16,
            k,
            lr: 5e-5,
            epochs: 2000,
            loss: LossKind::Jb,
            seed: 0,
            dmon_normalize: true,
            row_normalize_features: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let counts = [
            ("mp_layers", self.mp_layers),
            ("mp_channels", self.mp_channels),
            ("mlp_hidden_layers", self.mlp_hidden_layers),
            ("mlp_channels", self.mlp_channels),
            ("k", self.k),
        ];
        for (name, v) in counts {
            if v == 0 {
                return Err(Error::input(format!("{name} must be at least 1")));
            }
        }
        if !(0.0..=1.0).contains(&self.delta) {
            return Err(Error::input(format!("delta must lie in [0, 1], got {}", self.delta)));
        }
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            return Err(Error::input(format!("lr must be positive, got {}", self.lr)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy)]
struct Layer {
    weight: ParamId,
    bias: ParamId,
}

/// Parameters plus the layer layout needed to run them.
#[derive(Debug, Clone)]
pub struct Model {
    params: ParameterSet,
    mp: Vec<Layer>,
    mlp: Vec<Layer>,
}

impl Model {
    /// Glorot-initialized weights and zero biases, drawn from `config.seed`.
    ///
    /// MP layers map `feature_dim → mp_channels → … → mp_channels`; the MLP
    /// has `mlp_hidden_layers` ReLU layers of width `mlp_channels` and a
    /// linear output layer of width `k`.
    pub fn build(config: &ModelConfig, feature_dim: usize) -> Result<Self> {
        config.validate()?;
        if feature_dim == 0 {
            return Err(Error::input("feature_dim must be at least 1"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let mut params = ParameterSet::new();
        let mut layer = |params: &mut ParameterSet, name: String, fan_in: usize, fan_out: usize| Layer {
            weight: params.push(format!("{name}.weight"), glorot_init_with(fan_in, fan_out, &mut rng)),
            bias: params.push(format!("{name}.bias"), DenseMatrix::zeros(1, fan_out)),
        };

        let mut mp = Vec::with_capacity(config.mp_layers);
        let mut width = feature_dim;
        for l in 0..config.mp_layers {
            mp.push(layer(&mut params, format!("mp.{l}"), width, config.mp_channels));
            width = config.mp_channels;
        }
        let mut mlp = Vec::with_capacity(config.mlp_hidden_layers + 1);
        for l in 0..config.mlp_hidden_layers {
            mlp.push(layer(&mut params, format!("mlp.{l}"), width, config.mlp_channels));
            width = config.mlp_channels;
        }
        mlp.push(layer(&mut params, "mlp.out".to_string(), width, config.k));
        Ok(Model { params, mp, mlp })
    }

    pub fn params(&self) -> &ParameterSet {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut ParameterSet {
        &mut self.params
    }

    /// Weight matrices in forward order.
    pub fn weights(&self) -> Vec<&DenseMatrix> {
        self.mp
            .iter()
            .chain(&self.mlp)
            .map(|l| self.params.value(l.weight))
            .collect()
    }

    /// Records the forward pass on `tape`, returning the embedding and assignment nodes.
    pub fn forward<'a>(
        &self,
        op: &'a PropagationOperator,
        x: &DenseMatrix,
        tape: &mut Tape<'a>,
    ) -> Result<(NodeId, NodeId)> {
        if x.rows() != op.num_nodes() {
            return Err(Error::input(format!(
                "features have {} rows, operator has {} nodes",
                x.rows(),
                op.num_nodes()
            )));
        }
        let first = self.params.value(self.mp[0].weight);
        if x.cols() != first.rows() {
            return Err(Error::input(format!(
                "features have {} columns, model expects {}",
                x.cols(),
                first.rows()
            )));
        }
        let mut h = tape.input(x.clone());
        for layer in &self.mp {
            let propagated = tape.spmm_const(op.matrix(), h)?;
            h = self.affine(tape, propagated, *layer)?;
            h = tape.relu(h);
        }
        let x_bar = h;
        let (out, hidden) = self.mlp.split_last().expect("output layer always present");
        for layer in hidden {
            h = self.affine(tape, h, *layer)?;
            h = tape.relu(h);
        }
        let logits = self.affine(tape, h, *out)?;
        Ok((x_bar, tape.row_softmax(logits)))
    }

    fn affine(&self, tape: &mut Tape<'_>, x: NodeId, layer: Layer) -> Result<NodeId> {
        let w = tape.param(&self.params, layer.weight);
        let b = tape.param(&self.params, layer.bias);
        tape.affine(x, w, b)
    }

    /// Soft assignments for the current parameters.
    pub fn assignments(&self, op: &PropagationOperator, x: &DenseMatrix) -> Result<AssignmentMatrix> {
        let mut tape = Tape::new();
        let (_, s) = self.forward(op, x, &mut tape)?;
        AssignmentMatrix::new(tape.value(s).clone())
    }

    /// Loss value and parameter gradients for one full-batch pass.
    pub fn loss_and_grads(
        &self,
        op: &PropagationOperator,
        x: &DenseMatrix,
        kind: LossKind,
        ctx: &LossContext<'_>,
    ) -> Result<(f64, DenseMatrix, Vec<DenseMatrix>)> {
        let mut tape = Tape::new();
        let (_, s) = self.forward(op, x, &mut tape)?;
        let loss = tape.loss_terminal(s, kind, ctx)?;
        tape.backward(loss)?;
        let value = tape.value(loss)[(0, 0)];
        let s_value = tape.value(s).clone();
        Ok((value, s_value, tape.param_grads(&self.params)))
    }
}

/// [`Model::build`], returning only the parameters.
pub fn build(config: &ModelConfig, feature_dim: usize) -> Result<ParameterSet> {
    Model::build(config, feature_dim).map(|m| m.params)
}

/// Per-row argmax; ties go to the lowest cluster index.
pub fn hard_assign(s: &AssignmentMatrix) -> LabelVector {
    let m = s.matrix();
    let labels = (0..m.rows())
        .map(|r| {
            m.row(r)
                .iter()
                .enumerate()
                .fold((0, f64::NEG_INFINITY), |best, (k, &v)| if v > best.1 { (k, v) } else { best })
                .0
        })
        .collect();
    LabelVector::new(labels, m.cols()).expect("argmax is below the column count")
}

/// Divides each row by its L1 norm; all-zero rows are left alone.
pub fn row_normalize(x: &DenseMatrix) -> DenseMatrix {
    let mut out = x.clone();
    for r in 0..out.rows() {
        let norm: f64 = out.row(r).iter().map(|v| v.abs()).sum();
        if norm > 0.0 {
            out.row_mut(r).iter_mut().for_each(|v| *v /= norm);
        }
    }
    out
}

/// Loss and NMI trajectories plus timing for one training run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub loss_kind: String,
    /// Loss at every epoch, evaluated before that epoch's update.
    pub loss: Vec<f64>,
    /// NMI against the labels at the epochs in `nmi_epochs`.
    pub nmi: Vec<f64>,
    pub nmi_epochs: Vec<usize>,
    pub total_seconds: f64,
    pub seconds_per_step: f64,
    /// Hard assignments after the final update.
    #[serde(skip)]
    pub assignments: Vec<usize>,
}

impl TrainReport {
    pub fn final_loss(&self) -> Option<f64> {
        self.loss.last().copied()
    }
}

/// Trains a fresh model and returns the final soft assignments with a report.
///
/// When `labels` are given, NMI is recorded every [`NMI_EVERY`] epochs and
/// on the last epoch.
pub fn train(
    g: &SparseGraph,
    x: &DenseMatrix,
    config: &ModelConfig,
    labels: Option<&LabelVector>,
) -> Result<(AssignmentMatrix, TrainReport)> {
    config.validate()?;
    if config.k < 2 {
        return Err(Error::input("training needs k >= 2 clusters"));
    }
    check_inputs(g, x, labels)?;
    let features = if config.row_normalize_features {
        row_normalize(x)
    } else {
        x.clone()
    };
    let op = PropagationOperator::new(g, config.delta)?;
    let mut ctx = LossContext::new(g);
    ctx.dmon_normalize = config.dmon_normalize;
    let mut model = Model::build(config, features.cols())?;

    let mut report = TrainReport {
        loss_kind: config.loss.to_string(),
        loss: Vec::with_capacity(config.epochs),
        nmi: Vec::new(),
        nmi_epochs: Vec::new(),
        total_seconds: 0.0,
        seconds_per_step: 0.0,
        assignments: Vec::new(),
    };
    let adam = AdamConfig::default();
    let started = Instant::now();
    for epoch in 0..config.epochs {
        let (value, s, grads) = model
            .loss_and_grads(&op, &features, config.loss, &ctx)
            .map_err(|e| at_epoch(e, epoch))?;
        if !value.is_finite() {
            return Err(Error::numeric(format!("epoch {epoch}: loss is {value}")));
        }
        report.loss.push(value);
        if let Some(y) = labels {
            if epoch % NMI_EVERY == 0 || epoch + 1 == config.epochs {
                let pred = hard_assign(&AssignmentMatrix::new(s)?);
                report.nmi.push(metrics::nmi(y, &pred)?);
                report.nmi_epochs.push(epoch);
            }
        }
        model
            .params_mut()
            .adam_step(&grads, config.lr, adam)
            .map_err(|e| at_epoch(e, epoch))?;
    }
    if config.epochs > 0 {
        report.total_seconds = started.elapsed().as_secs_f64();
        report.seconds_per_step = report.total_seconds / config.epochs as f64;
    }
    let s = model.assignments(&op, &features)?;
    report.assignments = hard_assign(&s).labels().to_vec();
    Ok((s, report))
}

/// Trains one model per seed, running seeds concurrently under the `parallel` feature.
pub fn train_seeds(
    g: &SparseGraph,
    x: &DenseMatrix,
    config: &ModelConfig,
    labels: Option<&LabelVector>,
    seeds: &[u64],
) -> Vec<Result<(AssignmentMatrix, TrainReport)>> {
    par::map_indices(seeds.len(), |i| {
        let cfg = ModelConfig {
            seed: seeds[i],
            ..config.clone()
        };
        train(g, x, &cfg, labels)
    })
}

fn at_epoch(e: Error, epoch: usize) -> Error {
    match e {
        Error::Numeric(msg) => Error::Numeric(format!("epoch {epoch}: {msg}")),
        other => other,
    }
}

fn check_inputs(g: &SparseGraph, x: &DenseMatrix, labels: Option<&LabelVector>) -> Result<()> {
    if x.rows() != g.num_nodes() {
        return Err(Error::input(format!(
            "features have {} rows, graph has {} nodes",
            x.rows(),
            g.num_nodes()
        )));
    }
    if x.cols() == 0 {
        return Err(Error::input("features need at least one column"));
    }
    if let Some(y) = labels {
        if y.len() != g.num_nodes() {
            return Err(Error::input(format!(
                "{} labels for {} nodes",
                y.len(),
                g.num_nodes()
            )));
        }
    }
    Ok(())
}

/// Wall-clock statistics of full optimization steps.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepTiming {
    pub loss: String,
    pub warmup: usize,
    pub steps: usize,
    pub mean_seconds_per_step: f64,
    pub std_seconds_per_step: f64,
    pub num_nodes: usize,
    pub num_entries: usize,
}

/// Times `steps` forward+loss+backward+Adam steps after `warmup` untimed ones.
///
/// The standard deviation is the sample deviation (0 for a single step).
pub fn bench_steps(
    g: &SparseGraph,
    x: &DenseMatrix,
    config: &ModelConfig,
    warmup: usize,
    steps: usize,
) -> Result<StepTiming> {
    let samples = StepRunner::new(g, x, config)?.run(warmup, steps)?;
    Ok(StepTiming::from_samples(config.loss, warmup, &samples, g))
}

impl StepTiming {
    pub fn from_samples(loss: LossKind, warmup: usize, samples: &[f64], g: &SparseGraph) -> Self {
        let n = samples.len() as f64;
        let mean = samples.iter().sum::<f64>() / n.max(1.0);
        let std = if samples.len() > 1 {
            (samples.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        StepTiming {
            loss: loss.to_string(),
            warmup,
            steps: samples.len(),
            mean_seconds_per_step: mean,
            std_seconds_per_step: std,
            num_nodes: g.num_nodes(),
            num_entries: g.num_entries(),
        }
    }
}

/// A model ready to take timed optimization steps.
pub struct StepRunner<'g> {
    op: PropagationOperator,
    ctx: LossContext<'g>,
    features: DenseMatrix,
    model: Model,
    loss: LossKind,
    lr: f64,
}

impl<'g> StepRunner<'g> {
    pub fn new(g: &'g SparseGraph, x: &DenseMatrix, config: &ModelConfig) -> Result<Self> {
        config.validate()?;
        check_inputs(g, x, None)?;
        let features = if config.row_normalize_features {
            row_normalize(x)
        } else {
            x.clone()
        };
        let mut ctx = LossContext::new(g);
        ctx.dmon_normalize = config.dmon_normalize;
        Ok(StepRunner {
            op: PropagationOperator::new(g, config.delta)?,
            ctx,
            model: Model::build(config, features.cols())?,
            features,
            loss: config.loss,
            lr: config.lr,
        })
    }

    /// One full step; returns its wall-clock seconds.
    pub fn step(&mut self) -> Result<f64> {
        let started = Instant::now();
        let (_, _, grads) = self
            .model
            .loss_and_grads(&self.op, &self.features, self.loss, &self.ctx)?;
        self.model
            .params_mut()
            .adam_step(&grads, self.lr, AdamConfig::default())?;
        Ok(started.elapsed().as_secs_f64())
    }

    pub fn run(&mut self, warmup: usize, steps: usize) -> Result<Vec<f64>> {
        for _ in 0..warmup {
            self.step()?;
        }
        (0..steps).map(|_| self.step()).collect()
    }
}
