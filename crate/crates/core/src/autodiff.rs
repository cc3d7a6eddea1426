//! Reverse-mode differentiation for the clustering network.
//!
//! The tape records exactly the operations a forward pass needs: constant
//! sparse propagation, affine maps, ReLU, row softmax and a loss terminal.
//! Each node caches its forward value; [`Tape::backward`] walks the nodes in
//! reverse insertion order (a valid reverse topological order, since inputs
//! always precede their consumers) and accumulates gradients.
//!
//! ```
//! use jbgnn::autodiff::{ParameterSet, Tape};
//! use jbgnn::DenseMatrix;
//!
//! let mut params = ParameterSet::new();
//! let w = params.push("w", DenseMatrix::from_rows(&[[3.0]]).unwrap());
//! let b = params.push("b", DenseMatrix::from_rows(&[[1.0]]).unwrap());
//!
//! let mut tape = Tape::new();
//! let x = tape.input(DenseMatrix::from_rows(&[[2.0]]).unwrap());
//! let wn = tape.param(&params, w);
//! let bn = tape.param(&params, b);
//! let y = tape.affine(x, wn, bn).unwrap();
//! assert_eq!(tape.value(y)[(0, 0)], 7.0);
//! ```

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::CsrMatrix;
use crate::linalg::DenseMatrix;
use crate::losses::{AssignmentMatrix, LossContext, LossKind};

/// Handle to a node on a [`Tape`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct NodeId(usize);

/// Handle to a parameter in a [`ParameterSet`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ParamId(usize);

impl ParamId {
    pub fn index(self) -> usize {
        self.0
    }
}

enum Op<'a> {
    Input,
    Param(ParamId),
    /// `m · x` with `m` symmetric.
    Spmm(&'a CsrMatrix, NodeId),
    Affine { x: NodeId, w: NodeId, b: NodeId },
    Relu(NodeId),
    RowSoftmax(NodeId),
    /// Scalar loss whose gradient with respect to `s` was computed eagerly.
    Loss { s: NodeId, grad_s: DenseMatrix },
}

struct TapeNode<'a> {
    op: Op<'a>,
    value: DenseMatrix,
    grad: Option<DenseMatrix>,
}

/// One forward pass worth of recorded operations.
#[derive(Default)]
pub struct Tape<'a> {
    nodes: Vec<TapeNode<'a>>,
}

impl<'a> Tape<'a> {
    pub fn new() -> Self {
        Tape { nodes: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    fn push(&mut self, op: Op<'a>, value: DenseMatrix) -> NodeId {
        self.nodes.push(TapeNode {
            op,
            value,
            grad: None,
        });
        NodeId(self.nodes.len() - 1)
    }

    pub fn value(&self, id: NodeId) -> &DenseMatrix {
        &self.nodes[id.0].value
    }

    /// Accumulated gradient of `id`; all zeros if backward never reached it.
    pub fn grad(&self, id: NodeId) -> DenseMatrix {
        let node = &self.nodes[id.0];
        node.grad
            .clone()
            .unwrap_or_else(|| DenseMatrix::zeros(node.value.rows(), node.value.cols()))
    }

    /// A constant leaf.
    pub fn input(&mut self, value: DenseMatrix) -> NodeId {
        self.push(Op::Input, value)
    }

    /// A leaf holding the current value of a parameter.
    pub fn param(&mut self, params: &ParameterSet, id: ParamId) -> NodeId {
        self.push(Op::Param(id), params.value(id).clone())
    }

    /// `m · x` for a constant symmetric sparse `m`.
    pub fn spmm_const(&mut self, m: &'a CsrMatrix, x: NodeId) -> Result<NodeId> {
        debug_assert!(m.rows() == m.cols());
        let value = m.spmm(self.value(x))?;
        Ok(self.push(Op::Spmm(m, x), value))
    }

    /// `x · w + b` with `b` a 1×cols row broadcast over rows.
    pub fn affine(&mut self, x: NodeId, w: NodeId, b: NodeId) -> Result<NodeId> {
        let (xv, wv, bv) = (self.value(x), self.value(w), self.value(b));
        if bv.rows() != 1 || bv.cols() != wv.cols() {
            return Err(Error::input(format!(
                "affine: bias is {}x{}, expected 1x{}",
                bv.rows(),
                bv.cols(),
                wv.cols()
            )));
        }
        let mut value = xv.matmul(wv)?;
        let bias = bv.row(0).to_vec();
        for r in 0..value.rows() {
            for (v, b) in value.row_mut(r).iter_mut().zip(&bias) {
                *v += b;
            }
        }
        Ok(self.push(Op::Affine { x, w, b }, value))
    }

    pub fn relu(&mut self, x: NodeId) -> NodeId {
        let value = self.value(x).map(|v| v.max(0.0));
        self.push(Op::Relu(x), value)
    }

    /// Softmax of each row, shifted by the row maximum.
    pub fn row_softmax(&mut self, x: NodeId) -> NodeId {
        let mut value = self.value(x).clone();
        for r in 0..value.rows() {
            softmax_in_place(value.row_mut(r));
        }
        self.push(Op::RowSoftmax(x), value)
    }

    /// Evaluates `kind` on the assignment held by `s` and records a 1×1 loss node.
    pub fn loss_terminal(&mut self, s: NodeId, kind: LossKind, ctx: &LossContext<'_>) -> Result<NodeId> {
        let assignment = AssignmentMatrix::new(self.value(s).clone())?;
        let out = ctx.evaluate(kind, &assignment)?;
        let value = DenseMatrix::filled(1, 1, out.value);
        Ok(self.push(
            Op::Loss {
                s,
                grad_s: out.grad_s,
            },
            value,
        ))
    }

    /// Back-propagates from a 1×1 `root`, seeding its gradient with 1.
    ///
    /// Gradients accumulate into existing buffers; call on a fresh tape.
    pub fn backward(&mut self, root: NodeId) -> Result<()> {
        if self.value(root).shape() != (1, 1) {
            return Err(Error::input("backward: root must be a scalar node"));
        }
        self.backward_with(root, DenseMatrix::filled(1, 1, 1.0))
    }

    /// Back-propagates an arbitrary upstream gradient from `root`.
    pub fn backward_with(&mut self, root: NodeId, seed: DenseMatrix) -> Result<()> {
        if seed.shape() != self.value(root).shape() {
            return Err(Error::input("backward: seed shape differs from root value"));
        }
        self.accumulate(root, seed);
        for idx in (0..=root.0).rev() {
            let Some(upstream) = self.nodes[idx].grad.take() else {
                continue;
            };
            let contributions = self.local_backward(idx, &upstream)?;
            self.nodes[idx].grad = Some(upstream);
            for (target, g) in contributions {
                self.accumulate(target, g);
            }
        }
        Ok(())
    }

    fn accumulate(&mut self, id: NodeId, g: DenseMatrix) {
        let slot = &mut self.nodes[id.0].grad;
        match slot {
            Some(existing) => existing.axpy(1.0, &g),
            None => *slot = Some(g),
        }
    }

    fn local_backward(&self, idx: usize, upstream: &DenseMatrix) -> Result<Vec<(NodeId, DenseMatrix)>> {
        let node = &self.nodes[idx];
        Ok(match &node.op {
            Op::Input | Op::Param(_) => Vec::new(),
            Op::Spmm(m, x) => vec![(*x, m.spmm(upstream)?)],
            Op::Affine { x, w, b } => {
                let gx = upstream.matmul_t(self.value(*w))?;
                let gw = self.value(*x).t_matmul(upstream)?;
                let gb = DenseMatrix::from_vec(1, upstream.cols(), upstream.col_sums())?;
                vec![(*x, gx), (*w, gw), (*b, gb)]
            }
            Op::Relu(x) => {
                let input = self.value(*x).as_slice();
                let data = upstream
                    .as_slice()
                    .iter()
                    .zip(input)
                    .map(|(&g, &v)| if v > 0.0 { g } else { 0.0 })
                    .collect();
                vec![(*x, DenseMatrix::from_vec(upstream.rows(), upstream.cols(), data)?)]
            }
            Op::RowSoftmax(x) => {
                let y = &node.value;
                let mut gx = upstream.clone();
                for r in 0..y.rows() {
                    let yr = y.row(r);
                    let inner: f64 = upstream.row(r).iter().zip(yr).map(|(g, p)| g * p).sum();
                    for (g, p) in gx.row_mut(r).iter_mut().zip(yr) {
                        *g = p * (*g - inner);
                    }
                }
                vec![(*x, gx)]
            }
            Op::Loss { s, grad_s } => vec![(*s, grad_s.scale(upstream[(0, 0)]))],
        })
    }

    /// Gradients for every parameter, in [`ParameterSet`] order; zero where unused.
    pub fn param_grads(&self, params: &ParameterSet) -> Vec<DenseMatrix> {
        let mut grads: Vec<DenseMatrix> = params
            .values
            .iter()
            .map(|p| DenseMatrix::zeros(p.rows(), p.cols()))
            .collect();
        for node in &self.nodes {
            if let (Op::Param(id), Some(g)) = (&node.op, &node.grad) {
                grads[id.0].axpy(1.0, g);
            }
        }
        grads
    }
}

fn softmax_in_place(row: &mut [f64]) {
    let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut total = 0.0;
    for v in row.iter_mut() {
        *v = (*v - max).exp();
        total += *v;
    }
    for v in row.iter_mut() {
        *v /= total;
    }
}

/// Glorot/Xavier uniform initialization on `[-√(6/(rows+cols)), √(6/(rows+cols))]`.
pub fn glorot_init(rows: usize, cols: usize, seed: u64) -> DenseMatrix {
    glorot_init_with(rows, cols, &mut ChaCha8Rng::seed_from_u64(seed))
}

pub fn glorot_init_with(rows: usize, cols: usize, rng: &mut impl Rng) -> DenseMatrix {
    let limit = (6.0 / (rows + cols) as f64).sqrt();
    let data = (0..rows * cols).map(|_| rng.gen_range(-limit..=limit)).collect();
    DenseMatrix::from_vec(rows, cols, data).expect("finite by construction")
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamConfig {
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

/// Named trainable matrices with Adam moment buffers.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ParameterSet {
    names: Vec<String>,
    values: Vec<DenseMatrix>,
    first_moment: Vec<DenseMatrix>,
    second_moment: Vec<DenseMatrix>,
    step: u64,
}

impl ParameterSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, name: impl Into<String>, value: DenseMatrix) -> ParamId {
        let (r, c) = value.shape();
        self.names.push(name.into());
        self.values.push(value);
        self.first_moment.push(DenseMatrix::zeros(r, c));
        self.second_moment.push(DenseMatrix::zeros(r, c));
        ParamId(self.values.len() - 1)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn ids(&self) -> impl Iterator<Item = ParamId> {
        (0..self.values.len()).map(ParamId)
    }

    pub fn name(&self, id: ParamId) -> &str {
        &self.names[id.0]
    }

    pub fn value(&self, id: ParamId) -> &DenseMatrix {
        &self.values[id.0]
    }

    pub fn value_mut(&mut self, id: ParamId) -> &mut DenseMatrix {
        &mut self.values[id.0]
    }

    pub fn first_moment(&self, id: ParamId) -> &DenseMatrix {
        &self.first_moment[id.0]
    }

    pub fn second_moment(&self, id: ParamId) -> &DenseMatrix {
        &self.second_moment[id.0]
    }

    /// Number of Adam updates applied so far.
    pub fn step(&self) -> u64 {
        self.step
    }

    /// Total number of scalar parameters.
    pub fn num_scalars(&self) -> usize {
        self.values.iter().map(|v| v.rows() * v.cols()).sum()
    }

    /// One bias-corrected Adam update. Rejects non-finite gradients before
    /// touching any state.
    pub fn adam_step(&mut self, grads: &[DenseMatrix], lr: f64, cfg: AdamConfig) -> Result<()> {
        if grads.len() != self.values.len() {
            return Err(Error::input(format!(
                "adam: {} gradients for {} parameters",
                grads.len(),
                self.values.len()
            )));
        }
        for (i, (g, p)) in grads.iter().zip(&self.values).enumerate() {
            if g.shape() != p.shape() {
                return Err(Error::input(format!(
                    "adam: gradient for {} has shape {:?}, parameter is {:?}",
                    self.names[i],
                    g.shape(),
                    p.shape()
                )));
            }
            if !g.is_finite() {
                return Err(Error::numeric(format!(
                    "adam: non-finite gradient for {} at step {}",
                    self.names[i],
                    self.step + 1
                )));
            }
        }
        self.step += 1;
        let t = self.step as i32;
        let bias1 = 1.0 - cfg.beta1.powi(t);
        let bias2 = 1.0 - cfg.beta2.powi(t);
        for (i, g) in grads.iter().enumerate() {
            let g = g.as_slice();
            let m = self.first_moment[i].as_mut_slice();
            let v = self.second_moment[i].as_mut_slice();
            let p = self.values[i].as_mut_slice();
            for j in 0..p.len() {
                m[j] = cfg.beta1 * m[j] + (1.0 - cfg.beta1) * g[j];
                v[j] = cfg.beta2 * v[j] + (1.0 - cfg.beta2) * g[j] * g[j];
                let m_hat = m[j] / bias1;
                let v_hat = v[j] / bias2;
                p[j] -= lr * m_hat / (v_hat.sqrt() + cfg.eps);
            }
        }
        Ok(())
    }
}
