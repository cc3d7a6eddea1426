//! Clustering objectives on a soft assignment matrix `S` (N×K, rows on the simplex).
//!
//! * `jb`: `-Tr(sqrt(SᵀS))`, a pure balancing term. Its gradient is
//!   `-S (SᵀS)^{-1/2}`, with small eigenvalues of `SᵀS` clamped before
//!   inversion so empty clusters stay finite.
//! * `mincut`: `-Tr(SᵀÃS)/Tr(SᵀD̃S) + ‖SᵀS/‖SᵀS‖_F − I/√K‖_F` with
//!   `Ã = D^{-1/2} A D^{-1/2}` and `D̃` its degree matrix.
//! * `dmon`: `-Tr(SᵀBS)/(2E) + (√K/N)‖Sᵀ1‖ − 1` with the modularity matrix
//!   `B = A − ddᵀ/(2E)`, or `A − ddᵀ` in literal mode. `ddᵀ` is never
//!   materialized; its trace term is `‖Sᵀd‖²`.
//!
//! For weighted graphs `2E` is the total degree `Σ d_i`.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::graph::{CsrMatrix, SparseGraph};
use crate::linalg::{symmetric_eig, DenseMatrix, DEFAULT_EIG_FLOOR};

const ROW_SUM_TOL: f64 = 1e-6;
const ENTRY_TOL: f64 = 1e-12;

/// Row-stochastic N×K soft assignments.
#[derive(Debug, Clone, PartialEq)]
pub struct AssignmentMatrix(DenseMatrix);

impl AssignmentMatrix {
    /// Checks that entries lie in `[0, 1]` and rows sum to 1 within 1e-6.
    pub fn new(s: DenseMatrix) -> Result<Self> {
        if !s.is_finite() {
            return Err(Error::input("assignment matrix has non-finite entries"));
        }
        if s.cols() == 0 {
            return Err(Error::input("assignment matrix needs at least one cluster"));
        }
        for r in 0..s.rows() {
            let row = s.row(r);
            if row.iter().any(|&v| !(-ENTRY_TOL..=1.0 + ENTRY_TOL).contains(&v)) {
                return Err(Error::input(format!("assignment row {r} has entries outside [0, 1]")));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > ROW_SUM_TOL {
                return Err(Error::input(format!("assignment row {r} sums to {sum}")));
            }
        }
        Ok(AssignmentMatrix(s))
    }

    /// Wraps `s` without the simplex checks. The losses are defined for any
    /// finite `S`; finite-difference probes step off the simplex.
    pub fn new_unchecked(s: DenseMatrix) -> Self {
        AssignmentMatrix(s)
    }

    /// One-hot rows from hard labels.
    pub fn one_hot(labels: &[usize], k: usize) -> Result<Self> {
        let mut s = DenseMatrix::zeros(labels.len(), k);
        for (i, &l) in labels.iter().enumerate() {
            if l >= k {
                return Err(Error::input(format!("label {l} out of range for {k} clusters")));
            }
            s[(i, l)] = 1.0;
        }
        Ok(AssignmentMatrix(s))
    }

    /// Every row equal to `1/K`.
    pub fn uniform(n: usize, k: usize) -> Self {
        AssignmentMatrix(DenseMatrix::filled(n, k, 1.0 / k as f64))
    }

    pub fn matrix(&self) -> &DenseMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> DenseMatrix {
        self.0
    }

    pub fn num_nodes(&self) -> usize {
        self.0.rows()
    }

    pub fn num_clusters(&self) -> usize {
        self.0.cols()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LossValueGrad {
    pub value: f64,
    pub grad_s: DenseMatrix,
}

impl LossValueGrad {
    fn checked(value: f64, grad_s: DenseMatrix, what: &str) -> Result<Self> {
        if !value.is_finite() || !grad_s.is_finite() {
            return Err(Error::numeric(format!("{what}: non-finite loss or gradient")));
        }
        Ok(LossValueGrad { value, grad_s })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LossKind {
    #[default]
    Jb,
    MinCut,
    Dmon,
}

impl LossKind {
    pub const ALL: [LossKind; 3] = [LossKind::Jb, LossKind::MinCut, LossKind::Dmon];

    pub fn as_str(self) -> &'static str {
        match self {
            LossKind::Jb => "jb",
            LossKind::MinCut => "mincut",
            LossKind::Dmon => "dmon",
        }
    }
}

impl FromStr for LossKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "jb" => Ok(LossKind::Jb),
            "mincut" => Ok(LossKind::MinCut),
            "dmon" => Ok(LossKind::Dmon),
            other => Err(Error::input(format!(
                "unknown loss {other:?} (expected jb|mincut|dmon)"
            ))),
        }
    }
}

impl fmt::Display for LossKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Balance-only objective `-Tr(sqrt(SᵀS))` and its gradient `-S (SᵀS)^{-1/2}`.
pub fn jb_loss(s: &AssignmentMatrix, eig_floor: f64) -> Result<LossValueGrad> {
    let s = s.matrix();
    let gram = s.gram();
    let eig = symmetric_eig(&gram, 1e-9 * gram.max_abs().max(1.0))?;
    // Eigenvalues at the floor are zero up to round-off, which sqrt would amplify.
    let zero = eig_floor.max(64.0 * f64::EPSILON * gram.frobenius_norm());
    let value = -eig
        .eigenvalues
        .iter()
        .map(|&l| if l > zero { l.sqrt() } else { 0.0 })
        .sum::<f64>();
    let inv_sqrt = eig.reconstruct_with(|l| 1.0 / l.max(eig_floor).sqrt());
    let grad = s.matmul(&inv_sqrt)?.scale(-1.0);
    LossValueGrad::checked(value, grad, "jb")
}

/// The two MinCut terms, cut and orthogonality, in that order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinCutTerms {
    pub cut: f64,
    pub balance: f64,
}

pub fn mincut_terms(s: &AssignmentMatrix, a_norm: &CsrMatrix, d_tilde: &[f64]) -> Result<MinCutTerms> {
    mincut_impl(s, a_norm, d_tilde, false).map(|(t, _)| t)
}

/// MinCutPool loss with gradient.
pub fn mincut_loss(s: &AssignmentMatrix, a_norm: &CsrMatrix, d_tilde: &[f64]) -> Result<LossValueGrad> {
    let (terms, grad) = mincut_impl(s, a_norm, d_tilde, true)?;
    LossValueGrad::checked(terms.cut + terms.balance, grad.expect("requested"), "mincut")
}

fn mincut_impl(
    s: &AssignmentMatrix,
    a_norm: &CsrMatrix,
    d_tilde: &[f64],
    want_grad: bool,
) -> Result<(MinCutTerms, Option<DenseMatrix>)> {
    let s = s.matrix();
    let (n, k) = s.shape();
    if a_norm.rows() != n || d_tilde.len() != n {
        return Err(Error::input(format!(
            "mincut: S has {n} rows, operator {} and degree vector {}",
            a_norm.rows(),
            d_tilde.len()
        )));
    }
    let as_ = a_norm.spmm(s)?;
    let num = s.dot(&as_);
    let mut ds = s.clone();
    for (r, &d) in d_tilde.iter().enumerate() {
        ds.row_mut(r).iter_mut().for_each(|v| *v *= d);
    }
    let den = s.dot(&ds);
    if den.is_nan() || den <= 0.0 {
        return Err(Error::numeric("mincut: Tr(SᵀD̃S) is zero (graph without edges?)"));
    }
    let cut = -num / den;

    let gram = s.gram();
    let gnorm = gram.frobenius_norm();
    if gnorm.is_nan() || gnorm <= 0.0 {
        return Err(Error::numeric("mincut: SᵀS vanishes"));
    }
    let mut resid = gram.scale(1.0 / gnorm);
    let diag = 1.0 / (k as f64).sqrt();
    for i in 0..k {
        resid[(i, i)] -= diag;
    }
    let balance = resid.frobenius_norm();
    let terms = MinCutTerms { cut, balance };
    if !want_grad {
        return Ok((terms, None));
    }

    // d(-num/den) = -(2ÃS·den - num·2D̃S)/den².
    let mut grad = as_.scale(-2.0 / den);
    grad.axpy(2.0 * num / (den * den), &ds);

    // Balance term: U = C/‖C‖, R = U - I/√K, L = ‖R‖.
    // dL/dU = R/L, dL/dC = (G_U - (C:G_U) C/‖C‖²)/‖C‖, dL/dS = 2 S dL/dC.
    if balance > 0.0 {
        let g_u = resid.scale(1.0 / balance);
        let proj = gram.dot(&g_u) / (gnorm * gnorm);
        let mut g_c = g_u;
        g_c.axpy(-proj, &gram);
        let g_c = g_c.scale(1.0 / gnorm);
        grad.axpy(2.0, &s.matmul(&g_c)?);
    }
    Ok((terms, Some(grad)))
}

/// DMoN modularity and collapse-regularizer terms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DmonTerms {
    pub modularity: f64,
    pub regularizer: f64,
}

pub fn dmon_terms(s: &AssignmentMatrix, g: &SparseGraph, normalize_degree_product: bool) -> Result<DmonTerms> {
    dmon_impl(s, g, normalize_degree_product, false).map(|(t, _)| t)
}

/// DMoN loss with gradient.
pub fn dmon_loss(s: &AssignmentMatrix, g: &SparseGraph, normalize_degree_product: bool) -> Result<LossValueGrad> {
    let (terms, grad) = dmon_impl(s, g, normalize_degree_product, true)?;
    LossValueGrad::checked(terms.modularity + terms.regularizer, grad.expect("requested"), "dmon")
}

fn dmon_impl(
    s: &AssignmentMatrix,
    g: &SparseGraph,
    normalize: bool,
    want_grad: bool,
) -> Result<(DmonTerms, Option<DenseMatrix>)> {
    let s = s.matrix();
    let (n, k) = s.shape();
    if g.num_nodes() != n {
        return Err(Error::input(format!(
            "dmon: S has {n} rows, graph has {} nodes",
            g.num_nodes()
        )));
    }
    if g.num_edges() == 0 {
        return Err(Error::input("dmon: graph has no edges"));
    }
    let degrees = g.degrees();
    let two_e = g.total_degree();
    let degree_scale = if normalize { 1.0 / two_e } else { 1.0 };

    let as_ = g.adjacency().spmm(s)?;
    let tr_as = s.dot(&as_);
    let mut sd = vec![0.0; k];
    for (r, &d) in degrees.iter().enumerate() {
        for (acc, v) in sd.iter_mut().zip(s.row(r)) {
            *acc += d * v;
        }
    }
    let tr_dd: f64 = sd.iter().map(|v| v * v).sum();
    let modularity = -(tr_as - degree_scale * tr_dd) / two_e;

    let colsum = s.col_sums();
    let colnorm = colsum.iter().map(|v| v * v).sum::<f64>().sqrt();
    let reg_scale = (k as f64).sqrt() / n as f64;
    let regularizer = reg_scale * colnorm - 1.0;
    let terms = DmonTerms {
        modularity,
        regularizer,
    };
    if !want_grad {
        return Ok((terms, None));
    }

    // -(2AS - 2·scale·d(Sᵀd)ᵀ)/2E, then the regularizer's row-constant gradient.
    let mut grad = as_.scale(-2.0 / two_e);
    let reg_row: Vec<f64> = if colnorm > 0.0 {
        colsum.iter().map(|c| reg_scale * c / colnorm).collect()
    } else {
        vec![0.0; k]
    };
    for (r, &d) in degrees.iter().enumerate() {
        let coef = 2.0 * degree_scale * d / two_e;
        for ((gv, sdv), rv) in grad.row_mut(r).iter_mut().zip(&sd).zip(&reg_row) {
            *gv += coef * sdv + rv;
        }
    }
    Ok((terms, Some(grad)))
}

/// Graph-derived constants shared by every loss evaluation in a training run.
#[derive(Debug, Clone)]
pub struct LossContext<'g> {
    graph: &'g SparseGraph,
    a_norm: CsrMatrix,
    d_tilde: Vec<f64>,
    pub eig_floor: f64,
    pub dmon_normalize: bool,
}

impl<'g> LossContext<'g> {
    pub fn new(graph: &'g SparseGraph) -> Self {
        let a_norm = graph.normalized_adjacency();
        let d_tilde = a_norm.row_sums();
        LossContext {
            graph,
            a_norm,
            d_tilde,
            eig_floor: DEFAULT_EIG_FLOOR,
            dmon_normalize: true,
        }
    }

    pub fn graph(&self) -> &SparseGraph {
        self.graph
    }

    pub fn a_norm(&self) -> &CsrMatrix {
        &self.a_norm
    }

    pub fn d_tilde(&self) -> &[f64] {
        &self.d_tilde
    }

    pub fn evaluate(&self, kind: LossKind, s: &AssignmentMatrix) -> Result<LossValueGrad> {
        match kind {
            LossKind::Jb => jb_loss(s, self.eig_floor),
            LossKind::MinCut => mincut_loss(s, &self.a_norm, &self.d_tilde),
            LossKind::Dmon => dmon_loss(s, self.graph, self.dmon_normalize),
        }
    }
}
