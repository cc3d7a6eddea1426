//! Undirected weighted graphs, the symmetric-normalized propagation operator,
//! and the local quadratic variation (LQV) of a node signal.
//!
//! For an adjacency `A` with degrees `d`, the normalized adjacency is
//! `D^{-1/2} A D^{-1/2}` and the propagation operator used by every
//! message-passing layer is
//!
//! ```text
//! P = I - δ (I - D^{-1/2} A D^{-1/2})
//! ```
//!
//! A node with degree 0 has an all-zero row and column in the normalized
//! adjacency, so `P` scales it by `1 - δ`.

mod csr;
mod edgelist;
mod sbm;

pub use csr::CsrMatrix;
pub use edgelist::{edge_list_text, parse_edge_list, read_edge_list, write_edge_list};
pub use sbm::{sbm_generate, SbmConfig};

use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;

/// Undirected graph without self-loops, both orientations of every edge stored.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseGraph {
    adj: CsrMatrix,
}

impl SparseGraph {
    /// Builds a graph from unit-weight edges. See [`from_weighted_edges`](Self::from_weighted_edges).
    pub fn from_edges<I>(num_nodes: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        Self::from_weighted_edges(num_nodes, edges.into_iter().map(|(u, v)| (u, v, 1.0)))
    }

    /// Builds a graph from `(u, v, w)` triples.
    ///
    /// Edges are symmetrized, self-loops dropped, and repeated pairs (in either
    /// orientation) collapse to the first occurrence's weight.
    pub fn from_weighted_edges<I>(num_nodes: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, f64)>,
    {
        let mut pairs: Vec<(usize, usize, f64)> = Vec::new();
        for (u, v, w) in edges {
            if u >= num_nodes || v >= num_nodes {
                return Err(Error::input(format!(
                    "edge ({u}, {v}) out of range for {num_nodes} nodes"
                )));
            }
            if !(w > 0.0 && w.is_finite()) {
                return Err(Error::input(format!(
                    "edge ({u}, {v}) has weight {w}; weights must be positive and finite"
                )));
            }
            if u != v {
                pairs.push((u.min(v), u.max(v), w));
            }
        }
        // Stable sort keeps the first occurrence ahead of its duplicates.
        pairs.sort_by_key(|&(u, v, _)| (u, v));
        pairs.dedup_by_key(|&mut (u, v, _)| (u, v));

        let mut counts = vec![0usize; num_nodes];
        for &(u, v, _) in &pairs {
            counts[u] += 1;
            counts[v] += 1;
        }
        let mut row_offsets = Vec::with_capacity(num_nodes + 1);
        row_offsets.push(0);
        for c in &counts {
            row_offsets.push(row_offsets.last().unwrap() + c);
        }
        let nnz = *row_offsets.last().unwrap();
        let mut col_indices = vec![0usize; nnz];
        let mut weights = vec![0.0; nnz];
        let mut cursor = row_offsets[..num_nodes].to_vec();
        // Pairs are sorted by (u, v); emitting lower-triangle entries first
        // keeps each row ascending.
        for &(u, v, w) in &pairs {
            col_indices[cursor[v]] = u;
            weights[cursor[v]] = w;
            cursor[v] += 1;
        }
        for &(u, v, w) in &pairs {
            col_indices[cursor[u]] = v;
            weights[cursor[u]] = w;
            cursor[u] += 1;
        }
        let adj = CsrMatrix::from_raw(num_nodes, num_nodes, row_offsets, col_indices, weights)?;
        Ok(SparseGraph { adj })
    }

    /// Wraps an adjacency matrix after checking the graph invariants.
    pub fn from_adjacency(adj: CsrMatrix) -> Result<Self> {
        if adj.rows() != adj.cols() {
            return Err(Error::input("adjacency must be square"));
        }
        for r in 0..adj.rows() {
            for (c, w) in adj.row(r) {
                if c == r {
                    return Err(Error::input(format!("self-loop at node {r}")));
                }
                if w <= 0.0 {
                    return Err(Error::input(format!("non-positive weight at ({r}, {c})")));
                }
            }
        }
        if !adj.is_symmetric() {
            return Err(Error::input("adjacency is not symmetric"));
        }
        Ok(SparseGraph { adj })
    }

    pub fn num_nodes(&self) -> usize {
        self.adj.rows()
    }

    /// Number of undirected edges.
    pub fn num_edges(&self) -> usize {
        self.adj.nnz() / 2
    }

    /// Number of stored directed entries, `2E`.
    pub fn num_entries(&self) -> usize {
        self.adj.nnz()
    }

    pub fn adjacency(&self) -> &CsrMatrix {
        &self.adj
    }

    /// `(neighbor, weight)` pairs of node `i`, ascending by neighbor.
    pub fn neighbors(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.adj.row(i)
    }

    /// Each undirected edge once as `(u, v, w)` with `u < v`, in row order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.num_nodes()).flat_map(move |u| {
            self.adj
                .row(u)
                .filter(move |&(v, _)| v > u)
                .map(move |(v, w)| (u, v, w))
        })
    }

    /// Weighted degrees `d_i = Σ_j a_ij`.
    pub fn degrees(&self) -> Vec<f64> {
        self.adj.row_sums()
    }

    /// Sum of all degrees, which is `2E` for unit weights.
    pub fn total_degree(&self) -> f64 {
        self.adj.values().iter().sum()
    }

    pub fn is_unweighted(&self) -> bool {
        self.adj.values().iter().all(|&w| w == 1.0)
    }

    /// `D^{-1/2} A D^{-1/2}`; isolated nodes get zero rows and columns.
    pub fn normalized_adjacency(&self) -> CsrMatrix {
        let inv_sqrt = inv_sqrt_degrees(&self.degrees());
        let values = (0..self.num_nodes())
            .flat_map(|r| {
                let inv_sqrt = &inv_sqrt;
                self.adj.row(r).map(move |(c, w)| w * inv_sqrt[r] * inv_sqrt[c])
            })
            .collect();
        CsrMatrix::from_raw(
            self.num_nodes(),
            self.num_nodes(),
            self.adj.row_offsets().to_vec(),
            self.adj.col_indices().to_vec(),
            values,
        )
        .expect("same sparsity pattern as a valid adjacency")
    }

    /// Local quadratic variation `½ Σ_i Σ_j a_ij (x_i/√d_i − x_j/√d_j)²`.
    ///
    /// Sums over ordered pairs, so each undirected edge contributes twice
    /// against the leading ½. Nodes without edges contribute nothing.
    pub fn lqv(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.num_nodes() {
            return Err(Error::input(format!(
                "lqv: signal has length {}, graph has {} nodes",
                x.len(),
                self.num_nodes()
            )));
        }
        let inv_sqrt = inv_sqrt_degrees(&self.degrees());
        let mut total = 0.0;
        for i in 0..self.num_nodes() {
            for (j, w) in self.adj.row(i) {
                let diff = x[i] * inv_sqrt[i] - x[j] * inv_sqrt[j];
                total += w * diff * diff;
            }
        }
        Ok(0.5 * total)
    }
}

fn inv_sqrt_degrees(degrees: &[f64]) -> Vec<f64> {
    degrees
        .iter()
        .map(|&d| if d > 0.0 { 1.0 / d.sqrt() } else { 0.0 })
        .collect()
}

/// The message-passing operator `I - δ (I - D^{-1/2} A D^{-1/2})`, stored sparse.
#[derive(Debug, Clone, PartialEq)]
pub struct PropagationOperator {
    matrix: CsrMatrix,
    delta: f64,
}

impl PropagationOperator {
    pub fn new(g: &SparseGraph, delta: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&delta) {
            return Err(Error::input(format!("delta must lie in [0, 1], got {delta}")));
        }
        let n = g.num_nodes();
        let norm = g.normalized_adjacency();
        let diag = 1.0 - delta;

        let mut row_offsets = Vec::with_capacity(n + 1);
        let mut col_indices = Vec::with_capacity(norm.nnz() + n);
        let mut values = Vec::with_capacity(norm.nnz() + n);
        row_offsets.push(0);
        for r in 0..n {
            let mut placed = false;
            for (c, v) in norm.row(r) {
                if !placed && c > r {
                    col_indices.push(r);
                    values.push(diag);
                    placed = true;
                }
                col_indices.push(c);
                values.push(delta * v);
            }
            if !placed {
                col_indices.push(r);
                values.push(diag);
            }
            row_offsets.push(col_indices.len());
        }
        let matrix = CsrMatrix::from_raw(n, n, row_offsets, col_indices, values)?;
        Ok(PropagationOperator { matrix, delta })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn matrix(&self) -> &CsrMatrix {
        &self.matrix
    }

    pub fn num_nodes(&self) -> usize {
        self.matrix.rows()
    }

    pub fn apply(&self, x: &DenseMatrix) -> Result<DenseMatrix> {
        self.matrix.spmm(x)
    }
}

/// Convenience wrapper for [`PropagationOperator::new`].
pub fn propagation_operator(g: &SparseGraph, delta: f64) -> Result<PropagationOperator> {
    PropagationOperator::new(g, delta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn path3() -> SparseGraph {
        SparseGraph::from_edges(3, [(0, 1), (1, 2)]).unwrap()
    }

    fn clique(n: usize) -> SparseGraph {
        let edges = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v)));
        SparseGraph::from_edges(n, edges).unwrap()
    }

    pub(crate) fn random_graph(n: usize, p: f64, rng: &mut impl Rng) -> SparseGraph {
        let mut edges = Vec::new();
        for u in 0..n {
            for v in u + 1..n {
                if rng.gen_bool(p) {
                    edges.push((u, v, rng.gen_range(0.1..2.0)));
                }
            }
        }
        SparseGraph::from_weighted_edges(n, edges).unwrap()
    }

    /// Dense `L = diag(1[d>0]) - D^{-1/2} A D^{-1/2}`.
    fn dense_laplacian(g: &SparseGraph) -> DenseMatrix {
        let n = g.num_nodes();
        let d = g.degrees();
        let a = g.adjacency().to_dense();
        let mut l = DenseMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                let norm = if d[i] > 0.0 && d[j] > 0.0 {
                    a[(i, j)] / (d[i] * d[j]).sqrt()
                } else {
                    0.0
                };
                let eye = if i == j && d[i] > 0.0 { 1.0 } else { 0.0 };
                l[(i, j)] = eye - norm;
            }
        }
        l
    }

    fn quad_form(m: &DenseMatrix, x: &[f64]) -> f64 {
        let n = x.len();
        (0..n)
            .map(|i| (0..n).map(|j| x[i] * m[(i, j)] * x[j]).sum::<f64>())
            .sum()
    }

    #[test]
    fn path_graph_degrees() {
        let g = path3();
        assert_eq!(g.degrees(), vec![1.0, 2.0, 1.0]);
        assert_eq!(g.num_edges(), 2);
        assert_eq!(g.num_entries(), 4);
    }

    #[test]
    fn duplicate_orientations_collapse() {
        let g = SparseGraph::from_edges(2, [(0, 1), (1, 0)]).unwrap();
        assert_eq!(g.num_entries(), 2);
    }

    #[test]
    fn duplicates_keep_first_weight() {
        let g = SparseGraph::from_weighted_edges(2, [(1, 0, 2.0), (0, 1, 5.0)]).unwrap();
        assert_eq!(g.degrees(), vec![2.0, 2.0]);
    }

    #[test]
    fn self_loop_dropped() {
        let g = SparseGraph::from_edges(2, [(0, 0)]).unwrap();
        assert_eq!(g.num_entries(), 0);
        assert_eq!(g.degrees(), vec![0.0, 0.0]);
    }

    #[test]
    fn rejects_bad_edges() {
        assert!(matches!(
            SparseGraph::from_edges(2, [(0, 2)]),
            Err(Error::Input(_))
        ));
        assert!(SparseGraph::from_weighted_edges(2, [(0, 1, 0.0)]).is_err());
        assert!(SparseGraph::from_weighted_edges(2, [(0, 1, -1.0)]).is_err());
    }

    #[test]
    fn weighted_degree() {
        let g = SparseGraph::from_weighted_edges(2, [(0, 1, 2.5)]).unwrap();
        assert_eq!(g.degrees(), vec![2.5, 2.5]);
    }

    #[test]
    fn invariants_hold_on_random_input() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let edges: Vec<_> = (0..200)
            .map(|_| (rng.gen_range(0..25), rng.gen_range(0..25)))
            .collect();
        let g = SparseGraph::from_edges(25, edges).unwrap();
        let a = g.adjacency();
        assert!(a.is_symmetric());
        for r in 0..25 {
            let cols: Vec<usize> = a.row(r).map(|(c, _)| c).collect();
            assert!(cols.windows(2).all(|w| w[0] < w[1]));
            assert!(!cols.contains(&r));
        }
        assert!(SparseGraph::from_adjacency(a.clone()).is_ok());
    }

    #[test]
    #[allow(clippy::approx_constant)]
    fn normalized_adjacency_examples() {
        let n = path3().normalized_adjacency();
        let s = 0.5f64.sqrt();
        for (r, c) in [(0, 1), (1, 0), (1, 2), (2, 1)] {
            assert_abs_diff_eq!(n.get(r, c), s, epsilon = 1e-15);
        }
        assert_abs_diff_eq!(s, 0.70711, epsilon = 1e-5);

        let n = SparseGraph::from_edges(2, [(0, 1)]).unwrap().normalized_adjacency();
        assert_eq!(n.get(0, 1), 1.0);

        let n = clique(4).normalized_adjacency();
        for r in 0..4 {
            for c in 0..4 {
                let expect = if r == c { 0.0 } else { 1.0 / 3.0 };
                assert_abs_diff_eq!(n.get(r, c), expect, epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn isolated_nodes_have_zero_normalized_rows() {
        let g = SparseGraph::from_edges(3, [(0, 1)]).unwrap();
        let n = g.normalized_adjacency();
        assert_eq!(n.row(2).count(), 0);
        let p = PropagationOperator::new(&g, 0.85).unwrap();
        assert_abs_diff_eq!(p.matrix().get(2, 2), 0.15, epsilon = 1e-15);
    }

    #[test]
    fn propagation_operator_examples() {
        let g = path3();
        let p0 = PropagationOperator::new(&g, 0.0).unwrap();
        assert_eq!(p0.matrix().to_dense().sub(&DenseMatrix::identity(3)).max_abs(), 0.0);

        let p = PropagationOperator::new(&g, 0.85).unwrap();
        let d = p.matrix().to_dense();
        for i in 0..3 {
            assert_abs_diff_eq!(d[(i, i)], 0.15, epsilon = 1e-15);
        }
        let off = 0.85 / 2f64.sqrt();
        assert_abs_diff_eq!(d[(0, 1)], off, epsilon = 1e-15);
        assert_abs_diff_eq!(d[(1, 2)], off, epsilon = 1e-15);
        assert_abs_diff_eq!(off, 0.60104, epsilon = 1e-5);
        assert!(p.matrix().is_symmetric());

        let e = SparseGraph::from_edges(2, [(0, 1)]).unwrap();
        let p1 = PropagationOperator::new(&e, 1.0).unwrap().matrix().to_dense();
        assert_eq!(p1[(0, 0)], 0.0);
        assert_eq!(p1[(0, 1)], 1.0);
    }

    #[test]
    fn delta_one_is_normalized_adjacency() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let g = random_graph(12, 0.3, &mut rng);
        let p = PropagationOperator::new(&g, 1.0).unwrap().matrix().to_dense();
        let n = g.normalized_adjacency().to_dense();
        assert!(p.sub(&n).max_abs() < 1e-15);
    }

    #[test]
    fn delta_out_of_range() {
        let g = path3();
        assert!(matches!(PropagationOperator::new(&g, 1.5), Err(Error::Input(_))));
        assert!(PropagationOperator::new(&g, -0.1).is_err());
        assert!(PropagationOperator::new(&g, f64::NAN).is_err());
    }

    #[test]
    fn spmm_examples() {
        let ones = DenseMatrix::filled(3, 1, 1.0);
        let y = path3().normalized_adjacency().spmm(&ones).unwrap();
        let s = 0.5f64.sqrt();
        assert_abs_diff_eq!(y[(0, 0)], s, epsilon = 1e-15);
        assert_abs_diff_eq!(y[(1, 0)], 2.0 * s, epsilon = 1e-15);
        assert_abs_diff_eq!(y[(2, 0)], s, epsilon = 1e-15);

        let x = DenseMatrix::from_rows(&[[1.0, 2.0], [3.0, 4.0], [5.0, 6.0]]).unwrap();
        assert_eq!(CsrMatrix::identity(3).spmm(&x).unwrap(), x);
        assert_eq!(
            CsrMatrix::zeros(3, 3).spmm(&x).unwrap(),
            DenseMatrix::zeros(3, 2)
        );
        assert!(CsrMatrix::identity(2).spmm(&x).is_err());
    }

    #[test]
    fn spmm_matches_dense_and_sequential() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let g = random_graph(40, 0.2, &mut rng);
        let p = PropagationOperator::new(&g, 0.85).unwrap();
        let data = (0..40 * 7).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let x = DenseMatrix::from_vec(40, 7, data).unwrap();
        let sparse = p.apply(&x).unwrap();
        let dense = p.matrix().to_dense().matmul(&x).unwrap();
        assert!(sparse.sub(&dense).max_abs() < 1e-14);
        assert_eq!(sparse, p.matrix().spmm_seq(&x).unwrap());
    }

    #[test]
    fn lqv_examples() {
        let e = SparseGraph::from_edges(2, [(0, 1)]).unwrap();
        assert_abs_diff_eq!(e.lqv(&[1.0, -1.0]).unwrap(), 4.0, epsilon = 1e-15);

        let g = path3();
        assert_abs_diff_eq!(g.lqv(&[1.0, 0.0, 0.0]).unwrap(), 1.0, epsilon = 1e-15);
        let l = dense_laplacian(&g);
        assert_abs_diff_eq!(quad_form(&l, &[1.0, 0.0, 0.0]), 1.0, epsilon = 1e-15);

        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let g = random_graph(15, 0.3, &mut rng);
        let x: Vec<f64> = g.degrees().iter().map(|d| d.sqrt()).collect();
        assert!(g.lqv(&x).unwrap().abs() < 1e-12);
        assert!(g.lqv(&[0.0; 3]).is_err());
    }

    #[test]
    fn lqv_matches_laplacian_quadratic_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..20 {
            let n = rng.gen_range(2..20);
            let g = random_graph(n, 0.25, &mut rng);
            let l = dense_laplacian(&g);
            let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let lqv = g.lqv(&x).unwrap();
            let oracle = quad_form(&l, &x);
            assert!(lqv >= 0.0);
            assert!((lqv - oracle).abs() <= 1e-10 * oracle.abs().max(1e-300));
        }
    }

    #[test]
    fn operator_spectrum_within_bounds() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for &delta in &[0.0, 0.25, 0.5, 0.85, 1.0] {
            let g = random_graph(10, 0.4, &mut rng);
            let p = PropagationOperator::new(&g, delta).unwrap();
            let eig = crate::linalg::symmetric_eig(&p.matrix().to_dense(), 1e-12).unwrap();
            for &l in &eig.eigenvalues {
                assert!(l >= 1.0 - 2.0 * delta - 1e-12 && l <= 1.0 + 1e-12, "{l} for δ={delta}");
            }
        }
    }

    #[test]
    fn edges_iterates_upper_triangle() {
        let g = SparseGraph::from_weighted_edges(4, [(2, 0, 1.5), (3, 1, 1.0)]).unwrap();
        let e: Vec<_> = g.edges().collect();
        assert_eq!(e, vec![(0, 2, 1.5), (1, 3, 1.0)]);
    }
}
