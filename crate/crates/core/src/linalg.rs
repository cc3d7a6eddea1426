//! Dense row-major matrices and the symmetric kernels the losses need.
//!
//! Assignment matrices are tall and thin (N×K with K small), so the only
//! spectral work is on K×K Gram matrices. A cyclic Jacobi sweep is plenty
//! for that size and gives orthogonal eigenvectors to working precision.

use std::fmt;
use std::ops::{Index, IndexMut};

use crate::error::{Error, Result};
use crate::par;

/// Default clamp for eigenvalues of a PSD matrix before inversion.
pub const DEFAULT_EIG_FLOOR: f64 = 1e-10;

const JACOBI_MAX_SWEEPS: usize = 100;

#[derive(Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl fmt::Debug for DenseMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "DenseMatrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows.min(8) {
            writeln!(f, "  {:?}", &self.row(r)[..self.cols.min(8)])?;
        }
        write!(f, "]")
    }
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        DenseMatrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn filled(rows: usize, cols: usize, value: f64) -> Self {
        DenseMatrix {
            rows,
            cols,
            data: vec![value; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_diag(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    /// Builds a matrix from row-major data. Rejects a length mismatch or non-finite entries.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::input(format!(
                "matrix data has {} entries, expected {rows}x{cols}",
                data.len()
            )));
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::input(format!(
                "non-finite matrix entry at ({}, {})",
                pos / cols.max(1),
                pos % cols.max(1)
            )));
        }
        Ok(DenseMatrix { rows, cols, data })
    }

    /// Builds a matrix from equal-length rows.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (i, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != cols {
                return Err(Error::input(format!(
                    "row {i} has {} entries, expected {cols}",
                    r.len()
                )));
            }
            data.extend_from_slice(r);
        }
        Self::from_vec(rows.len(), cols, data)
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    #[inline]
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, r: usize) -> &mut [f64] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn transpose(&self) -> DenseMatrix {
        let mut t = Self::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t[(c, r)] = self[(r, c)];
            }
        }
        t
    }

    /// Returns a copy with rows reordered so that row `i` of the result is row `perm[i]` of `self`.
    pub fn permute_rows(&self, perm: &[usize]) -> DenseMatrix {
        let mut out = Self::zeros(perm.len(), self.cols);
        for (i, &src) in perm.iter().enumerate() {
            out.row_mut(i).copy_from_slice(self.row(src));
        }
        out
    }

    /// Returns a copy with columns reordered so that column `j` of the result is column `perm[j]`.
    pub fn permute_cols(&self, perm: &[usize]) -> DenseMatrix {
        let mut out = Self::zeros(self.rows, perm.len());
        for r in 0..self.rows {
            for (j, &src) in perm.iter().enumerate() {
                out[(r, j)] = self[(r, src)];
            }
        }
        out
    }

    pub fn scale(&self, alpha: f64) -> DenseMatrix {
        self.map(|v| alpha * v)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> DenseMatrix {
        DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    /// `self += alpha * other`.
    pub fn axpy(&mut self, alpha: f64, other: &DenseMatrix) {
        assert_eq!(self.shape(), other.shape(), "axpy shape mismatch");
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += alpha * b;
        }
    }

    pub fn sub(&self, other: &DenseMatrix) -> DenseMatrix {
        let mut out = self.clone();
        out.axpy(-1.0, other);
        out
    }

    pub fn add(&self, other: &DenseMatrix) -> DenseMatrix {
        let mut out = self.clone();
        out.axpy(1.0, other);
        out
    }

    /// Frobenius inner product `Σ a_ij b_ij`.
    pub fn dot(&self, other: &DenseMatrix) -> f64 {
        assert_eq!(self.shape(), other.shape(), "dot shape mismatch");
        self.data.iter().zip(&other.data).map(|(a, b)| a * b).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn trace(&self) -> f64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.rows).map(|r| self.row(r).iter().sum()).collect()
    }

    pub fn col_sums(&self) -> Vec<f64> {
        let mut sums = vec![0.0; self.cols];
        for r in 0..self.rows {
            for (s, v) in sums.iter_mut().zip(self.row(r)) {
                *s += v;
            }
        }
        sums
    }

    /// Largest entry-wise asymmetry `max |m_ij - m_ji|`.
    pub fn asymmetry(&self) -> f64 {
        let mut worst = 0.0f64;
        for r in 0..self.rows {
            for c in r + 1..self.cols.min(self.rows) {
                worst = worst.max((self[(r, c)] - self[(c, r)]).abs());
            }
        }
        worst
    }

    /// `self · rhs`.
    pub fn matmul(&self, rhs: &DenseMatrix) -> Result<DenseMatrix> {
        self.check_inner(rhs.rows, "matmul", rhs)?;
        let mut out = Self::zeros(self.rows, rhs.cols);
        par::for_each_row(&mut out.data, rhs.cols, |i, out_row| {
            matmul_row(self.row(i), rhs, out_row)
        });
        Ok(out)
    }

    /// Sequential `self · rhs`, used as the baseline in benchmarks.
    pub fn matmul_seq(&self, rhs: &DenseMatrix) -> Result<DenseMatrix> {
        self.check_inner(rhs.rows, "matmul", rhs)?;
        let mut out = Self::zeros(self.rows, rhs.cols);
        par::for_each_row_seq(&mut out.data, rhs.cols, |i, out_row| {
            matmul_row(self.row(i), rhs, out_row)
        });
        Ok(out)
    }

    /// `selfᵀ · rhs` without forming the transpose.
    ///
    /// Each output entry sums over rows of both operands in ascending row order.
    pub fn t_matmul(&self, rhs: &DenseMatrix) -> Result<DenseMatrix> {
        if self.rows != rhs.rows {
            return Err(Error::input(format!(
                "t_matmul: {}x{} transposed times {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut out = Self::zeros(self.cols, rhs.cols);
        if rhs.cols == 0 {
            return Ok(out);
        }
        // Blocks of output rows, so each task streams both operands once.
        par::for_each_row(&mut out.data, T_MATMUL_BLOCK * rhs.cols, |blk, block| {
            let first = blk * T_MATMUL_BLOCK;
            for n in 0..self.rows {
                let a_row = &self.row(n)[first..];
                let b_row = rhs.row(n);
                for (out_row, &a) in block.chunks_mut(rhs.cols).zip(a_row) {
                    if a != 0.0 {
                        for (o, b) in out_row.iter_mut().zip(b_row) {
                            *o += a * b;
                        }
                    }
                }
            }
        });
        Ok(out)
    }

    /// `self · rhsᵀ` without forming the transpose.
    pub fn matmul_t(&self, rhs: &DenseMatrix) -> Result<DenseMatrix> {
        if self.cols != rhs.cols {
            return Err(Error::input(format!(
                "matmul_t: {}x{} times transposed {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        self.matmul(&rhs.transpose())
    }

    /// Gram matrix `selfᵀ · self`, symmetrized exactly.
    pub fn gram(&self) -> DenseMatrix {
        let mut g = self.t_matmul(self).expect("gram shapes always agree");
        for r in 0..g.rows {
            for c in r + 1..g.cols {
                let v = 0.5 * (g[(r, c)] + g[(c, r)]);
                g[(r, c)] = v;
                g[(c, r)] = v;
            }
        }
        g
    }

    fn check_inner(&self, rhs_rows: usize, what: &str, rhs: &DenseMatrix) -> Result<()> {
        if self.cols != rhs_rows {
            return Err(Error::input(format!(
                "{what}: {}x{} times {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        Ok(())
    }
}

const T_MATMUL_BLOCK: usize = 8;

#[inline]
fn matmul_row(a_row: &[f64], rhs: &DenseMatrix, out_row: &mut [f64]) {
    for (k, &a) in a_row.iter().enumerate() {
        if a == 0.0 {
            continue;
        }
        for (o, b) in out_row.iter_mut().zip(rhs.row(k)) {
            *o += a * b;
        }
    }
}

impl Index<(usize, usize)> for DenseMatrix {
    type Output = f64;

    #[inline]
    fn index(&self, (r, c): (usize, usize)) -> &f64 {
        debug_assert!(r < self.rows && c < self.cols);
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for DenseMatrix {
    #[inline]
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut f64 {
        debug_assert!(r < self.rows && c < self.cols);
        &mut self.data[r * self.cols + c]
    }
}

/// Eigenvalues in ascending order with matching eigenvector columns.
#[derive(Debug, Clone)]
pub struct SymmetricEigen {
    pub eigenvalues: Vec<f64>,
    /// Column `j` is the unit eigenvector for `eigenvalues[j]`.
    pub eigenvectors: DenseMatrix,
}

impl SymmetricEigen {
    /// `V · diag(f(λ)) · Vᵀ`.
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> f64) -> DenseMatrix {
        let v = &self.eigenvectors;
        let n = v.rows();
        let scaled: Vec<f64> = self.eigenvalues.iter().map(|&l| f(l)).collect();
        let mut out = DenseMatrix::zeros(n, n);
        for r in 0..n {
            for c in r..n {
                let s: f64 = (0..n).map(|k| v[(r, k)] * scaled[k] * v[(c, k)]).sum();
                out[(r, c)] = s;
                out[(c, r)] = s;
            }
        }
        out
    }
}

/// Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
///
/// The input must be square with `max |m_ij - m_ji| <= symmetry_tol`; the
/// strictly lower triangle is ignored after that check.
pub fn symmetric_eig(m: &DenseMatrix, symmetry_tol: f64) -> Result<SymmetricEigen> {
    if !m.is_square() {
        return Err(Error::input(format!(
            "symmetric_eig: matrix is {}x{}, not square",
            m.rows(),
            m.cols()
        )));
    }
    if !m.is_finite() {
        return Err(Error::input("symmetric_eig: non-finite entry"));
    }
    let asym = m.asymmetry();
    if asym > symmetry_tol {
        return Err(Error::input(format!(
            "symmetric_eig: asymmetry {asym:e} exceeds tolerance {symmetry_tol:e}"
        )));
    }

    let n = m.rows();
    let mut a = m.clone();
    for r in 0..n {
        for c in 0..r {
            a[(r, c)] = a[(c, r)];
        }
    }
    let mut v = DenseMatrix::identity(n);
    let scale = a.frobenius_norm();

    let mut converged = n <= 1 || scale == 0.0;
    for _ in 0..JACOBI_MAX_SWEEPS {
        if converged {
            break;
        }
        let off: f64 = (0..n)
            .flat_map(|r| (r + 1..n).map(move |c| (r, c)))
            .map(|(r, c)| a[(r, c)] * a[(r, c)])
            .sum::<f64>()
            .sqrt();
        if off <= f64::EPSILON * scale {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let app = a[(p, p)];
                let aqq = a[(q, q)];
                // Rotation angle chosen to annihilate a_pq (Golub & Van Loan 8.5.2).
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;

                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
                a[(p, q)] = 0.0;
                a[(q, p)] = 0.0;
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    if !converged {
        return Err(Error::numeric(format!(
            "symmetric_eig: Jacobi did not converge in {JACOBI_MAX_SWEEPS} sweeps"
        )));
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].total_cmp(&a[(j, j)]));
    let eigenvalues = order.iter().map(|&i| a[(i, i)]).collect();
    let eigenvectors = v.permute_cols(&order);
    Ok(SymmetricEigen {
        eigenvalues,
        eigenvectors,
    })
}

fn psd_eigen(m: &DenseMatrix, eig_floor: f64) -> Result<SymmetricEigen> {
    let tol = 1e-9 * m.max_abs().max(1.0);
    let eig = symmetric_eig(m, tol)?;
    if let Some(&lowest) = eig.eigenvalues.first() {
        if lowest < -eig_floor {
            return Err(Error::input(format!(
                "matrix is not positive semi-definite: eigenvalue {lowest:e} below -{eig_floor:e}"
            )));
        }
    }
    Ok(eig)
}

/// Principal square root of a symmetric PSD matrix.
///
/// Eigenvalues in `[-eig_floor, 0)` are treated as zero.
pub fn spd_sqrt(m: &DenseMatrix, eig_floor: f64) -> Result<DenseMatrix> {
    let eig = psd_eigen(m, eig_floor)?;
    Ok(eig.reconstruct_with(|l| l.max(0.0).sqrt()))
}

/// Inverse principal square root with eigenvalues clamped from below at `eig_floor`.
pub fn spd_inv_sqrt(m: &DenseMatrix, eig_floor: f64) -> Result<DenseMatrix> {
    let eig = psd_eigen(m, eig_floor)?;
    Ok(eig.reconstruct_with(|l| 1.0 / l.max(eig_floor).sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_matrix(rows: usize, cols: usize, rng: &mut impl Rng) -> DenseMatrix {
        let data = (0..rows * cols).map(|_| rng.gen_range(-1.0..1.0)).collect();
        DenseMatrix::from_vec(rows, cols, data).unwrap()
    }

    fn naive_matmul(a: &DenseMatrix, b: &DenseMatrix) -> DenseMatrix {
        let mut out = DenseMatrix::zeros(a.rows(), b.cols());
        for i in 0..a.rows() {
            for j in 0..b.cols() {
                out[(i, j)] = (0..a.cols()).map(|k| a[(i, k)] * b[(k, j)]).sum();
            }
        }
        out
    }

    #[test]
    fn products_match_naive_triple_loop() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let a = random_matrix(9, 5, &mut rng);
        let b = random_matrix(5, 4, &mut rng);
        let c = random_matrix(9, 4, &mut rng);
        let expect = naive_matmul(&a, &b);
        assert!(a.matmul(&b).unwrap().sub(&expect).max_abs() < 1e-14);
        assert!(a.matmul_seq(&b).unwrap().sub(&expect).max_abs() < 1e-14);
        let atc = naive_matmul(&a.transpose(), &c);
        assert!(a.t_matmul(&c).unwrap().sub(&atc).max_abs() < 1e-14);
        let abt = naive_matmul(&a, &a.transpose());
        assert!(a.matmul_t(&a).unwrap().sub(&abt).max_abs() < 1e-14);
    }

    #[test]
    fn shape_errors() {
        let a = DenseMatrix::zeros(2, 3);
        assert!(a.matmul(&DenseMatrix::zeros(2, 3)).is_err());
        assert!(a.t_matmul(&DenseMatrix::zeros(3, 3)).is_err());
        assert!(DenseMatrix::from_vec(2, 2, vec![1.0; 3]).is_err());
        assert!(DenseMatrix::from_vec(1, 1, vec![f64::NAN]).is_err());
    }

    #[test]
    fn eig_of_diagonal_is_sorted_diagonal() {
        let e = symmetric_eig(&DenseMatrix::from_diag(&[3.0, 1.0, 2.0]), 0.0).unwrap();
        assert_eq!(e.eigenvalues, vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn eig_two_by_two() {
        // Characteristic polynomial (2-λ)² - 1 has roots 1 and 3.
        let m = DenseMatrix::from_rows(&[[2.0, 1.0], [1.0, 2.0]]).unwrap();
        let e = symmetric_eig(&m, 0.0).unwrap();
        assert_abs_diff_eq!(e.eigenvalues[0], 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(e.eigenvalues[1], 3.0, epsilon = 1e-14);
    }

    #[test]
    fn eig_of_zero_matrix() {
        let e = symmetric_eig(&DenseMatrix::zeros(4, 4), 0.0).unwrap();
        assert!(e.eigenvalues.iter().all(|&l| l == 0.0));
        let vtv = e.eigenvectors.t_matmul(&e.eigenvectors).unwrap();
        assert!(vtv.sub(&DenseMatrix::identity(4)).max_abs() < 1e-15);
    }

    #[test]
    fn eig_rejects_bad_input() {
        assert!(matches!(
            symmetric_eig(&DenseMatrix::zeros(2, 3), 0.0),
            Err(Error::Input(_))
        ));
        let m = DenseMatrix::from_rows(&[[1.0, 2.0], [0.0, 1.0]]).unwrap();
        assert!(matches!(symmetric_eig(&m, 1e-6), Err(Error::Input(_))));
        assert!(symmetric_eig(&m, 3.0).is_ok());
    }

    #[test]
    fn eig_reconstructs_random_symmetric() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in [1, 2, 3, 5, 8, 16] {
            let r = random_matrix(n, n, &mut rng);
            let m = r.add(&r.transpose());
            let e = symmetric_eig(&m, 1e-12).unwrap();
            let back = e.reconstruct_with(|l| l);
            assert!(back.sub(&m).frobenius_norm() <= 1e-8 * m.frobenius_norm());
            let vtv = e.eigenvectors.t_matmul(&e.eigenvectors).unwrap();
            assert!(vtv.sub(&DenseMatrix::identity(n)).max_abs() < 1e-10);
            assert!(e.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn sqrt_examples() {
        let s = spd_sqrt(&DenseMatrix::from_diag(&[4.0, 9.0]), DEFAULT_EIG_FLOOR).unwrap();
        assert!(s.sub(&DenseMatrix::from_diag(&[2.0, 3.0])).max_abs() < 1e-15);

        // V·diag(1, √3)·Vᵀ with V the normalized (1,-1), (1,1) basis.
        let m = DenseMatrix::from_rows(&[[2.0, 1.0], [1.0, 2.0]]).unwrap();
        let s = spd_sqrt(&m, DEFAULT_EIG_FLOOR).unwrap();
        let hi = (1.0 + 3f64.sqrt()) / 2.0;
        let lo = (3f64.sqrt() - 1.0) / 2.0;
        assert_abs_diff_eq!(s[(0, 0)], hi, epsilon = 1e-12);
        assert_abs_diff_eq!(s[(0, 1)], lo, epsilon = 1e-12);
        assert_abs_diff_eq!(s[(1, 0)], lo, epsilon = 1e-12);
        assert_abs_diff_eq!(hi, 1.36603, epsilon = 1e-5);
        assert_abs_diff_eq!(lo, 0.36603, epsilon = 1e-5);

        let s = spd_sqrt(&DenseMatrix::from_diag(&[2.0, 2.0]), DEFAULT_EIG_FLOOR).unwrap();
        assert_abs_diff_eq!(s.trace(), 2.0 * 2f64.sqrt(), epsilon = 1e-14);
    }

    #[test]
    fn sqrt_rejects_negative_definite() {
        let m = DenseMatrix::from_diag(&[1.0, -0.5]);
        assert!(matches!(spd_sqrt(&m, 1e-10), Err(Error::Input(_))));
        // A roundoff-sized negative is tolerated.
        let m = DenseMatrix::from_diag(&[1.0, -1e-12]);
        let s = spd_sqrt(&m, 1e-10).unwrap();
        assert_eq!(s[(1, 1)], 0.0);
    }

    #[test]
    fn inv_sqrt_examples() {
        let s = spd_inv_sqrt(&DenseMatrix::from_diag(&[4.0, 9.0]), DEFAULT_EIG_FLOOR).unwrap();
        assert_abs_diff_eq!(s[(0, 0)], 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(s[(1, 1)], 1.0 / 3.0, epsilon = 1e-15);

        let s = spd_inv_sqrt(&DenseMatrix::from_diag(&[2.0, 0.0]), 1e-10).unwrap();
        assert_abs_diff_eq!(s[(0, 0)], 2f64.sqrt().recip(), epsilon = 1e-15);
        assert_abs_diff_eq!(s[(1, 1)], 1e5, epsilon = 1e-6);

        let s = spd_inv_sqrt(&DenseMatrix::identity(3), DEFAULT_EIG_FLOOR).unwrap();
        assert!(s.sub(&DenseMatrix::identity(3)).max_abs() < 1e-15);
    }
}
