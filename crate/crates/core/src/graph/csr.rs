use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;
use crate::par;

/// Sparse matrix in compressed sparse row form.
///
/// Column indices are sorted and unique within each row.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    rows: usize,
    cols: usize,
    row_offsets: Vec<usize>,
    col_indices: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Assembles a matrix from raw CSR arrays, checking the layout.
    pub fn from_raw(
        rows: usize,
        cols: usize,
        row_offsets: Vec<usize>,
        col_indices: Vec<usize>,
        values: Vec<f64>,
    ) -> Result<Self> {
        if row_offsets.len() != rows + 1 || row_offsets[0] != 0 {
            return Err(Error::input("csr: row_offsets must have rows+1 entries starting at 0"));
        }
        if col_indices.len() != values.len() || *row_offsets.last().unwrap() != values.len() {
            return Err(Error::input("csr: offsets, indices and values disagree in length"));
        }
        for r in 0..rows {
            let (lo, hi) = (row_offsets[r], row_offsets[r + 1]);
            if lo > hi {
                return Err(Error::input(format!("csr: row {r} has decreasing offsets")));
            }
            let idx = &col_indices[lo..hi];
            if idx.iter().any(|&c| c >= cols) {
                return Err(Error::input(format!("csr: row {r} has a column out of range")));
            }
            if idx.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::input(format!("csr: row {r} columns not strictly ascending")));
            }
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::input("csr: non-finite value"));
        }
        Ok(CsrMatrix {
            rows,
            cols,
            row_offsets,
            col_indices,
            values,
        })
    }

    pub fn identity(n: usize) -> Self {
        CsrMatrix {
            rows: n,
            cols: n,
            row_offsets: (0..=n).collect(),
            col_indices: (0..n).collect(),
            values: vec![1.0; n],
        }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        CsrMatrix {
            rows,
            cols,
            row_offsets: vec![0; rows + 1],
            col_indices: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Number of stored entries.
    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_offsets(&self) -> &[usize] {
        &self.row_offsets
    }

    pub fn col_indices(&self) -> &[usize] {
        &self.col_indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Stored `(column, value)` pairs of one row.
    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.row_offsets[r]..self.row_offsets[r + 1];
        self.col_indices[range.clone()]
            .iter()
            .copied()
            .zip(self.values[range].iter().copied())
    }

    /// Entry `(r, c)`, zero when not stored.
    pub fn get(&self, r: usize, c: usize) -> f64 {
        let range = self.row_offsets[r]..self.row_offsets[r + 1];
        match self.col_indices[range.clone()].binary_search(&c) {
            Ok(p) => self.values[range.start + p],
            Err(_) => 0.0,
        }
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.rows).map(|r| self.row(r).map(|(_, v)| v).sum()).collect()
    }

    pub fn is_symmetric(&self) -> bool {
        self.rows == self.cols
            && (0..self.rows).all(|r| self.row(r).all(|(c, v)| self.get(c, r) == v))
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut d = DenseMatrix::zeros(self.rows, self.cols);
        for r in 0..self.rows {
            for (c, v) in self.row(r) {
                d[(r, c)] = v;
            }
        }
        d
    }

    /// Sparse-dense product `self · x`.
    ///
    /// Output row `r` accumulates the stored entries of row `r` in ascending
    /// column order, whatever the thread count.
    pub fn spmm(&self, x: &DenseMatrix) -> Result<DenseMatrix> {
        self.check_spmm(x)?;
        let mut out = DenseMatrix::zeros(self.rows, x.cols());
        par::for_each_row(out.as_mut_slice(), x.cols(), |r, out_row| {
            self.spmm_row(r, x, out_row)
        });
        Ok(out)
    }

    /// Sequential [`spmm`](Self::spmm).
    pub fn spmm_seq(&self, x: &DenseMatrix) -> Result<DenseMatrix> {
        self.check_spmm(x)?;
        let mut out = DenseMatrix::zeros(self.rows, x.cols());
        par::for_each_row_seq(out.as_mut_slice(), x.cols(), |r, out_row| {
            self.spmm_row(r, x, out_row)
        });
        Ok(out)
    }

    /// Matrix-vector product.
    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.cols {
            return Err(Error::input(format!(
                "matvec: {}x{} matrix times vector of length {}",
                self.rows,
                self.cols,
                x.len()
            )));
        }
        Ok((0..self.rows)
            .map(|r| self.row(r).map(|(c, v)| v * x[c]).sum())
            .collect())
    }

    #[inline]
    fn spmm_row(&self, r: usize, x: &DenseMatrix, out_row: &mut [f64]) {
        for (c, v) in self.row(r) {
            for (o, xv) in out_row.iter_mut().zip(x.row(c)) {
                *o += v * xv;
            }
        }
    }

    fn check_spmm(&self, x: &DenseMatrix) -> Result<()> {
        if x.rows() != self.cols {
            return Err(Error::input(format!(
                "spmm: {}x{} sparse times {}x{} dense",
                self.rows,
                self.cols,
                x.rows(),
                x.cols()
            )));
        }
        Ok(())
    }
}
