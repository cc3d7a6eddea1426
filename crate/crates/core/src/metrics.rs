//! Clustering quality against ground-truth labels: normalized mutual
//! information and Hungarian-matched accuracy.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Integer labels in `0..num_classes`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelVector {
    labels: Vec<usize>,
    num_classes: usize,
}

impl LabelVector {
    pub fn new(labels: Vec<usize>, num_classes: usize) -> Result<Self> {
        if let Some((i, &l)) = labels.iter().enumerate().find(|(_, &l)| l >= num_classes) {
            return Err(Error::input(format!(
                "label {l} at position {i} is not below num_classes={num_classes}"
            )));
        }
        Ok(LabelVector {
            labels,
            num_classes,
        })
    }

    /// Uses one past the largest label as the class count.
    pub fn from_labels(labels: Vec<usize>) -> Self {
        let num_classes = labels.iter().max().map_or(0, |&m| m + 1);
        LabelVector {
            labels,
            num_classes,
        }
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Number of occurrences of each class.
    pub fn class_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.num_classes];
        for &l in &self.labels {
            sizes[l] += 1;
        }
        sizes
    }
}

/// Counts `table[c][k] = |{i : y_i = c, p_i = k}|`.
pub fn contingency(y: &LabelVector, p: &LabelVector) -> Result<Vec<Vec<usize>>> {
    if y.len() != p.len() {
        return Err(Error::input(format!(
            "label vectors differ in length: {} vs {}",
            y.len(),
            p.len()
        )));
    }
    if y.is_empty() {
        return Err(Error::input("contingency of empty label vectors"));
    }
    let mut table = vec![vec![0usize; p.num_classes()]; y.num_classes()];
    for (&c, &k) in y.labels().iter().zip(p.labels()) {
        table[c][k] += 1;
    }
    Ok(table)
}

/// Normalizer applied to the mutual information.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NmiNorm {
    #[default]
    Arithmetic,
    Geometric,
    Max,
}

impl FromStr for NmiNorm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "arithmetic" => Ok(NmiNorm::Arithmetic),
            "geometric" => Ok(NmiNorm::Geometric),
            "max" => Ok(NmiNorm::Max),
            other => Err(Error::input(format!(
                "unknown NMI normalization {other:?} (expected arithmetic|geometric|max)"
            ))),
        }
    }
}

impl fmt::Display for NmiNorm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NmiNorm::Arithmetic => "arithmetic",
            NmiNorm::Geometric => "geometric",
            NmiNorm::Max => "max",
        })
    }
}

fn entropy(counts: impl Iterator<Item = usize>, n: f64) -> f64 {
    counts
        .filter(|&c| c > 0)
        .map(|c| {
            let p = c as f64 / n;
            -p * p.ln()
        })
        .sum()
}

/// NMI with the arithmetic-mean normalizer.
pub fn nmi(y: &LabelVector, p: &LabelVector) -> Result<f64> {
    nmi_with(y, p, NmiNorm::Arithmetic)
}

/// Mutual information divided by a mean of the two entropies.
///
/// Two constant labelings score 1; exactly one constant labeling scores 0.
pub fn nmi_with(y: &LabelVector, p: &LabelVector, norm: NmiNorm) -> Result<f64> {
    let table = contingency(y, p)?;
    let n = y.len() as f64;
    let row_tot: Vec<usize> = table.iter().map(|r| r.iter().sum()).collect();
    let col_tot: Vec<usize> = (0..p.num_classes())
        .map(|k| table.iter().map(|r| r[k]).sum())
        .collect();
    let hy = entropy(row_tot.iter().copied(), n);
    let hp = entropy(col_tot.iter().copied(), n);
    if hy == 0.0 && hp == 0.0 {
        return Ok(1.0);
    }
    if hy == 0.0 || hp == 0.0 {
        return Ok(0.0);
    }
    let mut mi = 0.0;
    for (c, row) in table.iter().enumerate() {
        for (k, &cnt) in row.iter().enumerate() {
            if cnt > 0 {
                let joint = cnt as f64 / n;
                mi += joint * (cnt as f64 * n / (row_tot[c] as f64 * col_tot[k] as f64)).ln();
            }
        }
    }
    let denom = match norm {
        NmiNorm::Arithmetic => 0.5 * (hy + hp),
        NmiNorm::Geometric => (hy * hp).sqrt(),
        NmiNorm::Max => hy.max(hp),
    };
    Ok((mi / denom).clamp(0.0, 1.0))
}

/// Minimum-cost perfect matching on a square cost matrix.
///
/// Returns `assignment` with row `i` matched to column `assignment[i]`, and
/// the total cost. Shortest augmenting paths with row/column potentials,
/// O(n³).
pub fn kuhn_munkres(cost: &[Vec<f64>]) -> Result<(Vec<usize>, f64)> {
    let n = cost.len();
    if cost.iter().any(|r| r.len() != n) {
        return Err(Error::input("kuhn_munkres: cost matrix must be square"));
    }
    if cost.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::input("kuhn_munkres: non-finite cost"));
    }
    if n == 0 {
        return Ok((Vec::new(), 0.0));
    }

    // 1-based bookkeeping; index 0 is the virtual root column.
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut col_match = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for row in 1..=n {
        col_match[0] = row;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = col_match[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let reduced = cost[i0 - 1][j - 1] - u[i0] - v[j];
                if reduced < minv[j] {
                    minv[j] = reduced;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[col_match[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if col_match[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            col_match[j0] = col_match[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut assignment = vec![0usize; n];
    for j in 1..=n {
        assignment[col_match[j] - 1] = j - 1;
    }
    let total = assignment.iter().enumerate().map(|(i, &j)| cost[i][j]).sum();
    Ok((assignment, total))
}

/// Fraction of nodes whose cluster maps to their class under the best
/// cluster-to-class bijection. Unequal class and cluster counts are
/// zero-padded to a square table.
pub fn acc(y: &LabelVector, p: &LabelVector) -> Result<f64> {
    let table = contingency(y, p)?;
    let size = y.num_classes().max(p.num_classes());
    let cost: Vec<Vec<f64>> = (0..size)
        .map(|k| {
            (0..size)
                .map(|c| {
                    let hits = table.get(c).and_then(|r| r.get(k)).copied().unwrap_or(0);
                    -(hits as f64)
                })
                .collect()
        })
        .collect();
    let (_, total) = kuhn_munkres(&cost)?;
    Ok((-total / y.len() as f64).clamp(0.0, 1.0))
}
