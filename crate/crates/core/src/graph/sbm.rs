//! Stochastic block model generator with block-informative node features.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Geometric, Normal};

use super::SparseGraph;
use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;
use crate::metrics::LabelVector;

#[derive(Debug, Clone, PartialEq)]
pub struct SbmConfig {
    pub block_sizes: Vec<usize>,
    pub p_in: f64,
    pub p_out: f64,
    pub feature_dim: usize,
    pub noise_sigma: f64,
    pub seed: u64,
}

impl SbmConfig {
    /// `blocks` equal blocks of `size` nodes each.
    pub fn uniform(blocks: usize, size: usize, p_in: f64, p_out: f64) -> Self {
        SbmConfig {
            block_sizes: vec![size; blocks],
            p_in,
            p_out,
            feature_dim: blocks.max(1),
            noise_sigma: 0.0,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.block_sizes.is_empty() || self.block_sizes.contains(&0) {
            return Err(Error::input("sbm: block sizes must be non-empty and positive"));
        }
        let prob = |p: f64| (0.0..=1.0).contains(&p);
        if !prob(self.p_in) || !prob(self.p_out) {
            return Err(Error::input(format!(
                "sbm: probabilities must lie in [0, 1], got p_in={} p_out={}",
                self.p_in, self.p_out
            )));
        }
        if self.p_out > self.p_in {
            return Err(Error::input(format!(
                "sbm: p_out={} exceeds p_in={}; only assortative blocks are supported",
                self.p_out, self.p_in
            )));
        }
        if self.feature_dim == 0 {
            return Err(Error::input("sbm: feature_dim must be at least 1"));
        }
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return Err(Error::input("sbm: noise_sigma must be finite and non-negative"));
        }
        Ok(())
    }

    pub fn num_nodes(&self) -> usize {
        self.block_sizes.iter().sum()
    }
}

/// Samples a graph, features and ground-truth labels.
///
/// Each within-block pair is an edge with probability `p_in`, each
/// cross-block pair with `p_out`. Feature column `j` belongs to block
/// `j·K/F`; a node's features are 1 on its block's columns, 0 elsewhere,
/// plus `N(0, noise_sigma²)` noise.
pub fn sbm_generate(cfg: &SbmConfig) -> Result<(SparseGraph, DenseMatrix, LabelVector)> {
    cfg.validate()?;
    let k = cfg.block_sizes.len();
    let n = cfg.num_nodes();
    let mut starts = Vec::with_capacity(k + 1);
    starts.push(0);
    for s in &cfg.block_sizes {
        starts.push(starts.last().unwrap() + s);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let mut edges = Vec::new();
    for a in 0..k {
        for b in a..k {
            let p = if a == b { cfg.p_in } else { cfg.p_out };
            sample_block_pair(&starts, a, b, p, &mut rng, &mut edges);
        }
    }
    let graph = SparseGraph::from_edges(n, edges)?;

    let labels: Vec<usize> = (0..k)
        .flat_map(|b| std::iter::repeat_n(b, cfg.block_sizes[b]))
        .collect();
    let f = cfg.feature_dim;
    let noise = Normal::new(0.0, cfg.noise_sigma).map_err(|e| Error::input(e.to_string()))?;
    let mut features = DenseMatrix::zeros(n, f);
    for (i, &block) in labels.iter().enumerate() {
        for (j, x) in features.row_mut(i).iter_mut().enumerate() {
            let centroid = if j * k / f == block { 1.0 } else { 0.0 };
            let eps = if cfg.noise_sigma > 0.0 { noise.sample(&mut rng) } else { 0.0 };
            *x = centroid + eps;
        }
    }
    Ok((graph, features, LabelVector::new(labels, k)?))
}

/// Appends Bernoulli(p) edges between blocks `a <= b` using geometric gaps,
/// so the cost is proportional to the number of edges drawn.
fn sample_block_pair(
    starts: &[usize],
    a: usize,
    b: usize,
    p: f64,
    rng: &mut ChaCha8Rng,
    out: &mut Vec<(usize, usize)>,
) {
    if p <= 0.0 {
        return;
    }
    let gap = Geometric::new(p).expect("p in (0, 1]");
    let mut skip = gap.sample(rng);
    for u in starts[a]..starts[a + 1] {
        // Candidate partners of u in block b, each visited once per unordered pair.
        let lo = if a == b { u + 1 } else { starts[b] };
        let hi = starts[b + 1];
        let mut remaining = (hi - lo) as u64;
        let mut pos = lo as u64;
        while skip < remaining {
            pos += skip;
            out.push((u, pos as usize));
            pos += 1;
            remaining -= skip + 1;
            skip = gap.sample(rng);
        }
        skip -= remaining;
    }
}
