//! Row-parallel helpers.
//!
//! Each helper hands disjoint output rows to a closure. Under the `parallel`
//! feature the rows are distributed over the rayon pool, otherwise they are
//! visited in order. A row's result never depends on which thread computed
//! it, so both paths produce identical bits.

/// Calls `f(row, out_row)` for each `width`-sized chunk of `out`.
pub fn for_each_row<F>(out: &mut [f64], width: usize, f: F)
where
    F: Fn(usize, &mut [f64]) + Send + Sync,
{
    if width == 0 {
        return;
    }
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        // Small outputs are not worth a fork/join.
        if out.len() >= PAR_THRESHOLD {
            out.par_chunks_mut(width)
                .enumerate()
                .for_each(|(i, row)| f(i, row));
            return;
        }
    }
    for_each_row_seq(out, width, f);
}

/// Sequential version of [`for_each_row`], always available.
pub fn for_each_row_seq<F>(out: &mut [f64], width: usize, f: F)
where
    F: Fn(usize, &mut [f64]),
{
    if width == 0 {
        return;
    }
    for (i, row) in out.chunks_mut(width).enumerate() {
        f(i, row);
    }
}

/// Maps `0..n` through `f`, collecting in index order.
pub fn map_indices<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Send + Sync,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).collect()
    }
}

#[cfg(feature = "parallel")]
const PAR_THRESHOLD: usize = 4096;
