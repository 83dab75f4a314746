//! Block scheduling for data-parallel inner loops.
//!
//! Work is split into indexed blocks; each block is computed independently
//! and the per-block results are reduced sequentially in block order. The
//! `parallel` feature switches block execution to rayon. Because the
//! reduction order is fixed, builds with and without the feature produce
//! bit-identical results.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Run `f` over `0..n_blocks` and collect results in block order.
#[cfg(feature = "parallel")]
pub fn run_blocks<T, F>(n_blocks: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..n_blocks).into_par_iter().map(f).collect()
}

/// Run `f` over `0..n_blocks` and collect results in block order.
#[cfg(not(feature = "parallel"))]
pub fn run_blocks<T, F>(n_blocks: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..n_blocks).map(f).collect()
}

/// Sequential twin of [`run_blocks`], always available. Benchmarks use it to
/// compare the rayon path against plain iteration within one build.
pub fn run_blocks_seq<T, F>(n_blocks: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..n_blocks).map(f).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn block_order_is_preserved() {
        let out = run_blocks(17, |b| b * b);
        assert_eq!(out, (0..17).map(|b| b * b).collect::<Vec<_>>());
        assert_eq!(out, run_blocks_seq(17, |b| b * b));
    }
}
