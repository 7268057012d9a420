//! Execution of independent per-index work, parallel or sequential.
//!
//! `map_indexed` preserves index order in the output, so callers that
//! reduce the collected vector sequentially get results that are
//! bit-identical across thread counts and with the sequential build.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Maps `f` over `0..n` in index order. Runs on the rayon pool when
/// `parallel` is enabled and `par` is true.
pub(crate) fn map_indexed<T, F>(n: usize, par: bool, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Send + Sync,
{
    #[cfg(feature = "parallel")]
    {
        if par {
            return (0..n).into_par_iter().map(f).collect();
        }
    }
    let _ = par;
    (0..n).map(f).collect()
}
