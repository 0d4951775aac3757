//! Index-parallel map used by every circuit sweep.
//!
//! With the `parallel` feature the work runs on the current rayon pool;
//! without it, on the calling thread. Results come back in index order
//! either way, so reductions over them are bit-identical.

use crate::error::Result;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

pub fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).collect()
    }
}

pub fn try_map_indexed<T, F>(n: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).collect()
    }
}

/// Whether sweeps run on rayon in this build.
pub const fn is_parallel() -> bool {
    cfg!(feature = "parallel")
}
