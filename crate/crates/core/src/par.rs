//! Order-preserving data-parallel map with a sequential fallback.
//!
//! Every parallel entry point in the crate funnels through [`map_range`], so
//! outputs are collected in index order and are bitwise identical whichever
//! [`Execution`] mode (or thread count) is used.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Execution {
    /// Use rayon when the `parallel` feature is compiled in.
    #[default]
    Parallel,
    Sequential,
}

impl Execution {
    /// Whether this mode actually fans out to a thread pool in this build.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }
}

/// Maps `f` over `0..len`, returning results in index order.
pub fn map_range<R, F>(exec: Execution, len: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        use rayon::prelude::*;
        return (0..len).into_par_iter().map(f).collect();
    }
    let _ = exec;
    (0..len).map(f).collect()
}

/// Like [`map_range`] but short-circuits on the first error in index order.
pub fn try_map_range<R, E, F>(exec: Execution, len: usize, f: F) -> Result<Vec<R>, E>
where
    R: Send,
    E: Send,
    F: Fn(usize) -> Result<R, E> + Sync + Send,
{
    map_range(exec, len, f).into_iter().collect()
}
