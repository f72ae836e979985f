//! Data-parallel map over an index range, with a sequential fallback when the
//! `parallel` feature is disabled. Output order is always the index order, so
//! results are independent of thread scheduling.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Execution policy for trial/grid loops.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Exec {
    /// Rayon when compiled with the `parallel` feature, sequential otherwise.
    #[default]
    Auto,
    /// Force sequential execution (baseline for benchmarks).
    Sequential,
}

pub fn indexed_map<T, F>(count: u64, exec: Exec, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    match exec {
        Exec::Sequential => (0..count).map(f).collect(),
        Exec::Auto => {
            #[cfg(feature = "parallel")]
            {
                (0..count).into_par_iter().map(f).collect()
            }
            #[cfg(not(feature = "parallel"))]
            {
                (0..count).map(f).collect()
            }
        }
    }
}
