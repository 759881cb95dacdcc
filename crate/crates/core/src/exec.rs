//! Row-parallel execution with a sequential fallback.

use crate::error::{Error, Result};

/// Where row-wise work runs. Without the `parallel` feature both variants run
/// on the calling thread.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    Parallel,
}

impl Default for Execution {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Self::Parallel
        } else {
            Self::Sequential
        }
    }
}

/// Runs `f(row_index, row)` over the `width`-sized rows of `data`.
///
/// Rows are disjoint, so results never depend on scheduling. When several rows
/// fail, the error of the lowest row index is returned.
pub(crate) fn for_each_row<F>(exec: Execution, data: &mut [f64], width: usize, f: F) -> Result<()>
where
    F: Fn(usize, &mut [f64]) -> Result<()> + Send + Sync,
{
    if width == 0 {
        return Ok(());
    }
    let wrap = |(i, row): (usize, &mut [f64])| {
        f(i, row).map_err(|e| Error::Series {
            index: i,
            source: Box::new(e),
        })
    };
    match exec {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            let first = data
                .par_chunks_mut(width)
                .enumerate()
                .filter_map(|item| wrap(item).err())
                .min_by_key(|e| match e {
                    Error::Series { index, .. } => *index,
                    _ => usize::MAX,
                });
            first.map_or(Ok(()), Err)
        }
        _ => data.chunks_mut(width).enumerate().try_for_each(wrap),
    }
}

/// `(0..n).map(f)` collected in index order, evaluated according to `exec`.
pub(crate) fn map_indexed<T, F>(exec: Execution, n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Send + Sync,
{
    match exec {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            (0..n).into_par_iter().map(f).collect()
        }
        _ => (0..n).map(f).collect(),
    }
}
