//! Data-parallel maps with a sequential fallback.
//!
//! With the `parallel` feature (on by default) work is spread over a rayon
//! pool; otherwise, or when [`Jobs::Sequential`] is requested, it runs on the
//! calling thread. Outputs are written into index-addressed slots, so results
//! are identical for every job count.

use serde::{Deserialize, Serialize};

/// Worker policy for data-parallel loops.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Jobs {
    Sequential,
    /// Use the global rayon pool.
    #[default]
    Auto,
    /// Use a dedicated pool with this many workers.
    Fixed(usize),
}

impl Jobs {
    pub fn from_count(count: Option<usize>) -> Self {
        match count {
            None => Jobs::Auto,
            Some(0) | Some(1) => Jobs::Sequential,
            Some(n) => Jobs::Fixed(n),
        }
    }
}

/// `(0..len).map(f)` collected in index order.
pub fn map_indexed<T, F>(jobs: Jobs, len: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Send + Sync,
{
    match jobs {
        Jobs::Sequential => (0..len).map(f).collect(),
        #[cfg(feature = "parallel")]
        Jobs::Auto => {
            use rayon::prelude::*;
            (0..len).into_par_iter().map(f).collect()
        }
        #[cfg(feature = "parallel")]
        Jobs::Fixed(n) => {
            use rayon::prelude::*;
            match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
                Ok(pool) => pool.install(|| (0..len).into_par_iter().map(f).collect()),
                Err(_) => (0..len).map(f).collect(),
            }
        }
        #[cfg(not(feature = "parallel"))]
        _ => (0..len).map(f).collect(),
    }
}

/// Like [`map_indexed`] for fallible work; returns the first error by index.
pub fn try_map_indexed<T, E, F>(jobs: Jobs, len: usize, f: F) -> Result<Vec<T>, E>
where
    T: Send,
    E: Send,
    F: Fn(usize) -> Result<T, E> + Send + Sync,
{
    map_indexed(jobs, len, f).into_iter().collect()
}
