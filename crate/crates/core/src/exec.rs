//! Execution policy for the data-parallel inner loops.
//!
//! Reductions are always evaluated over fixed-size chunks whose partial sums
//! are combined in index order, so the sequential and parallel paths return
//! bit-identical results.

use serde::{Deserialize, Serialize};

const CHUNK: usize = 4096;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Exec {
    Sequential,
    /// Uses rayon when the `parallel` feature is enabled, otherwise falls
    /// back to the sequential path.
    #[default]
    Parallel,
}

impl Exec {
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Exec::Parallel
    }

    /// `out[i] = f(i)` for every index.
    pub fn fill<F>(self, out: &mut [f64], f: F)
    where
        F: Fn(usize) -> f64 + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self.is_parallel() && out.len() > CHUNK {
            use rayon::prelude::*;
            out.par_chunks_mut(CHUNK)
                .enumerate()
                .for_each(|(k, chunk)| {
                    let base = k * CHUNK;
                    for (j, o) in chunk.iter_mut().enumerate() {
                        *o = f(base + j);
                    }
                });
            return;
        }
        for (i, o) in out.iter_mut().enumerate() {
            *o = f(i);
        }
    }

    /// Deterministic `sum_{i < n} f(i)`.
    pub fn sum<F>(self, n: usize, f: F) -> f64
    where
        F: Fn(usize) -> f64 + Sync + Send,
    {
        let chunks = n.div_ceil(CHUNK);
        let partial = |k: usize| {
            let lo = k * CHUNK;
            let hi = (lo + CHUNK).min(n);
            (lo..hi).map(&f).sum::<f64>()
        };
        #[cfg(feature = "parallel")]
        if self.is_parallel() && chunks > 1 {
            use rayon::prelude::*;
            let parts: Vec<f64> = (0..chunks).into_par_iter().map(partial).collect();
            return parts.iter().sum();
        }
        (0..chunks).map(partial).sum()
    }

    /// Deterministic maximum of `f(i)`; returns `f64::NEG_INFINITY` for `n = 0`.
    pub fn max<F>(self, n: usize, f: F) -> f64
    where
        F: Fn(usize) -> f64 + Sync + Send,
    {
        let chunks = n.div_ceil(CHUNK);
        let partial = |k: usize| {
            let lo = k * CHUNK;
            let hi = (lo + CHUNK).min(n);
            (lo..hi).map(&f).fold(f64::NEG_INFINITY, f64::max)
        };
        #[cfg(feature = "parallel")]
        if self.is_parallel() && chunks > 1 {
            use rayon::prelude::*;
            let parts: Vec<f64> = (0..chunks).into_par_iter().map(partial).collect();
            return parts.into_iter().fold(f64::NEG_INFINITY, f64::max);
        }
        (0..chunks).map(partial).fold(f64::NEG_INFINITY, f64::max)
    }

    /// Run `f` on every item, concurrently when parallel.
    pub fn map_vec<T, R, F>(self, items: &[T], f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(&T) -> R + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self.is_parallel() {
            use rayon::prelude::*;
            return items.par_iter().map(f).collect();
        }
        items.iter().map(f).collect()
    }
}
