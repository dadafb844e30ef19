// SPDX-License-Identifier: Apache-2.0

//! Node-parallel map used by the O(m²) kernels.
//!
//! With the `parallel` feature each output index is computed on the rayon
//! pool; without it the same closure runs sequentially. Every output entry is
//! produced by exactly one closure call, so results are bitwise identical in
//! both builds and for any thread count.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Evaluates `f(i)` for `i in 0..n` and collects the results in index order.
pub fn map_indices<T, F>(n: usize, f: F) -> Vec<T>
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

/// Fills `out[i] = f(i)`, stopping at the first error encountered.
pub fn try_fill<E, F>(out: &mut [f64], f: F) -> Result<(), E>
where
    E: Send,
    F: Fn(usize) -> Result<f64, E> + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        out.par_iter_mut()
            .enumerate()
            .try_for_each(|(i, slot)| f(i).map(|v| *slot = v))
    }
    #[cfg(not(feature = "parallel"))]
    {
        for (i, slot) in out.iter_mut().enumerate() {
            *slot = f(i)?;
        }
        Ok(())
    }
}

/// Runs `f` on a dedicated pool with `threads` workers (sequentially when the
/// `parallel` feature is off).
pub fn with_threads<R: Send>(threads: Option<usize>, f: impl FnOnce() -> R + Send) -> R {
    #[cfg(feature = "parallel")]
    {
        match threads {
            Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
                Ok(pool) => pool.install(f),
                Err(err) => {
                    log::warn!("could not build a {n}-thread pool ({err}); using the global pool");
                    f()
                }
            },
            None => f(),
        }
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = threads;
        f()
    }
}
