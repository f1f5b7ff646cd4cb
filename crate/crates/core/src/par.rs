//! Data-parallel helpers. With the `parallel` feature the maps run on the
//! rayon pool; without it they run sequentially. Results are always
//! collected in index order and reduced sequentially, so values do not
//! depend on the thread count. `sequential` forces the sequential path
//! at run time.

use std::cell::Cell;

use crate::numeric::NeumaierSum;

thread_local! {
    static FORCE_SEQUENTIAL: Cell<bool> = const { Cell::new(false) };
}

#[cfg_attr(not(feature = "parallel"), allow(dead_code))]
fn forced_sequential() -> bool {
    FORCE_SEQUENTIAL.with(Cell::get)
}

/// Runs `f` with every helper of this module on the sequential path.
pub fn sequential<R>(f: impl FnOnce() -> R) -> R {
    let prev = FORCE_SEQUENTIAL.with(|c| c.replace(true));
    let out = f();
    FORCE_SEQUENTIAL.with(|c| c.set(prev));
    out
}

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// `(0..n).map(f)` collected in order.
pub fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if !forced_sequential() {
        return (0..n).into_par_iter().map(f).collect();
    }
    (0..n).map(f).collect()
}

/// Maps each element of a slice, preserving order.
pub fn map_slice<S, T, F>(items: &[S], f: F) -> Vec<T>
where
    S: Sync,
    T: Send,
    F: Fn(&S) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if !forced_sequential() {
        return items.par_iter().map(f).collect();
    }
    items.iter().map(f).collect()
}

/// Deterministic parallel sum: fixed chunks, partial sums collected in
/// order, then a compensated sequential reduction.
pub fn sum_indexed<F>(n: usize, chunk: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    let chunk = chunk.max(1);
    let n_chunks = n.div_ceil(chunk);
    let partials = map_indexed(n_chunks, |c| {
        let mut s = NeumaierSum::new();
        for i in c * chunk..((c + 1) * chunk).min(n) {
            s.add(f(i));
        }
        s.value()
    });
    partials.into_iter().collect::<NeumaierSum>().value()
}

/// Runs `f` on a dedicated pool with `threads` workers (0 = rayon default).
/// Without the `parallel` feature this just calls `f`.
pub fn with_threads<R, F>(threads: usize, f: F) -> R
where
    R: Send,
    F: FnOnce() -> R + Send,
{
    #[cfg(feature = "parallel")]
    {
        match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
            Ok(pool) => pool.install(f),
            Err(_) => f(),
        }
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = threads;
        f()
    }
}

/// Number of worker threads the current context would use.
pub fn current_threads() -> usize {
    #[cfg(feature = "parallel")]
    {
        rayon::current_num_threads()
    }
    #[cfg(not(feature = "parallel"))]
    {
        1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sum_is_thread_count_independent() {
        let f = |i: usize| ((i as f64) * 0.37).sin() * 1e3;
        let a = with_threads(1, || sum_indexed(10_000, 64, f));
        let b = with_threads(4, || sum_indexed(10_000, 64, f));
        assert_eq!(a.to_bits(), b.to_bits());
        let c = sequential(|| sum_indexed(10_000, 64, f));
        assert_eq!(a.to_bits(), c.to_bits());
    }
}
