//! Outer-loop partitioning and fixed-order reductions.
//!
//! Work is split into index ranges; every index is evaluated by the same
//! sequential code no matter which worker runs it, and partial results are
//! combined by [`pairwise_sum`] over the full index order. The outcome is
//! therefore independent of the worker count.

use alloc::vec::Vec;

/// Number of worker threads used for outer loops (at least one).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Workers(usize);

impl Workers {
    pub fn new(n: usize) -> Self {
        Workers(n.max(1))
    }
    pub const fn single() -> Self {
        Workers(1)
    }
    pub fn get(self) -> usize {
        self.0
    }
}

impl Default for Workers {
    fn default() -> Self {
        Workers(1)
    }
}

/// Evaluate `f(i)` for `i in 0..n`, returning results in index order.
pub fn map_indexed<T, F>(n: usize, workers: Workers, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync,
{
    #[cfg(feature = "std")]
    {
        let w = workers.get().min(n.max(1));
        if w > 1 {
            let chunk = n.div_ceil(w);
            let f = &f;
            let parts: Vec<Vec<T>> = std::thread::scope(|scope| {
                let handles: Vec<_> = (0..w)
                    .map(|k| {
                        let lo = (k * chunk).min(n);
                        let hi = ((k + 1) * chunk).min(n);
                        scope.spawn(move || (lo..hi).map(f).collect::<Vec<T>>())
                    })
                    .collect();
                handles
                    .into_iter()
                    .map(|h| h.join().expect("worker panicked"))
                    .collect()
            });
            return parts.into_iter().flatten().collect();
        }
    }
    #[cfg(not(feature = "std"))]
    let _ = workers;
    (0..n).map(f).collect()
}

/// Like [`map_indexed`] for fallible work; the first error in index order wins.
pub fn try_map_indexed<T, E, F>(n: usize, workers: Workers, f: F) -> Result<Vec<T>, E>
where
    T: Send,
    E: Send,
    F: Fn(usize) -> Result<T, E> + Sync,
{
    map_indexed(n, workers, f).into_iter().collect()
}

/// Sum with a fixed balanced binary tree over the slice order.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    match values.len() {
        0 => 0.0,
        1 => values[0],
        n if n <= 8 => values.iter().fold(0.0, |a, b| a + b),
        n => {
            let (l, r) = values.split_at(n / 2);
            pairwise_sum(l) + pairwise_sum(r)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn map_is_order_preserving_for_any_worker_count() {
        let base = map_indexed(101, Workers::single(), |i| i * i);
        for w in [2, 3, 8, 200] {
            assert_eq!(map_indexed(101, Workers::new(w), |i| i * i), base);
        }
    }

    #[test]
    fn pairwise_sum_matches_exact_small_integers() {
        let v: Vec<f64> = (1..=1000).map(|i| i as f64).collect();
        assert_eq!(pairwise_sum(&v), 500500.0);
        assert_eq!(pairwise_sum(&[]), 0.0);
    }
}
