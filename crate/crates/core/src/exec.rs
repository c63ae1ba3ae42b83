use std::ops::Range;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Execution strategy for the data-parallel kernels.
///
/// Without the `parallel` feature, [`Exec::Parallel`] silently runs
/// sequentially, so callers never need their own `cfg` switches.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Exec {
    Sequential,
    Parallel,
}

impl Default for Exec {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Exec::Parallel
        } else {
            Exec::Sequential
        }
    }
}

impl Exec {
    /// `f` applied to every index of `range`, in index order.
    pub fn map_range<T, F>(self, range: Range<usize>, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Exec::Parallel => range.into_par_iter().map(f).collect(),
            _ => range.map(f).collect(),
        }
    }

    /// `f` applied to every item of `items`, in order.
    pub fn map_slice<S, T, F>(self, items: &[S], f: F) -> Vec<T>
    where
        S: Sync,
        T: Send,
        F: Fn(&S) -> T + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Exec::Parallel => items.par_iter().map(f).collect(),
            _ => items.iter().map(f).collect(),
        }
    }

    /// Folds `range` into per-worker accumulators and merges them.
    ///
    /// `merge` must be associative and `identity` its neutral element; the
    /// sequential path folds everything into a single accumulator.
    pub fn fold_range<A, I, F, M>(self, range: Range<usize>, identity: I, fold: F, merge: M) -> A
    where
        A: Send,
        I: Fn() -> A + Sync + Send,
        F: Fn(A, usize) -> A + Sync + Send,
        M: Fn(A, A) -> A + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Exec::Parallel => range.into_par_iter().fold(&identity, &fold).reduce(&identity, &merge),
            _ => {
                let _ = &merge;
                range.fold(identity(), fold)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn both_strategies_agree() {
        for exec in [Exec::Sequential, Exec::Parallel] {
            let squares = exec.map_range(0..100, |i| i * i);
            assert_eq!(squares[7], 49);
            assert_eq!(squares.len(), 100);
            let total = exec.fold_range(0..1000, || 0u64, |acc, i| acc + i as u64, |a, b| a + b);
            assert_eq!(total, 499_500);
        }
    }
}
