//! Data-parallel execution over independent work items.
//!
//! With the `parallel` feature (default) `Exec::Parallel` fans out over a
//! rayon pool; without it every mode runs sequentially. Results are returned
//! in index order either way, so callers see identical output.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Exec {
    Sequential,
    #[default]
    Parallel,
}

impl Exec {
    /// Whether work will actually run on more than one thread.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Exec::Parallel
    }

    /// `[f(0), f(1), ..., f(n-1)]`.
    pub fn map_indexed<T, F>(self, n: u64, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(u64) -> T + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self == Exec::Parallel {
            use rayon::prelude::*;
            return (0..n).into_par_iter().map(f).collect();
        }
        (0..n).map(f).collect()
    }

    /// `items.iter().map(f)`, in order.
    pub fn map<I, T, F>(self, items: &[I], f: F) -> Vec<T>
    where
        I: Sync,
        T: Send,
        F: Fn(&I) -> T + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self == Exec::Parallel {
            use rayon::prelude::*;
            return items.par_iter().map(f).collect();
        }
        items.iter().map(f).collect()
    }

    /// Reduces `f(0) .. f(n-1)` with `combine`, which must be associative and
    /// commutative for the result to be independent of the mode.
    pub fn fold_indexed<A, F, C>(self, n: u64, identity: A, f: F, combine: C) -> A
    where
        A: Send + Sync + Clone,
        F: Fn(u64) -> A + Sync + Send,
        C: Fn(A, A) -> A + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self == Exec::Parallel {
            use rayon::prelude::*;
            return (0..n).into_par_iter().map(f).reduce(|| identity.clone(), &combine);
        }
        (0..n).map(f).fold(identity, combine)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn modes_agree() {
        let f = |i: u64| i.wrapping_mul(0x9e37_79b9_7f4a_7c15) >> 40;
        assert_eq!(
            Exec::Sequential.map_indexed(1000, f),
            Exec::Parallel.map_indexed(1000, f)
        );
        let s = Exec::Sequential.fold_indexed(1000, 0u64, f, |a, b| a + b);
        let p = Exec::Parallel.fold_indexed(1000, 0u64, f, |a, b| a + b);
        assert_eq!(s, p);
        let items: Vec<u64> = (0..50).collect();
        assert_eq!(
            Exec::Sequential.map(&items, |x| x * 2),
            Exec::Parallel.map(&items, |x| x * 2)
        );
    }
}
