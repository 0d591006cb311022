//! Execution policy for the data-parallel loops.
//!
//! With the `parallel` feature disabled, [`Execution::Parallel`] runs
//! sequentially. Both policies produce identical results: work items are
//! independent and outputs are collected in input order.

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

/// Batches smaller than this are always mapped sequentially.
pub const PAR_THRESHOLD: usize = 256;

impl Execution {
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }

    pub fn map<T, R, F>(self, items: &[T], f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(&T) -> R + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self.is_parallel() && items.len() >= PAR_THRESHOLD {
            use rayon::prelude::*;
            return items.par_iter().map(f).collect();
        }
        items.iter().map(f).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn policies_agree() {
        let items: Vec<u64> = (0..5000).collect();
        let f = |v: &u64| v.wrapping_mul(2_654_435_761) % 977;
        assert_eq!(Execution::Sequential.map(&items, f), Execution::Parallel.map(&items, f));
    }
}
