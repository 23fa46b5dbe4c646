//! Worker policy for the data-parallel paths.
//!
//! Two places go parallel when the `parallel` feature is on (it is by
//! default): the per-step kernel, chunked across the lattice window, and
//! sweep-level maps over independent runs. Both are organized so results
//! are byte-identical whatever the worker count — kernel chunks write
//! disjoint slices, sweep maps preserve input order, and every
//! floating-point *reduction* stays sequential. With the feature off, the
//! same code paths run sequentially and produce the same bytes.

/// How much parallelism a run may use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parallelism {
    /// Plain sequential execution, no thread pool at all.
    Sequential,
    /// Let the global pool decide (its default is the available cores).
    Auto,
    /// A dedicated pool with exactly this many workers (0 means
    /// [`Parallelism::Sequential`]).
    Workers(usize),
}

impl Default for Parallelism {
    fn default() -> Self {
        Parallelism::Auto
    }
}

/// Window length beyond which the step kernel bothers with threads.
pub(crate) const KERNEL_PAR_THRESHOLD: usize = 16 * 1024;

impl Parallelism {
    /// Whether the step kernel should parallelize a window of `len` sites.
    pub(crate) fn kernel_enabled(&self, len: usize) -> bool {
        if !cfg!(feature = "parallel") {
            return false;
        }
        match self {
            Parallelism::Sequential | Parallelism::Workers(0) => false,
            Parallelism::Auto | Parallelism::Workers(_) => len >= KERNEL_PAR_THRESHOLD,
        }
    }

    /// Order-preserving map over independent jobs.
    #[cfg(feature = "parallel")]
    pub fn map<T, R, F>(&self, items: &[T], f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(&T) -> R + Sync + Send,
    {
        use rayon::prelude::*;
        match self {
            Parallelism::Sequential | Parallelism::Workers(0) => items.iter().map(f).collect(),
            Parallelism::Auto => items.par_iter().map(f).collect(),
            Parallelism::Workers(n) => rayon::ThreadPoolBuilder::new()
                .num_threads(*n)
                .build()
                .expect("failed to build worker pool")
                .install(|| items.par_iter().map(f).collect()),
        }
    }

    /// Order-preserving map over independent jobs (sequential build).
    #[cfg(not(feature = "parallel"))]
    pub fn map<T, R, F>(&self, items: &[T], f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(&T) -> R + Sync + Send,
    {
        items.iter().map(f).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn map_preserves_order_for_every_policy() {
        let items: Vec<u64> = (0..100).collect();
        for par in [
            Parallelism::Sequential,
            Parallelism::Auto,
            Parallelism::Workers(1),
            Parallelism::Workers(4),
        ] {
            let out = par.map(&items, |&x| x * x);
            assert_eq!(out, items.iter().map(|&x| x * x).collect::<Vec<_>>());
        }
    }
}
