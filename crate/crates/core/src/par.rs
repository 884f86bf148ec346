//! Data-parallel helpers.
//!
//! With the `parallel` feature (default) the maps below run on rayon; without
//! it they fall back to plain iterators. Results are always collected in input
//! order, so output never depends on the number of worker threads.

/// Execution policy for the batch loops (table cells, grid masks, strip arcs).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Exec {
    Sequential,
    /// Use the ambient rayon pool.
    #[default]
    Parallel,
    /// Use a dedicated pool with this many workers.
    Jobs(usize),
}

impl Exec {
    pub fn from_jobs(jobs: Option<usize>) -> Self {
        match jobs {
            None => Exec::Parallel,
            Some(0 | 1) => Exec::Sequential,
            Some(n) => Exec::Jobs(n),
        }
    }

    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self != Exec::Sequential
    }

    /// Run `f` under this policy. `Jobs(n)` installs a fresh pool for the
    /// duration of the call so nested maps pick it up.
    pub fn install<R: Send>(self, f: impl FnOnce() -> R + Send) -> R {
        #[cfg(feature = "parallel")]
        if let Exec::Jobs(n) = self {
            if let Ok(pool) = rayon::ThreadPoolBuilder::new().num_threads(n).build() {
                return pool.install(f);
            }
            log::warn!("could not build a {n}-thread pool, using the global one");
        }
        f()
    }

    pub fn map<T, R, F>(self, items: &[T], f: F) -> Vec<R>
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

    pub fn map_range<R, F>(self, n: usize, f: F) -> Vec<R>
    where
        R: Send,
        F: Fn(usize) -> R + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self.is_parallel() {
            use rayon::prelude::*;
            return (0..n).into_par_iter().map(f).collect();
        }
        (0..n).map(f).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_is_preserved_under_every_policy() {
        let items: Vec<u64> = (0..1000).collect();
        let expect: Vec<u64> = items.iter().map(|v| v * v).collect();
        for exec in [Exec::Sequential, Exec::Parallel, Exec::Jobs(3)] {
            let got = exec.install(|| exec.map(&items, |v| v * v));
            assert_eq!(got, expect);
            assert_eq!(exec.map_range(1000, |i| (i * i) as u64), expect);
        }
    }

    #[test]
    fn jobs_mapping() {
        assert_eq!(Exec::from_jobs(Some(1)), Exec::Sequential);
        assert_eq!(Exec::from_jobs(Some(8)), Exec::Jobs(8));
        assert_eq!(Exec::from_jobs(None), Exec::Parallel);
    }
}
