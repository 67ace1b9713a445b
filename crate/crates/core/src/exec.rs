//! Data-parallel execution helpers.
//!
//! Every hot loop in the crate (pairwise distances, per-record feature
//! extraction, cross-validation cells) goes through [`map_range`] so the same
//! code runs on the rayon pool or sequentially. With the `parallel` feature
//! disabled, [`Execution::Parallel`] silently degrades to sequential.
//! Output order never depends on the schedule.

/// How to evaluate independent work items.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

impl Execution {
    /// Whether this build can actually run work in parallel.
    pub fn parallel_available() -> bool {
        cfg!(feature = "parallel")
    }
}

/// Evaluate `f(i)` for `i in 0..n`, returning results in index order.
pub fn map_range<T, F>(exec: Execution, n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            (0..n).into_par_iter().map(f).collect()
        }
        _ => (0..n).map(f).collect(),
    }
}

/// Like [`map_range`] but over a slice.
pub fn map_slice<S, T, F>(exec: Execution, items: &[S], f: F) -> Vec<T>
where
    S: Sync,
    T: Send,
    F: Fn(&S) -> T + Sync + Send,
{
    map_range(exec, items.len(), |i| f(&items[i]))
}

/// Run `f` inside a pool limited to `jobs` worker threads. `None` uses the
/// global pool.
pub fn with_jobs<R, F>(jobs: Option<usize>, f: F) -> R
where
    R: Send,
    F: FnOnce() -> R + Send,
{
    #[cfg(feature = "parallel")]
    if let Some(jobs) = jobs {
        if let Ok(pool) = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs.max(1))
            .build()
        {
            return pool.install(f);
        }
    }
    let _ = jobs;
    f()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parallel_and_sequential_agree() {
        let seq = map_range(Execution::Sequential, 1000, |i| (i as f64).sqrt());
        let par = map_range(Execution::Parallel, 1000, |i| (i as f64).sqrt());
        assert_eq!(seq, par);
    }

    #[test]
    fn with_jobs_runs_closure() {
        let v = with_jobs(Some(2), || map_range(Execution::Parallel, 10, |i| i * 2));
        assert_eq!(v, (0..10).map(|i| i * 2).collect::<Vec<_>>());
    }
}
