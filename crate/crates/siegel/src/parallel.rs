//! Thread-pool execution for the evaluation phases.

use rayon::prelude::*;
use siegel_core::exec::Executor;

/// Runs work items on a dedicated rayon pool. Results keep input order, so
/// they do not depend on the thread count.
pub struct RayonExecutor {
    pool: rayon::ThreadPool,
}

impl RayonExecutor {
    pub fn new(threads: usize) -> anyhow::Result<RayonExecutor> {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads.max(1)).build()?;
        Ok(RayonExecutor { pool })
    }
}

impl Executor for RayonExecutor {
    fn map<T, R, F>(&self, items: &[T], f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(&T) -> R + Sync + Send,
    {
        if self.pool.current_num_threads() == 1 {
            return items.iter().map(f).collect();
        }
        self.pool.install(|| items.par_iter().map(f).collect())
    }

    fn threads(&self) -> usize {
        self.pool.current_num_threads()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_is_preserved() {
        let items: Vec<u64> = (0..1000).collect();
        let ex = RayonExecutor::new(4).unwrap();
        assert_eq!(ex.threads(), 4);
        assert_eq!(ex.map(&items, |x| x * x), items.iter().map(|x| x * x).collect::<Vec<_>>());
    }
}
