use metamr_core::exec::Executor;
use rayon::prelude::*;

/// Runs items on the global rayon pool; results keep input order.
#[derive(Debug, Clone, Copy, Default)]
pub struct Rayon;

impl Executor for Rayon {
    fn map<T, R, F>(&self, items: &[T], f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(usize, &T) -> R + Sync + Send,
    {
        items.par_iter().enumerate().map(|(i, t)| f(i, t)).collect()
    }
}
