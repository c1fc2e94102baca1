//! Thin switch between rayon and plain iterators.
//!
//! Callers pass `parallel = true` to request data parallelism; without the
//! `parallel` feature the flag is ignored and everything runs on the calling
//! thread. Output order is always the input order.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

pub(crate) fn map<T, R, F>(items: &[T], parallel: bool, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if parallel {
        return items.par_iter().map(f).collect();
    }
    let _ = parallel;
    items.iter().map(f).collect()
}

pub(crate) fn filter<T, F>(items: &[T], parallel: bool, keep: F) -> Vec<T>
where
    T: Copy + Send + Sync,
    F: Fn(T) -> bool + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if parallel {
        return items.par_iter().copied().filter(|x| keep(*x)).collect();
    }
    let _ = parallel;
    items.iter().copied().filter(|x| keep(*x)).collect()
}

pub(crate) const fn enabled() -> bool {
    cfg!(feature = "parallel")
}
