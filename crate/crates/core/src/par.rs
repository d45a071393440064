//! Thin data-parallel layer. With the `parallel` feature these run on rayon's
//! global pool; without it they are plain sequential loops with identical
//! results (every reduction here is associative and order-preserving).

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[cfg(feature = "parallel")]
pub(crate) fn init_workers(threads: usize) -> bool {
    rayon::ThreadPoolBuilder::new().num_threads(threads).build_global().is_ok()
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn init_workers(_threads: usize) -> bool {
    false
}

/// `items.map(f).collect()`, order preserved.
pub(crate) fn map<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        items.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter().map(f).collect()
    }
}

/// `(0..n).map(f).collect()`, order preserved.
pub(crate) fn map_range<R, F>(n: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).collect()
    }
}

/// Concatenation of `f(i)` over `0..n`, in index order.
pub(crate) fn flat_map_range<R, F>(n: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> Vec<R> + Sync + Send,
{
    map_range(n, f).into_iter().flatten().collect()
}

/// Folds chunks of `0..n` into per-worker accumulators and merges them.
pub(crate) fn fold_range<A, Id, F, M>(n: usize, identity: Id, fold: F, merge: M) -> A
where
    A: Send,
    Id: Fn() -> A + Sync + Send,
    F: Fn(A, usize) -> A + Sync + Send,
    M: Fn(A, A) -> A + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        (0..n).into_par_iter().fold(&identity, fold).reduce(&identity, merge)
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = &merge;
        (0..n).fold(identity(), fold)
    }
}

/// First index (lowest) whose `f` returns `Some`, short-circuiting higher ones.
pub(crate) fn find_first<R, F>(n: usize, f: F) -> Option<R>
where
    R: Send,
    F: Fn(usize) -> Option<R> + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        (0..n).into_par_iter().find_map_first(f)
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).find_map(f)
    }
}
