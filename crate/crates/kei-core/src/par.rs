//! Thin indirection over rayon so every data-parallel loop in the crate has
//! a sequential twin. With the `parallel` feature disabled the parallel
//! entry points simply run sequentially; results are identical either way
//! because callers always collect in input order.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Sequential map, always available. Kept public so benches can compare the
/// two paths directly.
pub fn map_sequential<T: Sync, R: Send>(items: &[T], f: impl Fn(&T) -> R + Sync + Send) -> Vec<R> {
    items.iter().map(f).collect()
}

/// Parallel map preserving input order.
#[cfg(feature = "parallel")]
pub fn map_parallel<T: Sync, R: Send>(items: &[T], f: impl Fn(&T) -> R + Sync + Send) -> Vec<R> {
    items.par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn map_parallel<T: Sync, R: Send>(items: &[T], f: impl Fn(&T) -> R + Sync + Send) -> Vec<R> {
    map_sequential(items, f)
}

/// Maps with the crate-default strategy: parallel when the feature is on.
pub fn map<T: Sync, R: Send>(items: &[T], f: impl Fn(&T) -> R + Sync + Send) -> Vec<R> {
    map_parallel(items, f)
}
