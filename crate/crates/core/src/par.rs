//! Order-preserving map over independent work items.
//!
//! With the `parallel` feature the items are spread over a rayon pool;
//! without it (or with one worker) they run in sequence on the caller.

/// Applies `f` to every item in sequence.
pub fn map_sequential<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    F: Fn(&T) -> R,
{
    items.iter().map(f).collect()
}

/// Applies `f` to every item on up to `workers` threads (`0` picks the
/// number of cores). Results keep the input order.
#[cfg(feature = "parallel")]
pub fn map<T, R, F>(items: &[T], workers: usize, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    use rayon::prelude::*;

    if workers == 1 || items.len() < 2 {
        return map_sequential(items, f);
    }
    let run = || items.par_iter().map(&f).collect();
    match rayon::ThreadPoolBuilder::new().num_threads(workers).build() {
        Ok(pool) => pool.install(run),
        Err(e) => {
            log::warn!("thread pool unavailable ({e}), using the global pool");
            run()
        }
    }
}

#[cfg(not(feature = "parallel"))]
pub fn map<T, R, F>(items: &[T], _workers: usize, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    map_sequential(items, f)
}

/// True when the crate was built with the rayon backend.
pub const fn is_parallel() -> bool {
    cfg!(feature = "parallel")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn keeps_order() {
        let items: Vec<u64> = (0..200).collect();
        let want: Vec<u64> = items.iter().map(|x| x * x).collect();
        for workers in [0, 1, 3] {
            assert_eq!(map(&items, workers, |x| x * x), want);
        }
        assert_eq!(map_sequential(&items, |x| x * x), want);
    }
}
