//! Data-parallel map with a sequential fallback.
//!
//! With the `parallel` feature the [`ExecMode::Parallel`] mode runs on rayon;
//! without it every mode is sequential. Results are always returned in index
//! order, so output never depends on scheduling.

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExecMode {
    Sequential,
    #[default]
    Parallel,
}

/// Applies `f` to `0..n` and collects the results in index order.
pub fn map_indexed<R, F>(mode: ExecMode, n: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    match mode {
        #[cfg(feature = "parallel")]
        ExecMode::Parallel => {
            use rayon::prelude::*;
            (0..n).into_par_iter().map(f).collect()
        }
        _ => (0..n).map(f).collect(),
    }
}

/// Sizes the global worker pool. Only the first call has an effect; later
/// calls report whether the pool already matches.
pub fn set_workers(n: usize) -> bool {
    #[cfg(feature = "parallel")]
    {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().is_ok() || rayon::current_num_threads() == n
    }
    #[cfg(not(feature = "parallel"))]
    {
        n == 1
    }
}

pub fn workers() -> usize {
    #[cfg(feature = "parallel")]
    {
        rayon::current_num_threads()
    }
    #[cfg(not(feature = "parallel"))]
    {
        1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn modes_agree_and_preserve_order() {
        let f = |i: usize| (i as f64).sqrt() * 3.0;
        let a = map_indexed(ExecMode::Sequential, 257, f);
        let b = map_indexed(ExecMode::Parallel, 257, f);
        assert_eq!(a, b);
        assert_eq!(a[16], 12.0);
    }
}
