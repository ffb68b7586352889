use rayon::prelude::*;

/// Below this many items the per-item work is too small for a thread pool.
pub const PAR_THRESHOLD: usize = 2048;

/// `(0..n).map(f)` collected in order, on the rayon pool for large `n`.
/// Each item is computed independently, so results do not depend on the
/// number of workers.
pub fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    if n >= PAR_THRESHOLD {
        (0..n).into_par_iter().map(f).collect()
    } else {
        (0..n).map(f).collect()
    }
}
