//! Worker-count policy: `NEWTON_GRAPHS_THREADS` caps the number of worker
//! threads used by the data-parallel sweeps (subset enumeration, grid
//! seeding). Results are merged deterministically regardless of the count.

pub fn worker_count() -> usize {
    let available = std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1);
    match std::env::var("NEWTON_GRAPHS_THREADS")
        .ok()
        .and_then(|s| s.parse::<usize>().ok())
    {
        Some(n) if n >= 1 => available.min(n),
        _ => available.min(8),
    }
}

/// Splits `0..len` into at most `workers` contiguous chunks.
pub fn chunk_ranges(len: usize, workers: usize) -> Vec<std::ops::Range<usize>> {
    if len == 0 {
        return Vec::new();
    }
    let workers = workers.clamp(1, len);
    let base = len / workers;
    let extra = len % workers;
    let mut out = Vec::with_capacity(workers);
    let mut start = 0;
    for i in 0..workers {
        let size = base + usize::from(i < extra);
        out.push(start..start + size);
        start += size;
    }
    out
}
