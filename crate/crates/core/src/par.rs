//! Chunked data-parallel execution with a sequential fallback.
//!
//! Work is always split into the same fixed-size chunks regardless of the
//! worker count, each chunk is reduced sequentially, and chunk results come
//! back in index order. Callers fold them left to right, so floating-point
//! sums are bitwise reproducible across `workers = 1` and any pool size.

use std::ops::Range;

use serde::Serialize;

/// Whether a verification visits every instance or a seeded sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum Mode {
    Exhaustive,
    Sampled { count: u64, seed: u64 },
}

impl Mode {
    pub fn seed(&self) -> Option<u64> {
        match *self {
            Mode::Exhaustive => None,
            Mode::Sampled { seed, .. } => Some(seed),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Mode::Exhaustive => "exhaustive",
            Mode::Sampled { .. } => "sampled",
        }
    }
}

/// How many threads to use. `workers == 1` always runs inline.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Exec {
    workers: usize,
}

impl Default for Exec {
    fn default() -> Self {
        Exec { workers: 0 }
    }
}

impl Exec {
    pub fn sequential() -> Self {
        Exec { workers: 1 }
    }

    /// `0` means "one worker per core".
    pub fn with_workers(workers: usize) -> Self {
        Exec { workers }
    }

    pub fn workers(&self) -> usize {
        self.workers
    }

    pub fn is_sequential(&self) -> bool {
        self.workers == 1 || !cfg!(feature = "parallel")
    }

    /// Map `f` over consecutive chunks of `0..total`.
    pub fn map_chunks<T, F>(&self, total: u64, chunk: u64, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(Range<u64>) -> T + Sync + Send,
    {
        let chunk = chunk.max(1);
        let chunks: Vec<Range<u64>> = (0..total.div_ceil(chunk))
            .map(|c| c * chunk..((c + 1) * chunk).min(total))
            .collect();
        self.map(chunks, f)
    }

    /// Order-preserving map over owned items.
    pub fn map<I, T, F>(&self, items: Vec<I>, f: F) -> Vec<T>
    where
        I: Send,
        T: Send,
        F: Fn(I) -> T + Sync + Send,
    {
        if self.is_sequential() || items.len() <= 1 {
            return items.into_iter().map(f).collect();
        }
        self.run_parallel(items, f)
    }

    #[cfg(feature = "parallel")]
    fn run_parallel<I, T, F>(&self, items: Vec<I>, f: F) -> Vec<T>
    where
        I: Send,
        T: Send,
        F: Fn(I) -> T + Sync + Send,
    {
        use rayon::prelude::*;
        let job = move || items.into_par_iter().map(&f).collect::<Vec<T>>();
        if self.workers == 0 {
            return job();
        }
        match rayon::ThreadPoolBuilder::new()
            .num_threads(self.workers)
            .build()
        {
            Ok(pool) => pool.install(job),
            Err(_) => job(),
        }
    }

    #[cfg(not(feature = "parallel"))]
    fn run_parallel<I, T, F>(&self, items: Vec<I>, f: F) -> Vec<T>
    where
        I: Send,
        T: Send,
        F: Fn(I) -> T + Sync + Send,
    {
        items.into_iter().map(f).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chunks_cover_range_in_order() {
        for exec in [Exec::sequential(), Exec::with_workers(4)] {
            let parts = exec.map_chunks(103, 10, |r| (r.start, r.end));
            assert_eq!(parts.len(), 11);
            assert_eq!(parts[0], (0, 10));
            assert_eq!(parts[10], (100, 103));
        }
    }

    #[test]
    fn float_sums_match_across_workers() {
        let sum = |exec: Exec| -> f64 {
            exec.map_chunks(10_000, 97, |r| r.map(|i| 1.0 / (i as f64 + 1.0)).sum::<f64>())
                .into_iter()
                .fold(0.0, |a, b| a + b)
        };
        assert_eq!(
            sum(Exec::sequential()).to_bits(),
            sum(Exec::with_workers(3)).to_bits()
        );
    }

    #[test]
    fn empty_total() {
        let parts: Vec<u64> = Exec::default().map_chunks(0, 8, |r| r.end);
        assert!(parts.is_empty());
    }
}
