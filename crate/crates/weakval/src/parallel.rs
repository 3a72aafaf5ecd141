//! Multi-threaded execution of chunked jobs.
//!
//! Chunks run on the rayon pool and their partials are collected in chunk
//! order before `finish`, so results match [`run_sequential`] exactly for any
//! thread count.
//!
//! [`run_sequential`]: weakval_core::jobs::run_sequential

use rayon::prelude::*;
use weakval_core::jobs::ChunkedJob;

use crate::CliError;

pub fn run_parallel<J: ChunkedJob>(job: &J) -> J::Output {
    let partials: Vec<J::Partial> = (0..job.chunk_count()).into_par_iter().map(|i| job.run_chunk(i)).collect();
    job.finish(partials)
}

/// Runs `f` on a dedicated pool of `threads` workers, or on the global pool if `None`.
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T, CliError> {
    match threads {
        None => Ok(f()),
        Some(n) => Ok(rayon::ThreadPoolBuilder::new().num_threads(n).build()?.install(f)),
    }
}
