//! Chunked Monte Carlo jobs.
//!
//! Every sampling routine in this crate is split into a fixed number of
//! chunks. Chunk `i` draws from its own generator seeded with
//! [`chunk_seed`]`(root, i)`, and partial results are merged in chunk-index
//! order. The output therefore depends only on the root seed, never on how
//! many workers executed the chunks or in which order they finished.

use alloc::vec::Vec;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub trait ChunkedJob: Sync {
    type Partial: Send;
    type Output;

    fn chunk_count(&self) -> usize;
    fn run_chunk(&self, index: usize) -> Self::Partial;
    /// `partials[i]` is the result of chunk `i`.
    fn finish(&self, partials: Vec<Self::Partial>) -> Self::Output;
}

/// Runs all chunks on the current thread.
pub fn run_sequential<J: ChunkedJob>(job: &J) -> J::Output {
    let partials = (0..job.chunk_count()).map(|i| job.run_chunk(i)).collect();
    job.finish(partials)
}

/// SplitMix64 finalizer over `root + (index + 1) * golden`.
pub fn chunk_seed(root: u64, index: u64) -> u64 {
    let mut z = root.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn chunk_rng(root: u64, index: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(chunk_seed(root, index as u64))
}

/// Splits `total` items into chunks of at most `chunk` items.
pub fn chunk_bounds(total: u64, chunk: u64, index: usize) -> (u64, u64) {
    let start = (index as u64).saturating_mul(chunk).min(total);
    let end = start.saturating_add(chunk).min(total);
    (start, end)
}

pub fn chunks_for(total: u64, chunk: u64) -> usize {
    total.div_ceil(chunk) as usize
}
