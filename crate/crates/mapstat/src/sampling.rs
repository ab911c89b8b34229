//! Seeded random sources for the two-step product experiment: draw a mapping
//! uniformly from the `n^n` possibilities, then draw a vertex (or an
//! unordered vertex pair) uniformly and independently.
//!
//! Streams are keyed by `(seed, stream_id)` so parallel workers can own
//! disjoint, reproducible substreams without shared state.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::mapping::Mapping;

/// Identifies the pinned generator in report metadata.
pub const GENERATOR_ID: &str = "chacha8(seed:u64, stream:u64)";

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SamplingError {
    #[error("population size {n} is too small (need at least {min})")]
    InvalidSize { n: usize, min: usize },
}

/// A reproducible random stream. Identical `(seed, stream_id)` pairs replay
/// identical draw sequences; distinct stream ids give independent sequences.
#[derive(Debug, Clone)]
pub struct RandomStream {
    seed: u64,
    stream_id: u64,
    position: u64,
    rng: ChaCha8Rng,
}

impl RandomStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream_id);
        Self {
            seed,
            stream_id,
            position: 0,
            rng,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// Count of bounded integer draws made so far.
    pub fn position(&self) -> u64 {
        self.position
    }

    /// Uniform draw from `[0, bound)` without modulo bias (rand's widening
    /// multiply + rejection sampler).
    fn below(&mut self, bound: u32) -> u32 {
        self.position += 1;
        self.rng.random_range(0..bound)
    }
}

/// Step 1 of the product experiment: a uniform mapping on `[n]`, each image
/// drawn independently and uniformly, so every mapping has probability `n^-n`.
pub fn sample_mapping(n: usize, rs: &mut RandomStream) -> Result<Mapping, SamplingError> {
    if n == 0 {
        return Err(SamplingError::InvalidSize { n, min: 1 });
    }
    let bound = n as u32;
    let images: Vec<u32> = (0..n).map(|_| rs.below(bound)).collect();
    Ok(Mapping::from_internal(images))
}

/// Step 2 of the product experiment: a uniform vertex in `[1, n]`.
pub fn sample_vertex(n: usize, rs: &mut RandomStream) -> Result<usize, SamplingError> {
    if n == 0 {
        return Err(SamplingError::InvalidSize { n, min: 1 });
    }
    Ok(rs.below(n as u32) as usize + 1)
}

/// Uniform unordered pair `{u, v}` with `u < v`, over all `n(n-1)/2` pairs.
pub fn sample_vertex_pair(
    n: usize,
    rs: &mut RandomStream,
) -> Result<(usize, usize), SamplingError> {
    if n < 2 {
        return Err(SamplingError::InvalidSize { n, min: 2 });
    }
    let u = rs.below(n as u32);
    let mut v = rs.below(n as u32 - 1);
    if v >= u {
        v += 1;
    }
    Ok((u.min(v) as usize + 1, u.max(v) as usize + 1))
}

/// Generator identification echoed into every report.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RngMetadata {
    pub generator: &'static str,
    pub seed: u64,
    pub stream_base: u64,
    pub trials_per_chunk: u64,
}
