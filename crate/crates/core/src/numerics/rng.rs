//! Reproducible random streams.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

/// Words reserved per block; blocks never overlap for realistic workloads.
const BLOCK_WORDS: u128 = 1 << 48;

/// A `(seed, stream_id)` pair naming one ChaCha20 keystream.
///
/// Equal pairs reproduce equal draws; distinct `stream_id`s select disjoint
/// keystreams under the same key.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
pub struct RandomStream {
    pub seed: u64,
    pub stream_id: u64,
}

impl RandomStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        Self { seed, stream_id }
    }

    /// Generator positioned at the start of the stream.
    pub fn rng(&self) -> ChaCha20Rng {
        self.block_rng(0)
    }

    /// Generator positioned at block `block` of the stream.
    ///
    /// Parallel samplers give each fixed-size chunk its own block so that the
    /// output does not depend on the number of worker threads.
    pub fn block_rng(&self, block: u64) -> ChaCha20Rng {
        let mut rng = ChaCha20Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_id);
        rng.set_word_pos(BLOCK_WORDS * block as u128);
        rng
    }

    pub fn with_stream(self, stream_id: u64) -> Self {
        Self { stream_id, ..self }
    }
}
