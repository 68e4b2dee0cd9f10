//! Seeded random streams.
//!
//! Every stochastic step draws from a ChaCha8 generator keyed by the run seed
//! and a stream id (class id, tree index, ...), so work split across threads
//! sees the same numbers as a serial run.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

pub fn stream(seed: u64, stream_id: u64) -> Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream_id);
    rng
}
