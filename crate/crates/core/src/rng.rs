//! Deterministic random substreams.
//!
//! Every Monte Carlo trial owns an independent ChaCha8 stream selected by its
//! trial index, so results do not depend on scheduling across worker threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Generator for substream `stream` under master `seed`.
pub fn substream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
