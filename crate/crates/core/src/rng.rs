//! Seeded random streams.
//!
//! Every replicate draws from its own ChaCha stream selected by an index, so
//! results depend only on `(seed, stream)` and never on scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn substream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Stream index for a two-level cell such as `(distribution, replicate)`.
pub fn cell_stream(outer: u64, inner: u64) -> u64 {
    ((outer + 1) << 32) | (inner & 0xffff_ffff)
}
