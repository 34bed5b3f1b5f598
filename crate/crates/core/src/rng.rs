//! Counter-based random streams.
//!
//! Every Monte Carlo estimator in the crate draws from a ChaCha8 keystream
//! selected by `(seed, stream)`. Work is cut into fixed-size chunks and chunk
//! `c` always reads stream `c`, so the result never depends on how chunks are
//! scheduled across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Number of samples per independent chunk.
pub const CHUNK: u64 = 1 << 16;

pub type StreamRng = ChaCha8Rng;

/// Generator for stream `stream` of `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Mixes a tag into a seed (splitmix64 finaliser), used to give independent
/// sub-computations (sequence entries, chains, grid points) their own seeds.
pub fn derive_seed(seed: u64, tag: u64) -> u64 {
    let mut z = seed ^ tag.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Splits `total` into chunk sizes of at most [`CHUNK`].
pub fn chunk_sizes(total: u64) -> impl Iterator<Item = (u64, u64)> {
    let full = total / CHUNK;
    let rest = total % CHUNK;
    (0..full)
        .map(|c| (c, CHUNK))
        .chain((rest > 0).then_some((full, rest)))
}
