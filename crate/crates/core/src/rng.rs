//! Seeded randomness.
//!
//! A session is driven by a single [`SessionRng`] built from its seed. Monte
//! Carlo experiments derive one generator per path from a master seed: the
//! master seed fixes the ChaCha key and the path index selects the stream, so
//! path `i` draws the same numbers no matter how many paths are requested.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SessionRng = ChaCha8Rng;

pub fn session_rng(seed: u64) -> SessionRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Generator for path `index` of an experiment seeded with `master`.
pub fn path_rng(master: u64, index: u64) -> SessionRng {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(index);
    rng
}

/// Seed of path `index`, for components that need a plain `u64` seed.
pub fn path_seed(master: u64, index: u64) -> u64 {
    use rand::RngCore;
    path_rng(master, index).next_u64()
}
