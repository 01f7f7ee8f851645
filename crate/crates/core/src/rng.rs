use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Random generator whose stream is stable across platforms and releases.
pub type SeededRng = ChaCha8Rng;

pub fn seeded_rng(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}
