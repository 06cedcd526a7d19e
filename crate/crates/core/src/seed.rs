//! Seed discipline shared by every stochastic routine.
//!
//! All randomness comes from [`ChaCha8Rng`], seeded through
//! `SeedableRng::seed_from_u64` (a PCG32 expansion of the 64-bit seed into
//! the 256-bit ChaCha key). Both algorithms are fully specified, so a seed
//! produces the same stream on every platform.
//!
//! Ensembles derive one seed per run with [`derive_seed`]: the master seed
//! is xored with `(stream + 1) * 0x9E3779B97F4A7C15` and passed through the
//! SplitMix64 finalizer.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream tag used when a run needs a percolation seed next to its noise seed.
pub const PERCOLATION_STREAM: u64 = 0x7065_7263_6f6c_6174;

/// Stream tag for measurement samples drawn from a finished job.
pub const SAMPLING_STREAM: u64 = 0x7361_6d70_6c69_6e67;

/// Deterministic per-stream seed from a master seed.
pub fn derive_seed(master: u64, stream: u64) -> u64 {
    let mut z = master ^ stream.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// The generator behind every seeded draw in the crate.
pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
