//! Deterministic seed derivation and per-task RNG streams.
//!
//! Every random quantity in the crate is drawn from a [`ChaCha8Rng`] built by
//! [`stream_rng`] from a seed derived with [`derive_seed`], so results never
//! depend on scheduling or worker count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub use rand_chacha::ChaCha8Rng as StreamRng;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finalizer; a bijection on `u64`.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mixes a base seed with a chain of labels.
///
/// Each step is `state ← mix64(state + γ) ⊕ label`, then mixed again, so the
/// map is a bijection in `base` for fixed labels and in the last label for a
/// fixed prefix.
pub fn derive_seed(base: u64, labels: &[u64]) -> u64 {
    let mut state = mix64(base.wrapping_add(GOLDEN));
    for &label in labels {
        state = mix64(state.wrapping_add(GOLDEN) ^ label);
    }
    state
}

/// Hashes a text label to a `u64` (FNV-1a), for use in [`derive_seed`].
pub fn label(text: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in text.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// RNG for stream `index` under `seed`.
pub fn stream_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}
