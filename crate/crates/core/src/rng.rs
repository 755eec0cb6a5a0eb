use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// SplitMix64 finalizer.
fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derive a stream seed from a base seed and a key path. Keys are hashed in
/// order, so `(seed, a, b)` and `(seed, b, a)` give unrelated streams.
pub(crate) fn derive_seed(seed: u64, keys: &[u64]) -> u64 {
    keys.iter().fold(splitmix(seed), |acc, &k| splitmix(acc ^ splitmix(k)))
}

pub(crate) fn stream(seed: u64, keys: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(seed, keys))
}

// Stream domains, so message init and the train/test split never share draws.
pub(crate) const DOMAIN_MESSAGES: u64 = 1;
pub(crate) const DOMAIN_SPLIT: u64 = 2;
pub(crate) const DOMAIN_FOLD_IN: u64 = 3;
pub(crate) const DOMAIN_SYNTH: u64 = 4;
