//! Seed derivation for reproducible sub-streams.
//!
//! Every randomized component takes a 64-bit seed. Sub-components (per-trial,
//! per-chain, per-coordinate) derive their own seeds through `derive`, so the
//! output of a run is a pure function of the master seed regardless of
//! execution order or parallelism. The mixing function is SplitMix64; it is
//! part of the on-disk reproducibility contract and must not change.

const GOLDEN_GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(GOLDEN_GAMMA);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Derives a child seed from `seed` for the sub-stream identified by `tag`.
pub fn derive(seed: u64, tag: u64) -> u64 {
    splitmix64(seed ^ splitmix64(tag))
}
