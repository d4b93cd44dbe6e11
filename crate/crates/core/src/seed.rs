//! Counter-based seed derivation.
//!
//! A component seed is `splitmix64(base + GOLDEN * (counter + 1))` with
//! `counter = stream << 32 | index`, so every `(stream, index)` pair gets an independent,
//! order-free seed from one global seed.

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

/// One round of the SplitMix64 output function.
pub fn splitmix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn derive_seed(base: u64, stream: u32, index: u32) -> u64 {
    let counter = ((stream as u64) << 32) | index as u64;
    splitmix64(base.wrapping_add(GOLDEN.wrapping_mul(counter.wrapping_add(1))))
}

/// Named streams used across the crate.
pub mod stream {
    pub const COLLECT: u32 = 1;
    pub const TRAIN_MODEL: u32 = 2;
    pub const TRAIN_POLICY: u32 = 3;
    pub const PUSH: u32 = 4;
    pub const BENCHMARK_TASKS: u32 = 5;
    pub const BENCHMARK_CONTROL: u32 = 6;
    /// Randomized benchmark objects.
    pub const OBJECTS: u32 = 7;
}
