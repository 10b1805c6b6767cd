//! Stateless seed mixing shared by the simulator and the evaluation harness.

#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Deterministic hash of a seed and two integer coordinates.
#[inline]
pub fn hash3(seed: u64, a: i64, b: i64) -> u64 {
    let mut h = mix64(seed.wrapping_add(0x9e37_79b9_7f4a_7c15));
    h = mix64(h ^ (a as u64).wrapping_mul(0xd6e8_feb8_6659_fd93));
    mix64(h ^ (b as u64).wrapping_mul(0xa076_1d64_78bd_642f))
}

/// Uniform value in `[0, 1)` derived from [`hash3`].
#[inline]
pub fn unit3(seed: u64, a: i64, b: i64) -> f64 {
    (hash3(seed, a, b) >> 11) as f64 / (1u64 << 53) as f64
}

/// Independent sub-seed for stream `stream` of a run seeded with `seed`.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    hash3(seed, stream as i64, 0x5eed)
}
