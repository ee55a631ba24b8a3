//! Deterministic per-sample random streams.
//!
//! Audits run samples in parallel; each sample draws from its own generator
//! derived from `(seed, index)`, so output does not depend on scheduling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::group::ChartGroup;
use crate::vector::ChartVector;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn sample_rng(seed: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(splitmix64(seed ^ splitmix64(index)))
}

/// Chart element whose valuation level is drawn from `1..=max_level`; one
/// sample in `zero_every` is the identity so vacuous cases stay covered.
pub fn mixed_element<R: Rng + ?Sized>(
    rng: &mut R,
    group: &ChartGroup,
    precision: u32,
    max_level: u32,
    zero_every: u32,
) -> ChartVector {
    if zero_every > 0 && rng.gen_range(0..zero_every) == 0 {
        return group.identity(precision);
    }
    let level = rng.gen_range(1..=max_level.max(1).min(precision.saturating_sub(1).max(1)));
    group.random_element(rng, precision, level)
}
