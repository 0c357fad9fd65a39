//! Seeded random streams.
//!
//! Every random draw in the crate comes from a [`Pcg64`] (PCG XSL-RR 128/64,
//! a permutation-based 64-bit output generator), seeded through
//! `SeedableRng::seed_from_u64`. Streams are split per scan point by XOR-ing
//! the user seed with the point index:
//!
//! ```text
//! sampling stream  = Pcg64::seed_from_u64(seed ^ index)
//! optimizer stream = Pcg64::seed_from_u64(seed ^ index ^ OPTIMIZER_DOMAIN)
//! ```
//!
//! so measurement sampling and ansatz fitting never share draws and each is
//! reproducible on its own. One shot consumes exactly one `f64` draw.

use rand::{Rng, SeedableRng};
pub use rand_pcg::Pcg64;

/// Tag mixed into optimizer seeds to keep them disjoint from sampling seeds.
pub const OPTIMIZER_DOMAIN: u64 = 0x6f70_7469_6d69_7a65;

/// Seed of the sampling stream for grid point `index`.
pub fn point_seed(seed: u64, index: u64) -> u64 {
    seed ^ index
}

pub fn sampling_rng(seed: u64) -> Pcg64 {
    Pcg64::seed_from_u64(seed)
}

pub fn optimizer_rng(seed: u64) -> Pcg64 {
    Pcg64::seed_from_u64(seed ^ OPTIMIZER_DOMAIN)
}

/// Uniform draw in `[lo, hi)`.
pub fn uniform(rng: &mut Pcg64, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * rng.random::<f64>()
}
