//! Deterministic RNG streams.
//!
//! Every random decision in the artifact is drawn from a ChaCha stream
//! derived from (master seed, purpose, index). Deriving the per-step
//! stream from the step index makes sample sequences independent of how
//! many loader workers produced them.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::real::Real;

pub type StdRng = ChaCha8Rng;

/// Stable domain tags for derived streams.
#[derive(Debug, Clone, Copy)]
pub enum Stream {
    Init,
    Pair,
    Split,
    Noise,
    Scale,
}

impl Stream {
    fn tag(self) -> u64 {
        match self {
            Stream::Init => 0x494e4954,
            Stream::Pair => 0x50414952,
            Stream::Split => 0x53504c54,
            Stream::Noise => 0x4e4f4953,
            Stream::Scale => 0x53434c45,
        }
    }
}

/// RNG for (seed, purpose, index) — e.g. the pair stream of training step i.
pub fn stream_rng(seed: u64, stream: Stream, index: u64) -> StdRng {
    // splitmix-style mixing keeps nearby (seed, index) pairs uncorrelated
    let mut z = seed ^ stream.tag().wrapping_mul(0x9e3779b97f4a7c15) ^ index.wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^= z >> 31;
    ChaCha8Rng::seed_from_u64(z)
}

/// Standard-normal draw via Box–Muller; `rand_distr` is avoided so the core
/// stays `no_std` and the byte-for-byte sequence is pinned by this crate.
pub fn next_gaussian<T: Real>(rng: &mut impl Rng) -> T {
    let mut u1: T = rng.gen_range(T::zero()..T::one());
    if u1 <= T::zero() {
        u1 = T::min_positive_value();
    }
    let u2: T = rng.gen_range(T::zero()..T::one());
    let two_pi = T::of(core::f64::consts::TAU);
    (-T::two() * u1.ln()).sqrt() * (two_pi * u2).cos()
}
