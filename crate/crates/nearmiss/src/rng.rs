//! Deterministic, portable random number generation.
//!
//! All randomness in this crate flows through [`Rng64`], a SplitMix64
//! generator (Steele/Lea/Vigna): a 64-bit counter advanced by a Weyl constant
//! whose output is finalized with two xor-multiply rounds. The algorithm is
//! fully specified here, has no platform-dependent behavior, and a given seed
//! yields the same sequence on every target. Not suitable for secrets.
//!
//! Independent streams (sampler vs. per-case simulation seeds) are derived
//! from a campaign seed with [`derive_stream`] so that adding workers or
//! reordering evaluations cannot perturb any stream.

/// Weyl increment used by SplitMix64.
const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

#[inline]
fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// SplitMix64 generator. `Clone` + `PartialEq` so sampler state can be
/// snapshotted and compared in tests.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rng64 {
    state: u64,
}

impl Rng64 {
    pub fn new(seed: u64) -> Self {
        Rng64 { state: seed }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN_GAMMA);
        mix(self.state)
    }

    /// Uniform `f64` in `[0, 1)` using the top 53 bits.
    #[inline]
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform over `[lo, hi]`. A degenerate range (`lo == hi`) yields exactly
    /// `lo` without consuming less randomness than the general case.
    #[inline]
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    /// Uniform integer in `[0, n)` via 128-bit multiply-shift. `n` must be > 0.
    #[inline]
    pub fn below(&mut self, n: u64) -> u64 {
        debug_assert!(n > 0);
        ((self.next_u64() as u128 * n as u128) >> 64) as u64
    }

    #[inline]
    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.next_f64() < p
    }

    /// Standard normal deviate via Box-Muller; consumes exactly two draws so
    /// the stream position is input-independent.
    pub fn gaussian(&mut self) -> f64 {
        // u1 in (0, 1] so ln is finite.
        let u1 = ((self.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64);
        let u2 = self.next_f64();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }
}

/// Derives an independent stream seed from `(seed, tag)`. Two mixing rounds
/// keep streams with nearby tags (e.g. consecutive case indices) decorrelated.
pub fn derive_stream(seed: u64, tag: u64) -> u64 {
    let mut outer = Rng64::new(seed);
    let base = outer.next_u64();
    let mut inner = Rng64::new(base ^ tag);
    inner.next_u64()
}
