//! Deterministic pseudo-random numbers.
//!
//! Everything stochastic in this crate (instance generation, scenario
//! sampling, local search) runs on one fixed, documented generator so that a
//! seed pins down every result bit-for-bit, across platforms and across
//! thread counts.
//!
//! The generator is SplitMix64: a 64-bit Weyl sequence (increment
//! 0x9E3779B97F4A7C15) passed through a two-round xor-shift/multiply
//! finalizer. It is tiny, passes BigCrush, and, unlike `StdRng`, its output
//! is specified here rather than by a dependency's release notes.
//!
//! Parallel work uses *streams*: `SplitMix64::stream(seed, i)` derives the
//! generator for work item `i` by mixing the index into the seed through the
//! same finalizer. Stream starting states are therefore spread uniformly over
//! the whole 2^64 state space, so streams for distinct indices are disjoint
//! for any practical sequence length. Sample `i` of a Monte Carlo run always
//! draws from stream `i`, which makes estimates independent of how samples
//! are partitioned over threads.

/// SplitMix64 generator state.
#[derive(Clone, Debug)]
pub struct SplitMix64 {
    state: u64,
}

const WEYL: u64 = 0x9E37_79B9_7F4A_7C15;

/// The SplitMix64 output finalizer (a bijection on u64).
#[inline]
fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl SplitMix64 {
    /// Generator seeded directly with `seed`.
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    /// Independent stream `index` of the generator family identified by
    /// `seed`. Used one-stream-per-sample in Monte Carlo runs.
    pub fn stream(seed: u64, index: u64) -> Self {
        let salt = mix(index.wrapping_mul(0xD1B5_4A32_D192_ED03).wrapping_add(0x8CB9_2BA7_2F3D_8DD7));
        SplitMix64 { state: mix(seed ^ salt) }
    }

    /// Next raw 64-bit value.
    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(WEYL);
        mix(self.state)
    }

    /// Uniform double in [0, 1), using the top 53 bits.
    #[inline]
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform integer in [0, bound). `bound` must be nonzero.
    /// Rejection sampling keeps the draw exactly uniform.
    pub fn below(&mut self, bound: u64) -> u64 {
        debug_assert!(bound > 0);
        let zone = u64::MAX - u64::MAX % bound;
        loop {
            let v = self.next_u64();
            if v < zone {
                return v % bound;
            }
        }
    }

    /// Uniform usize in [0, bound).
    pub fn index(&mut self, bound: usize) -> usize {
        self.below(bound as u64) as usize
    }

    /// Uniform integer in [lo, hi] (inclusive).
    pub fn range_i64(&mut self, lo: i64, hi: i64) -> i64 {
        debug_assert!(lo <= hi);
        lo + self.below((hi - lo + 1) as u64) as i64
    }

    /// In-place Fisher-Yates shuffle.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.index(i + 1);
            items.swap(i, j);
        }
    }

    /// Uniformly chosen element of a non-empty slice.
    pub fn pick<'a, T>(&mut self, items: &'a [T]) -> &'a T {
        &items[self.index(items.len())]
    }
}

/// Normal sampler on top of [`SplitMix64`], using the Marsaglia polar method.
///
/// The pair structure of the polar method is kept in `spare`, so draw order
/// is deterministic: each draw consumes either zero or an even number of
/// uniforms.
#[derive(Clone, Debug, Default)]
pub struct NormalSampler {
    spare: Option<f64>,
}

impl NormalSampler {
    pub fn new() -> Self {
        NormalSampler { spare: None }
    }

    /// One draw from N(mu, sigma^2).
    pub fn sample(&mut self, rng: &mut SplitMix64, mu: f64, sigma: f64) -> f64 {
        if let Some(z) = self.spare.take() {
            return mu + sigma * z;
        }
        loop {
            let u = 2.0 * rng.next_f64() - 1.0;
            let v = 2.0 * rng.next_f64() - 1.0;
            let s = u * u + v * v;
            if s > 0.0 && s < 1.0 {
                let factor = (-2.0 * s.ln() / s).sqrt();
                self.spare = Some(v * factor);
                return mu + sigma * u * factor;
            }
        }
    }
}
