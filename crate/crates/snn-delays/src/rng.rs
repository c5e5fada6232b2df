//! Seeded, platform-independent random number generation.
//!
//! The generator is xoshiro256++ seeded through SplitMix64, implemented here
//! directly so that every draw sequence is bit-reproducible across platforms
//! and library versions. All stochastic behavior in this crate (weight
//! initialization, shuffling, dropout, augmentation, synthetic data) flows
//! through [`RngStream`].

use crate::error::{Result, SnnError};

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

#[inline]
fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(GOLDEN_GAMMA);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// xoshiro256++ stream with a recorded seed.
///
/// Identical seeds produce identical draw sequences. Independent streams for
/// parallel workers come from [`RngStream::substream`].
#[derive(Clone, Debug)]
pub struct RngStream {
    seed: u64,
    state: [u64; 4],
}

impl RngStream {
    pub fn new(seed: u64) -> Self {
        let mut sm = seed;
        let mut state = [0u64; 4];
        for word in &mut state {
            *word = splitmix64(&mut sm);
        }
        // A zero state would lock the generator at zero; SplitMix64 cannot
        // emit four zero words in a row, but keep the guard anyway.
        if state.iter().all(|&w| w == 0) {
            state[0] = GOLDEN_GAMMA;
        }
        RngStream { seed, state }
    }

    /// Independent stream derived from (base seed, index).
    pub fn substream(base_seed: u64, index: u64) -> Self {
        let mut sm = base_seed ^ index.wrapping_mul(GOLDEN_GAMMA).wrapping_add(1);
        RngStream::new(splitmix64(&mut sm))
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Core xoshiro256++ step.
    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        let s = &mut self.state;
        let result = s[0]
            .wrapping_add(s[3])
            .rotate_left(23)
            .wrapping_add(s[0]);
        let t = s[1] << 17;
        s[2] ^= s[0];
        s[3] ^= s[1];
        s[1] ^= s[2];
        s[0] ^= s[3];
        s[2] ^= t;
        s[3] = s[3].rotate_left(45);
        result
    }

    /// Uniform draw in the half-open interval `(lo, hi]`.
    ///
    /// The top 53 bits of a `u64` give `u` in `[0, 1)`; returning
    /// `hi - (hi - lo) * u` maps that to `(lo, hi]`, which is the interval
    /// the delay-coefficient initialization requires (zero excluded).
    pub fn uniform(&mut self, lo: f64, hi: f64) -> Result<f64> {
        if lo.is_nan() || hi.is_nan() || lo >= hi {
            return Err(SnnError::InvalidArg(format!(
                "uniform: lo ({lo}) must be < hi ({hi})"
            )));
        }
        let u = (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
        Ok(hi - (hi - lo) * u)
    }

    /// Uniform draw in `(lo, hi]` for internal callers with validated bounds.
    #[inline]
    pub(crate) fn uniform_unchecked(&mut self, lo: f64, hi: f64) -> f64 {
        debug_assert!(lo < hi);
        let u = (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
        hi - (hi - lo) * u
    }

    /// Uniform integer in `[0, n)` via the 128-bit multiply reduction.
    pub fn next_below(&mut self, n: usize) -> usize {
        assert!(n > 0, "next_below: n must be positive");
        ((self.next_u64() as u128 * n as u128) >> 64) as usize
    }

    pub fn bernoulli(&mut self, p: f64) -> bool {
        let u = (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
        u < p
    }

    /// In-place Fisher–Yates shuffle.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.next_below(i + 1);
            items.swap(i, j);
        }
    }

    /// `k` distinct indices drawn from `0..n` (partial Fisher–Yates).
    pub fn sample_distinct(&mut self, n: usize, k: usize) -> Vec<usize> {
        let k = k.min(n);
        let mut pool: Vec<usize> = (0..n).collect();
        for i in 0..k {
            let j = i + self.next_below(n - i);
            pool.swap(i, j);
        }
        pool.truncate(k);
        pool
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_sequence() {
        let mut a = RngStream::new(42);
        let mut b = RngStream::new(42);
        for _ in 0..1000 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
    }

    #[test]
    fn different_seeds_differ() {
        let mut a = RngStream::new(1);
        let mut b = RngStream::new(2);
        let same = (0..64).filter(|_| a.next_u64() == b.next_u64()).count();
        assert!(same < 4);
    }

    #[test]
    fn uniform_interval_is_left_open_right_closed() {
        let mut rng = RngStream::new(7);
        for _ in 0..100_000 {
            let x = rng.uniform(0.0, 1.0).unwrap();
            assert!(x > 0.0 && x <= 1.0, "draw {x} outside (0, 1]");
        }
    }

    #[test]
    fn uniform_rejects_bad_bounds() {
        let mut rng = RngStream::new(0);
        assert!(rng.uniform(1.0, 1.0).is_err());
        assert!(rng.uniform(2.0, 1.0).is_err());
    }

    #[test]
    fn uniform_mean_close_to_half() {
        // Law-of-large-numbers check on U(0, 1].
        let mut rng = RngStream::new(123);
        let n = 1_000_000;
        let mean: f64 = (0..n).map(|_| rng.uniform(0.0, 1.0).unwrap()).sum::<f64>() / n as f64;
        assert!((mean - 0.5).abs() < 0.01, "mean {mean}");
    }

    #[test]
    fn substreams_are_independent_and_reproducible() {
        let mut a0 = RngStream::substream(9, 0);
        let mut a0b = RngStream::substream(9, 0);
        let mut a1 = RngStream::substream(9, 1);
        assert_eq!(a0.next_u64(), a0b.next_u64());
        let same = (0..64).filter(|_| a0.next_u64() == a1.next_u64()).count();
        assert!(same < 4);
    }

    #[test]
    fn known_answer_vector_is_stable() {
        // Pins the generator so cross-platform reproducibility regressions
        // show up as a test failure rather than silent drift.
        let mut rng = RngStream::new(0);
        let v: Vec<u64> = (0..4).map(|_| rng.next_u64()).collect();
        assert_eq!(
            v,
            vec![
                5987356902031041503,
                7051070477665621255,
                6633766593972829180,
                211316841551650330
            ]
        );
    }

    #[test]
    fn sample_distinct_returns_unique_indices() {
        let mut rng = RngStream::new(5);
        let picks = rng.sample_distinct(20, 8);
        assert_eq!(picks.len(), 8);
        let mut sorted = picks.clone();
        sorted.sort_unstable();
        sorted.dedup();
        assert_eq!(sorted.len(), 8);
        assert!(picks.iter().all(|&i| i < 20));
    }
}
