//! Small deterministic random number generator.
//!
//! Attractor sampling and Markov chain simulation must reproduce bit-for-bit
//! from a seed, on any platform, without a std dependency. SplitMix64 is
//! enough for that: a 64-bit state, full period, and good equidistribution
//! for the modest draw counts used here. It is not a cryptographic
//! generator and is not meant to be.

/// SplitMix64 generator (Steele, Lea, Flood 2014 public-domain constants).
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    /// Creates a generator from a seed. Equal seeds give equal streams.
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    /// Next 64 uniform bits.
    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }

    /// Uniform draw from `0..n` (`n` > 0), via the multiply-shift reduction.
    /// The bias is below 2^-64 * n, irrelevant at the draw counts used here.
    pub fn below(&mut self, n: usize) -> usize {
        debug_assert!(n > 0);
        (((self.next_u64() as u128) * (n as u128)) >> 64) as usize
    }

    /// Uniform draw from `[0, 1)` with 53-bit resolution.
    pub fn unit(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform draw from `[lo, hi)`.
    pub fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.unit()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equal_seeds_give_equal_streams() {
        let mut a = SplitMix64::new(42);
        let mut b = SplitMix64::new(42);
        for _ in 0..100 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
    }

    #[test]
    fn unit_stays_in_range() {
        let mut g = SplitMix64::new(7);
        for _ in 0..1000 {
            let x = g.unit();
            assert!((0.0..1.0).contains(&x));
        }
    }

    #[test]
    fn below_covers_all_residues() {
        let mut g = SplitMix64::new(3);
        let mut seen = [false; 5];
        for _ in 0..200 {
            seen[g.below(5)] = true;
        }
        assert!(seen.iter().all(|&s| s));
    }
}
