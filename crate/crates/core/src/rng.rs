//! Counter-based deterministic random numbers (SplitMix64).
//!
//! Randomized experiment families replay exactly from `(seed, counter)`:
//! the k-th draw never depends on how many draws preceded it.

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// The SplitMix64 output function at counter position `k` for a given seed.
pub fn splitmix64_at(seed: u64, k: u64) -> u64 {
    let mut z = seed.wrapping_add(GOLDEN.wrapping_mul(k.wrapping_add(1)));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Uniform draw in `[0, 1)` at counter position `k`.
pub fn uniform_at(seed: u64, k: u64) -> f64 {
    // 53 high bits -> [0, 1)
    (splitmix64_at(seed, k) >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Sequential view over the counter stream.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    seed: u64,
    counter: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { seed, counter: 0 }
    }

    pub fn next_u64(&mut self) -> u64 {
        let v = splitmix64_at(self.seed, self.counter);
        self.counter += 1;
        v
    }

    pub fn next_f64(&mut self) -> f64 {
        let v = uniform_at(self.seed, self.counter);
        self.counter += 1;
        v
    }

    /// Uniform draw in `[lo, hi)`.
    pub fn next_range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }
}
