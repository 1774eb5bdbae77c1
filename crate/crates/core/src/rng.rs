//! Seeded pseudo-random vectors for configs and validators.
//!
//! Runs must be reproducible across implementations, so the generator is
//! pinned to the SplitMix64 recurrence rather than an opaque library RNG:
//! `state += 0x9E3779B97F4A7C15`, then two xor-shift multiplies.

#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform in `[0, 1)` with 53 random bits.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in `[-1, 1)`.
    pub fn next_symmetric(&mut self) -> f64 {
        2.0 * self.next_f64() - 1.0
    }

    /// Vector with components uniform in `[-1, 1)`.
    pub fn vector(&mut self, n: usize) -> Vec<f64> {
        (0..n).map(|_| self.next_symmetric()).collect()
    }

    /// Vector normalized to unit norm under `|v|^2 = weight * sum v_i^2`.
    pub fn unit_vector(&mut self, n: usize, weight: f64) -> Vec<f64> {
        loop {
            let mut v = self.vector(n);
            let norm = (weight * v.iter().map(|x| x * x).sum::<f64>()).sqrt();
            if norm > 1e-12 {
                for x in &mut v {
                    *x /= norm;
                }
                return v;
            }
        }
    }
}
