//! Seeded 64-bit linear congruential generator.
//!
//! Reports embed the seed, and byte-identical reruns are part of the CLI
//! contract, so the generator is pinned here rather than borrowed from a
//! crate whose stream might change across versions. Knuth's MMIX multiplier;
//! doubles take the top 53 bits.

use num_complex::Complex64 as C64;

#[derive(Clone, Debug)]
pub struct Lcg64 {
    state: u64,
}

impl Lcg64 {
    pub fn new(seed: u64) -> Self {
        Self {
            state: seed.wrapping_add(0x9e3779b97f4a7c15),
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self
            .state
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        self.state
    }

    /// Uniform in [0, 1).
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    /// Uniform in [lo, hi).
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    /// Complex number with uniform radius in [0, r_max) and uniform angle.
    pub fn complex_in_disk(&mut self, r_max: f64) -> C64 {
        let r = self.uniform(0.0, r_max);
        let theta = self.uniform(0.0, std::f64::consts::TAU);
        C64::from_polar(r, theta)
    }

    /// Unit vector in ℂ^dim with uniform angles and radii before scaling.
    pub fn unit_complex_vector(&mut self, dim: usize) -> Vec<C64> {
        loop {
            let v: Vec<C64> = (0..dim).map(|_| self.complex_in_disk(1.0)).collect();
            let norm: f64 = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
            if norm > 1e-6 {
                return v.iter().map(|c| c / norm).collect();
            }
        }
    }
}
