//! Small deterministic RNG (splitmix64) for reproducible sampling: test
//! sweeps, synthetic tracking noise, randomized property checks. Not
//! cryptographic.

use crate::geom::{Rotation, Vec3};

#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E3779B97F4A7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
        z ^ (z >> 31)
    }

    /// Uniform in `[0, 1)`.
    pub fn f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in `[lo, hi)`.
    pub fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.f64()
    }

    /// Uniform direction on the unit sphere.
    pub fn unit_vec3(&mut self) -> Vec3 {
        loop {
            let v = Vec3::new(
                self.range(-1.0, 1.0),
                self.range(-1.0, 1.0),
                self.range(-1.0, 1.0),
            );
            let n2 = v.norm_sq();
            if n2 > 1e-6 && n2 <= 1.0 {
                return v / n2.sqrt();
            }
        }
    }

    /// Uniformly distributed rotation (Shoemake's subgroup method).
    pub fn rotation(&mut self) -> Rotation {
        let u1 = self.f64();
        let u2 = self.f64() * std::f64::consts::TAU;
        let u3 = self.f64() * std::f64::consts::TAU;
        let a = (1.0 - u1).sqrt();
        let b = u1.sqrt();
        Rotation::from_wxyz(a * u2.sin(), a * u2.cos(), b * u3.sin(), b * u3.cos())
            .expect("random quaternion is nonzero")
    }
}
