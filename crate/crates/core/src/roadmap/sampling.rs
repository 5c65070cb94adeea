//! Reproducible uniform sampling over a rectangle.
//!
//! The generator is ChaCha8 (`rand_chacha::ChaCha8Rng`) seeded with
//! `SeedableRng::seed_from_u64`. A coordinate is drawn from one 64-bit word
//! `w` as `min + extent * ((w >> 11) * 2^-53)`, x first then y. Both steps are
//! fully specified integer/IEEE-754 operations, so the sample stream is the
//! same on every platform.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::geom::{Rect, Vec2};

pub struct PointSampler {
    rng: ChaCha8Rng,
    region: Rect,
}

impl PointSampler {
    pub fn new(region: Rect, seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
            region,
        }
    }

    /// Uniform in `[0, 1)` with 53 bits of resolution.
    pub fn unit(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn next_point(&mut self) -> Vec2 {
        let x = self.region.min.x + self.region.width() * self.unit();
        let y = self.region.min.y + self.region.height() * self.unit();
        Vec2::new(x, y)
    }
}
