//! Seeded random streams.
//!
//! Integer output comes from ChaCha8, a counter-based generator: the key is
//! derived from `seed` with [`SeedableRng::seed_from_u64`] and `stream_id`
//! selects ChaCha's 64-bit stream word, so every `(seed, stream_id)` pair is an
//! independent, reproducible sequence.
//!
//! Float mapping is fixed:
//! - uniform `[0, 1)`: top 53 bits of one `u64`, times 2⁻⁵³;
//! - uniform `(0, 1]`: `1 - uniform[0, 1)`;
//! - standard normal: Box–Muller on `(u1 ∈ (0,1], u2 ∈ [0,1))`, emitting
//!   `r·cos(2πu2)` first and caching `r·sin(2πu2)` for the next call;
//! - Rademacher: lowest bit of one `u64`.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::error::{Error, Result};
use crate::vector::ParamVector;

const INV_2_POW_53: f64 = 1.0 / (1u64 << 53) as f64;

#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    stream_id: u64,
    inner: ChaCha8Rng,
    spare_normal: Option<f64>,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(stream_id);
        Self {
            seed,
            stream_id,
            inner,
            spare_normal: None,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform on `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * INV_2_POW_53
    }

    /// Uniform on `(0, 1]`.
    pub fn uniform_open_low(&mut self) -> f64 {
        1.0 - self.uniform()
    }

    pub fn uniform_range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    /// Uniform integer in `0..n` by rejection, so every value is equally likely.
    pub fn below(&mut self, n: u64) -> u64 {
        assert!(n > 0, "below(0)");
        let zone = u64::MAX - (u64::MAX % n);
        loop {
            let x = self.next_u64();
            if x < zone {
                return x % n;
            }
        }
    }

    pub fn standard_normal(&mut self) -> f64 {
        if let Some(z) = self.spare_normal.take() {
            return z;
        }
        let u1 = self.uniform_open_low();
        let u2 = self.uniform();
        let r = (-2.0 * u1.ln()).sqrt();
        let angle = std::f64::consts::TAU * u2;
        self.spare_normal = Some(r * angle.sin());
        r * angle.cos()
    }

    pub fn normal(&mut self, mean: f64, std: f64) -> f64 {
        mean + std * self.standard_normal()
    }

    pub fn rademacher(&mut self) -> f64 {
        if self.next_u64() & 1 == 0 {
            1.0
        } else {
            -1.0
        }
    }
}

/// `dim` i.i.d. draws from N(mean, std²).
pub fn gaussian_vector(rng: &mut RngStream, dim: usize, mean: f64, std: f64) -> Result<ParamVector> {
    if !(std >= 0.0) || !std.is_finite() {
        return Err(Error::InvalidStd(std));
    }
    if dim == 0 {
        return Err(Error::EmptyVector);
    }
    if std == 0.0 {
        return ParamVector::new(vec![mean; dim]);
    }
    ParamVector::new((0..dim).map(|_| rng.normal(mean, std)).collect())
}
