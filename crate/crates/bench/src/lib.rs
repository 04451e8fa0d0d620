//! Shared fixtures for the benchmarks.

use sgdf_core::{gaussian_vector, ParamVector, RngStream};

/// Deterministic gradient sequence of `n` vectors in `dim` dimensions.
pub fn gradient_fixture(dim: usize, n: usize, seed: u64) -> Vec<ParamVector> {
    let mut rng = RngStream::new(seed, 0);
    (0..n).map(|_| gaussian_vector(&mut rng, dim, 0.0, 1.0).expect("finite draws")).collect()
}
