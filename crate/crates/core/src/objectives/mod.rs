//! Stochastic objective oracles.
//!
//! Every objective knows its exact gradient, so noisy gradients can be
//! checked for unbiasedness and optimizer estimates scored against the truth.

mod logistic;
mod mlp;
mod quadratic;
mod rosenbrock;
mod stream;

pub use logistic::{synthetic_logistic, LogisticOptions, SyntheticLogistic};
pub use mlp::{tiny_mlp, two_moons, MlpOptions, TinyMlp};
pub use quadratic::{noisy_quadratic, NoisyQuadratic};
pub use rosenbrock::{noisy_rosenbrock, NoisyRosenbrock};
pub use stream::{convex_stream, ConvexStreamKind, OnlineConvexStream};

use crate::error::Result;
use crate::rng::RngStream;
use crate::vector::ParamVector;

pub trait StochasticObjective: Send + Sync {
    fn name(&self) -> &str;

    fn dim(&self) -> usize;

    fn loss(&self, theta: &ParamVector) -> Result<f64>;

    fn true_grad(&self, theta: &ParamVector) -> Result<ParamVector>;

    /// Unbiased stochastic gradient. All randomness comes from `rng`.
    fn noisy_grad(&self, theta: &ParamVector, rng: &mut RngStream) -> Result<ParamVector>;

    /// Hessian-vector product, when available.
    fn hvp(&self, _theta: &ParamVector, _v: &ParamVector) -> Option<Result<ParamVector>> {
        None
    }

    /// Known minimizer and minimum value.
    fn optimum(&self) -> Option<(ParamVector, f64)> {
        None
    }

    /// Declared bound on `E‖noisy_grad − true_grad‖²`, when one holds globally.
    fn noise_variance_bound(&self) -> Option<f64>;

    /// Default starting point for experiments.
    fn initial_point(&self) -> ParamVector;
}

fn check_theta(theta: &ParamVector, dim: usize) -> Result<()> {
    if theta.dim() != dim {
        return Err(crate::Error::DimensionMismatch { expected: dim, actual: theta.dim() });
    }
    Ok(())
}

/// Central-difference Hessian-vector product of an analytic gradient.
pub fn finite_difference_hvp<F>(grad: F, theta: &ParamVector, v: &ParamVector, h: f64) -> Result<ParamVector>
where
    F: Fn(&ParamVector) -> Result<ParamVector>,
{
    theta.check_dim(v)?;
    let norm = v.norm_sq().sqrt();
    if norm == 0.0 {
        return Ok(ParamVector::zeros(v.dim()));
    }
    let step = h / norm;
    let plus = theta.add(&v.scale(step)?)?;
    let minus = theta.sub(&v.scale(step)?)?;
    grad(&plus)?.sub(&grad(&minus)?)?.scale(1.0 / (2.0 * step))
}

#[cfg(test)]
pub(crate) mod testing {
    use super::*;

    /// Max relative error of the analytic gradient against central
    /// differences of the loss, along each coordinate.
    pub fn gradient_check(obj: &dyn StochasticObjective, theta: &ParamVector, h: f64) -> f64 {
        let grad = obj.true_grad(theta).unwrap();
        let mut worst: f64 = 0.0;
        for i in 0..theta.dim() {
            let mut plus = theta.clone().into_vec();
            let mut minus = plus.clone();
            plus[i] += h;
            minus[i] -= h;
            let fp = obj.loss(&ParamVector::new(plus).unwrap()).unwrap();
            let fm = obj.loss(&ParamVector::new(minus).unwrap()).unwrap();
            let fd = (fp - fm) / (2.0 * h);
            let scale = grad[i].abs().max(fd.abs()).max(1e-3);
            worst = worst.max((grad[i] - fd).abs() / scale);
        }
        worst
    }

    /// Per-coordinate |mean(noisy) − true| divided by its 3σ/√n allowance,
    /// using the empirical standard deviation.
    pub fn unbiasedness_ratio(obj: &dyn StochasticObjective, theta: &ParamVector, n: usize, seed: u64) -> f64 {
        let truth = obj.true_grad(theta).unwrap();
        let d = obj.dim();
        let mut sum = vec![0.0; d];
        let mut sum_sq = vec![0.0; d];
        let mut rng = RngStream::new(seed, 99);
        for _ in 0..n {
            let g = obj.noisy_grad(theta, &mut rng).unwrap();
            for i in 0..d {
                let e = g[i] - truth[i];
                sum[i] += e;
                sum_sq[i] += e * e;
            }
        }
        let nf = n as f64;
        (0..d)
            .map(|i| {
                let mean = sum[i] / nf;
                let sd = (sum_sq[i] / nf - mean * mean).max(0.0).sqrt();
                if sd == 0.0 {
                    if mean == 0.0 { 0.0 } else { f64::INFINITY }
                } else {
                    mean.abs() / (3.0 * sd / nf.sqrt())
                }
            })
            .fold(0.0, f64::max)
    }
}
