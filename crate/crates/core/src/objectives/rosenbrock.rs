use crate::error::{Error, Result};
use crate::objectives::{check_theta, StochasticObjective};
use crate::rng::RngStream;
use crate::vector::ParamVector;

/// `f(x, y) = (1 − x)² + 100·(y − x²)²` with additive Gaussian gradient noise.
#[derive(Debug, Clone)]
pub struct NoisyRosenbrock {
    noise_std: f64,
    initial: ParamVector,
}

pub fn noisy_rosenbrock(noise_std: f64) -> Result<NoisyRosenbrock> {
    if !(noise_std >= 0.0 && noise_std.is_finite()) {
        return Err(Error::InvalidStd(noise_std));
    }
    Ok(NoisyRosenbrock { noise_std, initial: ParamVector::zeros(2) })
}

impl NoisyRosenbrock {
    pub fn with_initial(mut self, initial: ParamVector) -> Result<Self> {
        check_theta(&initial, 2)?;
        self.initial = initial;
        Ok(self)
    }

    fn grad_xy(x: f64, y: f64) -> [f64; 2] {
        let r = y - x * x;
        [-2.0 * (1.0 - x) - 400.0 * x * r, 200.0 * r]
    }
}

impl StochasticObjective for NoisyRosenbrock {
    fn name(&self) -> &str {
        "noisy_rosenbrock"
    }

    fn dim(&self) -> usize {
        2
    }

    fn loss(&self, theta: &ParamVector) -> Result<f64> {
        check_theta(theta, 2)?;
        let (x, y) = (theta[0], theta[1]);
        Ok((1.0 - x).powi(2) + 100.0 * (y - x * x).powi(2))
    }

    fn true_grad(&self, theta: &ParamVector) -> Result<ParamVector> {
        check_theta(theta, 2)?;
        ParamVector::new(Self::grad_xy(theta[0], theta[1]).to_vec())
    }

    fn noisy_grad(&self, theta: &ParamVector, rng: &mut RngStream) -> Result<ParamVector> {
        check_theta(theta, 2)?;
        let [gx, gy] = Self::grad_xy(theta[0], theta[1]);
        let s = self.noise_std;
        ParamVector::new(vec![gx + s * rng.standard_normal(), gy + s * rng.standard_normal()])
    }

    fn hvp(&self, theta: &ParamVector, v: &ParamVector) -> Option<Result<ParamVector>> {
        Some(check_theta(theta, 2).and_then(|_| {
            check_theta(v, 2)?;
            let (x, y) = (theta[0], theta[1]);
            let hxx = 2.0 - 400.0 * (y - x * x) + 800.0 * x * x;
            let hxy = -400.0 * x;
            let hyy = 200.0;
            ParamVector::new(vec![hxx * v[0] + hxy * v[1], hxy * v[0] + hyy * v[1]])
        }))
    }

    fn optimum(&self) -> Option<(ParamVector, f64)> {
        Some((ParamVector::filled(2, 1.0), 0.0))
    }

    fn noise_variance_bound(&self) -> Option<f64> {
        Some(2.0 * self.noise_std * self.noise_std)
    }

    fn initial_point(&self) -> ParamVector {
        self.initial.clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objectives::finite_difference_hvp;
    use crate::objectives::testing::{gradient_check, unbiasedness_ratio};

    fn pv(d: &[f64]) -> ParamVector {
        ParamVector::new(d.to_vec()).unwrap()
    }

    #[test]
    fn known_points() {
        let r = noisy_rosenbrock(0.0).unwrap();
        assert_eq!(r.loss(&pv(&[1.0, 1.0])).unwrap(), 0.0);
        assert_eq!(r.true_grad(&pv(&[1.0, 1.0])).unwrap(), pv(&[0.0, 0.0]));
        assert_eq!(r.loss(&pv(&[0.0, 0.0])).unwrap(), 1.0);
        assert_eq!(r.true_grad(&pv(&[0.0, 0.0])).unwrap(), pv(&[-2.0, 0.0]));
    }

    #[test]
    fn gradient_and_hessian_checks() {
        let r = noisy_rosenbrock(1.0).unwrap();
        for p in [[-1.2, 1.0], [0.3, -0.4], [1.5, 2.0]] {
            let theta = pv(&p);
            assert!(gradient_check(&r, &theta, 1e-5) <= 1e-4);
            let v = pv(&[0.6, -0.8]);
            let exact = r.hvp(&theta, &v).unwrap().unwrap();
            let fd = finite_difference_hvp(|t| r.true_grad(t), &theta, &v, 1e-5).unwrap();
            for i in 0..2 {
                assert!((exact[i] - fd[i]).abs() <= 1e-5 * exact[i].abs().max(1.0));
            }
        }
    }

    #[test]
    fn noisy_gradients_are_unbiased() {
        let r = noisy_rosenbrock(1.0).unwrap();
        for (k, p) in [[0.0, 0.0], [-1.0, 1.0], [0.5, 0.2]].iter().enumerate() {
            assert!(unbiasedness_ratio(&r, &pv(p), 100_000, k as u64) <= 1.0);
        }
    }
}
