use crate::error::{Error, Result};
use crate::objectives::{check_theta, StochasticObjective};
use crate::rng::RngStream;
use crate::vector::ParamVector;

/// `f(θ) = ½·Σ λᵢθᵢ²` with isotropic Gaussian gradient noise.
#[derive(Debug, Clone)]
pub struct NoisyQuadratic {
    eigenvalues: Vec<f64>,
    noise_std: f64,
    initial: ParamVector,
}

pub fn noisy_quadratic(eigenvalues: Vec<f64>, noise_std: f64) -> Result<NoisyQuadratic> {
    if eigenvalues.is_empty() {
        return Err(Error::EmptyVector);
    }
    for (index, &value) in eigenvalues.iter().enumerate() {
        if !(value > 0.0 && value.is_finite()) {
            return Err(Error::InvalidEigenvalue { index, value });
        }
    }
    if !(noise_std >= 0.0 && noise_std.is_finite()) {
        return Err(Error::InvalidStd(noise_std));
    }
    let initial = ParamVector::filled(eigenvalues.len(), 1.0);
    Ok(NoisyQuadratic { eigenvalues, noise_std, initial })
}

impl NoisyQuadratic {
    /// Eigenvalues spaced evenly in log scale between `lo` and `hi`.
    pub fn log_spaced(dim: usize, lo: f64, hi: f64, noise_std: f64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::EmptyVector);
        }
        let eig = (0..dim)
            .map(|i| {
                let frac = if dim == 1 { 0.0 } else { i as f64 / (dim - 1) as f64 };
                (lo.ln() + frac * (hi.ln() - lo.ln())).exp()
            })
            .collect();
        noisy_quadratic(eig, noise_std)
    }

    pub fn with_initial(mut self, initial: ParamVector) -> Result<Self> {
        check_theta(&initial, self.eigenvalues.len())?;
        self.initial = initial;
        Ok(self)
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }
}

impl StochasticObjective for NoisyQuadratic {
    fn name(&self) -> &str {
        "noisy_quadratic"
    }

    fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    fn loss(&self, theta: &ParamVector) -> Result<f64> {
        check_theta(theta, self.dim())?;
        Ok(0.5 * theta.iter().zip(&self.eigenvalues).map(|(x, l)| l * x * x).sum::<f64>())
    }

    fn true_grad(&self, theta: &ParamVector) -> Result<ParamVector> {
        check_theta(theta, self.dim())?;
        ParamVector::new(theta.iter().zip(&self.eigenvalues).map(|(x, l)| l * x).collect())
    }

    fn noisy_grad(&self, theta: &ParamVector, rng: &mut RngStream) -> Result<ParamVector> {
        check_theta(theta, self.dim())?;
        let sigma = self.noise_std;
        ParamVector::new(
            theta
                .iter()
                .zip(&self.eigenvalues)
                .map(|(x, l)| l * x + sigma * rng.standard_normal())
                .collect(),
        )
    }

    fn hvp(&self, theta: &ParamVector, v: &ParamVector) -> Option<Result<ParamVector>> {
        Some(check_theta(theta, self.dim()).and_then(|_| {
            check_theta(v, self.dim())?;
            ParamVector::new(v.iter().zip(&self.eigenvalues).map(|(x, l)| l * x).collect())
        }))
    }

    fn optimum(&self) -> Option<(ParamVector, f64)> {
        Some((ParamVector::zeros(self.dim()), 0.0))
    }

    fn noise_variance_bound(&self) -> Option<f64> {
        Some(self.noise_std * self.noise_std * self.dim() as f64)
    }

    fn initial_point(&self) -> ParamVector {
        self.initial.clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objectives::testing::{gradient_check, unbiasedness_ratio};

    fn pv(d: &[f64]) -> ParamVector {
        ParamVector::new(d.to_vec()).unwrap()
    }

    #[test]
    fn loss_and_gradient() {
        let q = noisy_quadratic(vec![1.0, 1.0], 0.0).unwrap();
        assert_eq!(q.loss(&pv(&[2.0, 0.0])).unwrap(), 2.0);
        assert_eq!(q.true_grad(&pv(&[2.0, 0.0])).unwrap(), pv(&[2.0, 0.0]));
    }

    #[test]
    fn hvp_is_diagonal() {
        let q = noisy_quadratic(vec![3.0, 1.0], 0.0).unwrap();
        let h = q.hvp(&pv(&[0.3, 0.4]), &pv(&[1.0, 0.0])).unwrap().unwrap();
        assert_eq!(h, pv(&[3.0, 0.0]));
    }

    #[test]
    fn invalid_eigenvalue() {
        assert_eq!(
            noisy_quadratic(vec![1.0, 0.0], 0.1).unwrap_err(),
            Error::InvalidEigenvalue { index: 1, value: 0.0 }
        );
        assert!(noisy_quadratic(vec![1.0], -0.1).is_err());
    }

    #[test]
    fn noisy_gradients_are_unbiased() {
        let q = noisy_quadratic(vec![0.5, 2.0, 4.0], 0.7).unwrap();
        for (k, theta) in [pv(&[1.0, -1.0, 0.5]), pv(&[0.0, 3.0, -2.0]), pv(&[-0.1, 0.2, 0.3])].iter().enumerate() {
            assert!(unbiasedness_ratio(&q, theta, 100_000, k as u64) <= 1.0);
        }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let q = NoisyQuadratic::log_spaced(6, 0.01, 10.0, 0.5).unwrap();
        assert!(gradient_check(&q, &pv(&[1.0, -2.0, 0.5, 0.1, 3.0, -0.7]), 1e-5) <= 1e-4);
        assert!((q.eigenvalues()[0] - 0.01).abs() < 1e-15);
        assert!((q.eigenvalues()[5] - 10.0).abs() < 1e-12);
    }

    #[test]
    fn hvp_symmetry() {
        let q = NoisyQuadratic::log_spaced(4, 0.1, 5.0, 0.0).unwrap();
        let theta = pv(&[0.0; 4]);
        let v = pv(&[1.0, -2.0, 0.5, 3.0]);
        let w = pv(&[0.3, 0.1, -1.0, 2.0]);
        let a = v.dot(&q.hvp(&theta, &w).unwrap().unwrap()).unwrap();
        let b = w.dot(&q.hvp(&theta, &v).unwrap().unwrap()).unwrap();
        assert!((a - b).abs() <= 1e-6 * a.abs().max(b.abs()));
    }
}
