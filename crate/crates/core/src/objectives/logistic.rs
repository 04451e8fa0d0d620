use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::objectives::{check_theta, StochasticObjective};
use crate::rng::RngStream;
use crate::vector::{dot, ParamVector};

#[derive(Debug, Clone, PartialEq)]
pub struct LogisticOptions {
    /// Ridge coefficient λ > 0; makes the loss strongly convex.
    pub l2: f64,
    pub batch_size: usize,
}

impl Default for LogisticOptions {
    fn default() -> Self {
        Self { l2: 1e-2, batch_size: 16 }
    }
}

/// Regularized logistic regression on a planted synthetic design.
///
/// `f(θ) = mean_i log(1 + exp(−yᵢ·xᵢ·θ)) + λ‖θ‖²/2` with labels `yᵢ ∈ {±1}`.
/// The minimizer is found once at construction by Newton's method.
#[derive(Debug, Clone)]
pub struct SyntheticLogistic {
    dim: usize,
    features: Vec<f64>,
    labels: Vec<f64>,
    l2: f64,
    batch_size: usize,
    optimum: ParamVector,
    optimum_loss: f64,
    max_feature_norm_sq: f64,
}

fn softplus(z: f64) -> f64 {
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

pub fn synthetic_logistic(
    dim: usize,
    n_samples: usize,
    rng: &mut RngStream,
    options: LogisticOptions,
) -> Result<SyntheticLogistic> {
    if dim == 0 {
        return Err(Error::InvalidConfig("logistic dim must be >= 1".into()));
    }
    if n_samples < dim {
        return Err(Error::InvalidConfig(format!(
            "logistic needs n_samples >= dim, got {n_samples} < {dim}"
        )));
    }
    if !(options.l2 > 0.0 && options.l2.is_finite()) {
        return Err(Error::InvalidConfig(format!("logistic l2 must be > 0, got {}", options.l2)));
    }
    if options.batch_size == 0 {
        return Err(Error::InvalidConfig("logistic batch_size must be >= 1".into()));
    }
    let planted: Vec<f64> = (0..dim).map(|_| rng.standard_normal()).collect();
    let mut features = Vec::with_capacity(n_samples * dim);
    let mut labels = Vec::with_capacity(n_samples);
    for _ in 0..n_samples {
        let row: Vec<f64> = (0..dim).map(|_| rng.standard_normal()).collect();
        let p = sigmoid(dot(&row, &planted));
        labels.push(if rng.uniform() < p { 1.0 } else { -1.0 });
        features.extend(row);
    }
    let max_feature_norm_sq = features
        .chunks(dim)
        .map(|r| dot(r, r))
        .fold(0.0, f64::max);
    let mut obj = SyntheticLogistic {
        dim,
        features,
        labels,
        l2: options.l2,
        batch_size: options.batch_size,
        optimum: ParamVector::zeros(dim),
        optimum_loss: 0.0,
        max_feature_norm_sq,
    };
    obj.solve_optimum()?;
    Ok(obj)
}

impl SyntheticLogistic {
    pub fn n_samples(&self) -> usize {
        self.labels.len()
    }

    fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.dim..(i + 1) * self.dim]
    }

    /// Gradient of sample `i`'s logistic term, accumulated into `out` with weight `w`.
    fn accumulate_sample_grad(&self, i: usize, theta: &[f64], w: f64, out: &mut [f64]) {
        let x = self.row(i);
        let y = self.labels[i];
        let coef = -y * sigmoid(-y * dot(x, theta)) * w;
        for (o, xi) in out.iter_mut().zip(x) {
            *o += coef * xi;
        }
    }

    /// Gradient of the data term for sample `i` alone (no ridge term).
    pub fn sample_grad(&self, i: usize, theta: &ParamVector) -> Result<ParamVector> {
        check_theta(theta, self.dim)?;
        let mut out = vec![0.0; self.dim];
        self.accumulate_sample_grad(i, theta.as_slice(), 1.0, &mut out);
        ParamVector::new(out)
    }

    fn full_grad(&self, theta: &[f64]) -> Vec<f64> {
        let n = self.n_samples();
        let mut out: Vec<f64> = theta.iter().map(|t| self.l2 * t).collect();
        for i in 0..n {
            self.accumulate_sample_grad(i, theta, 1.0 / n as f64, &mut out);
        }
        out
    }

    fn solve_optimum(&mut self) -> Result<()> {
        let d = self.dim;
        let n = self.n_samples();
        let mut theta = vec![0.0; d];
        for _ in 0..100 {
            let g = self.full_grad(&theta);
            if dot(&g, &g).sqrt() <= 1e-12 {
                break;
            }
            let mut hess = DMatrix::<f64>::identity(d, d) * self.l2;
            for i in 0..n {
                let x = self.row(i);
                let p = sigmoid(dot(x, &theta));
                let w = p * (1.0 - p) / n as f64;
                for a in 0..d {
                    for b in 0..d {
                        hess[(a, b)] += w * x[a] * x[b];
                    }
                }
            }
            let chol = hess
                .cholesky()
                .ok_or_else(|| Error::InvalidConfig("logistic Hessian is not positive definite".into()))?;
            let step = chol.solve(&DVector::from_vec(g));
            for (t, s) in theta.iter_mut().zip(step.iter()) {
                *t -= s;
            }
        }
        let g = self.full_grad(&theta);
        let norm = dot(&g, &g).sqrt();
        if norm > 1e-6 {
            return Err(Error::InvalidConfig(format!("logistic optimum not located: |grad| = {norm:e}")));
        }
        self.optimum = ParamVector::new(theta)?;
        self.optimum_loss = self.loss(&self.optimum)?;
        Ok(())
    }
}

impl StochasticObjective for SyntheticLogistic {
    fn name(&self) -> &str {
        "synthetic_logistic"
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn loss(&self, theta: &ParamVector) -> Result<f64> {
        check_theta(theta, self.dim)?;
        let t = theta.as_slice();
        let n = self.n_samples();
        let data: f64 = (0..n)
            .map(|i| softplus(-self.labels[i] * dot(self.row(i), t)))
            .sum::<f64>()
            / n as f64;
        Ok(data + 0.5 * self.l2 * theta.norm_sq())
    }

    fn true_grad(&self, theta: &ParamVector) -> Result<ParamVector> {
        check_theta(theta, self.dim)?;
        ParamVector::new(self.full_grad(theta.as_slice()))
    }

    /// Minibatch gradient with indices drawn uniformly with replacement; a
    /// batch at least as large as the dataset returns the full gradient.
    fn noisy_grad(&self, theta: &ParamVector, rng: &mut RngStream) -> Result<ParamVector> {
        check_theta(theta, self.dim)?;
        let n = self.n_samples();
        if self.batch_size >= n {
            return self.true_grad(theta);
        }
        let t = theta.as_slice();
        let mut out: Vec<f64> = t.iter().map(|x| self.l2 * x).collect();
        let w = 1.0 / self.batch_size as f64;
        for _ in 0..self.batch_size {
            let i = rng.below(n as u64) as usize;
            self.accumulate_sample_grad(i, t, w, &mut out);
        }
        ParamVector::new(out)
    }

    fn hvp(&self, theta: &ParamVector, v: &ParamVector) -> Option<Result<ParamVector>> {
        Some(check_theta(theta, self.dim).and_then(|_| {
            check_theta(v, self.dim)?;
            let n = self.n_samples();
            let mut out: Vec<f64> = v.iter().map(|x| self.l2 * x).collect();
            for i in 0..n {
                let x = self.row(i);
                let p = sigmoid(dot(x, theta.as_slice()));
                let c = p * (1.0 - p) * dot(x, v.as_slice()) / n as f64;
                for (o, xi) in out.iter_mut().zip(x) {
                    *o += c * xi;
                }
            }
            ParamVector::new(out)
        }))
    }

    fn optimum(&self) -> Option<(ParamVector, f64)> {
        Some((self.optimum.clone(), self.optimum_loss))
    }

    fn noise_variance_bound(&self) -> Option<f64> {
        // Each per-sample data gradient has norm ≤ ‖xᵢ‖.
        if self.batch_size >= self.n_samples() {
            Some(0.0)
        } else {
            Some(self.max_feature_norm_sq / self.batch_size as f64)
        }
    }

    fn initial_point(&self) -> ParamVector {
        ParamVector::zeros(self.dim)
    }
}
