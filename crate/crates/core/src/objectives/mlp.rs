use crate::error::{Error, Result};
use crate::objectives::{check_theta, finite_difference_hvp, StochasticObjective};
use crate::rng::RngStream;
use crate::vector::ParamVector;

const MAX_HIDDEN_LAYERS: usize = 3;
const MAX_PARAMS: usize = 10_000;

#[derive(Debug, Clone, PartialEq)]
pub struct MlpOptions {
    /// Full layer widths, input first. Input must be 2 (two moons) and output 1.
    pub layer_sizes: Vec<usize>,
    pub n_samples: usize,
    pub noise: f64,
    pub batch_size: usize,
}

impl Default for MlpOptions {
    fn default() -> Self {
        Self { layer_sizes: vec![2, 16, 16, 1], n_samples: 256, noise: 0.1, batch_size: 32 }
    }
}

/// Two interleaved half-circles, half labelled 0 and half 1, centred at the
/// origin. Returns (points, labels).
pub fn two_moons(n_samples: usize, noise: f64, rng: &mut RngStream) -> (Vec<[f64; 2]>, Vec<f64>) {
    let half = n_samples / 2;
    let mut points = Vec::with_capacity(n_samples);
    let mut labels = Vec::with_capacity(n_samples);
    for i in 0..n_samples {
        let upper = i < half;
        let count = if upper { half } else { n_samples - half };
        let k = if upper { i } else { i - half };
        let u = std::f64::consts::PI * k as f64 / (count.max(2) - 1) as f64;
        let (x, y) = if upper { (u.cos(), u.sin()) } else { (1.0 - u.cos(), 0.5 - u.sin()) };
        points.push([x + noise * rng.standard_normal(), y + noise * rng.standard_normal()]);
        labels.push(if upper { 0.0 } else { 1.0 });
    }
    let n = n_samples as f64;
    let cx = points.iter().map(|p| p[0]).sum::<f64>() / n;
    let cy = points.iter().map(|p| p[1]).sum::<f64>() / n;
    for p in &mut points {
        p[0] -= cx;
        p[1] -= cy;
    }
    (points, labels)
}

/// Small tanh network with a sigmoid/cross-entropy head, trained on two moons.
///
/// Parameters are flattened layer by layer as `W` (row-major, `out × in`)
/// followed by `b`.
#[derive(Debug, Clone)]
pub struct TinyMlp {
    sizes: Vec<usize>,
    points: Vec<[f64; 2]>,
    labels: Vec<f64>,
    batch_size: usize,
    initial: ParamVector,
    n_params: usize,
}

pub fn tiny_mlp(options: MlpOptions, rng: &mut RngStream) -> Result<TinyMlp> {
    let sizes = options.layer_sizes.clone();
    if sizes.len() < 2 || sizes[0] != 2 || *sizes.last().unwrap() != 1 {
        return Err(Error::InvalidConfig(format!(
            "mlp layer_sizes must start at 2 and end at 1, got {sizes:?}"
        )));
    }
    if sizes.len() - 2 > MAX_HIDDEN_LAYERS || sizes.iter().any(|&s| s == 0) {
        return Err(Error::InvalidConfig(format!(
            "mlp supports at most {MAX_HIDDEN_LAYERS} non-empty hidden layers, got {sizes:?}"
        )));
    }
    let n_params: usize = sizes.windows(2).map(|w| w[0] * w[1] + w[1]).sum();
    if n_params > MAX_PARAMS {
        return Err(Error::InvalidConfig(format!("mlp has {n_params} parameters; limit is {MAX_PARAMS}")));
    }
    if options.n_samples < 2 || options.n_samples % 2 != 0 {
        return Err(Error::InvalidConfig("mlp n_samples must be even and >= 2".into()));
    }
    if options.batch_size == 0 {
        return Err(Error::InvalidConfig("mlp batch_size must be >= 1".into()));
    }
    let (points, labels) = two_moons(options.n_samples, options.noise, rng);
    let mut init = Vec::with_capacity(n_params);
    for w in sizes.windows(2) {
        let scale = 1.0 / (w[0] as f64).sqrt();
        init.extend((0..w[0] * w[1]).map(|_| scale * rng.standard_normal()));
        init.extend(std::iter::repeat(0.0).take(w[1]));
    }
    Ok(TinyMlp {
        sizes,
        points,
        labels,
        batch_size: options.batch_size,
        initial: ParamVector::new(init)?,
        n_params,
    })
}

impl TinyMlp {
    pub fn n_samples(&self) -> usize {
        self.labels.len()
    }

    /// Loss of one sample and, when `grad` is given, its gradient added with weight `w`.
    fn sample(&self, theta: &[f64], i: usize, grad: Option<(&mut [f64], f64)>) -> f64 {
        let n_layers = self.sizes.len() - 1;
        let mut acts: Vec<Vec<f64>> = Vec::with_capacity(n_layers + 1);
        acts.push(self.points[i].to_vec());
        let mut offset = 0;
        let mut offsets = Vec::with_capacity(n_layers);
        for l in 0..n_layers {
            let (fan_in, fan_out) = (self.sizes[l], self.sizes[l + 1]);
            offsets.push(offset);
            let w = &theta[offset..offset + fan_in * fan_out];
            let b = &theta[offset + fan_in * fan_out..offset + fan_in * fan_out + fan_out];
            offset += fan_in * fan_out + fan_out;
            let input = &acts[l];
            let mut z: Vec<f64> = (0..fan_out)
                .map(|o| b[o] + (0..fan_in).map(|k| w[o * fan_in + k] * input[k]).sum::<f64>())
                .collect();
            if l + 1 < n_layers {
                z.iter_mut().for_each(|v| *v = v.tanh());
            }
            acts.push(z);
        }
        let logit = acts[n_layers][0];
        let y = self.labels[i];
        // Binary cross-entropy with logits.
        let loss = logit.max(0.0) - logit * y + (-logit.abs()).exp().ln_1p();

        if let Some((grad, weight)) = grad {
            let p = if logit >= 0.0 {
                1.0 / (1.0 + (-logit).exp())
            } else {
                let e = logit.exp();
                e / (1.0 + e)
            };
            let mut delta = vec![(p - y) * weight];
            for l in (0..n_layers).rev() {
                let (fan_in, fan_out) = (self.sizes[l], self.sizes[l + 1]);
                let off = offsets[l];
                let input = &acts[l];
                for o in 0..fan_out {
                    for k in 0..fan_in {
                        grad[off + o * fan_in + k] += delta[o] * input[k];
                    }
                    grad[off + fan_in * fan_out + o] += delta[o];
                }
                if l > 0 {
                    let w = &theta[off..off + fan_in * fan_out];
                    delta = (0..fan_in)
                        .map(|k| {
                            let back: f64 = (0..fan_out).map(|o| w[o * fan_in + k] * delta[o]).sum();
                            back * (1.0 - input[k] * input[k])
                        })
                        .collect();
                }
            }
        }
        loss
    }

    fn batch_grad(&self, theta: &[f64], indices: impl Iterator<Item = usize>, count: usize) -> Vec<f64> {
        let mut grad = vec![0.0; self.n_params];
        let w = 1.0 / count as f64;
        for i in indices {
            self.sample(theta, i, Some((&mut grad, w)));
        }
        grad
    }
}

impl StochasticObjective for TinyMlp {
    fn name(&self) -> &str {
        "tiny_mlp"
    }

    fn dim(&self) -> usize {
        self.n_params
    }

    fn loss(&self, theta: &ParamVector) -> Result<f64> {
        check_theta(theta, self.n_params)?;
        let n = self.n_samples();
        Ok((0..n).map(|i| self.sample(theta.as_slice(), i, None)).sum::<f64>() / n as f64)
    }

    fn true_grad(&self, theta: &ParamVector) -> Result<ParamVector> {
        check_theta(theta, self.n_params)?;
        let n = self.n_samples();
        ParamVector::new(self.batch_grad(theta.as_slice(), 0..n, n))
    }

    fn noisy_grad(&self, theta: &ParamVector, rng: &mut RngStream) -> Result<ParamVector> {
        check_theta(theta, self.n_params)?;
        let n = self.n_samples();
        if self.batch_size >= n {
            return self.true_grad(theta);
        }
        let idx: Vec<usize> = (0..self.batch_size).map(|_| rng.below(n as u64) as usize).collect();
        ParamVector::new(self.batch_grad(theta.as_slice(), idx.into_iter(), self.batch_size))
    }

    fn hvp(&self, theta: &ParamVector, v: &ParamVector) -> Option<Result<ParamVector>> {
        Some(finite_difference_hvp(|t| self.true_grad(t), theta, v, 1e-5))
    }

    fn noise_variance_bound(&self) -> Option<f64> {
        None
    }

    fn initial_point(&self) -> ParamVector {
        self.initial.clone()
    }
}
