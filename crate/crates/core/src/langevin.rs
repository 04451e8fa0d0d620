//! Overdamped Langevin sampling on 1D potentials and the Gibbs density
//! `exp(−f/D)/Z` it should settle into.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::RngStream;

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Subintervals of composite Simpson per histogram bin.
const SIMPSON_PANELS: usize = 32;

#[derive(Clone)]
pub struct Potential1D {
    name: String,
    f: ScalarFn,
    f_prime: ScalarFn,
    lo: f64,
    hi: f64,
}

impl fmt::Debug for Potential1D {
    fn fmt(&self, fmt: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt.debug_struct("Potential1D").field("name", &self.name).field("lo", &self.lo).field("hi", &self.hi).finish()
    }
}

impl Potential1D {
    pub fn new<F, G>(name: impl Into<String>, f: F, f_prime: G, lo: f64, hi: f64) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
        G: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::InvalidConfig(format!("potential domain [{lo}, {hi}] is empty or unbounded")));
        }
        Ok(Self { name: name.into(), f: Arc::new(f), f_prime: Arc::new(f_prime), lo, hi })
    }

    /// `θ²/2`.
    pub fn quadratic(lo: f64, hi: f64) -> Result<Self> {
        Self::new("quadratic", |x| 0.5 * x * x, |x| x, lo, hi)
    }

    /// `(θ² − 1)²`, minima at ±1 and a barrier of height 1 at 0.
    pub fn double_well(lo: f64, hi: f64) -> Result<Self> {
        Self::new("double_well", |x| (x * x - 1.0).powi(2), |x| 4.0 * x * (x * x - 1.0), lo, hi)
    }

    pub fn flat(lo: f64, hi: f64) -> Result<Self> {
        Self::new("flat", |_| 0.0, |_| 0.0, lo, hi)
    }

    /// The same potential raised by `c`; its stationary law is unchanged.
    pub fn shifted(&self, c: f64) -> Self {
        let f = Arc::clone(&self.f);
        Self {
            name: format!("{}+{c}", self.name),
            f: Arc::new(move |x| f(x) + c),
            f_prime: Arc::clone(&self.f_prime),
            lo: self.lo,
            hi: self.hi,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn f(&self, x: f64) -> f64 {
        (self.f)(x)
    }

    pub fn f_prime(&self, x: f64) -> f64 {
        (self.f_prime)(x)
    }

    /// Largest `dt` keeping the drift per step within 1% of the domain width,
    /// with `max |f′|` taken over a 1001-point grid.
    pub fn default_dt(&self) -> f64 {
        let max_slope = (0..=1000)
            .map(|i| self.f_prime(self.lo + self.width() * i as f64 / 1000.0).abs())
            .filter(|s| s.is_finite())
            .fold(0.0, f64::max);
        if max_slope == 0.0 {
            1e-2
        } else {
            0.01 * self.width() / max_slope
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LangevinConfig {
    pub diffusion: f64,
    /// Lower bound the diffusion must respect.
    pub floor: f64,
    pub dt: f64,
    /// Samples kept after burn-in.
    pub n_samples: usize,
    /// Steps discarded before the first kept sample.
    pub burn_in: usize,
    /// Steps between kept samples.
    pub thin: usize,
    pub initial: f64,
}

impl LangevinConfig {
    pub fn validate(&self, pot: &Potential1D) -> Result<()> {
        if !(self.floor > 0.0) || !self.floor.is_finite() {
            return Err(Error::InvalidHyperparameter { field: "floor", reason: format!("must be > 0, got {}", self.floor) });
        }
        if !(self.diffusion >= self.floor) || !self.diffusion.is_finite() {
            return Err(Error::InvalidHyperparameter {
                field: "diffusion",
                reason: format!("must be finite and >= floor {}, got {}", self.floor, self.diffusion),
            });
        }
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::InvalidStep(format!("dt must be > 0, got {}", self.dt)));
        }
        if self.thin == 0 {
            return Err(Error::InvalidHyperparameter { field: "thin", reason: "must be >= 1".into() });
        }
        let (lo, hi) = pot.domain();
        if !(self.initial >= lo && self.initial <= hi) {
            return Err(Error::InvalidHyperparameter {
                field: "initial",
                reason: format!("{} lies outside [{lo}, {hi}]", self.initial),
            });
        }
        Ok(())
    }
}

/// Folds `x` back into `[lo, hi]` by mirror reflection at the edges.
pub fn reflect(mut x: f64, lo: f64, hi: f64) -> f64 {
    let width = hi - lo;
    if x < lo || x > hi {
        let period = 2.0 * width;
        let mut r = (x - lo).rem_euclid(period);
        if r > width {
            r = period - r;
        }
        x = lo + r;
    }
    x.clamp(lo, hi)
}

/// One Euler–Maruyama step `θ − f′(θ)·dt + √(2D·dt)·ξ`, reflected into the domain.
pub fn langevin_step(pot: &Potential1D, theta: f64, diffusion: f64, dt: f64, xi: f64) -> Result<f64> {
    let drift = pot.f_prime(theta) * dt;
    if !drift.is_finite() || drift.abs() > pot.width() {
        return Err(Error::InvalidStep(format!(
            "drift {drift} at theta = {theta} exceeds the domain width {} (dt = {dt})",
            pot.width()
        )));
    }
    let (lo, hi) = pot.domain();
    Ok(reflect(theta - drift + (2.0 * diffusion * dt).sqrt() * xi, lo, hi))
}

/// Runs a chain and calls `visit` on each kept sample.
pub fn langevin_visit(pot: &Potential1D, cfg: &LangevinConfig, rng: &mut RngStream, mut visit: impl FnMut(f64)) -> Result<()> {
    cfg.validate(pot)?;
    let mut theta = cfg.initial;
    for _ in 0..cfg.burn_in {
        theta = langevin_step(pot, theta, cfg.diffusion, cfg.dt, rng.standard_normal())?;
    }
    for _ in 0..cfg.n_samples {
        for _ in 0..cfg.thin {
            theta = langevin_step(pot, theta, cfg.diffusion, cfg.dt, rng.standard_normal())?;
        }
        visit(theta);
    }
    Ok(())
}

pub fn langevin_sample(pot: &Potential1D, cfg: &LangevinConfig, rng: &mut RngStream) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(cfg.n_samples);
    langevin_visit(pot, cfg, rng, |x| out.push(x))?;
    Ok(out)
}

/// Per-bin probabilities of `exp(−f/D)/Z` over `n_bins` equal bins of the
/// domain, by composite Simpson quadrature rescaled in the log domain.
pub fn analytic_stationary(pot: &Potential1D, diffusion: f64, n_bins: usize) -> Result<Vec<f64>> {
    if n_bins < 10 {
        return Err(Error::InvalidConfig(format!("n_bins must be >= 10, got {n_bins}")));
    }
    if !(diffusion > 0.0) || !diffusion.is_finite() {
        return Err(Error::InvalidHyperparameter { field: "diffusion", reason: format!("must be > 0, got {diffusion}") });
    }
    let (lo, hi) = pot.domain();
    let nodes = n_bins * SIMPSON_PANELS;
    let h = (hi - lo) / nodes as f64;
    let log_w: Vec<f64> = (0..=nodes)
        .map(|i| {
            let x = if i == nodes { hi } else { lo + i as f64 * h };
            -pot.f(x) / diffusion
        })
        .collect();
    if let Some(i) = log_w.iter().position(|v| v.is_nan() || *v == f64::INFINITY) {
        return Err(Error::NonIntegrable(format!("f is not finite at node {i}")));
    }
    let shift = log_w.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if shift == f64::NEG_INFINITY {
        return Err(Error::NonIntegrable("exp(-f/D) vanishes on the whole domain".into()));
    }
    let w: Vec<f64> = log_w.iter().map(|v| (v - shift).exp()).collect();
    let masses: Vec<f64> = (0..n_bins)
        .map(|b| {
            let base = b * SIMPSON_PANELS;
            let mut acc = 0.0;
            for p in (0..SIMPSON_PANELS).step_by(2) {
                let i = base + p;
                acc += w[i] + 4.0 * w[i + 1] + w[i + 2];
            }
            acc * h / 3.0
        })
        .collect();
    let z: f64 = masses.iter().sum();
    if !(z > 0.0) || !z.is_finite() {
        return Err(Error::NonIntegrable(format!("normalizer evaluated to {z}")));
    }
    Ok(masses.into_iter().map(|m| m / z).collect())
}

/// Equal-width bins over `[lo, hi]`; values outside are clamped into the
/// edge bins.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    lo: f64,
    hi: f64,
    counts: Vec<u64>,
}

impl Histogram {
    pub fn new(lo: f64, hi: f64, n_bins: usize) -> Result<Self> {
        if n_bins == 0 || !(lo < hi) {
            return Err(Error::BinningMismatch(format!("cannot bin [{lo}, {hi}] into {n_bins} bins")));
        }
        Ok(Self { lo, hi, counts: vec![0; n_bins] })
    }

    pub fn for_potential(pot: &Potential1D, n_bins: usize) -> Result<Self> {
        let (lo, hi) = pot.domain();
        Self::new(lo, hi, n_bins)
    }

    pub fn from_samples(lo: f64, hi: f64, n_bins: usize, samples: &[f64]) -> Result<Self> {
        let mut h = Self::new(lo, hi, n_bins)?;
        samples.iter().for_each(|&x| h.add(x));
        Ok(h)
    }

    pub fn bin_index(&self, x: f64) -> usize {
        let n = self.counts.len();
        let pos = (x - self.lo) / (self.hi - self.lo) * n as f64;
        if pos.is_nan() || pos < 0.0 {
            0
        } else {
            (pos as usize).min(n - 1)
        }
    }

    pub fn add(&mut self, x: f64) {
        let idx = self.bin_index(x);
        self.counts[idx] += 1;
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn n_bins(&self) -> usize {
        self.counts.len()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        let total = self.total() as f64;
        self.counts.iter().map(|&c| c as f64 / total).collect()
    }

    /// Mass of the bins whose centers lie below and above `split`.
    pub fn split_mass(&self, split: f64) -> (f64, f64) {
        split_mass(&self.probabilities(), self.lo, self.hi, split)
    }
}

/// Mass of bins whose centers lie below and above `split`.
pub fn split_mass(probs: &[f64], lo: f64, hi: f64, split: f64) -> (f64, f64) {
    let width = (hi - lo) / probs.len() as f64;
    probs.iter().enumerate().fold((0.0, 0.0), |(l, r), (i, p)| {
        if lo + (i as f64 + 0.5) * width < split {
            (l + p, r)
        } else {
            (l, r + p)
        }
    })
}

/// `½·Σ|pᵢ − qᵢ|`.
pub fn tv_distance(p: &[f64], q: &[f64]) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::BinningMismatch(format!("{} bins vs {} bins", p.len(), q.len())));
    }
    Ok(0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationaryCheck {
    pub empirical_hist: Vec<u64>,
    pub analytic_density: Vec<f64>,
    pub tv_distance: f64,
    pub samples: u64,
    pub burn_in: usize,
}

pub fn stationarity_report(hist: &Histogram, analytic: &[f64], burn_in: usize) -> Result<StationaryCheck> {
    if hist.total() == 0 {
        return Err(Error::BinningMismatch("histogram holds no samples".into()));
    }
    let tv = tv_distance(&hist.probabilities(), analytic)?;
    Ok(StationaryCheck {
        empirical_hist: hist.counts.clone(),
        analytic_density: analytic.to_vec(),
        tv_distance: tv,
        samples: hist.total(),
        burn_in,
    })
}

/// Samples a chain straight into a histogram over the potential's domain and
/// compares it with the analytic bin masses.
pub fn run_stationarity(pot: &Potential1D, cfg: &LangevinConfig, n_bins: usize, rng: &mut RngStream) -> Result<StationaryCheck> {
    let analytic = analytic_stationary(pot, cfg.diffusion, n_bins)?;
    let mut hist = Histogram::for_potential(pot, n_bins)?;
    langevin_visit(pot, cfg, rng, |x| hist.add(x))?;
    stationarity_report(&hist, &analytic, cfg.burn_in)
}

/// Transitions between the regions `θ < −band` and `θ > band`; excursions
/// into the band alone do not count.
pub fn count_crossings(samples: &[f64], band: f64) -> usize {
    let mut side = 0i8;
    let mut crossings = 0;
    for &x in samples {
        let s = if x > band {
            1
        } else if x < -band {
            -1
        } else {
            continue;
        };
        if side != 0 && s != side {
            crossings += 1;
        }
        side = s;
    }
    crossings
}

/// Potential `f(x) + g(y)` with independent diffusions per axis, whose
/// stationary density factorizes.
#[derive(Debug, Clone)]
pub struct SeparablePotential2D {
    pub x: Potential1D,
    pub y: Potential1D,
}

impl SeparablePotential2D {
    /// Row-major `n_bins × n_bins` bin masses (x index major).
    pub fn analytic_stationary(&self, diffusion: [f64; 2], n_bins: usize) -> Result<Vec<f64>> {
        let px = analytic_stationary(&self.x, diffusion[0], n_bins)?;
        let py = analytic_stationary(&self.y, diffusion[1], n_bins)?;
        Ok(px.iter().flat_map(|a| py.iter().map(move |b| a * b)).collect())
    }

    /// One step per axis, drawing the x noise first.
    pub fn step(&self, theta: [f64; 2], diffusion: [f64; 2], dt: f64, rng: &mut RngStream) -> Result<[f64; 2]> {
        let x = langevin_step(&self.x, theta[0], diffusion[0], dt, rng.standard_normal())?;
        let y = langevin_step(&self.y, theta[1], diffusion[1], dt, rng.standard_normal())?;
        Ok([x, y])
    }

    /// Row-major joint histogram of a chain, matching [`Self::analytic_stationary`].
    pub fn sample_histogram(
        &self,
        diffusion: [f64; 2],
        dt: f64,
        n_samples: usize,
        burn_in: usize,
        thin: usize,
        n_bins: usize,
        rng: &mut RngStream,
    ) -> Result<Vec<u64>> {
        if thin == 0 {
            return Err(Error::InvalidHyperparameter { field: "thin", reason: "must be >= 1".into() });
        }
        for d in diffusion {
            if !(d > 0.0) || !d.is_finite() {
                return Err(Error::InvalidHyperparameter { field: "diffusion", reason: format!("must be > 0, got {d}") });
            }
        }
        if !(dt > 0.0) {
            return Err(Error::InvalidStep(format!("dt must be > 0, got {dt}")));
        }
        let hx = Histogram::for_potential(&self.x, n_bins)?;
        let hy = Histogram::for_potential(&self.y, n_bins)?;
        let mut counts = vec![0u64; n_bins * n_bins];
        let mut theta = [
            0.5 * (self.x.lo + self.x.hi),
            0.5 * (self.y.lo + self.y.hi),
        ];
        for _ in 0..burn_in {
            theta = self.step(theta, diffusion, dt, rng)?;
        }
        for _ in 0..n_samples {
            for _ in 0..thin {
                theta = self.step(theta, diffusion, dt, rng)?;
            }
            counts[hx.bin_index(theta[0]) * n_bins + hy.bin_index(theta[1])] += 1;
        }
        Ok(counts)
    }
}
