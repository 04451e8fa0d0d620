//! Experiment configuration: one JSON document per experiment.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sgdf_core::langevin::{LangevinConfig, Potential1D};
use sgdf_core::objectives::{
    noisy_rosenbrock, synthetic_logistic, tiny_mlp, LogisticOptions, MlpOptions, NoisyQuadratic,
};
use sgdf_core::{OptimizerSpec, ParamVector, RngStream, StochasticObjective};

use crate::error::{CliError, Result};

pub const CONFIG_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub version: u32,
    pub name: String,
    pub experiment: ExperimentKind,
    pub objective: ObjectiveSpec,
    #[serde(default)]
    pub optimizers: Vec<OptimizerSpec>,
    pub seeds: Vec<u64>,
    /// Optimizer steps per run (samples per chain for `fpss`).
    pub horizon: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    /// CSV rows are written when `t % record_every == 0` and at `t = horizon`.
    #[serde(default = "one")]
    pub record_every: u64,
}

fn one() -> u64 {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ExperimentKind {
    /// Loss-versus-step comparison. With `alpha_grid`, every optimizer is
    /// tuned over the grid by median final loss and only the winner's traces
    /// are written.
    Race {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        alpha_grid: Option<Vec<f64>>,
    },
    /// Cumulative regret on an online convex stream with projection.
    Regret,
    /// Running minimum of the true squared gradient norm.
    NonconvexRate,
    /// Langevin chains against the stationary density `exp(−f/D)/Z`.
    Fpss { diffusion: f64, floor: f64, dt: f64, burn_in: usize, thin: usize, n_bins: usize },
    /// Top eigenvalues and trace of the Hessian at each run's final iterate.
    Spectrum { k: usize, probes: usize, max_iters: usize, tol: f64 },
    /// Error of the optimizer's gradient estimate on a stationary stream.
    EstimatorVariance { window_start: u64 },
}

impl ExperimentKind {
    pub fn id(&self) -> &'static str {
        match self {
            ExperimentKind::Race { .. } => "race",
            ExperimentKind::Regret => "regret",
            ExperimentKind::NonconvexRate => "nonconvex_rate",
            ExperimentKind::Fpss { .. } => "fpss",
            ExperimentKind::Spectrum { .. } => "spectrum",
            ExperimentKind::EstimatorVariance { .. } => "estimator_variance",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ObjectiveSpec {
    /// `½Σλᵢθᵢ²`, eigenvalues log-spaced in `[eig_min, eig_max]`.
    Quadratic { dim: usize, eig_min: f64, eig_max: f64, noise_std: f64, initial: f64 },
    Rosenbrock { noise_std: f64, initial: [f64; 2] },
    Logistic { dim: usize, n_samples: usize, l2: f64, batch_size: usize },
    Mlp { layer_sizes: Vec<usize>, n_samples: usize, noise: f64, batch_size: usize },
    /// Rounds `½‖θ − c_t‖²`, projected onto a ball of radius `radius`.
    ShiftingQuadratics { dim: usize, jitter: f64, radius: f64, initial: f64 },
    /// Gradients `μ + N(0, σ²)` per coordinate, independent of θ.
    StationaryStream { dim: usize, mu: f64, sigma: f64 },
    DoubleWell { lo: f64, hi: f64, initial: f64 },
    GaussianWell { lo: f64, hi: f64, initial: f64 },
}

impl ObjectiveSpec {
    pub fn id(&self) -> &'static str {
        match self {
            ObjectiveSpec::Quadratic { .. } => "quadratic",
            ObjectiveSpec::Rosenbrock { .. } => "rosenbrock",
            ObjectiveSpec::Logistic { .. } => "logistic",
            ObjectiveSpec::Mlp { .. } => "mlp",
            ObjectiveSpec::ShiftingQuadratics { .. } => "shifting_quadratics",
            ObjectiveSpec::StationaryStream { .. } => "stationary_stream",
            ObjectiveSpec::DoubleWell { .. } => "double_well",
            ObjectiveSpec::GaussianWell { .. } => "gaussian_well",
        }
    }

    fn is_stochastic_objective(&self) -> bool {
        matches!(
            self,
            ObjectiveSpec::Quadratic { .. }
                | ObjectiveSpec::Rosenbrock { .. }
                | ObjectiveSpec::Logistic { .. }
                | ObjectiveSpec::Mlp { .. }
        )
    }

    /// Builds a static stochastic objective. Data-driven objectives draw their
    /// data from `rng`.
    pub fn build_objective(&self, rng: &mut RngStream) -> Result<Box<dyn StochasticObjective>> {
        Ok(match self {
            ObjectiveSpec::Quadratic { dim, eig_min, eig_max, noise_std, initial } => Box::new(
                NoisyQuadratic::log_spaced(*dim, *eig_min, *eig_max, *noise_std)?
                    .with_initial(ParamVector::filled(*dim, *initial))?,
            ),
            ObjectiveSpec::Rosenbrock { noise_std, initial } => {
                Box::new(noisy_rosenbrock(*noise_std)?.with_initial(ParamVector::new(initial.to_vec())?)?)
            }
            ObjectiveSpec::Logistic { dim, n_samples, l2, batch_size } => Box::new(synthetic_logistic(
                *dim,
                *n_samples,
                rng,
                LogisticOptions { l2: *l2, batch_size: *batch_size },
            )?),
            ObjectiveSpec::Mlp { layer_sizes, n_samples, noise, batch_size } => Box::new(tiny_mlp(
                MlpOptions {
                    layer_sizes: layer_sizes.clone(),
                    n_samples: *n_samples,
                    noise: *noise,
                    batch_size: *batch_size,
                },
                rng,
            )?),
            other => {
                return Err(CliError::Config(format!("objective `{}` is not a static objective", other.id())));
            }
        })
    }

    pub fn build_potential(&self) -> Result<(Potential1D, f64)> {
        Ok(match *self {
            ObjectiveSpec::DoubleWell { lo, hi, initial } => (Potential1D::double_well(lo, hi)?, initial),
            ObjectiveSpec::GaussianWell { lo, hi, initial } => (Potential1D::quadratic(lo, hi)?, initial),
            ref other => return Err(CliError::Config(format!("objective `{}` is not a potential", other.id()))),
        })
    }
}

fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

fn check_positive(field: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(config_err(format!("`{field}` must be finite and > 0, got {v}")))
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| config_err(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if self.version != CONFIG_VERSION {
            return Err(config_err(format!("unsupported `version` {}; expected {CONFIG_VERSION}", self.version)));
        }
        if self.name.is_empty() || !self.name.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_') {
            return Err(config_err(format!("`name` must be non-empty [A-Za-z0-9_-], got {:?}", self.name)));
        }
        if self.seeds.is_empty() {
            return Err(config_err("`seeds` must list at least one seed"));
        }
        if self.seeds.iter().collect::<BTreeSet<_>>().len() != self.seeds.len() {
            return Err(config_err("`seeds` contains duplicates"));
        }
        if self.horizon == 0 {
            return Err(config_err("`horizon` must be >= 1"));
        }
        if self.record_every == 0 {
            return Err(config_err("`record_every` must be >= 1"));
        }
        for (i, opt) in self.optimizers.iter().enumerate() {
            opt.validate().map_err(|e| config_err(format!("optimizers[{i}] ({}): {e}", opt.label())))?;
        }
        let labels: BTreeSet<_> = self.optimizers.iter().map(|o| o.label()).collect();
        if labels.len() != self.optimizers.len() {
            return Err(config_err("`optimizers` must have distinct labels (sgdf, sgd, sgdm, adam, wiener_adam)"));
        }
        self.validate_objective()?;
        self.validate_kind()
    }

    fn validate_objective(&self) -> Result<()> {
        match &self.objective {
            ObjectiveSpec::Quadratic { dim, eig_min, eig_max, noise_std, initial } => {
                if *dim == 0 {
                    return Err(config_err("`objective.dim` must be >= 1"));
                }
                check_positive("objective.eig_min", *eig_min)?;
                check_positive("objective.eig_max", *eig_max)?;
                if eig_min > eig_max {
                    return Err(config_err("`objective.eig_min` exceeds `objective.eig_max`"));
                }
                if !(*noise_std >= 0.0) || !initial.is_finite() {
                    return Err(config_err("`objective.noise_std` must be >= 0 and `objective.initial` finite"));
                }
            }
            ObjectiveSpec::ShiftingQuadratics { dim, jitter, radius, initial } => {
                if *dim == 0 || !(*jitter >= 0.0) || !initial.is_finite() {
                    return Err(config_err("shifting_quadratics needs dim >= 1, jitter >= 0 and a finite initial"));
                }
                check_positive("objective.radius", *radius)?;
            }
            ObjectiveSpec::StationaryStream { dim, mu, sigma } => {
                if *dim == 0 || !mu.is_finite() || !(*sigma >= 0.0) {
                    return Err(config_err("stationary_stream needs dim >= 1, finite mu and sigma >= 0"));
                }
            }
            ObjectiveSpec::DoubleWell { lo, hi, initial } | ObjectiveSpec::GaussianWell { lo, hi, initial } => {
                if !(lo < hi) || !(lo <= initial && initial <= hi) {
                    return Err(config_err("potential needs lo < hi and lo <= initial <= hi"));
                }
            }
            // Remaining objectives validate their options at construction.
            _ => {}
        }
        Ok(())
    }

    fn validate_kind(&self) -> Result<()> {
        let obj = &self.objective;
        let mismatch = || {
            config_err(format!("experiment `{}` cannot use objective `{}`", self.experiment.id(), obj.id()))
        };
        let needs_optimizers = || {
            if self.optimizers.is_empty() {
                Err(config_err(format!("experiment `{}` needs at least one optimizer", self.experiment.id())))
            } else {
                Ok(())
            }
        };
        match &self.experiment {
            ExperimentKind::Race { alpha_grid } => {
                needs_optimizers()?;
                if !obj.is_stochastic_objective() {
                    return Err(mismatch());
                }
                if let Some(grid) = alpha_grid {
                    if grid.is_empty() {
                        return Err(config_err("`experiment.alpha_grid` must not be empty"));
                    }
                    for &a in grid {
                        check_positive("experiment.alpha_grid", a)?;
                    }
                }
            }
            ExperimentKind::NonconvexRate => {
                needs_optimizers()?;
                if !obj.is_stochastic_objective() {
                    return Err(mismatch());
                }
            }
            ExperimentKind::Spectrum { k, probes, max_iters, tol } => {
                needs_optimizers()?;
                if !obj.is_stochastic_objective() {
                    return Err(mismatch());
                }
                if *k == 0 || *probes == 0 || *max_iters == 0 {
                    return Err(config_err("spectrum needs k, probes and max_iters >= 1"));
                }
                check_positive("experiment.tol", *tol)?;
            }
            ExperimentKind::Regret => {
                needs_optimizers()?;
                if !matches!(obj, ObjectiveSpec::ShiftingQuadratics { .. }) {
                    return Err(mismatch());
                }
            }
            ExperimentKind::EstimatorVariance { window_start } => {
                needs_optimizers()?;
                if !matches!(obj, ObjectiveSpec::StationaryStream { .. }) {
                    return Err(mismatch());
                }
                if *window_start == 0 || *window_start > self.horizon {
                    return Err(config_err("`experiment.window_start` must lie in 1..=horizon"));
                }
            }
            ExperimentKind::Fpss { n_bins, .. } => {
                if !self.optimizers.is_empty() {
                    return Err(config_err("experiment `fpss` takes no optimizers"));
                }
                let (pot, initial) = obj.build_potential().map_err(|_| mismatch())?;
                let lc = self.langevin_config(initial).expect("fpss kind");
                lc.validate(&pot).map_err(|e| config_err(format!("experiment: {e}")))?;
                if *n_bins < 10 {
                    return Err(config_err("`experiment.n_bins` must be >= 10"));
                }
            }
        }
        Ok(())
    }

    pub fn langevin_config(&self, initial: f64) -> Option<LangevinConfig> {
        match self.experiment {
            ExperimentKind::Fpss { diffusion, floor, dt, burn_in, thin, .. } => Some(LangevinConfig {
                diffusion,
                floor,
                dt,
                n_samples: self.horizon as usize,
                burn_in,
                thin,
                initial,
            }),
            _ => None,
        }
    }
}
