//! Executes an [`ExperimentConfig`]: every (optimizer, alpha, seed) run is
//! independent and runs on the rayon pool; results are merged and written in
//! a fixed order so parallel and serial runs produce identical files.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sgdf_core::diagnostics::{rate_fit, spectrum_report, ConvergenceLedger, RateFit, RateModel};
use sgdf_core::langevin::{analytic_stationary, langevin_visit, tv_distance, Histogram};
use sgdf_core::objectives::{convex_stream, ConvexStreamKind};
use sgdf_core::{Error as CoreError, OptimizerSpec, ParamVector, RngStream};

use crate::config::{ExperimentConfig, ExperimentKind, ObjectiveSpec, CONFIG_VERSION};
use crate::error::{CliError, Result};
use crate::trace::{write_csv, TraceRecord};

pub const SUMMARY_FILE: &str = "summary.json";

/// Stream id for gradient noise; data and stream construction use `DATA_STREAM`.
const NOISE_STREAM: u64 = 0;
const DATA_STREAM: u64 = 1;

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub out_dir: Option<PathBuf>,
    /// Worker threads; `None` uses rayon's default.
    pub jobs: Option<usize>,
}

/// Output directory by precedence: explicit option, then the config, then
/// `sgdf-out/<name>`.
pub fn resolve_out_dir(cfg: &ExperimentConfig, explicit: Option<&Path>) -> PathBuf {
    explicit
        .map(Path::to_path_buf)
        .or_else(|| cfg.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("sgdf-out").join(&cfg.name))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub optimizer: String,
    pub alpha: Option<f64>,
    pub seed: u64,
    /// Trace file name, relative to the summary.
    pub csv: String,
    pub steps: u64,
    pub diverged: bool,
    pub final_loss: Option<f64>,
    pub final_grad_norm_sq: Option<f64>,
    pub final_regret: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub alpha: f64,
    pub median_final_loss: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RaceEntry {
    pub optimizer: String,
    pub alpha: f64,
    pub median_final_loss: f64,
    /// First step at which the median loss curve reaches the reference's
    /// final median loss.
    pub steps_to_reference: Option<u64>,
    pub grid: Vec<GridPoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateEntry {
    pub optimizer: String,
    pub alpha: f64,
    /// `(T, statistic)` at log-spaced horizons.
    pub series: Vec<(u64, f64)>,
    pub fit: Option<RateFit>,
    pub fit_error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumEntry {
    pub optimizer: String,
    pub seed: u64,
    pub top_eigenvalues: Vec<f64>,
    pub converged: Vec<bool>,
    pub trace_estimate: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimatorEntry {
    pub optimizer: String,
    pub median_est_mse: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Analysis {
    Race { reference: String, reference_final_loss: f64, optimizers: Vec<RaceEntry> },
    Regret { optimizers: Vec<RateEntry> },
    NonconvexRate { optimizers: Vec<RateEntry> },
    Fpss { analytic: Vec<f64>, per_seed_tv: Vec<f64>, pooled_tv: f64, pooled_counts: Vec<u64>, mode_mass: (f64, f64) },
    Spectrum { runs: Vec<SpectrumEntry> },
    EstimatorVariance { median_raw_mse: f64, optimizers: Vec<EstimatorEntry> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSummary {
    pub version: u32,
    pub name: String,
    pub experiment: String,
    pub objective: String,
    pub horizon: u64,
    pub seeds: Vec<u64>,
    pub runs: Vec<RunSummary>,
    pub analysis: Analysis,
}

/// One finished run, kept at full step resolution.
#[derive(Debug, Clone)]
pub struct RunData {
    pub optimizer: String,
    pub alpha: Option<f64>,
    pub seed: u64,
    pub records: Vec<TraceRecord>,
    pub diverged: bool,
    pub final_params: Option<ParamVector>,
    pub histogram: Option<Histogram>,
}

impl RunData {
    fn final_record(&self) -> Option<&TraceRecord> {
        self.records.last()
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentOutcome {
    pub summary: ExperimentSummary,
    pub out_dir: PathBuf,
    pub summary_path: PathBuf,
    pub runs: Vec<RunData>,
}

#[derive(Debug, Clone)]
struct Job {
    opt: usize,
    alpha: Option<f64>,
    seed: u64,
}

fn is_divergence(e: &CoreError) -> bool {
    matches!(e, CoreError::NonFiniteResult { .. } | CoreError::NonFiniteGradient { .. })
}

fn csv_name(label: &str, seed: u64) -> String {
    format!("{label}_seed{seed}.csv")
}

pub fn run_experiment(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<ExperimentOutcome> {
    cfg.validate()?;
    let out_dir = resolve_out_dir(cfg, opts.out_dir.as_deref());
    std::fs::create_dir_all(&out_dir).map_err(|e| CliError::io(&out_dir, e))?;

    let jobs = plan_jobs(cfg);
    let pool = {
        let mut b = rayon::ThreadPoolBuilder::new();
        if let Some(n) = opts.jobs {
            b = b.num_threads(n.max(1));
        }
        b.build().map_err(|e| CliError::Config(format!("thread pool: {e}")))?
    };
    let results: Vec<Result<RunData>> = pool.install(|| jobs.par_iter().map(|j| run_job(cfg, j)).collect());
    let all: Vec<RunData> = results.into_iter().collect::<Result<_>>()?;

    let (runs, analysis) = analyse(cfg, all)?;
    for run in &runs {
        let path = out_dir.join(csv_name(&run.optimizer, run.seed));
        let keep: Vec<TraceRecord> = run
            .records
            .iter()
            .enumerate()
            .filter(|(i, r)| r.t % cfg.record_every == 0 || *i + 1 == run.records.len())
            .map(|(_, r)| *r)
            .collect();
        write_csv(&path, &keep)?;
    }
    let summary = ExperimentSummary {
        version: CONFIG_VERSION,
        name: cfg.name.clone(),
        experiment: cfg.experiment.id().into(),
        objective: cfg.objective.id().into(),
        horizon: cfg.horizon,
        seeds: cfg.seeds.clone(),
        runs: runs
            .iter()
            .map(|r| RunSummary {
                optimizer: r.optimizer.clone(),
                alpha: r.alpha,
                seed: r.seed,
                csv: csv_name(&r.optimizer, r.seed),
                steps: r.final_record().map_or(0, |x| x.t),
                diverged: r.diverged,
                final_loss: r.final_record().and_then(|x| x.loss),
                final_grad_norm_sq: r.final_record().and_then(|x| x.grad_norm_sq),
                final_regret: r.final_record().and_then(|x| x.regret),
            })
            .collect(),
        analysis,
    };
    let summary_path = out_dir.join(SUMMARY_FILE);
    let text = serde_json::to_string_pretty(&summary).expect("summary serializes");
    std::fs::write(&summary_path, text + "\n").map_err(|e| CliError::io(&summary_path, e))?;
    Ok(ExperimentOutcome { summary, out_dir, summary_path, runs })
}

fn plan_jobs(cfg: &ExperimentConfig) -> Vec<Job> {
    if matches!(cfg.experiment, ExperimentKind::Fpss { .. }) {
        return cfg.seeds.iter().map(|&seed| Job { opt: usize::MAX, alpha: None, seed }).collect();
    }
    let grid = match &cfg.experiment {
        ExperimentKind::Race { alpha_grid: Some(grid) } => Some(grid.clone()),
        _ => None,
    };
    let mut jobs = Vec::new();
    for (opt, spec) in cfg.optimizers.iter().enumerate() {
        let alphas: Vec<f64> = grid.clone().unwrap_or_else(|| vec![spec.alpha()]);
        for alpha in alphas {
            for &seed in &cfg.seeds {
                jobs.push(Job { opt, alpha: Some(alpha), seed });
            }
        }
    }
    jobs
}

fn run_job(cfg: &ExperimentConfig, job: &Job) -> Result<RunData> {
    match &cfg.objective {
        ObjectiveSpec::DoubleWell { .. } | ObjectiveSpec::GaussianWell { .. } => run_langevin(cfg, job),
        ObjectiveSpec::ShiftingQuadratics { .. } => run_regret(cfg, job),
        ObjectiveSpec::StationaryStream { .. } => run_stationary_stream(cfg, job),
        _ => run_static(cfg, job),
    }
}

fn job_spec(cfg: &ExperimentConfig, job: &Job) -> OptimizerSpec {
    let spec = &cfg.optimizers[job.opt];
    job.alpha.map_or_else(|| spec.clone(), |a| spec.with_alpha(a))
}

fn mean_sq_diff(a: &ParamVector, b: &ParamVector) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).powi(2)).sum::<f64>() / a.dim() as f64
}

fn finished(opt: OptimizerSpec, job: &Job, records: Vec<TraceRecord>, diverged: bool, theta: Option<ParamVector>) -> RunData {
    RunData {
        optimizer: opt.label().into(),
        alpha: job.alpha,
        seed: job.seed,
        records,
        diverged,
        final_params: theta,
        histogram: None,
    }
}

fn run_static(cfg: &ExperimentConfig, job: &Job) -> Result<RunData> {
    let spec = job_spec(cfg, job);
    let obj = cfg.objective.build_objective(&mut RngStream::new(job.seed, DATA_STREAM))?;
    let mut rng = RngStream::new(job.seed, NOISE_STREAM);
    let mut theta = obj.initial_point();
    let mut opt = spec.build(obj.dim())?;
    let mut true_grad = obj.true_grad(&theta)?;
    let mut records = Vec::with_capacity(cfg.horizon as usize);
    for t in 1..=cfg.horizon {
        let g = match obj.noisy_grad(&theta, &mut rng) {
            Ok(g) => g,
            Err(e) if is_divergence(&e) => return Ok(finished(spec, job, records, true, None)),
            Err(e) => return Err(e.into()),
        };
        let info = match opt.step(&mut theta, &g) {
            Ok(info) => info,
            Err(e) if is_divergence(&e) => return Ok(finished(spec, job, records, true, None)),
            Err(e) => return Err(e.into()),
        };
        let est_mse = info.estimate.as_ref().map(|e| mean_sq_diff(e, &true_grad));
        let (loss, next_grad) = match (obj.loss(&theta), obj.true_grad(&theta)) {
            (Ok(l), Ok(g)) if l.is_finite() => (l, g),
            _ => return Ok(finished(spec, job, records, true, None)),
        };
        true_grad = next_grad;
        records.push(TraceRecord {
            seed: job.seed,
            t,
            alpha: Some(info.alpha),
            loss: Some(loss),
            grad_norm_sq: Some(true_grad.norm_sq()),
            mean_gain: info.mean_gain,
            est_mse,
            regret: None,
        });
    }
    Ok(finished(spec, job, records, false, Some(theta)))
}

fn run_regret(cfg: &ExperimentConfig, job: &Job) -> Result<RunData> {
    let ObjectiveSpec::ShiftingQuadratics { dim, jitter, radius, initial } = cfg.objective else {
        unreachable!("validated")
    };
    let spec = job_spec(cfg, job);
    let kind = ConvexStreamKind::ShiftingQuadratics { dim, jitter };
    let stream = convex_stream(&kind, cfg.horizon as usize, radius, &mut RngStream::new(job.seed, DATA_STREAM))?;
    let mut theta = ParamVector::filled(dim, initial);
    stream.project(&mut theta);
    let mut opt = spec.build(dim)?;

    // Regret against the best fixed point for each prefix, whose loss is
    // ½(Σ‖c_t‖² − T‖c̄_T‖²).
    let mut center_sum = vec![0.0; dim];
    let mut center_sq = 0.0;
    let mut cum_loss = 0.0;
    let mut records = Vec::with_capacity(cfg.horizon as usize);
    for t in 1..=cfg.horizon as usize {
        let c = stream.center(t);
        center_sum.iter_mut().zip(c.iter()).for_each(|(s, x)| *s += x);
        center_sq += c.norm_sq();
        let best = 0.5 * (center_sq - center_sum.iter().map(|s| s * s).sum::<f64>() / t as f64);
        let loss = stream.loss(t, &theta)?;
        cum_loss += loss;
        let g = stream.grad(t, &theta)?;
        let info = match opt.step(&mut theta, &g) {
            Ok(info) => info,
            Err(e) if is_divergence(&e) => return Ok(finished(spec, job, records, true, None)),
            Err(e) => return Err(e.into()),
        };
        stream.project(&mut theta);
        records.push(TraceRecord {
            seed: job.seed,
            t: t as u64,
            alpha: Some(info.alpha),
            loss: Some(loss),
            grad_norm_sq: Some(g.norm_sq()),
            mean_gain: info.mean_gain,
            est_mse: None,
            regret: Some(cum_loss - best),
        });
    }
    Ok(finished(spec, job, records, false, Some(theta)))
}

fn run_stationary_stream(cfg: &ExperimentConfig, job: &Job) -> Result<RunData> {
    let ObjectiveSpec::StationaryStream { dim, mu, sigma } = cfg.objective else { unreachable!("validated") };
    let spec = job_spec(cfg, job);
    let mut rng = RngStream::new(job.seed, NOISE_STREAM);
    let mut theta = ParamVector::zeros(dim);
    let mut opt = spec.build(dim)?;
    let truth = ParamVector::filled(dim, mu);
    let mut records = Vec::with_capacity(cfg.horizon as usize);
    for t in 1..=cfg.horizon {
        let g = sgdf_core::gaussian_vector(&mut rng, dim, mu, sigma)?;
        let info = match opt.step(&mut theta, &g) {
            Ok(info) => info,
            Err(e) if is_divergence(&e) => return Ok(finished(spec, job, records, true, None)),
            Err(e) => return Err(e.into()),
        };
        records.push(TraceRecord {
            seed: job.seed,
            t,
            alpha: Some(info.alpha),
            loss: None,
            grad_norm_sq: Some(mean_sq_diff(&g, &truth)),
            mean_gain: info.mean_gain,
            est_mse: info.estimate.as_ref().map(|e| mean_sq_diff(e, &truth)),
            regret: None,
        });
    }
    Ok(finished(spec, job, records, false, Some(theta)))
}

fn run_langevin(cfg: &ExperimentConfig, job: &Job) -> Result<RunData> {
    let ExperimentKind::Fpss { n_bins, .. } = cfg.experiment else { unreachable!("validated") };
    let (pot, initial) = cfg.objective.build_potential()?;
    let lc = cfg.langevin_config(initial).expect("fpss kind");
    let mut hist = Histogram::for_potential(&pot, n_bins)?;
    let mut records = Vec::new();
    let mut k = 0u64;
    let mut rng = RngStream::new(job.seed, NOISE_STREAM);
    langevin_visit(&pot, &lc, &mut rng, |x| {
        k += 1;
        hist.add(x);
        if k % cfg.record_every == 0 || k == cfg.horizon {
            records.push(TraceRecord { seed: job.seed, t: k, loss: Some(pot.f(x)), ..Default::default() });
        }
    })?;
    Ok(RunData {
        optimizer: "langevin".into(),
        alpha: None,
        seed: job.seed,
        records,
        diverged: false,
        final_params: None,
        histogram: Some(hist),
    })
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n == 0 {
        return f64::NAN;
    }
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Log-spaced horizons from 10 (or 1 for short runs) up to `horizon`, 20 per
/// decade, always including `horizon`.
pub fn log_grid(horizon: u64) -> Vec<u64> {
    let start = if horizon >= 10 { 10 } else { 1 };
    let mut out: Vec<u64> = (0..)
        .map(|k| (start as f64 * 10f64.powf(k as f64 / 20.0)).round() as u64)
        .take_while(|&t| t <= horizon)
        .collect();
    out.push(horizon);
    out.dedup();
    out
}

/// Per-step statistic at step `t` for every run, `NaN` where a run stopped early.
fn column(runs: &[&RunData], t: u64, f: impl Fn(&TraceRecord) -> Option<f64>) -> Vec<f64> {
    runs.iter()
        .map(|r| {
            r.records
                .get(t as usize - 1)
                .filter(|x| x.t == t)
                .and_then(&f)
                .unwrap_or(f64::NAN)
        })
        .collect()
}

fn finite_or_inf(v: f64) -> f64 {
    if v.is_nan() {
        f64::INFINITY
    } else {
        v
    }
}

fn group<'a>(runs: &'a [RunData], label: &str, alpha: Option<f64>) -> Vec<&'a RunData> {
    runs.iter().filter(|r| r.optimizer == label && r.alpha == alpha).collect()
}

fn rate_entry(runs: &[RunData], spec: &OptimizerSpec, horizon: u64, stat: &dyn Fn(&[&RunData], u64) -> f64, running_min: bool) -> RateEntry {
    let label = spec.label();
    let g = group(runs, label, Some(spec.alpha()));
    let mut ledger = ConvergenceLedger::new();
    let mut series = Vec::new();
    let grid = log_grid(horizon);
    let mut next = grid.iter().peekable();
    for t in 1..=horizon {
        let value = stat(&g, t);
        if running_min {
            ledger.record_step(t, f64::NAN, value, None).expect("increasing t");
        }
        if next.peek() == Some(&&t) {
            next.next();
            let v = if running_min { ledger.running_min().expect("recorded") } else { value };
            series.push((t, v));
        }
    }
    let model = if running_min { RateModel::LogOverSqrtT } else { RateModel::SqrtT };
    let (fit, fit_error) = match rate_fit(&series, model) {
        Ok(f) => (Some(f), None),
        Err(e) => (None, Some(e.to_string())),
    };
    RateEntry { optimizer: label.into(), alpha: spec.alpha(), series, fit, fit_error }
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

fn analyse(cfg: &ExperimentConfig, all: Vec<RunData>) -> Result<(Vec<RunData>, Analysis)> {
    let analysis = match &cfg.experiment {
        ExperimentKind::Race { .. } => return Ok(analyse_race(cfg, all)),
        ExperimentKind::Regret => Analysis::Regret {
            optimizers: cfg
                .optimizers
                .iter()
                .map(|spec| {
                    let stat = |g: &[&RunData], t: u64| mean(&column(g, t, |r| r.regret));
                    rate_entry(&all, spec, cfg.horizon, &stat, false)
                })
                .collect(),
        },
        ExperimentKind::NonconvexRate => Analysis::NonconvexRate {
            optimizers: cfg
                .optimizers
                .iter()
                .map(|spec| {
                    let stat = |g: &[&RunData], t: u64| mean(&column(g, t, |r| r.grad_norm_sq));
                    rate_entry(&all, spec, cfg.horizon, &stat, true)
                })
                .collect(),
        },
        ExperimentKind::Spectrum { k, probes, max_iters, tol } => {
            let mut entries = Vec::new();
            for run in &all {
                let Some(theta) = &run.final_params else { continue };
                let obj = cfg.objective.build_objective(&mut RngStream::new(run.seed, DATA_STREAM))?;
                let dim = obj.dim();
                let hvp = |v: &[f64]| {
                    let v = ParamVector::new(v.to_vec()).expect("finite probe");
                    match obj.hvp(theta, &v) {
                        Some(Ok(h)) => h.into_vec(),
                        _ => vec![f64::NAN; v.dim()],
                    }
                };
                let report = spectrum_report(hvp, dim, (*k).min(dim), *max_iters, *tol, *probes, &mut RngStream::new(run.seed, 2))?;
                entries.push(SpectrumEntry {
                    optimizer: run.optimizer.clone(),
                    seed: run.seed,
                    top_eigenvalues: report.top_eigenvalues,
                    converged: report.converged,
                    trace_estimate: report.trace_estimate,
                });
            }
            Analysis::Spectrum { runs: entries }
        }
        ExperimentKind::EstimatorVariance { window_start } => {
            let window = |r: &RunData, f: &dyn Fn(&TraceRecord) -> Option<f64>| -> Option<f64> {
                let vals: Vec<f64> = r.records.iter().filter(|x| x.t >= *window_start).filter_map(f).collect();
                (!vals.is_empty()).then(|| mean(&vals))
            };
            let raw: Vec<f64> = all.iter().filter_map(|r| window(r, &|x| x.grad_norm_sq)).collect();
            Analysis::EstimatorVariance {
                median_raw_mse: median(&raw),
                optimizers: cfg
                    .optimizers
                    .iter()
                    .map(|spec| {
                        let vals: Vec<f64> = group(&all, spec.label(), Some(spec.alpha()))
                            .iter()
                            .filter_map(|r| window(r, &|x| x.est_mse))
                            .collect();
                        EstimatorEntry {
                            optimizer: spec.label().into(),
                            median_est_mse: (!vals.is_empty()).then(|| median(&vals)),
                        }
                    })
                    .collect(),
            }
        }
        ExperimentKind::Fpss { diffusion, n_bins, .. } => {
            let (pot, _) = cfg.objective.build_potential()?;
            let analytic = analytic_stationary(&pot, *diffusion, *n_bins)?;
            let mut per_seed_tv = Vec::new();
            let mut pooled_counts = vec![0u64; *n_bins];
            for run in &all {
                let h = run.histogram.as_ref().expect("langevin run");
                per_seed_tv.push(tv_distance(&h.probabilities(), &analytic)?);
                pooled_counts.iter_mut().zip(h.counts()).for_each(|(p, c)| *p += c);
            }
            let (lo, hi) = pot.domain();
            let total: u64 = pooled_counts.iter().sum();
            let probs: Vec<f64> = pooled_counts.iter().map(|&c| c as f64 / total as f64).collect();
            let pooled_tv = tv_distance(&probs, &analytic)?;
            let mode_mass = sgdf_core::langevin::split_mass(&probs, lo, hi, 0.5 * (lo + hi));
            Analysis::Fpss { analytic, per_seed_tv, pooled_tv, pooled_counts, mode_mass }
        }
    };
    Ok((all, analysis))
}

fn analyse_race(cfg: &ExperimentConfig, all: Vec<RunData>) -> (Vec<RunData>, Analysis) {
    let final_loss = |r: &RunData| {
        if r.diverged {
            f64::INFINITY
        } else {
            r.final_record().and_then(|x| x.loss).unwrap_or(f64::INFINITY)
        }
    };
    let mut winners: Vec<(usize, f64, Vec<GridPoint>)> = Vec::new();
    for (i, spec) in cfg.optimizers.iter().enumerate() {
        let label = spec.label();
        let mut alphas: Vec<f64> = Vec::new();
        for r in all.iter().filter(|r| r.optimizer == label) {
            let a = r.alpha.expect("optimizer run");
            if !alphas.contains(&a) {
                alphas.push(a);
            }
        }
        let grid: Vec<GridPoint> = alphas
            .iter()
            .map(|&a| GridPoint {
                alpha: a,
                median_final_loss: median(&group(&all, label, Some(a)).into_iter().map(final_loss).collect::<Vec<_>>()),
            })
            .collect();
        let best = grid
            .iter()
            .fold(None::<&GridPoint>, |best, p| match best {
                Some(b) if b.median_final_loss <= p.median_final_loss => Some(b),
                _ => Some(p),
            })
            .expect("non-empty grid");
        winners.push((i, best.alpha, grid));
    }

    let curve = |label: &str, alpha: f64| -> Vec<f64> {
        let g = group(&all, label, Some(alpha));
        (1..=cfg.horizon)
            .map(|t| median(&column(&g, t, |r| r.loss).into_iter().map(finite_or_inf).collect::<Vec<_>>()))
            .collect()
    };
    let reference_idx = cfg.optimizers.iter().position(|o| o.label() == "sgd").unwrap_or(0);
    let (_, ref_alpha, _) = winners[reference_idx];
    let reference = cfg.optimizers[reference_idx].label().to_string();
    let reference_final_loss = *curve(&reference, ref_alpha).last().expect("horizon >= 1");

    let entries = winners
        .iter()
        .map(|(i, alpha, grid)| {
            let label = cfg.optimizers[*i].label();
            let c = curve(label, *alpha);
            RaceEntry {
                optimizer: label.into(),
                alpha: *alpha,
                median_final_loss: *c.last().expect("horizon >= 1"),
                steps_to_reference: c.iter().position(|&l| l <= reference_final_loss).map(|p| p as u64 + 1),
                grid: grid.clone(),
            }
        })
        .collect();
    let kept = all
        .into_iter()
        .filter(|r| winners.iter().any(|(i, a, _)| cfg.optimizers[*i].label() == r.optimizer && r.alpha == Some(*a)))
        .collect();
    (kept, Analysis::Race { reference, reference_final_loss, optimizers: entries })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_grid_shape() {
        let g = log_grid(1000);
        assert_eq!(g.first(), Some(&10));
        assert_eq!(g.last(), Some(&1000));
        assert!(g.windows(2).all(|w| w[0] < w[1]));
        assert!(g.contains(&100));
        assert_eq!(log_grid(5), vec![1, 2, 3, 4, 5]);
    }

    #[test]
    fn median_of_even_and_odd() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
        assert!(median(&[]).is_nan());
    }
}
