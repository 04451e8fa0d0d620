//! Matrix-free curvature probes: top-k eigenvalues by deflated power iteration
//! and Hessian trace by Hutchinson's estimator with Rademacher probes.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::RngStream;
use crate::vector::dot;

const START_SEED: u64 = 0x5EED_CAFE;

/// Result of a spectrum probe. Eigenvalues are sorted descending.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumReport {
    pub top_eigenvalues: Vec<f64>,
    #[serde(skip)]
    pub eigenvectors: Vec<Vec<f64>>,
    /// `false` where the relative residual stayed above `tol` at `max_iters`.
    pub converged: Vec<bool>,
    pub trace_estimate: Option<f64>,
    pub probes_used: usize,
    pub iterations_used: usize,
}

impl SpectrumReport {
    pub fn all_converged(&self) -> bool {
        self.converged.iter().all(|&c| c)
    }
}

/// One eigenpair from [`power_iterate`].
#[derive(Debug, Clone)]
pub struct EigenEstimate {
    pub value: f64,
    pub vector: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub rayleigh_history: Vec<f64>,
}

fn normalize(v: &mut [f64]) -> f64 {
    let n = dot(v, v).sqrt();
    if n > 0.0 {
        v.iter_mut().for_each(|x| *x /= n);
    }
    n
}

fn orthogonalize(v: &mut [f64], basis: &[Vec<f64>]) {
    for b in basis {
        let c = dot(v, b);
        v.iter_mut().zip(b).for_each(|(x, bi)| *x -= c * bi);
    }
}

/// Power iteration on `op` restricted to the complement of `found`, whose
/// action `λⱼ vⱼ vⱼᵀ` is subtracted from every product.
pub fn power_iterate<F>(
    op: &mut F,
    dim: usize,
    found: &[(f64, Vec<f64>)],
    max_iters: usize,
    tol: f64,
    start_stream: u64,
) -> EigenEstimate
where
    F: FnMut(&[f64]) -> Vec<f64>,
{
    let basis: Vec<Vec<f64>> = found.iter().map(|(_, v)| v.clone()).collect();
    let mut rng = RngStream::new(START_SEED, start_stream);
    let mut v: Vec<f64> = (0..dim).map(|_| rng.standard_normal()).collect();
    orthogonalize(&mut v, &basis);
    normalize(&mut v);

    let mut history = Vec::new();
    let mut value = 0.0;
    let mut converged = false;
    let mut iterations = 0;
    for _ in 0..max_iters {
        iterations += 1;
        let mut w = op(&v);
        for (lambda, u) in found {
            let c = lambda * dot(u, &v);
            w.iter_mut().zip(u).for_each(|(x, ui)| *x -= c * ui);
        }
        orthogonalize(&mut w, &basis);
        value = dot(&v, &w);
        history.push(value);
        let residual: f64 = w.iter().zip(&v).map(|(wi, vi)| (wi - value * vi).powi(2)).sum::<f64>().sqrt();
        let norm = normalize(&mut w);
        if norm == 0.0 {
            // v lies in the (deflated) null space.
            value = 0.0;
            converged = true;
            break;
        }
        v = w;
        if residual <= tol * value.abs() {
            converged = true;
            break;
        }
    }
    EigenEstimate { value, vector: v, iterations, converged, rayleigh_history: history }
}

/// The `k` leading eigenvalues of a symmetric operator.
pub fn power_iteration_topk<F>(mut op: F, dim: usize, k: usize, max_iters: usize, tol: f64) -> Result<SpectrumReport>
where
    F: FnMut(&[f64]) -> Vec<f64>,
{
    if k == 0 || k > dim {
        return Err(Error::InvalidConfig(format!("k must lie in 1..={dim}, got {k}")));
    }
    if !(tol > 0.0) || max_iters == 0 {
        return Err(Error::InvalidConfig("power iteration needs tol > 0 and max_iters >= 1".into()));
    }
    let mut found: Vec<(f64, Vec<f64>)> = Vec::with_capacity(k);
    let mut converged = Vec::with_capacity(k);
    let mut iterations_used = 0;
    for i in 0..k {
        let est = power_iterate(&mut op, dim, &found, max_iters, tol, i as u64);
        iterations_used += est.iterations;
        converged.push(est.converged);
        found.push((est.value, est.vector));
    }
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| found[b].0.total_cmp(&found[a].0));
    Ok(SpectrumReport {
        top_eigenvalues: order.iter().map(|&i| found[i].0).collect(),
        eigenvectors: order.iter().map(|&i| found[i].1.clone()).collect(),
        converged: order.iter().map(|&i| converged[i]).collect(),
        trace_estimate: None,
        probes_used: 0,
        iterations_used,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceEstimate {
    pub estimate: f64,
    /// Standard error of the mean over probes.
    pub std_error: f64,
    pub probes: usize,
}

/// `(1/n)·Σ zᵀ(Hz)` over Rademacher probes `z ∈ {±1}^dim`.
pub fn hutchinson_trace<F>(mut op: F, dim: usize, n_probes: usize, rng: &mut RngStream) -> Result<TraceEstimate>
where
    F: FnMut(&[f64]) -> Vec<f64>,
{
    if n_probes == 0 {
        return Err(Error::InvalidConfig("hutchinson needs at least one probe".into()));
    }
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    let mut z = vec![0.0; dim];
    for _ in 0..n_probes {
        z.iter_mut().for_each(|x| *x = rng.rademacher());
        let q = dot(&z, &op(&z));
        sum += q;
        sum_sq += q * q;
    }
    let n = n_probes as f64;
    let mean = sum / n;
    let var = if n_probes > 1 { ((sum_sq - n * mean * mean) / (n - 1.0)).max(0.0) } else { 0.0 };
    Ok(TraceEstimate { estimate: mean, std_error: (var / n).sqrt(), probes: n_probes })
}

/// Top-k eigenvalues plus a Hutchinson trace in one report.
pub fn spectrum_report<F>(
    mut op: F,
    dim: usize,
    k: usize,
    max_iters: usize,
    tol: f64,
    n_probes: usize,
    rng: &mut RngStream,
) -> Result<SpectrumReport>
where
    F: FnMut(&[f64]) -> Vec<f64>,
{
    let mut report = power_iteration_topk(&mut op, dim, k, max_iters, tol)?;
    let trace = hutchinson_trace(&mut op, dim, n_probes, rng)?;
    report.trace_estimate = Some(trace.estimate);
    report.probes_used = n_probes;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag(d: Vec<f64>) -> impl FnMut(&[f64]) -> Vec<f64> {
        move |v: &[f64]| v.iter().zip(&d).map(|(x, l)| x * l).collect()
    }

    #[test]
    fn diagonal_top_eigenvalue() {
        let r = power_iteration_topk(diag(vec![3.0, 1.0]), 2, 1, 1000, 1e-12).unwrap();
        assert!((r.top_eigenvalues[0] - 3.0).abs() <= 1e-8);
        assert!(r.all_converged());
    }

    #[test]
    fn diagonal_full_spectrum() {
        let r = power_iteration_topk(diag(vec![1.0, 3.0]), 2, 2, 1000, 1e-12).unwrap();
        assert!((r.top_eigenvalues[0] - 3.0).abs() <= 1e-8);
        assert!((r.top_eigenvalues[1] - 1.0).abs() <= 1e-8);
    }

    #[test]
    fn clustered_spectrum_is_flagged() {
        let r = power_iteration_topk(diag(vec![1.0, 0.999_999, 0.5]), 3, 1, 50, 1e-10).unwrap();
        assert!(!r.all_converged());
        assert_eq!(r.iterations_used, 50);
    }

    #[test]
    fn rayleigh_quotient_is_monotone_on_spd() {
        let mut op = diag(vec![5.0, 4.0, 3.5, 1.0, 0.2]);
        let est = power_iterate(&mut op, 5, &[], 500, 1e-14, 0);
        for w in est.rayleigh_history.windows(2) {
            assert!(w[1] >= w[0] - 1e-12);
        }
    }

    #[test]
    fn hutchinson_is_exact_on_diagonals() {
        let mut rng = RngStream::new(1, 0);
        let mut op = diag(vec![3.0, 1.0]);
        for _ in 0..20 {
            assert_eq!(hutchinson_trace(&mut op, 2, 1, &mut rng).unwrap().estimate, 4.0);
        }
        let t = hutchinson_trace(&mut op, 2, 100, &mut rng).unwrap();
        assert_eq!(t.estimate, 4.0);
        assert_eq!(t.std_error, 0.0);
    }

    #[test]
    fn zero_operator() {
        let mut rng = RngStream::new(1, 0);
        let zero = |v: &[f64]| vec![0.0; v.len()];
        assert_eq!(hutchinson_trace(zero, 4, 10, &mut rng).unwrap().estimate, 0.0);
        let r = power_iteration_topk(zero, 4, 2, 10, 1e-8).unwrap();
        assert_eq!(r.top_eigenvalues, vec![0.0, 0.0]);
    }

    #[test]
    fn invalid_arguments() {
        let mut rng = RngStream::new(1, 0);
        assert!(power_iteration_topk(diag(vec![1.0]), 1, 2, 10, 1e-8).is_err());
        assert!(power_iteration_topk(diag(vec![1.0]), 1, 1, 10, 0.0).is_err());
        assert!(hutchinson_trace(diag(vec![1.0]), 1, 0, &mut rng).is_err());
    }
}
