//! Fits a rate model `c·model(T)` to an observed statistic and reports how far
//! later observations exceed the fitted curve.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RateModel {
    /// `√T` (regret of online convex optimization).
    SqrtT,
    /// `(ln T + 1)/√T` (non-convex gradient-norm rate).
    LogOverSqrtT,
}

impl RateModel {
    pub fn eval(self, t: f64) -> f64 {
        match self {
            RateModel::SqrtT => t.sqrt(),
            RateModel::LogOverSqrtT => (t.ln() + 1.0) / t.sqrt(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub model: RateModel,
    pub c_hat: f64,
    /// Worst `observed / (c_hat·model(T))` over points after the fit window.
    pub max_violation_ratio: f64,
    pub worst_t: u64,
    pub fit_upto: u64,
}

impl RateFit {
    pub fn exceeds(&self, threshold: f64) -> bool {
        self.max_violation_ratio > threshold
    }
}

/// Least-squares `c` (through the origin) over the first decade
/// `[T_min, 10·T_min]`; the series must span two decades.
pub fn rate_fit(series: &[(u64, f64)], model: RateModel) -> Result<RateFit> {
    let t_min = series.iter().map(|p| p.0).min().ok_or(Error::EmptyLedger)?;
    rate_fit_window(series, model, t_min.saturating_mul(10))
}

/// As [`rate_fit`] but fitting on every `T ≤ fit_upto`.
pub fn rate_fit_window(series: &[(u64, f64)], model: RateModel, fit_upto: u64) -> Result<RateFit> {
    let t_min = series.iter().map(|p| p.0).min().ok_or(Error::EmptyLedger)?.max(1);
    let t_max = series.iter().map(|p| p.0).max().unwrap();
    let decades = (t_max as f64 / t_min as f64).log10();
    if decades < 2.0 - 1e-12 {
        return Err(Error::InsufficientSpan { decades });
    }
    let (mut num, mut den) = (0.0, 0.0);
    for &(t, y) in series.iter().filter(|p| p.0 >= 1 && p.0 <= fit_upto) {
        let m = model.eval(t as f64);
        num += y * m;
        den += m * m;
    }
    if den == 0.0 {
        return Err(Error::InvalidConfig("fit window contains no points".into()));
    }
    let c_hat = num / den;
    let mut max_violation_ratio = f64::NEG_INFINITY;
    let mut worst_t = fit_upto;
    for &(t, y) in series.iter().filter(|p| p.0 > fit_upto) {
        let ratio = y / (c_hat * model.eval(t as f64));
        if ratio > max_violation_ratio {
            max_violation_ratio = ratio;
            worst_t = t;
        }
    }
    if max_violation_ratio == f64::NEG_INFINITY {
        return Err(Error::InvalidConfig("no points after the fit window".into()));
    }
    Ok(RateFit { model, c_hat, max_violation_ratio, worst_t, fit_upto })
}
