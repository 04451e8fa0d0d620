//! SGDF: SGD whose descent direction is a Wiener-filtered gradient estimate.
//!
//! Per dimension, at step `t` (first call is `t = 1`):
//!
//! ```text
//! m   ← β1·m + (1−β1)·g
//! s   ← β2·s + (1−β2)·(g − m)²            (uses the updated m)
//! m̂   ← m / (1 − β1^t)
//! ŝ   ← (1−β1)(1−β1^{2t})·s / ((1+β1)(1−β2^t))
//! K   ← ŝ / (ŝ + ((g − m̂)² + ε))
//! ĝ   ← m̂ + K·(g − m̂)
//! θ   ← θ − α_t·ĝ
//! ```
//!
//! `ŝ` estimates the variance of the momentum term and `(g − m̂)²` the
//! variance of the fresh gradient, so `K` is the minimum-variance
//! interpolation weight of [`crate::fusion::optimal_gain`]. `ε` only appears in
//! the gain denominator, which keeps `K` in `[0, 1]` and resolves the
//! all-zero case to `K = 0`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fusion::variance_factor_from_power;
use crate::optimizer::{check_gradient, Optimizer, StepInfo};
use crate::schedule::ScheduleSpec;
use crate::vector::ParamVector;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SgdfHyperparams {
    pub alpha: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    /// Decoupled decay: `θ ← θ·(1 − α_t·λ)` before the filtered step.
    pub weight_decay: f64,
    pub schedule: ScheduleSpec,
}

impl Default for SgdfHyperparams {
    fn default() -> Self {
        Self {
            alpha: 0.3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            weight_decay: 0.0,
            schedule: ScheduleSpec::Constant,
        }
    }
}

impl SgdfHyperparams {
    pub fn validate(&self) -> Result<()> {
        check_positive("alpha", self.alpha)?;
        check_beta("beta1", self.beta1)?;
        check_beta("beta2", self.beta2)?;
        check_positive("epsilon", self.epsilon)?;
        check_non_negative("weight_decay", self.weight_decay)?;
        self.schedule.validate()
    }
}

pub(crate) fn check_positive(field: &'static str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidHyperparameter { field, reason: format!("must be > 0, got {v}") })
    }
}

pub(crate) fn check_non_negative(field: &'static str, v: f64) -> Result<()> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidHyperparameter { field, reason: format!("must be >= 0, got {v}") })
    }
}

pub(crate) fn check_beta(field: &'static str, v: f64) -> Result<()> {
    if (0.0..1.0).contains(&v) {
        Ok(())
    } else {
        Err(Error::InvalidHyperparameter { field, reason: format!("must lie in [0, 1), got {v}") })
    }
}

/// Optimizer memory for the gradient filter.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterState {
    m: ParamVector,
    s: ParamVector,
    t: u64,
    // Running products β1^t and β2^t.
    beta1_pow: f64,
    beta2_pow: f64,
}

impl FilterState {
    pub fn new(dim: usize) -> Self {
        Self {
            m: ParamVector::zeros(dim),
            s: ParamVector::zeros(dim),
            t: 0,
            beta1_pow: 1.0,
            beta2_pow: 1.0,
        }
    }

    pub fn m(&self) -> &ParamVector {
        &self.m
    }

    pub fn s(&self) -> &ParamVector {
        &self.s
    }

    pub fn t(&self) -> u64 {
        self.t
    }

    pub fn dim(&self) -> usize {
        self.m.dim()
    }

    pub(crate) fn beta2_pow(&self) -> f64 {
        self.beta2_pow
    }
}

/// Telemetry of one SGDF step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepOutput {
    pub new_params: ParamVector,
    pub filtered_grad: ParamVector,
    pub gain: ParamVector,
    pub m_hat: ParamVector,
    pub s_hat: ParamVector,
    pub alpha: f64,
}

/// Bias-corrected first moment. At `t = 1` the correction is exact
/// (`m₁ = (1−β1)·g₁`), so the gradient itself is returned instead of a
/// quotient that can be off by one ulp.
#[inline]
pub(crate) fn corrected_first_moment(m: f64, g: f64, t: u64, bias1: f64) -> f64 {
    if t == 1 {
        g
    } else {
        m / bias1
    }
}

/// Per-step buffers written by [`filter_update`].
#[derive(Debug, Clone)]
pub(crate) struct FilterTerms {
    pub m_hat: Vec<f64>,
    pub s_hat: Vec<f64>,
    pub gain: Vec<f64>,
    pub filtered: Vec<f64>,
}

impl FilterTerms {
    pub fn new(dim: usize) -> Self {
        Self {
            m_hat: vec![0.0; dim],
            s_hat: vec![0.0; dim],
            gain: vec![0.0; dim],
            filtered: vec![0.0; dim],
        }
    }
}

/// Advances the filter by one gradient and writes `m̂, ŝ, K, ĝ`.
/// `gain_override` pins `K` (used to check reductions to other optimizers).
pub(crate) fn filter_update(
    state: &mut FilterState,
    grad: &[f64],
    beta1: f64,
    beta2: f64,
    epsilon: f64,
    gain_override: Option<f64>,
    out: &mut FilterTerms,
) {
    state.t += 1;
    state.beta1_pow *= beta1;
    state.beta2_pow *= beta2;
    let t = state.t;
    let bias1 = 1.0 - state.beta1_pow;
    let bias2 = 1.0 - state.beta2_pow;
    let correction = variance_factor_from_power(beta1, state.beta1_pow * state.beta1_pow);

    let m = state.m.as_mut_slice();
    let s = state.s.as_mut_slice();
    for i in 0..grad.len() {
        let g = grad[i];
        m[i] = beta1 * m[i] + (1.0 - beta1) * g;
        let dev = g - m[i];
        s[i] = beta2 * s[i] + (1.0 - beta2) * dev * dev;

        let m_hat = corrected_first_moment(m[i], g, t, bias1);
        let s_hat = correction * s[i] / bias2;
        let innovation = g - m_hat;
        let gain = match gain_override {
            Some(k) => k,
            None => s_hat / (s_hat + (innovation * innovation + epsilon)),
        };
        let raw = m_hat + gain * innovation;
        // ĝ is a convex combination of m̂ and g; clamp away rounding spill.
        let filtered = raw.clamp(m_hat.min(g), m_hat.max(g));

        out.m_hat[i] = m_hat;
        out.s_hat[i] = s_hat;
        out.gain[i] = gain;
        out.filtered[i] = filtered;
    }
}

/// One functional SGDF step: returns the telemetry and the successor state,
/// leaving the inputs untouched.
pub fn sgdf_step(
    params: &ParamVector,
    grad: &ParamVector,
    state: &FilterState,
    hp: &SgdfHyperparams,
) -> Result<(StepOutput, FilterState)> {
    hp.validate()?;
    params.check_dim(grad)?;
    params.check_dim(&state.m)?;
    check_gradient(grad)?;

    let mut next = state.clone();
    let mut terms = FilterTerms::new(params.dim());
    filter_update(&mut next, grad.as_slice(), hp.beta1, hp.beta2, hp.epsilon, None, &mut terms);
    let alpha = hp.schedule.alpha(hp.alpha, next.t)?;

    let mut new_params = params.clone();
    apply_update(&mut new_params, &terms.filtered, alpha, hp.weight_decay);
    new_params.ensure_finite("sgdf_step")?;
    next.m.ensure_finite("sgdf_step")?;
    next.s.ensure_finite("sgdf_step")?;

    let output = StepOutput {
        new_params,
        filtered_grad: ParamVector::new(terms.filtered)?,
        gain: ParamVector::new(terms.gain)?,
        m_hat: ParamVector::new(terms.m_hat)?,
        s_hat: ParamVector::new(terms.s_hat)?,
        alpha,
    };
    Ok((output, next))
}

pub(crate) fn apply_update(params: &mut ParamVector, direction: &[f64], alpha: f64, weight_decay: f64) {
    let theta = params.as_mut_slice();
    let shrink = 1.0 - alpha * weight_decay;
    for (p, d) in theta.iter_mut().zip(direction) {
        if weight_decay != 0.0 {
            *p *= shrink;
        }
        *p -= alpha * d;
    }
}

/// Stateful SGDF optimizer.
#[derive(Debug, Clone)]
pub struct Sgdf {
    hp: SgdfHyperparams,
    state: FilterState,
    terms: FilterTerms,
}

impl Sgdf {
    pub fn new(dim: usize, hp: SgdfHyperparams) -> Result<Self> {
        hp.validate()?;
        Ok(Self { hp, state: FilterState::new(dim), terms: FilterTerms::new(dim) })
    }

    pub fn state(&self) -> &FilterState {
        &self.state
    }

    pub fn hyperparams(&self) -> &SgdfHyperparams {
        &self.hp
    }
}

impl Optimizer for Sgdf {
    fn name(&self) -> &'static str {
        "sgdf"
    }

    fn steps_taken(&self) -> u64 {
        self.state.t
    }

    fn step(&mut self, params: &mut ParamVector, grad: &ParamVector) -> Result<StepInfo> {
        params.check_dim(grad)?;
        params.check_dim(&self.state.m)?;
        check_gradient(grad)?;
        let hp = &self.hp;
        let alpha = hp.schedule.alpha(hp.alpha, self.state.t + 1)?;
        filter_update(&mut self.state, grad.as_slice(), hp.beta1, hp.beta2, hp.epsilon, None, &mut self.terms);
        apply_update(params, &self.terms.filtered, alpha, hp.weight_decay);
        params.ensure_finite("sgdf")?;
        let mean_gain = self.terms.gain.iter().sum::<f64>() / self.terms.gain.len() as f64;
        Ok(StepInfo {
            t: self.state.t,
            alpha,
            mean_gain: Some(mean_gain),
            estimate: Some(ParamVector::new(self.terms.filtered.clone())?),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fusion::optimal_gain;
    use proptest::prelude::*;

    fn pv(data: &[f64]) -> ParamVector {
        ParamVector::new(data.to_vec()).unwrap()
    }

    fn hp_no_eps() -> SgdfHyperparams {
        // ε must be > 0 for validation; 1e-300 is below every quantity here.
        SgdfHyperparams { alpha: 0.1, epsilon: 1e-300, ..Default::default() }
    }

    #[test]
    fn first_step_is_plain_sgd() {
        let hp = SgdfHyperparams { alpha: 0.05, beta1: 0.7, beta2: 0.9, ..Default::default() };
        let params = pv(&[1.0, -2.0, 3.5]);
        let grad = pv(&[0.3, -7.25, 1e-3]);
        let (out, state) = sgdf_step(&params, &grad, &FilterState::new(3), &hp).unwrap();
        assert_eq!(out.filtered_grad, grad);
        for i in 0..3 {
            assert_eq!(out.new_params[i], params[i] - 0.05 * grad[i]);
        }
        assert_eq!(state.t(), 1);
    }

    #[test]
    fn scalar_first_step_trace() {
        let (out, state) =
            sgdf_step(&pv(&[0.0]), &pv(&[1.0]), &FilterState::new(1), &hp_no_eps()).unwrap();
        assert!((state.m()[0] - 0.1).abs() < 1e-15);
        assert!((state.s()[0] - 0.00081).abs() < 1e-17);
        assert_eq!(out.m_hat[0], 1.0);
        assert!((out.s_hat[0] - 0.0081).abs() < 1e-15);
        assert_eq!(out.gain[0], 1.0);
        assert_eq!(out.filtered_grad[0], 1.0);
    }

    #[test]
    fn zero_gradients_are_a_fixed_point() {
        let hp = SgdfHyperparams::default();
        let params = pv(&[1.0, -1.0]);
        let mut state = FilterState::new(2);
        let mut current = params.clone();
        for _ in 0..20 {
            let (out, next) = sgdf_step(&current, &ParamVector::zeros(2), &state, &hp).unwrap();
            assert_eq!(out.gain, ParamVector::zeros(2));
            assert_eq!(out.filtered_grad, ParamVector::zeros(2));
            current = out.new_params;
            state = next;
        }
        assert_eq!(current, params);
        assert_eq!(state.m(), &ParamVector::zeros(2));
        assert_eq!(state.s(), &ParamVector::zeros(2));
    }

    #[test]
    fn errors() {
        let hp = SgdfHyperparams::default();
        let err = sgdf_step(&pv(&[0.0]), &pv(&[0.0, 1.0]), &FilterState::new(1), &hp).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { .. }));
        let bad = ParamVector::zeros(1);
        let state = FilterState::new(2);
        assert!(matches!(sgdf_step(&bad, &bad, &state, &hp), Err(Error::DimensionMismatch { .. })));
        let bad_hp = SgdfHyperparams { beta1: 1.0, ..hp };
        assert!(matches!(
            sgdf_step(&bad, &bad, &FilterState::new(1), &bad_hp),
            Err(Error::InvalidHyperparameter { field: "beta1", .. })
        ));
    }

    #[test]
    fn weight_decay_is_decoupled() {
        let hp = SgdfHyperparams { alpha: 0.1, weight_decay: 0.5, ..Default::default() };
        let (out, _) = sgdf_step(&pv(&[2.0]), &pv(&[1.0]), &FilterState::new(1), &hp).unwrap();
        assert_eq!(out.new_params[0], 2.0 * (1.0 - 0.1 * 0.5) - 0.1 * 1.0);
    }

    #[test]
    fn schedule_uses_incremented_counter() {
        let hp = SgdfHyperparams { alpha: 1.0, schedule: ScheduleSpec::InvSqrt, ..Default::default() };
        let (o1, s1) = sgdf_step(&pv(&[0.0]), &pv(&[1.0]), &FilterState::new(1), &hp).unwrap();
        assert_eq!(o1.alpha, 1.0);
        let (o2, _) = sgdf_step(&o1.new_params, &pv(&[1.0]), &s1, &hp).unwrap();
        assert_eq!(o2.alpha, 1.0 / 2f64.sqrt());
    }

    #[test]
    fn stateful_matches_functional() {
        let hp = SgdfHyperparams { alpha: 0.2, schedule: ScheduleSpec::InvSqrt, ..Default::default() };
        let grads = [[1.0, -0.5], [0.25, 0.75], [-2.0, 0.1], [0.3, 0.3]];
        let mut opt = Sgdf::new(2, hp.clone()).unwrap();
        let mut p_state = pv(&[0.5, 0.5]);
        let mut p_fun = p_state.clone();
        let mut state = FilterState::new(2);
        for g in grads {
            let g = pv(&g);
            let info = opt.step(&mut p_state, &g).unwrap();
            let (out, next) = sgdf_step(&p_fun, &g, &state, &hp).unwrap();
            assert_eq!(info.estimate.as_ref().unwrap(), &out.filtered_grad);
            p_fun = out.new_params;
            state = next;
            assert_eq!(p_state, p_fun);
        }
        assert_eq!(opt.state(), &state);
    }

    fn arb_case() -> impl Strategy<Value = (Vec<(f64, f64, f64)>, u64, SgdfHyperparams)> {
        (
            prop::collection::vec((-1e3..1e3f64, 0.0..1e3f64, -1e3..1e3f64), 1..8),
            0u64..50,
            (0.0..0.999f64, 0.0..0.9999f64, 1e-12..1e-2f64),
        )
            .prop_map(|(entries, t, (b1, b2, eps))| {
                let hp = SgdfHyperparams { alpha: 0.1, beta1: b1, beta2: b2, epsilon: eps, ..Default::default() };
                (entries, t, hp)
            })
    }

    fn state_from(entries: &[(f64, f64, f64)], t: u64, hp: &SgdfHyperparams) -> FilterState {
        let m = ParamVector::new(entries.iter().map(|e| e.0).collect()).unwrap();
        let s = ParamVector::new(entries.iter().map(|e| e.1).collect()).unwrap();
        FilterState {
            m,
            s,
            t,
            beta1_pow: hp.beta1.powi(t as i32),
            beta2_pow: hp.beta2.powi(t as i32),
        }
    }

    proptest! {
        #[test]
        fn gain_bounded_and_estimate_between(case in arb_case()) {
            let (entries, t, hp) = case;
            let state = state_from(&entries, t, &hp);
            let grad = ParamVector::new(entries.iter().map(|e| e.2).collect()).unwrap();
            let params = ParamVector::zeros(grad.dim());
            let (out, next) = sgdf_step(&params, &grad, &state, &hp).unwrap();
            prop_assert_eq!(next.t(), t + 1);
            for i in 0..grad.dim() {
                let k = out.gain[i];
                prop_assert!((0.0..=1.0).contains(&k));
                let (lo, hi) = (out.m_hat[i].min(grad[i]), out.m_hat[i].max(grad[i]));
                prop_assert!(out.filtered_grad[i] >= lo && out.filtered_grad[i] <= hi);
                prop_assert!(next.s()[i] >= 0.0);
            }
        }

        #[test]
        fn gain_equals_fusion_gain(case in arb_case()) {
            let (entries, t, hp) = case;
            let state = state_from(&entries, t, &hp);
            let grad = ParamVector::new(entries.iter().map(|e| e.2).collect()).unwrap();
            let (out, _) = sgdf_step(&ParamVector::zeros(grad.dim()), &grad, &state, &hp).unwrap();
            for i in 0..grad.dim() {
                let innovation = grad[i] - out.m_hat[i];
                let k = optimal_gain(out.s_hat[i], innovation * innovation + hp.epsilon).unwrap();
                prop_assert_eq!(k, out.gain[i]);
            }
        }
    }
}
