//! Reference optimizers: SGD (with optional heavy-ball momentum), Adam, and
//! Wiener-Adam, which feeds the SGDF filtered gradient into Adam's numerator.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::optimizer::{check_gradient, Optimizer, StepInfo};
use crate::schedule::ScheduleSpec;
use crate::sgdf::{
    apply_update, check_beta, check_non_negative, check_positive, corrected_first_moment,
    filter_update, FilterState, FilterTerms,
};
use crate::vector::ParamVector;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SgdHyperparams {
    pub alpha: f64,
    /// Heavy-ball coefficient: `v ← β·v + α_t·g`, `θ ← θ − v`.
    pub momentum: f64,
    pub weight_decay: f64,
    pub schedule: ScheduleSpec,
}

impl Default for SgdHyperparams {
    fn default() -> Self {
        Self { alpha: 0.1, momentum: 0.0, weight_decay: 0.0, schedule: ScheduleSpec::Constant }
    }
}

impl SgdHyperparams {
    pub fn validate(&self) -> Result<()> {
        check_positive("alpha", self.alpha)?;
        check_beta("momentum", self.momentum)?;
        check_non_negative("weight_decay", self.weight_decay)?;
        self.schedule.validate()
    }
}

#[derive(Debug, Clone)]
pub struct Sgd {
    hp: SgdHyperparams,
    velocity: Vec<f64>,
    t: u64,
}

impl Sgd {
    pub fn new(dim: usize, hp: SgdHyperparams) -> Result<Self> {
        hp.validate()?;
        Ok(Self { hp, velocity: vec![0.0; dim], t: 0 })
    }
}

/// Stateless form of one SGD step; `velocity` is updated in place.
pub fn sgd_step(
    params: &ParamVector,
    grad: &ParamVector,
    velocity: &mut [f64],
    t: u64,
    hp: &SgdHyperparams,
) -> Result<ParamVector> {
    hp.validate()?;
    params.check_dim(grad)?;
    check_gradient(grad)?;
    if velocity.len() != params.dim() {
        return Err(crate::Error::DimensionMismatch { expected: params.dim(), actual: velocity.len() });
    }
    let alpha = hp.schedule.alpha(hp.alpha, t)?;
    let mut out = params.clone();
    sgd_apply(&mut out, grad, velocity, alpha, hp);
    out.ensure_finite("sgd_step")?;
    Ok(out)
}

fn sgd_apply(params: &mut ParamVector, grad: &ParamVector, velocity: &mut [f64], alpha: f64, hp: &SgdHyperparams) {
    for (v, g) in velocity.iter_mut().zip(grad.iter()) {
        *v = hp.momentum * *v + alpha * g;
    }
    // The velocity already carries α_t, so apply it with unit step.
    apply_update(params, velocity, 1.0, alpha * hp.weight_decay);
}

impl Optimizer for Sgd {
    fn name(&self) -> &'static str {
        if self.hp.momentum > 0.0 {
            "sgdm"
        } else {
            "sgd"
        }
    }

    fn steps_taken(&self) -> u64 {
        self.t
    }

    fn step(&mut self, params: &mut ParamVector, grad: &ParamVector) -> Result<StepInfo> {
        params.check_dim(grad)?;
        check_gradient(grad)?;
        if self.velocity.len() != params.dim() {
            return Err(crate::Error::DimensionMismatch {
                expected: self.velocity.len(),
                actual: params.dim(),
            });
        }
        let alpha = self.hp.schedule.alpha(self.hp.alpha, self.t + 1)?;
        self.t += 1;
        sgd_apply(params, grad, &mut self.velocity, alpha, &self.hp);
        params.ensure_finite("sgd")?;
        let estimate = (self.hp.momentum == 0.0).then(|| grad.clone());
        Ok(StepInfo { t: self.t, alpha, mean_gain: None, estimate })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AdamHyperparams {
    pub alpha: f64,
    pub beta1: f64,
    /// Second-moment decay. Wiener-Adam also uses it for the innovation EMA.
    pub beta2: f64,
    pub epsilon: f64,
    /// Decoupled (AdamW-style) decay.
    pub weight_decay: f64,
    pub schedule: ScheduleSpec,
}

impl Default for AdamHyperparams {
    fn default() -> Self {
        Self {
            alpha: 0.001,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            weight_decay: 0.0,
            schedule: ScheduleSpec::Constant,
        }
    }
}

impl AdamHyperparams {
    pub fn validate(&self) -> Result<()> {
        check_positive("alpha", self.alpha)?;
        check_beta("beta1", self.beta1)?;
        check_beta("beta2", self.beta2)?;
        check_positive("epsilon", self.epsilon)?;
        check_non_negative("weight_decay", self.weight_decay)?;
        self.schedule.validate()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    m: ParamVector,
    v: ParamVector,
    t: u64,
    beta1_pow: f64,
    beta2_pow: f64,
}

impl AdamState {
    pub fn new(dim: usize) -> Self {
        Self {
            m: ParamVector::zeros(dim),
            v: ParamVector::zeros(dim),
            t: 0,
            beta1_pow: 1.0,
            beta2_pow: 1.0,
        }
    }

    pub fn m(&self) -> &ParamVector {
        &self.m
    }

    pub fn v(&self) -> &ParamVector {
        &self.v
    }

    pub fn t(&self) -> u64 {
        self.t
    }
}

fn adam_direction(numerator: &[f64], v: &[f64], bias2: f64, epsilon: f64, out: &mut [f64]) {
    for i in 0..numerator.len() {
        let v_hat = v[i] / bias2;
        out[i] = numerator[i] / (v_hat.sqrt() + epsilon);
    }
}

fn adam_update(state: &mut AdamState, grad: &[f64], hp: &AdamHyperparams, m_hat: &mut [f64], dir: &mut [f64]) {
    state.t += 1;
    state.beta1_pow *= hp.beta1;
    state.beta2_pow *= hp.beta2;
    let bias1 = 1.0 - state.beta1_pow;
    let bias2 = 1.0 - state.beta2_pow;
    let m = state.m.as_mut_slice();
    let v = state.v.as_mut_slice();
    for i in 0..grad.len() {
        let g = grad[i];
        m[i] = hp.beta1 * m[i] + (1.0 - hp.beta1) * g;
        v[i] = hp.beta2 * v[i] + (1.0 - hp.beta2) * g * g;
        m_hat[i] = corrected_first_moment(m[i], g, state.t, bias1);
    }
    adam_direction(m_hat, v, bias2, hp.epsilon, dir);
}

/// One functional Adam step.
pub fn adam_step(
    params: &ParamVector,
    grad: &ParamVector,
    state: &AdamState,
    hp: &AdamHyperparams,
) -> Result<(ParamVector, AdamState)> {
    hp.validate()?;
    params.check_dim(grad)?;
    params.check_dim(&state.m)?;
    check_gradient(grad)?;
    let mut opt = Adam::new(params.dim(), hp.clone())?;
    opt.state = state.clone();
    let mut out = params.clone();
    opt.step(&mut out, grad)?;
    Ok((out, opt.state))
}

#[derive(Debug, Clone)]
pub struct Adam {
    hp: AdamHyperparams,
    state: AdamState,
    m_hat: Vec<f64>,
    dir: Vec<f64>,
}

impl Adam {
    pub fn new(dim: usize, hp: AdamHyperparams) -> Result<Self> {
        hp.validate()?;
        Ok(Self { hp, state: AdamState::new(dim), m_hat: vec![0.0; dim], dir: vec![0.0; dim] })
    }

    pub fn state(&self) -> &AdamState {
        &self.state
    }
}

impl Optimizer for Adam {
    fn name(&self) -> &'static str {
        "adam"
    }

    fn steps_taken(&self) -> u64 {
        self.state.t
    }

    fn step(&mut self, params: &mut ParamVector, grad: &ParamVector) -> Result<StepInfo> {
        params.check_dim(grad)?;
        params.check_dim(&self.state.m)?;
        check_gradient(grad)?;
        let alpha = self.hp.schedule.alpha(self.hp.alpha, self.state.t + 1)?;
        adam_update(&mut self.state, grad.as_slice(), &self.hp, &mut self.m_hat, &mut self.dir);
        apply_update(params, &self.dir, alpha, self.hp.weight_decay);
        params.ensure_finite("adam")?;
        Ok(StepInfo {
            t: self.state.t,
            alpha,
            mean_gain: None,
            estimate: Some(ParamVector::new(self.m_hat.clone())?),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WienerAdamState {
    filter: FilterState,
    v: ParamVector,
}

impl WienerAdamState {
    pub fn new(dim: usize) -> Self {
        Self { filter: FilterState::new(dim), v: ParamVector::zeros(dim) }
    }

    pub fn filter(&self) -> &FilterState {
        &self.filter
    }

    pub fn v(&self) -> &ParamVector {
        &self.v
    }

    pub fn t(&self) -> u64 {
        self.filter.t()
    }
}

/// Adam with its first moment replaced by the Wiener-filtered gradient ĝ.
/// The second moment tracks raw `g²`; one `β2` drives both `v` and `s`.
#[derive(Debug, Clone)]
pub struct WienerAdam {
    hp: AdamHyperparams,
    state: WienerAdamState,
    terms: FilterTerms,
    dir: Vec<f64>,
    gain_override: Option<f64>,
}

impl WienerAdam {
    pub fn new(dim: usize, hp: AdamHyperparams) -> Result<Self> {
        hp.validate()?;
        Ok(Self {
            hp,
            state: WienerAdamState::new(dim),
            terms: FilterTerms::new(dim),
            dir: vec![0.0; dim],
            gain_override: None,
        })
    }

    /// Pins the filter gain `K` to a constant. `Some(0.0)` reduces the update
    /// to Adam exactly; `Some(1.0)` uses the raw gradient as numerator.
    pub fn with_gain_override(mut self, gain: Option<f64>) -> Self {
        self.gain_override = gain;
        self
    }

    pub fn state(&self) -> &WienerAdamState {
        &self.state
    }
}

impl Optimizer for WienerAdam {
    fn name(&self) -> &'static str {
        "wiener_adam"
    }

    fn steps_taken(&self) -> u64 {
        self.state.t()
    }

    fn step(&mut self, params: &mut ParamVector, grad: &ParamVector) -> Result<StepInfo> {
        params.check_dim(grad)?;
        params.check_dim(&self.state.v)?;
        check_gradient(grad)?;
        let hp = &self.hp;
        let alpha = hp.schedule.alpha(hp.alpha, self.state.t() + 1)?;
        filter_update(
            &mut self.state.filter,
            grad.as_slice(),
            hp.beta1,
            hp.beta2,
            hp.epsilon,
            self.gain_override,
            &mut self.terms,
        );
        let v = self.state.v.as_mut_slice();
        for (vi, g) in v.iter_mut().zip(grad.iter()) {
            *vi = hp.beta2 * *vi + (1.0 - hp.beta2) * g * g;
        }
        let bias2 = 1.0 - self.state.filter.beta2_pow();
        adam_direction(&self.terms.filtered, self.state.v.as_slice(), bias2, hp.epsilon, &mut self.dir);
        apply_update(params, &self.dir, alpha, hp.weight_decay);
        params.ensure_finite("wiener_adam")?;
        let mean_gain = self.terms.gain.iter().sum::<f64>() / self.terms.gain.len() as f64;
        Ok(StepInfo {
            t: self.state.t(),
            alpha,
            mean_gain: Some(mean_gain),
            estimate: Some(ParamVector::new(self.terms.filtered.clone())?),
        })
    }
}

/// One functional Wiener-Adam step.
pub fn wiener_adam_step(
    params: &ParamVector,
    grad: &ParamVector,
    state: &WienerAdamState,
    hp: &AdamHyperparams,
) -> Result<(ParamVector, WienerAdamState)> {
    hp.validate()?;
    params.check_dim(grad)?;
    let mut opt = WienerAdam::new(params.dim(), hp.clone())?;
    params.check_dim(&state.v)?;
    opt.state = state.clone();
    let mut out = params.clone();
    opt.step(&mut out, grad)?;
    Ok((out, opt.state))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{gaussian_vector, RngStream};

    fn pv(data: &[f64]) -> ParamVector {
        ParamVector::new(data.to_vec()).unwrap()
    }

    #[test]
    fn vanilla_sgd_step() {
        let hp = SgdHyperparams { alpha: 0.1, ..Default::default() };
        let mut v = vec![0.0];
        assert_eq!(sgd_step(&pv(&[1.0]), &pv(&[1.0]), &mut v, 1, &hp).unwrap(), pv(&[0.9]));
    }

    #[test]
    fn momentum_unrolls() {
        let hp = SgdHyperparams { alpha: 1.0, momentum: 0.9, ..Default::default() };
        let mut opt = Sgd::new(1, hp).unwrap();
        let mut theta = pv(&[0.0]);
        opt.step(&mut theta, &pv(&[1.0])).unwrap();
        assert_eq!(opt.velocity[0], 1.0);
        opt.step(&mut theta, &pv(&[1.0])).unwrap();
        assert!((opt.velocity[0] - 1.9).abs() < 1e-15);
        assert!((theta[0] + 2.9).abs() < 1e-15);
    }

    #[test]
    fn zero_momentum_equals_vanilla_bitwise() {
        let plain = SgdHyperparams { alpha: 0.07, ..Default::default() };
        let mut a = Sgd::new(4, plain.clone()).unwrap();
        let mut rng = RngStream::new(3, 0);
        let mut ta = gaussian_vector(&mut rng, 4, 0.0, 1.0).unwrap();
        let mut tb = ta.clone();
        for _ in 0..100 {
            let g = gaussian_vector(&mut rng, 4, 0.0, 1.0).unwrap();
            a.step(&mut ta, &g).unwrap();
            for i in 0..4 {
                tb.as_mut_slice()[i] -= 0.07 * g[i];
            }
        }
        assert_eq!(ta, tb);
    }

    #[test]
    fn zero_gradients_leave_params_fixed() {
        let theta0 = pv(&[1.5, -0.5]);
        let zero = ParamVector::zeros(2);
        let opts: Vec<Box<dyn Optimizer>> = vec![
            Box::new(Sgd::new(2, SgdHyperparams::default()).unwrap()),
            Box::new(Sgd::new(2, SgdHyperparams { momentum: 0.9, ..Default::default() }).unwrap()),
            Box::new(Adam::new(2, AdamHyperparams::default()).unwrap()),
            Box::new(WienerAdam::new(2, AdamHyperparams::default()).unwrap()),
        ];
        for mut opt in opts {
            let mut theta = theta0.clone();
            for _ in 0..50 {
                opt.step(&mut theta, &zero).unwrap();
            }
            assert_eq!(theta, theta0, "{}", opt.name());
        }
    }

    #[test]
    fn adam_first_step_is_sign_like() {
        let hp = AdamHyperparams { alpha: 0.01, epsilon: 1e-12, ..Default::default() };
        let g = pv(&[3.0, -0.002, 50.0]);
        let (theta, state) = adam_step(&ParamVector::zeros(3), &g, &AdamState::new(3), &hp).unwrap();
        assert_eq!(state.t(), 1);
        for i in 0..3 {
            let update = -theta[i];
            assert!((update - 0.01 * g[i].signum()).abs() <= 0.01 * 1e-8, "{update}");
            assert!(update.abs() <= 0.01 * (1.0 + 1e-9));
        }
    }

    #[test]
    fn adam_two_step_trace() {
        // Hand recurrence: m₂ = 0.19, v₂ = 0.001999, m̂₂ = 1, v̂₂ = 1.
        let hp = AdamHyperparams::default();
        let (t1, s1) = adam_step(&pv(&[0.0]), &pv(&[1.0]), &AdamState::new(1), &hp).unwrap();
        let (t2, s2) = adam_step(&t1, &pv(&[1.0]), &s1, &hp).unwrap();
        assert!((s2.m()[0] - 0.19).abs() < 1e-15);
        assert!((s2.v()[0] - 0.001999).abs() < 1e-15);
        let step = 0.001 / (1.0 + 1e-8);
        assert!((t2[0] + 2.0 * step).abs() < 1e-15);
    }

    #[test]
    fn wiener_adam_first_step_equals_adam() {
        let hp = AdamHyperparams { alpha: 0.003, ..Default::default() };
        let g = pv(&[0.37, -1.9, 4e-4]);
        let theta = pv(&[0.1, 0.2, 0.3]);
        let (a, _) = adam_step(&theta, &g, &AdamState::new(3), &hp).unwrap();
        let (w, _) = wiener_adam_step(&theta, &g, &WienerAdamState::new(3), &hp).unwrap();
        assert_eq!(a, w);
    }

    #[test]
    fn wiener_adam_gain_one_uses_raw_gradient() {
        let hp = AdamHyperparams { alpha: 0.01, ..Default::default() };
        let mut opt = WienerAdam::new(1, hp).unwrap().with_gain_override(Some(1.0));
        let mut theta = pv(&[0.0]);
        opt.step(&mut theta, &pv(&[2.0])).unwrap();
        let info = opt.step(&mut theta, &pv(&[-1.0])).unwrap();
        assert_eq!(info.estimate.unwrap()[0], -1.0);
    }

    #[test]
    fn wiener_adam_gain_zero_is_adam() {
        let hp = AdamHyperparams { alpha: 0.01, ..Default::default() };
        let mut adam = Adam::new(3, hp.clone()).unwrap();
        let mut wadam = WienerAdam::new(3, hp).unwrap().with_gain_override(Some(0.0));
        let mut rng = RngStream::new(11, 0);
        let mut ta = gaussian_vector(&mut rng, 3, 0.0, 1.0).unwrap();
        let mut tw = ta.clone();
        for _ in 0..200 {
            let g = gaussian_vector(&mut rng, 3, 0.5, 1.0).unwrap();
            adam.step(&mut ta, &g).unwrap();
            wadam.step(&mut tw, &g).unwrap();
            assert_eq!(ta, tw);
        }
    }
}
