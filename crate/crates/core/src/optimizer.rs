//! The shared optimizer interface and a serializable optimizer description.

use serde::{Deserialize, Serialize};

use crate::baselines::{Adam, AdamHyperparams, Sgd, SgdHyperparams, WienerAdam};
use crate::error::{Error, Result};
use crate::schedule::ScheduleSpec;
use crate::sgdf::{Sgdf, SgdfHyperparams};
use crate::vector::ParamVector;

/// What an optimizer reports after updating the parameters in place.
#[derive(Debug, Clone, PartialEq)]
pub struct StepInfo {
    /// Step counter after the update (first step is 1).
    pub t: u64,
    pub alpha: f64,
    /// Mean of the per-dimension gains, for filter-based optimizers.
    pub mean_gain: Option<f64>,
    /// The gradient estimate used as the descent direction, when the optimizer
    /// has one (ĝ for SGDF, m̂ for Adam, g for vanilla SGD).
    pub estimate: Option<ParamVector>,
}

pub trait Optimizer: Send {
    fn name(&self) -> &'static str;

    fn steps_taken(&self) -> u64;

    /// Updates `params` in place from `grad`.
    fn step(&mut self, params: &mut ParamVector, grad: &ParamVector) -> Result<StepInfo>;
}

pub(crate) fn check_gradient(grad: &ParamVector) -> Result<()> {
    // ParamVector entries are finite by construction; the check guards
    // vectors assembled inside the crate.
    match grad.iter().position(|g| !g.is_finite()) {
        Some(index) => Err(Error::NonFiniteGradient { index, value: grad[index] }),
        None => Ok(()),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum OptimizerSpec {
    Sgdf(SgdfHyperparams),
    Sgd(SgdHyperparams),
    Adam(AdamHyperparams),
    WienerAdam(AdamHyperparams),
}

impl OptimizerSpec {
    pub fn label(&self) -> &'static str {
        match self {
            OptimizerSpec::Sgdf(_) => "sgdf",
            OptimizerSpec::Sgd(hp) if hp.momentum > 0.0 => "sgdm",
            OptimizerSpec::Sgd(_) => "sgd",
            OptimizerSpec::Adam(_) => "adam",
            OptimizerSpec::WienerAdam(_) => "wiener_adam",
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            OptimizerSpec::Sgdf(hp) => hp.validate(),
            OptimizerSpec::Sgd(hp) => hp.validate(),
            OptimizerSpec::Adam(hp) | OptimizerSpec::WienerAdam(hp) => hp.validate(),
        }
    }

    pub fn alpha(&self) -> f64 {
        match self {
            OptimizerSpec::Sgdf(hp) => hp.alpha,
            OptimizerSpec::Sgd(hp) => hp.alpha,
            OptimizerSpec::Adam(hp) | OptimizerSpec::WienerAdam(hp) => hp.alpha,
        }
    }

    pub fn with_alpha(&self, alpha: f64) -> Self {
        let mut out = self.clone();
        match &mut out {
            OptimizerSpec::Sgdf(hp) => hp.alpha = alpha,
            OptimizerSpec::Sgd(hp) => hp.alpha = alpha,
            OptimizerSpec::Adam(hp) | OptimizerSpec::WienerAdam(hp) => hp.alpha = alpha,
        }
        out
    }

    pub fn schedule(&self) -> &ScheduleSpec {
        match self {
            OptimizerSpec::Sgdf(hp) => &hp.schedule,
            OptimizerSpec::Sgd(hp) => &hp.schedule,
            OptimizerSpec::Adam(hp) | OptimizerSpec::WienerAdam(hp) => &hp.schedule,
        }
    }

    pub fn build(&self, dim: usize) -> Result<Box<dyn Optimizer>> {
        Ok(match self {
            OptimizerSpec::Sgdf(hp) => Box::new(Sgdf::new(dim, hp.clone())?),
            OptimizerSpec::Sgd(hp) => Box::new(Sgd::new(dim, hp.clone())?),
            OptimizerSpec::Adam(hp) => Box::new(Adam::new(dim, hp.clone())?),
            OptimizerSpec::WienerAdam(hp) => Box::new(WienerAdam::new(dim, hp.clone())?),
        })
    }
}
