//! Wiener-filtered stochastic gradient descent (SGDF) and the tooling to test it:
//! baseline optimizers, stochastic objectives with exact gradients, curvature
//! and convergence diagnostics, and a Langevin stationary-law lab.

pub mod baselines;
pub mod diagnostics;
pub mod error;
pub mod fusion;
pub mod langevin;
pub mod objectives;
pub mod optimizer;
pub mod rng;
pub mod schedule;
pub mod sgdf;
pub mod vector;

pub use baselines::{
    adam_step, sgd_step, wiener_adam_step, Adam, AdamHyperparams, AdamState, Sgd, SgdHyperparams, WienerAdam,
    WienerAdamState,
};
pub use error::{Error, Result};
pub use fusion::{fuse, momentum_variance_factor, optimal_gain, GaussianBelief};
pub use objectives::StochasticObjective;
pub use optimizer::{Optimizer, OptimizerSpec, StepInfo};
pub use rng::{gaussian_vector, RngStream};
pub use schedule::{schedule_alpha, ScheduleSpec};
pub use sgdf::{sgdf_step, FilterState, Sgdf, SgdfHyperparams, StepOutput};
pub use vector::{elementwise, ElementwiseOp, Operand, ParamVector};
