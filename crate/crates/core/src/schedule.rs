//! Step-size schedules `α_t`, indexed from `t = 1`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ScheduleSpec {
    #[default]
    Constant,
    /// `α / √t`.
    InvSqrt,
    /// Multiply by `factor` once for every milestone already passed
    /// (`t > milestone`).
    StepDecay { factor: f64, milestones: Vec<u64> },
    /// Half-cosine from `α` at `t = 1` towards 0 at `t = total_steps + 1`.
    Cosine { total_steps: u64 },
}

impl ScheduleSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            ScheduleSpec::Constant | ScheduleSpec::InvSqrt => Ok(()),
            ScheduleSpec::StepDecay { factor, .. } => {
                if !(*factor > 0.0 && *factor <= 1.0) {
                    return Err(Error::InvalidSchedule(format!(
                        "step_decay factor must lie in (0, 1], got {factor}"
                    )));
                }
                Ok(())
            }
            ScheduleSpec::Cosine { total_steps } => {
                if *total_steps == 0 {
                    return Err(Error::InvalidSchedule("cosine total_steps must be >= 1".into()));
                }
                Ok(())
            }
        }
    }

    pub fn alpha(&self, base_alpha: f64, t: u64) -> Result<f64> {
        schedule_alpha(self, base_alpha, t)
    }
}

pub fn schedule_alpha(spec: &ScheduleSpec, base_alpha: f64, t: u64) -> Result<f64> {
    if t == 0 {
        return Err(Error::InvalidStepCount);
    }
    spec.validate()?;
    let alpha = match spec {
        ScheduleSpec::Constant => base_alpha,
        ScheduleSpec::InvSqrt => base_alpha / (t as f64).sqrt(),
        ScheduleSpec::StepDecay { factor, milestones } => {
            let passed = milestones.iter().filter(|&&m| t > m).count();
            base_alpha * factor.powi(passed as i32)
        }
        ScheduleSpec::Cosine { total_steps } => {
            if t > *total_steps {
                return Err(Error::InvalidSchedule(format!(
                    "step {t} is beyond the cosine horizon {total_steps}"
                )));
            }
            let progress = (t - 1) as f64 / *total_steps as f64;
            0.5 * base_alpha * (1.0 + (std::f64::consts::PI * progress).cos())
        }
    };
    Ok(alpha)
}
