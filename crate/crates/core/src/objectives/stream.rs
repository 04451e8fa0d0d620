use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::RngStream;
use crate::vector::ParamVector;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ConvexStreamKind {
    /// `c_t = μ + jitter·u_t` with `μ ~ U[−1, 1]^dim` drawn once and
    /// `u_t ~ U[−1, 1]^dim` drawn every round.
    ShiftingQuadratics { dim: usize, jitter: f64 },
}

/// Rounds `f_t(θ) = ½‖θ − c_t‖²` over a fixed horizon.
///
/// Iterates are meant to be projected onto the ball of radius `radius`, which
/// makes `‖∇f_t(θ)‖ ≤ radius + max_t ‖c_t‖` the declared gradient bound.
#[derive(Debug, Clone)]
pub struct OnlineConvexStream {
    centers: Vec<ParamVector>,
    radius: f64,
    comparator: ParamVector,
}

pub fn convex_stream(kind: &ConvexStreamKind, horizon: usize, radius: f64, rng: &mut RngStream) -> Result<OnlineConvexStream> {
    if horizon == 0 {
        return Err(Error::InvalidConfig("stream horizon must be >= 1".into()));
    }
    match *kind {
        ConvexStreamKind::ShiftingQuadratics { dim, jitter } => {
            if dim == 0 {
                return Err(Error::InvalidConfig("stream dim must be >= 1".into()));
            }
            if !(jitter >= 0.0 && jitter.is_finite()) {
                return Err(Error::InvalidConfig(format!("stream jitter must be >= 0, got {jitter}")));
            }
            let mu: Vec<f64> = (0..dim).map(|_| rng.uniform_range(-1.0, 1.0)).collect();
            let centers = (0..horizon)
                .map(|_| ParamVector::new(mu.iter().map(|m| m + jitter * rng.uniform_range(-1.0, 1.0)).collect()))
                .collect::<Result<Vec<_>>>()?;
            OnlineConvexStream::from_centers(centers, radius)
        }
    }
}

impl OnlineConvexStream {
    pub fn from_centers(centers: Vec<ParamVector>, radius: f64) -> Result<Self> {
        let first = centers.first().ok_or_else(|| Error::InvalidConfig("stream needs at least one round".into()))?;
        let dim = first.dim();
        if let Some(bad) = centers.iter().find(|c| c.dim() != dim) {
            return Err(Error::DimensionMismatch { expected: dim, actual: bad.dim() });
        }
        if !(radius > 0.0) {
            return Err(Error::InvalidConfig(format!("projection radius must be > 0, got {radius}")));
        }
        let n = centers.len() as f64;
        let mut mean = vec![0.0; dim];
        for c in &centers {
            for (m, x) in mean.iter_mut().zip(c.iter()) {
                *m += x;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        Ok(Self { centers, radius, comparator: ParamVector::new(mean)? })
    }

    pub fn dim(&self) -> usize {
        self.comparator.dim()
    }

    pub fn horizon(&self) -> usize {
        self.centers.len()
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// Round `t` counts from 1.
    pub fn center(&self, t: usize) -> &ParamVector {
        &self.centers[t - 1]
    }

    pub fn loss(&self, t: usize, theta: &ParamVector) -> Result<f64> {
        Ok(0.5 * theta.sub(self.center(t))?.norm_sq())
    }

    pub fn grad(&self, t: usize, theta: &ParamVector) -> Result<ParamVector> {
        theta.sub(self.center(t))
    }

    /// Best fixed point in hindsight over the whole horizon: the mean center.
    pub fn comparator(&self) -> &ParamVector {
        &self.comparator
    }

    pub fn comparator_loss(&self, t: usize) -> Result<f64> {
        self.loss(t, &self.comparator)
    }

    pub fn gradient_bound(&self) -> f64 {
        let max_center = self.centers.iter().map(|c| c.norm_sq().sqrt()).fold(0.0, f64::max);
        self.radius + max_center
    }

    /// Euclidean projection onto the ball of radius `radius` about the origin.
    pub fn project(&self, theta: &mut ParamVector) {
        let norm = theta.norm_sq().sqrt();
        if norm > self.radius {
            let s = self.radius / norm;
            theta.as_mut_slice().iter_mut().for_each(|x| *x *= s);
        }
    }
}
