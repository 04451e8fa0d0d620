//! Dense parameter vectors and element-wise arithmetic.
//!
//! Every optimizer quantity (parameters, gradients, moment estimates, gains)
//! is a [`ParamVector`]. Public operations either return a vector whose
//! entries are all finite or report an error naming the first bad index.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A flat, fixed-dimension vector of finite `f64` values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct ParamVector(Vec<f64>);

/// Right-hand side of a binary element-wise operation.
#[derive(Debug, Clone, Copy)]
pub enum Operand<'a> {
    Vector(&'a ParamVector),
    Scalar(f64),
}

/// Element-wise operation applied by [`elementwise`].
#[derive(Debug, Clone, Copy)]
pub enum ElementwiseOp<'a> {
    Add(Operand<'a>),
    Sub(Operand<'a>),
    Mul(Operand<'a>),
    Div(Operand<'a>),
    Square,
    Scale(f64),
}

impl ElementwiseOp<'_> {
    fn name(&self) -> &'static str {
        match self {
            ElementwiseOp::Add(_) => "add",
            ElementwiseOp::Sub(_) => "sub",
            ElementwiseOp::Mul(_) => "mul",
            ElementwiseOp::Div(_) => "div",
            ElementwiseOp::Square => "square",
            ElementwiseOp::Scale(_) => "scale",
        }
    }
}

/// Applies `op` to every index of `a`. The inputs are never modified.
pub fn elementwise(a: &ParamVector, op: ElementwiseOp<'_>) -> Result<ParamVector> {
    let name = op.name();
    let scalar_fn: fn(f64, f64) -> f64 = match op {
        ElementwiseOp::Add(_) => |x, y| x + y,
        ElementwiseOp::Sub(_) => |x, y| x - y,
        ElementwiseOp::Mul(_) => |x, y| x * y,
        ElementwiseOp::Div(_) => |x, y| x / y,
        ElementwiseOp::Square => |x, _| x * x,
        ElementwiseOp::Scale(_) => |x, y| x * y,
    };
    let operand = match op {
        ElementwiseOp::Add(o)
        | ElementwiseOp::Sub(o)
        | ElementwiseOp::Mul(o)
        | ElementwiseOp::Div(o) => o,
        ElementwiseOp::Square => Operand::Scalar(0.0),
        ElementwiseOp::Scale(s) => Operand::Scalar(s),
    };
    let out: Vec<f64> = match operand {
        Operand::Vector(b) => {
            a.check_dim(b)?;
            a.0.iter().zip(&b.0).map(|(&x, &y)| scalar_fn(x, y)).collect()
        }
        Operand::Scalar(y) => a.0.iter().map(|&x| scalar_fn(x, y)).collect(),
    };
    if let Some(index) = out.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFiniteResult { op: name, index });
    }
    Ok(ParamVector(out))
}

impl ParamVector {
    /// Wraps `data`, rejecting empty input and non-finite entries.
    pub fn new(data: Vec<f64>) -> Result<Self> {
        if data.is_empty() {
            return Err(Error::EmptyVector);
        }
        if let Some(index) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteResult { op: "new", index });
        }
        Ok(Self(data))
    }

    pub fn zeros(dim: usize) -> Self {
        Self::filled(dim, 0.0)
    }

    /// # Panics
    /// If `dim == 0` or `value` is not finite.
    pub fn filled(dim: usize, value: f64) -> Self {
        assert!(dim > 0, "ParamVector needs at least one entry");
        assert!(value.is_finite(), "ParamVector entries must be finite");
        Self(vec![value; dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, f64> {
        self.0.iter()
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn check_dim(&self, other: &ParamVector) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: other.dim(),
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &ParamVector) -> Result<ParamVector> {
        elementwise(self, ElementwiseOp::Add(Operand::Vector(other)))
    }

    pub fn sub(&self, other: &ParamVector) -> Result<ParamVector> {
        elementwise(self, ElementwiseOp::Sub(Operand::Vector(other)))
    }

    pub fn mul(&self, other: &ParamVector) -> Result<ParamVector> {
        elementwise(self, ElementwiseOp::Mul(Operand::Vector(other)))
    }

    pub fn div(&self, other: &ParamVector) -> Result<ParamVector> {
        elementwise(self, ElementwiseOp::Div(Operand::Vector(other)))
    }

    pub fn square(&self) -> Result<ParamVector> {
        elementwise(self, ElementwiseOp::Square)
    }

    pub fn scale(&self, factor: f64) -> Result<ParamVector> {
        elementwise(self, ElementwiseOp::Scale(factor))
    }

    pub fn dot(&self, other: &ParamVector) -> Result<f64> {
        self.check_dim(other)?;
        Ok(dot(&self.0, &other.0))
    }

    pub fn norm_sq(&self) -> f64 {
        dot(&self.0, &self.0)
    }

    pub fn mean(&self) -> f64 {
        self.0.iter().sum::<f64>() / self.0.len() as f64
    }

    /// Mutable view for in-place updates inside the crate. The length cannot
    /// change through a slice, so the dimension invariant holds.
    pub(crate) fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.0
    }

    /// Re-checks the finiteness invariant after in-place updates.
    pub(crate) fn ensure_finite(&self, op: &'static str) -> Result<()> {
        match self.0.iter().position(|v| !v.is_finite()) {
            Some(index) => Err(Error::NonFiniteResult { op, index }),
            None => Ok(()),
        }
    }
}

impl TryFrom<Vec<f64>> for ParamVector {
    type Error = Error;

    fn try_from(data: Vec<f64>) -> Result<Self> {
        Self::new(data)
    }
}

impl From<ParamVector> for Vec<f64> {
    fn from(v: ParamVector) -> Self {
        v.0
    }
}

impl std::ops::Index<usize> for ParamVector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl AsRef<[f64]> for ParamVector {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
