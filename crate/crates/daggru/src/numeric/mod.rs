//! Reverse-mode autodiff core: dense tensors, an operation tape recording
//! every forward computation, vector-Jacobian products for the backward
//! pass, and a central-difference gradient checker.
//!
//! Everything here is generic over [`Scalar`] (f32 or f64). Gradient-checked
//! training code elsewhere in the crate uses the f64 instantiation.

mod check;
mod scalar;
mod tape;
mod tensor;

pub use check::{finite_diff_check, FiniteDiffReport, ParamCheck};
pub use scalar::Scalar;
pub use tape::{Gradients, Tape, Var};
pub use tensor::Tensor;

use thiserror::Error;

/// Errors raised by tensor construction and tape operations.
///
/// Shape mismatches always report both offending shapes so a failing model
/// wiring can be diagnosed from the message alone.
#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum NumericError {
    #[error("{op}: shape mismatch: [{lhs}] vs [{rhs}]")]
    ShapeMismatch {
        op: &'static str,
        lhs: String,
        rhs: String,
    },
    #[error("{op}: invalid shape [{shape}]: {detail}")]
    InvalidShape {
        op: &'static str,
        shape: String,
        detail: String,
    },
    #[error("{op}: index {index} out of range for length {len}")]
    IndexOutOfRange {
        op: &'static str,
        index: usize,
        len: usize,
    },
    #[error("tensor data length {got} does not match shape [{shape}] (wants {expected})")]
    DataLength {
        shape: String,
        expected: usize,
        got: usize,
    },
    #[error("backward: loss must be a scalar (length-1 tensor), got length {len}")]
    LossNotScalar { len: usize },
    #[error("finite_diff_check: loss function is nondeterministic ({first} vs {second} on identical inputs)")]
    NonDeterministic { first: String, second: String },
    #[error("{op}: produced a non-finite value")]
    NonFinite { op: &'static str },
}

pub(crate) fn fmt_shape(shape: &[usize]) -> String {
    shape
        .iter()
        .map(|d| d.to_string())
        .collect::<Vec<_>>()
        .join("x")
}
