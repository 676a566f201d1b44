use serde::{Deserialize, Serialize};

use super::{fmt_shape, NumericError, Scalar};

/// Dense row-major tensor. Rank 1 (vectors) and rank 2 (matrices) are what
/// the model uses; the invariant `data.len() == shape.iter().product()` is
/// enforced at every construction site.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tensor<S> {
    shape: Vec<usize>,
    data: Vec<S>,
}

impl<S: Scalar> Tensor<S> {
    pub fn from_shape(shape: Vec<usize>, data: Vec<S>) -> Result<Self, NumericError> {
        let expected: usize = shape.iter().product();
        if data.len() != expected {
            return Err(NumericError::DataLength {
                shape: fmt_shape(&shape),
                expected,
                got: data.len(),
            });
        }
        Ok(Tensor { shape, data })
    }

    pub fn zeros(shape: &[usize]) -> Self {
        let n: usize = shape.iter().product();
        Tensor {
            shape: shape.to_vec(),
            data: vec![S::zero(); n],
        }
    }

    pub fn filled(shape: &[usize], value: S) -> Self {
        let n: usize = shape.iter().product();
        Tensor {
            shape: shape.to_vec(),
            data: vec![value; n],
        }
    }

    /// Rank-1 tensor from raw values.
    pub fn vector(data: Vec<S>) -> Self {
        Tensor {
            shape: vec![data.len()],
            data,
        }
    }

    /// Length-1 rank-1 tensor; the tape's convention for scalar values.
    pub fn scalar(value: S) -> Self {
        Tensor {
            shape: vec![1],
            data: vec![value],
        }
    }

    /// Rank-2 tensor in row-major order.
    pub fn matrix(rows: usize, cols: usize, data: Vec<S>) -> Result<Self, NumericError> {
        Tensor::from_shape(vec![rows, cols], data)
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn rank(&self) -> usize {
        self.shape.len()
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[S] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [S] {
        &mut self.data
    }

    /// Rank-2 element access; callers guarantee shape.
    pub fn get2(&self, row: usize, col: usize) -> S {
        debug_assert_eq!(self.rank(), 2);
        self.data[row * self.shape[1] + col]
    }

    pub fn is_vector(&self) -> bool {
        self.rank() == 1
    }

    pub fn is_matrix(&self) -> bool {
        self.rank() == 2
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn fmt_shape(&self) -> String {
        fmt_shape(&self.shape)
    }

    /// Elementwise `self += other`; shapes must already agree.
    pub fn add_assign(&mut self, other: &Tensor<S>) -> Result<(), NumericError> {
        if self.shape != other.shape {
            return Err(NumericError::ShapeMismatch {
                op: "add_assign",
                lhs: self.fmt_shape(),
                rhs: other.fmt_shape(),
            });
        }
        for (a, b) in self.data.iter_mut().zip(other.data.iter()) {
            *a += *b;
        }
        Ok(())
    }

    pub fn scale_in_place(&mut self, factor: S) {
        for v in &mut self.data {
            *v *= factor;
        }
    }

    /// Sum of squared elements, the building block for gradient norms.
    pub fn squared_norm(&self) -> S {
        self.data.iter().map(|v| *v * *v).sum()
    }
}
