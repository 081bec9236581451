//! Objective-function oracles.
//!
//! Every oracle evaluates the empirical risk, its mini-batch gradient and a
//! sub-sampled Hessian-vector product over a [`Batch`] of example indices:
//!
//! * `value_on(w, S)     = (1/|S|) Σ_{i∈S} f(w; x_i, z_i)`
//! * `gradient_on(w, S)  = (1/|S|) Σ_{i∈S} ∇f(w; x_i, z_i)`
//! * `hessian_vector_on(w, s, S_H) = (1/|S_H|) Σ_{i∈S_H} ∇²f(w; x_i, z_i) s`
//!
//! The Hessian is never materialized. [`Batch::Full`] evaluates the
//! full-dataset quantities.

mod logistic;
mod multiclass;
mod quadratic;
mod ridge;

use std::ops::Range;
use std::slice;

use crate::error::{Error, Result};
use crate::vecmath::DenseVector;

pub use logistic::{logistic, sigmoid, BinaryLogistic, PROBABILITY_FLOOR};
pub use multiclass::MulticlassLogistic;
pub use quadratic::{NoisyQuadratic, DEFAULT_VIRTUAL_EXAMPLES};
pub use ridge::Ridge;

/// Which examples an oracle call averages over.
#[derive(Debug, Clone, Copy)]
pub enum Batch<'a> {
    /// Every example in the dataset.
    Full,
    /// The given example indices; repeats are counted with multiplicity.
    Sample(&'a [usize]),
}

impl<'a> Batch<'a> {
    /// Validates the batch against a dataset of `num_examples` points.
    pub(crate) fn resolve(self, num_examples: usize) -> Result<BatchIndices<'a>> {
        match self {
            Batch::Full if num_examples == 0 => Err(Error::EmptyBatch),
            Batch::Full => Ok(BatchIndices::Range(0..num_examples)),
            Batch::Sample([]) => Err(Error::EmptyBatch),
            Batch::Sample(idx) => {
                if let Some(&bad) = idx.iter().find(|&&i| i >= num_examples) {
                    return Err(Error::IndexOutOfRange {
                        index: bad,
                        len: num_examples,
                    });
                }
                Ok(BatchIndices::Slice(idx.iter()))
            }
        }
    }

    pub fn is_full(&self) -> bool {
        matches!(self, Batch::Full)
    }
}

pub(crate) enum BatchIndices<'a> {
    Range(Range<usize>),
    Slice(slice::Iter<'a, usize>),
}

impl Iterator for BatchIndices<'_> {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        match self {
            BatchIndices::Range(r) => r.next(),
            BatchIndices::Slice(s) => s.next().copied(),
        }
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        match self {
            BatchIndices::Range(r) => r.size_hint(),
            BatchIndices::Slice(s) => s.size_hint(),
        }
    }
}

impl ExactSizeIterator for BatchIndices<'_> {}

/// Stochastic first- and second-order oracle for an empirical risk.
pub trait Objective {
    /// Length of the parameter vector.
    fn dim(&self) -> usize;

    /// Number of training examples batches are drawn from.
    fn num_examples(&self) -> usize;

    fn value_on(&self, w: &[f64], batch: Batch<'_>) -> Result<f64>;

    fn gradient_on(&self, w: &[f64], batch: Batch<'_>) -> Result<DenseVector>;

    fn hessian_vector_on(&self, w: &[f64], s: &[f64], batch: Batch<'_>) -> Result<DenseVector>;

    /// Fraction of examples classified correctly at `w`, for classifiers.
    fn accuracy(&self, _w: &[f64]) -> Option<Result<f64>> {
        None
    }
}

impl<O: Objective + ?Sized> Objective for &O {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn num_examples(&self) -> usize {
        (**self).num_examples()
    }
    fn value_on(&self, w: &[f64], batch: Batch<'_>) -> Result<f64> {
        (**self).value_on(w, batch)
    }
    fn gradient_on(&self, w: &[f64], batch: Batch<'_>) -> Result<DenseVector> {
        (**self).gradient_on(w, batch)
    }
    fn hessian_vector_on(&self, w: &[f64], s: &[f64], batch: Batch<'_>) -> Result<DenseVector> {
        (**self).hessian_vector_on(w, s, batch)
    }
    fn accuracy(&self, w: &[f64]) -> Option<Result<f64>> {
        (**self).accuracy(w)
    }
}

impl<O: Objective + ?Sized> Objective for Box<O> {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn num_examples(&self) -> usize {
        (**self).num_examples()
    }
    fn value_on(&self, w: &[f64], batch: Batch<'_>) -> Result<f64> {
        (**self).value_on(w, batch)
    }
    fn gradient_on(&self, w: &[f64], batch: Batch<'_>) -> Result<DenseVector> {
        (**self).gradient_on(w, batch)
    }
    fn hessian_vector_on(&self, w: &[f64], s: &[f64], batch: Batch<'_>) -> Result<DenseVector> {
        (**self).hessian_vector_on(w, s, batch)
    }
    fn accuracy(&self, w: &[f64]) -> Option<Result<f64>> {
        (**self).accuracy(w)
    }
}

pub(crate) fn check_dim(expected: usize, v: &[f64]) -> Result<()> {
    if v.len() != expected {
        return Err(Error::DimensionMismatch {
            expected,
            found: v.len(),
        });
    }
    Ok(())
}
