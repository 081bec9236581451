use std::sync::Arc;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::vecmath::{sparse_dot, DenseVector, SparseVector};

use super::{check_dim, Batch, Objective};

/// Probabilities are clamped to `[ε, 1 − ε]` before taking logarithms.
pub const PROBABILITY_FLOOR: f64 = 1e-12;

/// `1 / (1 + exp(−t))` without overflow for large `|t|`.
#[inline]
pub fn logistic(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

/// `c(w; x) = 1 / (1 + exp(−xᵀw))`.
pub fn sigmoid(w: &[f64], x: &SparseVector) -> Result<f64> {
    Ok(logistic(sparse_dot(x, w)?))
}

/// Binary logistic regression with labels `z ∈ {0, 1}`:
/// `f(w; x, z) = −z log c(w; x) − (1 − z) log(1 − c(w; x))`.
#[derive(Debug, Clone)]
pub struct BinaryLogistic {
    data: Arc<Dataset>,
}

impl BinaryLogistic {
    pub fn new(data: Arc<Dataset>) -> Result<Self> {
        if !data.is_binary() {
            return Err(Error::invalid(format!(
                "binary logistic needs 2 classes, dataset has {}",
                data.num_classes()
            )));
        }
        Ok(BinaryLogistic { data })
    }

    pub fn data(&self) -> &Arc<Dataset> {
        &self.data
    }

    /// Upper bound `max_i ‖x_i‖² / 4` on the eigenvalues of any sampled Hessian.
    pub fn hessian_bound(&self) -> f64 {
        self.data.max_feature_norm_sq() / 4.0
    }
}

impl Objective for BinaryLogistic {
    fn dim(&self) -> usize {
        self.data.dim()
    }

    fn num_examples(&self) -> usize {
        self.data.len()
    }

    fn value_on(&self, w: &[f64], batch: Batch<'_>) -> Result<f64> {
        check_dim(self.dim(), w)?;
        let idx = batch.resolve(self.num_examples())?;
        let b = idx.len() as f64;
        let mut total = 0.0;
        for i in idx {
            let ex = self.data.example(i);
            let c = logistic(ex.features.dot_dense_unchecked(w))
                .clamp(PROBABILITY_FLOOR, 1.0 - PROBABILITY_FLOOR);
            total -= if ex.label == 1 { c.ln() } else { (1.0 - c).ln() };
        }
        Ok(total / b)
    }

    fn gradient_on(&self, w: &[f64], batch: Batch<'_>) -> Result<DenseVector> {
        check_dim(self.dim(), w)?;
        let idx = batch.resolve(self.num_examples())?;
        let inv_b = 1.0 / idx.len() as f64;
        let mut g = DenseVector::zeros(self.dim());
        for i in idx {
            let ex = self.data.example(i);
            let c = logistic(ex.features.dot_dense_unchecked(w));
            ex.features
                .axpy_into_unchecked((c - ex.label as f64) * inv_b, &mut g);
        }
        Ok(g)
    }

    fn hessian_vector_on(&self, w: &[f64], s: &[f64], batch: Batch<'_>) -> Result<DenseVector> {
        check_dim(self.dim(), w)?;
        check_dim(self.dim(), s)?;
        let idx = batch.resolve(self.num_examples())?;
        let inv_b = 1.0 / idx.len() as f64;
        let mut hv = DenseVector::zeros(self.dim());
        for i in idx {
            let x = &self.data.example(i).features;
            let c = logistic(x.dot_dense_unchecked(w));
            let xs = x.dot_dense_unchecked(s);
            x.axpy_into_unchecked(c * (1.0 - c) * xs * inv_b, &mut hv);
        }
        Ok(hv)
    }

    fn accuracy(&self, w: &[f64]) -> Option<Result<f64>> {
        let run = || -> Result<f64> {
            check_dim(self.dim(), w)?;
            let correct = self
                .data
                .examples()
                .iter()
                .filter(|ex| {
                    let predicted = usize::from(logistic(ex.features.dot_dense_unchecked(w)) >= 0.5);
                    predicted == ex.label
                })
                .count();
            Ok(correct as f64 / self.num_examples() as f64)
        };
        Some(run())
    }
}
