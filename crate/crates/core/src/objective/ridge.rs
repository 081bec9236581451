use crate::error::{Error, Result};
use crate::vecmath::{axpy, dot, DenseVector};

use super::{Batch, Objective};

/// Adds `½σ‖w‖²` to an inner objective, so every sampled Hessian becomes
/// `σI + ∇̂²F` and is bounded below by `σ`.
#[derive(Debug, Clone)]
pub struct Ridge<O> {
    inner: O,
    sigma: f64,
}

impl<O: Objective> Ridge<O> {
    pub fn new(inner: O, sigma: f64) -> Result<Self> {
        if !(sigma >= 0.0) || !sigma.is_finite() {
            return Err(Error::invalid(format!("ridge weight must be ≥ 0, got {sigma}")));
        }
        Ok(Ridge { inner, sigma })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn inner(&self) -> &O {
        &self.inner
    }
}

impl<O: Objective> Objective for Ridge<O> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn num_examples(&self) -> usize {
        self.inner.num_examples()
    }

    fn value_on(&self, w: &[f64], batch: Batch<'_>) -> Result<f64> {
        let v = self.inner.value_on(w, batch)?;
        Ok(v + 0.5 * self.sigma * dot(w, w)?)
    }

    fn gradient_on(&self, w: &[f64], batch: Batch<'_>) -> Result<DenseVector> {
        let mut g = self.inner.gradient_on(w, batch)?;
        axpy(self.sigma, w, &mut g)?;
        Ok(g)
    }

    fn hessian_vector_on(&self, w: &[f64], s: &[f64], batch: Batch<'_>) -> Result<DenseVector> {
        let mut hv = self.inner.hessian_vector_on(w, s, batch)?;
        axpy(self.sigma, s, &mut hv)?;
        Ok(hv)
    }

    fn accuracy(&self, w: &[f64]) -> Option<Result<f64>> {
        self.inner.accuracy(w)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::Arc;

    use crate::data::generate_synthetic_binary;
    use crate::objective::testing::{check_gradient_fd, check_hv_fd};
    use crate::objective::{BinaryLogistic, NoisyQuadratic};

    fn logistic_oracle() -> BinaryLogistic {
        let (d, _) = generate_synthetic_binary(4, 50, 6).unwrap();
        BinaryLogistic::new(Arc::new(d)).unwrap()
    }

    #[test]
    fn zero_sigma_is_identity() {
        let inner = logistic_oracle();
        let wrapped = Ridge::new(inner.clone(), 0.0).unwrap();
        let w = [0.3, -0.1, 0.7, 0.2];
        let s = [1.0, 2.0, -1.0, 0.5];
        let b = Batch::Sample(&[1, 4, 9]);
        assert_eq!(inner.value_on(&w, b).unwrap(), wrapped.value_on(&w, b).unwrap());
        assert_eq!(inner.gradient_on(&w, b).unwrap(), wrapped.gradient_on(&w, b).unwrap());
        assert_eq!(
            inner.hessian_vector_on(&w, &s, b).unwrap(),
            wrapped.hessian_vector_on(&w, &s, b).unwrap()
        );
    }

    #[test]
    fn pure_regularizer() {
        // A zero-noise quadratic with zero curvature is not allowed, so use an
        // inner quadratic and subtract its contribution.
        let inner = NoisyQuadratic::new(vec![1.0, 1.0], 0.0, 0).unwrap();
        let wrapped = Ridge::new(&inner, 1.0).unwrap();
        let w = [3.0, 4.0];
        let v = wrapped.value_on(&w, Batch::Full).unwrap() - inner.value_on(&w, Batch::Full).unwrap();
        assert_eq!(v, 12.5);
        let g = wrapped.gradient_on(&w, Batch::Full).unwrap();
        let gi = inner.gradient_on(&w, Batch::Full).unwrap();
        assert_eq!(g.sub(&gi).unwrap().as_slice(), &[3.0, 4.0]);
    }

    #[test]
    fn hessian_shift_is_sigma_s() {
        let inner = logistic_oracle();
        let wrapped = Ridge::new(inner.clone(), 0.1).unwrap();
        let w = [0.3, -0.1, 0.7, 0.2];
        let s = [1.0, 2.0, -1.0, 0.5];
        let d = wrapped
            .hessian_vector_on(&w, &s, Batch::Full)
            .unwrap()
            .sub(&inner.hessian_vector_on(&w, &s, Batch::Full).unwrap())
            .unwrap();
        for (a, b) in d.iter().zip(&s) {
            assert!((a - 0.1 * b).abs() < 1e-15);
        }
    }

    #[test]
    fn rejects_negative_sigma() {
        assert!(Ridge::new(logistic_oracle(), -1e-3).is_err());
        assert!(Ridge::new(logistic_oracle(), f64::NAN).is_err());
    }

    #[test]
    fn finite_differences() {
        let f = Ridge::new(logistic_oracle(), 0.5).unwrap();
        check_gradient_fd(&f, &[0.2, 0.1, -0.3, 1.0], &[0, 3, 3, 7], 1e-6);
        check_hv_fd(&f, &[0.2, 0.1, -0.3, 1.0], &[1.0, 0.0, 1.0, -2.0], &[0, 3, 3, 7], 1e-5);
    }
}
