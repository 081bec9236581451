//! Dense and sparse vector primitives.
//!
//! Iterates, gradients, search directions and correction pairs are all
//! [`DenseVector`]s; training examples carry their features as
//! [`SparseVector`]s with 0-based, strictly increasing indices.

use std::ops::{Deref, DerefMut};

use crate::error::{Error, Result};

/// A length-`n` real vector.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DenseVector(Vec<f64>);

impl DenseVector {
    pub fn zeros(n: usize) -> Self {
        DenseVector(vec![0.0; n])
    }

    pub fn from_vec(values: Vec<f64>) -> Self {
        DenseVector(values)
    }

    /// Unit vector `e_i` of length `n`.
    pub fn basis(n: usize, i: usize) -> Self {
        let mut v = Self::zeros(n);
        v.0[i] = 1.0;
        v
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn norm_sq(&self) -> f64 {
        self.0.iter().map(|v| v * v).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn scale(&mut self, alpha: f64) {
        self.0.iter_mut().for_each(|v| *v *= alpha);
    }

    pub fn scaled(&self, alpha: f64) -> Self {
        DenseVector(self.0.iter().map(|v| v * alpha).collect())
    }

    /// `self - other`.
    pub fn sub(&self, other: &DenseVector) -> Result<DenseVector> {
        check_len(self.len(), other.len())?;
        Ok(DenseVector(
            self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect(),
        ))
    }

    pub fn fill(&mut self, value: f64) {
        self.0.iter_mut().for_each(|v| *v = value);
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&v| v == 0.0)
    }
}

impl Deref for DenseVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl DerefMut for DenseVector {
    fn deref_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }
}

impl From<Vec<f64>> for DenseVector {
    fn from(values: Vec<f64>) -> Self {
        DenseVector(values)
    }
}

/// Sparse vector with strictly increasing 0-based indices.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SparseVector {
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl SparseVector {
    /// Builds a sparse vector, rejecting unsorted or duplicated indices.
    pub fn new(indices: Vec<usize>, values: Vec<f64>) -> Result<Self> {
        if indices.len() != values.len() {
            return Err(Error::DimensionMismatch {
                expected: indices.len(),
                found: values.len(),
            });
        }
        if indices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("sparse indices must be strictly increasing"));
        }
        Ok(SparseVector { indices, values })
    }

    pub fn empty() -> Self {
        SparseVector::default()
    }

    /// Stores every coordinate of `dense`, including zeros.
    pub fn from_dense(dense: &[f64]) -> Self {
        SparseVector {
            indices: (0..dense.len()).collect(),
            values: dense.to_vec(),
        }
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn nnz(&self) -> usize {
        self.indices.len()
    }

    /// One past the largest stored index, or 0 when empty.
    pub fn min_dim(&self) -> usize {
        self.indices.last().map_or(0, |&i| i + 1)
    }

    pub fn norm_sq(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.indices.iter().copied().zip(self.values.iter().copied())
    }

    pub fn to_dense(&self, n: usize) -> Result<DenseVector> {
        if self.min_dim() > n {
            return Err(Error::IndexOutOfRange {
                index: self.min_dim() - 1,
                len: n,
            });
        }
        let mut out = DenseVector::zeros(n);
        for (i, v) in self.iter() {
            out[i] = v;
        }
        Ok(out)
    }

    /// `xᵀw` without bounds validation beyond the slice index checks.
    #[inline]
    pub(crate) fn dot_dense_unchecked(&self, w: &[f64]) -> f64 {
        self.iter().map(|(i, v)| v * w[i]).sum()
    }

    /// `y += alpha * x` without validation.
    #[inline]
    pub(crate) fn axpy_into_unchecked(&self, alpha: f64, y: &mut [f64]) {
        for (i, v) in self.iter() {
            y[i] += alpha * v;
        }
    }
}

fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

pub fn dot(a: &[f64], b: &[f64]) -> Result<f64> {
    check_len(a.len(), b.len())?;
    Ok(a.iter().zip(b).map(|(x, y)| x * y).sum())
}

/// `xᵀw` for sparse `x` against dense `w`.
pub fn sparse_dot(x: &SparseVector, w: &[f64]) -> Result<f64> {
    if x.min_dim() > w.len() {
        return Err(Error::IndexOutOfRange {
            index: x.min_dim() - 1,
            len: w.len(),
        });
    }
    Ok(x.dot_dense_unchecked(w))
}

/// `y ← y + alpha·x` for dense `x`.
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) -> Result<()> {
    check_len(y.len(), x.len())?;
    if alpha == 0.0 {
        return Ok(());
    }
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
    Ok(())
}

/// `y ← y + alpha·x` for sparse `x`.
pub fn sparse_axpy(alpha: f64, x: &SparseVector, y: &mut [f64]) -> Result<()> {
    if x.min_dim() > y.len() {
        return Err(Error::IndexOutOfRange {
            index: x.min_dim() - 1,
            len: y.len(),
        });
    }
    if alpha != 0.0 {
        x.axpy_into_unchecked(alpha, y);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn dot_examples() {
        assert_eq!(dot(&[1.0, 2.0], &[3.0, 4.0]).unwrap(), 11.0);
        assert_eq!(dot(&[1.5, -2.0], &[0.0, 0.0]).unwrap(), 0.0);
        let e1 = DenseVector::basis(3, 0);
        assert_eq!(dot(&e1, &e1).unwrap(), 1.0);
        assert!(matches!(
            dot(&[1.0], &[1.0, 2.0]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn sparse_dot_examples() {
        let x = SparseVector::new(vec![0], vec![1.0]).unwrap();
        assert_eq!(sparse_dot(&x, &[2.0, 5.0]).unwrap(), 2.0);
        assert_eq!(sparse_dot(&SparseVector::empty(), &[2.0, 5.0]).unwrap(), 0.0);
        let x = SparseVector::new(vec![0, 1], vec![1.0, 1.0]).unwrap();
        assert_eq!(sparse_dot(&x, &[3.0, 4.0]).unwrap(), 7.0);

        let x = SparseVector::new(vec![4], vec![1.0]).unwrap();
        assert!(matches!(
            sparse_dot(&x, &[1.0, 2.0]),
            Err(Error::IndexOutOfRange { index: 4, len: 2 })
        ));
    }

    #[test]
    fn axpy_examples() {
        let mut y = vec![0.3, -1.0];
        axpy(0.0, &[7.0, 8.0], &mut y).unwrap();
        assert_eq!(y, vec![0.3, -1.0]);

        let mut y = vec![0.0, 0.0];
        axpy(1.0, &[1.0, 1.0], &mut y).unwrap();
        assert_eq!(y, vec![1.0, 1.0]);

        let mut y = vec![5.0, 5.0];
        let e2 = SparseVector::new(vec![1], vec![1.0]).unwrap();
        sparse_axpy(-2.0, &e2, &mut y).unwrap();
        assert_eq!(y, vec![5.0, 3.0]);

        assert!(axpy(1.0, &[1.0], &mut y).is_err());
    }

    #[test]
    fn sparse_vector_rejects_unsorted_indices() {
        assert!(SparseVector::new(vec![2, 1], vec![1.0, 1.0]).is_err());
        assert!(SparseVector::new(vec![1, 1], vec![1.0, 1.0]).is_err());
        assert!(SparseVector::new(vec![1], vec![]).is_err());
    }

    fn unit_ball_vec(n: usize) -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(-1.0f64..1.0, n).prop_map(|mut v| {
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm > 1.0 {
                v.iter_mut().for_each(|x| *x /= norm);
            }
            v
        })
    }

    fn sparse_and_dense() -> impl Strategy<Value = (SparseVector, Vec<f64>)> {
        (1usize..40).prop_flat_map(|n| {
            (
                prop::collection::btree_map(0..n, -10.0f64..10.0, 0..=n),
                prop::collection::vec(-10.0f64..10.0, n),
            )
                .prop_map(|(entries, w)| {
                    let (idx, val): (Vec<_>, Vec<_>) = entries.into_iter().unzip();
                    (SparseVector::new(idx, val).unwrap(), w)
                })
        })
    }

    proptest! {
        #[test]
        fn dot_is_symmetric((a, b) in (1usize..64).prop_flat_map(|n| (unit_ball_vec(n), unit_ball_vec(n)))) {
            let ab = dot(&a, &b).unwrap();
            let ba = dot(&b, &a).unwrap();
            prop_assert!((ab - ba).abs() <= 1e-12 * ab.abs().max(1.0));
        }

        #[test]
        fn sparse_dot_matches_densified((x, w) in sparse_and_dense()) {
            let dense = x.to_dense(w.len()).unwrap();
            let expected = dot(&dense, &w).unwrap();
            let got = sparse_dot(&x, &w).unwrap();
            let scale = x.iter().map(|(i, v)| (v * w[i]).abs()).sum::<f64>().max(1e-300);
            prop_assert!((got - expected).abs() <= 1e-14 * scale);
        }

        #[test]
        fn axpy_round_trip(alpha in -5.0f64..5.0, (x, y) in (1usize..32).prop_flat_map(|n| (
            prop::collection::vec(-1.0f64..1.0, n),
            prop::collection::vec(-1.0f64..1.0, n),
        ))) {
            let mut z = y.clone();
            axpy(alpha, &x, &mut z).unwrap();
            axpy(-alpha, &x, &mut z).unwrap();
            for (a, b) in z.iter().zip(&y) {
                prop_assert!((a - b).abs() <= 1e-12 * (1.0 + alpha.abs()));
            }
        }
    }
}
