use std::sync::Arc;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::vecmath::{DenseVector, SparseVector};

use super::{check_dim, Batch, Objective};

/// Multinomial logistic regression over `|C|` classes.
///
/// The parameter matrix `W ∈ ℝ^{|C|×NF}` is flattened row-major by class:
/// entry `(c, j)` lives at `c·NF + j`. Correction pairs and search
/// directions are formed in this flat space.
///
/// With `p = softmax(W x)`, the per-example gradient rows are
/// `(p − e_z) xᵀ` and the Hessian applied to a direction `S` has rows
/// `r xᵀ` where `q = S x` and `r = p ⊙ q − p (pᵀq)`.
#[derive(Debug, Clone)]
pub struct MulticlassLogistic {
    data: Arc<Dataset>,
    num_features: usize,
    classes: usize,
}

impl MulticlassLogistic {
    pub fn new(data: Arc<Dataset>) -> Result<Self> {
        let num_features = data.dim();
        let classes = data.num_classes();
        if num_features == 0 {
            return Err(Error::invalid("multiclass logistic needs at least one feature"));
        }
        Ok(MulticlassLogistic {
            data,
            num_features,
            classes,
        })
    }

    pub fn num_features(&self) -> usize {
        self.num_features
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    fn row<'w>(&self, w: &'w [f64], c: usize) -> &'w [f64] {
        &w[c * self.num_features..(c + 1) * self.num_features]
    }

    fn scores(&self, w: &[f64], x: &SparseVector, out: &mut [f64]) {
        for (c, o) in out.iter_mut().enumerate() {
            *o = x.dot_dense_unchecked(self.row(w, c));
        }
    }

    /// Overwrites `scores` with softmax probabilities; returns log-sum-exp.
    fn softmax_in_place(scores: &mut [f64]) -> f64 {
        let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut total = 0.0;
        for s in scores.iter_mut() {
            *s = (*s - max).exp();
            total += *s;
        }
        scores.iter_mut().for_each(|s| *s /= total);
        max + total.ln()
    }
}

impl Objective for MulticlassLogistic {
    fn dim(&self) -> usize {
        self.num_features * self.classes
    }

    fn num_examples(&self) -> usize {
        self.data.len()
    }

    fn value_on(&self, w: &[f64], batch: Batch<'_>) -> Result<f64> {
        check_dim(self.dim(), w)?;
        let idx = batch.resolve(self.num_examples())?;
        let b = idx.len() as f64;
        let mut p = vec![0.0; self.classes];
        let mut total = 0.0;
        for i in idx {
            let ex = self.data.example(i);
            self.scores(w, &ex.features, &mut p);
            let true_score = p[ex.label];
            let lse = Self::softmax_in_place(&mut p);
            total += lse - true_score;
        }
        Ok(total / b)
    }

    fn gradient_on(&self, w: &[f64], batch: Batch<'_>) -> Result<DenseVector> {
        check_dim(self.dim(), w)?;
        let idx = batch.resolve(self.num_examples())?;
        let inv_b = 1.0 / idx.len() as f64;
        let nf = self.num_features;
        let mut g = DenseVector::zeros(self.dim());
        let mut p = vec![0.0; self.classes];
        for i in idx {
            let ex = self.data.example(i);
            self.scores(w, &ex.features, &mut p);
            Self::softmax_in_place(&mut p);
            p[ex.label] -= 1.0;
            for (c, &coef) in p.iter().enumerate() {
                ex.features
                    .axpy_into_unchecked(coef * inv_b, &mut g[c * nf..(c + 1) * nf]);
            }
        }
        Ok(g)
    }

    fn hessian_vector_on(&self, w: &[f64], s: &[f64], batch: Batch<'_>) -> Result<DenseVector> {
        check_dim(self.dim(), w)?;
        check_dim(self.dim(), s)?;
        let idx = batch.resolve(self.num_examples())?;
        let inv_b = 1.0 / idx.len() as f64;
        let nf = self.num_features;
        let mut hv = DenseVector::zeros(self.dim());
        let mut p = vec![0.0; self.classes];
        let mut q = vec![0.0; self.classes];
        for i in idx {
            let x = &self.data.example(i).features;
            self.scores(w, x, &mut p);
            Self::softmax_in_place(&mut p);
            self.scores(s, x, &mut q);
            let pq: f64 = p.iter().zip(&q).map(|(a, b)| a * b).sum();
            for c in 0..self.classes {
                let r = p[c] * q[c] - p[c] * pq;
                x.axpy_into_unchecked(r * inv_b, &mut hv[c * nf..(c + 1) * nf]);
            }
        }
        Ok(hv)
    }

    fn accuracy(&self, w: &[f64]) -> Option<Result<f64>> {
        let run = || -> Result<f64> {
            check_dim(self.dim(), w)?;
            let mut scores = vec![0.0; self.classes];
            let mut correct = 0usize;
            for ex in self.data.examples() {
                self.scores(w, &ex.features, &mut scores);
                // argmax, ties to the lowest class id
                let predicted = scores
                    .iter()
                    .enumerate()
                    .fold((0, f64::NEG_INFINITY), |best, (c, &v)| if v > best.1 { (c, v) } else { best })
                    .0;
                correct += usize::from(predicted == ex.label);
            }
            Ok(correct as f64 / self.num_examples() as f64)
        };
        Some(run())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::generate_synthetic_multiclass;
    use crate::objective::testing::{check_gradient_fd, check_hv_fd, random_vec};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn oracle(nf: usize, classes: usize, n: usize, seed: u64) -> MulticlassLogistic {
        let (d, _) = generate_synthetic_multiclass(nf, classes, n, seed).unwrap();
        MulticlassLogistic::new(Arc::new(d)).unwrap()
    }

    #[test]
    fn uniform_softmax_at_zero() {
        let f = oracle(4, 3, 10, 1);
        let v = f.value_on(&[0.0; 12], Batch::Full).unwrap();
        assert!((v - 3f64.ln()).abs() < 1e-14);
        let g = f.gradient_on(&[0.0; 12], Batch::Full).unwrap();
        for j in 0..4 {
            let col: f64 = (0..3).map(|c| g[c * 4 + j]).sum();
            assert!(col.abs() < 1e-15);
        }
    }

    #[test]
    fn probabilities_sum_to_one() {
        let mut scores = vec![3.0, -700.0, 800.0, 0.1];
        MulticlassLogistic::softmax_in_place(&mut scores);
        assert!((scores.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn finite_difference_agreement() {
        let f = oracle(4, 3, 30, 5);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let w = random_vec(&mut rng, 12, 1.0);
            let s = random_vec(&mut rng, 12, 1.0);
            let batch: Vec<usize> = (0..5).map(|_| rng.random_range(0..30)).collect();
            check_gradient_fd(&f, &w, &batch, 1e-6);
            check_hv_fd(&f, &w, &s, &batch, 1e-5);
        }
    }

    #[test]
    fn rejects_wrong_flat_length() {
        let f = oracle(4, 3, 10, 1);
        assert!(f.value_on(&[0.0; 11], Batch::Full).is_err());
        assert!(f.hessian_vector_on(&[0.0; 12], &[0.0; 4], Batch::Full).is_err());
    }
}
