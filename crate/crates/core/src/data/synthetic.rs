//! Synthetic classification problems.
//!
//! Features are i.i.d. standard normal vectors rescaled to unit 2-norm and
//! the true weights are uniform on `[-1, 1]`. Labels are drawn from the
//! model's own conditional distribution, so the resulting logistic problem
//! is well posed and strictly convex.

use rand::Rng;
use rand_distr::{Bernoulli, Distribution, StandardNormal, Uniform};

use crate::error::{Error, Result};
use crate::objective::logistic;
use crate::vecmath::{DenseVector, SparseVector};

use super::dataset::{Dataset, SparseExample};
use super::sampling::seeded_rng;

/// A standard normal vector of length `n` projected onto the unit sphere.
pub fn unit_normal_features<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    loop {
        let mut x: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 0.0 {
            x.iter_mut().for_each(|v| *v /= norm);
            return x;
        }
    }
}

fn binary_examples<R: Rng + ?Sized>(
    rng: &mut R,
    w_true: &[f64],
    num_examples: usize,
) -> Vec<SparseExample> {
    (0..num_examples)
        .map(|_| {
            let x = unit_normal_features(rng, w_true.len());
            let margin: f64 = x.iter().zip(w_true).map(|(a, b)| a * b).sum();
            let p = logistic(margin);
            let z = Bernoulli::new(p).expect("logistic output is a probability");
            SparseExample {
                features: SparseVector::from_dense(&x),
                label: usize::from(z.sample(rng)),
            }
        })
        .collect()
}

fn check_sizes(n: usize, num_examples: usize) -> Result<()> {
    if n == 0 || num_examples == 0 {
        return Err(Error::invalid("synthetic data needs n ≥ 1 and N ≥ 1"));
    }
    Ok(())
}

/// Binary dataset whose labels follow `Bernoulli(c(w_true; x))`.
pub fn generate_binary_with_weights(
    w_true: &[f64],
    num_examples: usize,
    seed: u64,
) -> Result<Dataset> {
    check_sizes(w_true.len(), num_examples)?;
    let mut rng = seeded_rng(seed);
    Dataset::new(binary_examples(&mut rng, w_true, num_examples), w_true.len(), 2)
}

/// Random binary problem of dimension `n` with `num_examples` points; also
/// returns the generating weights. Deterministic in `seed`.
pub fn generate_synthetic_binary(
    n: usize,
    num_examples: usize,
    seed: u64,
) -> Result<(Dataset, DenseVector)> {
    check_sizes(n, num_examples)?;
    let mut rng = seeded_rng(seed);
    let unif = Uniform::new_inclusive(-1.0, 1.0).expect("valid range");
    let w_true: Vec<f64> = (0..n).map(|_| unif.sample(&mut rng)).collect();
    let examples = binary_examples(&mut rng, &w_true, num_examples);
    Ok((Dataset::new(examples, n, 2)?, DenseVector::from_vec(w_true)))
}

/// Multiclass analogue: `W_true` is `classes × num_features`, flattened
/// row-major by class, and labels are drawn from `softmax(W_true x)`.
pub fn generate_synthetic_multiclass(
    num_features: usize,
    classes: usize,
    num_examples: usize,
    seed: u64,
) -> Result<(Dataset, DenseVector)> {
    check_sizes(num_features, num_examples)?;
    if classes < 2 {
        return Err(Error::invalid("multiclass data needs at least two classes"));
    }
    let mut rng = seeded_rng(seed);
    let unif = Uniform::new_inclusive(-1.0, 1.0).expect("valid range");
    let w_true: Vec<f64> = (0..classes * num_features)
        .map(|_| unif.sample(&mut rng))
        .collect();
    let mut examples = Vec::with_capacity(num_examples);
    let mut scores = vec![0.0; classes];
    for _ in 0..num_examples {
        let x = unit_normal_features(&mut rng, num_features);
        for (c, score) in scores.iter_mut().enumerate() {
            let row = &w_true[c * num_features..(c + 1) * num_features];
            *score = row.iter().zip(&x).map(|(a, b)| a * b).sum();
        }
        let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let total: f64 = scores.iter().map(|s| (s - max).exp()).sum();
        let u: f64 = rng.random::<f64>() * total;
        let mut acc = 0.0;
        let mut label = classes - 1;
        for (c, s) in scores.iter().enumerate() {
            acc += (s - max).exp();
            if u < acc {
                label = c;
                break;
            }
        }
        examples.push(SparseExample {
            features: SparseVector::from_dense(&x),
            label,
        });
    }
    Ok((
        Dataset::new(examples, num_features, classes)?,
        DenseVector::from_vec(w_true),
    ))
}
