//! Run records, error monitors, generalization metrics and the constants of
//! the `O(1/k)` convergence bound.

use crate::error::{Error, Result};
use crate::objective::{Batch, Objective};
use crate::vecmath::DenseVector;

/// Metrics captured at one checkpoint of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    /// Completed iterations.
    pub k: u64,
    /// Accessed data points so far.
    pub adp: u64,
    /// Work-model operations so far.
    pub work: f64,
    /// Full-batch training objective at the current iterate.
    pub train_fx: f64,
    pub test_fx: Option<f64>,
    pub test_accuracy: Option<f64>,
    pub grad_error: Option<f64>,
    pub hv_error: Option<f64>,
    /// Norm of the most recent stochastic gradient.
    pub grad_norm: Option<f64>,
}

/// `‖estimate − reference‖ / ‖reference‖`.
pub fn relative_error(estimate: &[f64], reference: &[f64], what: &'static str) -> Result<f64> {
    if estimate.len() != reference.len() {
        return Err(Error::DimensionMismatch {
            expected: reference.len(),
            found: estimate.len(),
        });
    }
    let denom = reference.iter().map(|v| v * v).sum::<f64>().sqrt();
    if denom == 0.0 {
        return Err(Error::Undefined(what));
    }
    let num = estimate
        .iter()
        .zip(reference)
        .map(|(a, b)| (a - b).powi(2))
        .sum::<f64>()
        .sqrt();
    Ok(num / denom)
}

/// Relative error of the batch gradient on `batch` against the full gradient.
pub fn grad_error(oracle: &dyn Objective, w: &[f64], batch: &[usize]) -> Result<f64> {
    let full = oracle.gradient_on(w, Batch::Full)?;
    let sampled = oracle.gradient_on(w, Batch::Sample(batch))?;
    relative_error(&sampled, &full, "full gradient is zero")
}

/// Relative error of `∇̂²F(w̄_t) s` on `hessian_batch` against the full-data
/// product, with `s = w̄_t − w̄_prev`.
pub fn hv_error(
    oracle: &dyn Objective,
    wbar: &[f64],
    wbar_prev: &[f64],
    hessian_batch: &[usize],
) -> Result<f64> {
    let s = DenseVector::from(wbar.to_vec()).sub(&DenseVector::from(wbar_prev.to_vec()))?;
    let full = oracle.hessian_vector_on(wbar, &s, Batch::Full)?;
    let sampled = oracle.hessian_vector_on(wbar, &s, Batch::Sample(hessian_batch))?;
    relative_error(&sampled, &full, "full Hessian-vector product is zero")
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestMetrics {
    pub test_fx: f64,
    pub test_accuracy: Option<f64>,
}

/// Objective and classification accuracy of `w` on a held-out oracle.
pub fn test_metrics(test_oracle: &dyn Objective, w: &[f64]) -> Result<TestMetrics> {
    let test_fx = test_oracle.value_on(w, Batch::Full)?;
    let test_accuracy = test_oracle.accuracy(w).transpose()?;
    Ok(TestMetrics {
        test_fx,
        test_accuracy,
    })
}

/// Constants of the expected-gap bound `E[F(w^k) − F(w*)] ≤ Q(β)/k` for the
/// iteration `w^{k+1} = w^k − (β/k) H_k ∇f(w^k, ξ^k)`.
///
/// Requires `λI ≺ ∇²F ≺ ΛI`, `μ₁I ≺ H_k ≺ μ₂I` and `E‖∇f‖² ≤ γ²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TheoryParams {
    pub lambda_lo: f64,
    pub lambda_hi: f64,
    pub mu1: f64,
    pub mu2: f64,
    pub gamma: f64,
}

impl TheoryParams {
    pub fn new(lambda_lo: f64, lambda_hi: f64, mu1: f64, mu2: f64, gamma: f64) -> Result<Self> {
        if !(lambda_lo > 0.0 && lambda_lo <= lambda_hi) {
            return Err(Error::invalid("need 0 < λ ≤ Λ"));
        }
        if !(mu1 > 0.0 && mu1 <= mu2) {
            return Err(Error::invalid("need 0 < μ₁ ≤ μ₂"));
        }
        if !(gamma >= 0.0) || !gamma.is_finite() {
            return Err(Error::invalid("need γ ≥ 0"));
        }
        Ok(TheoryParams {
            lambda_lo,
            lambda_hi,
            mu1,
            mu2,
            gamma,
        })
    }

    /// Spectral bounds on `H_t` implied by the L-BFGS trace and determinant
    /// arguments, for `n` variables and memory `m`, when every pair satisfies
    /// `λ ≤ yᵀs/sᵀs` and `‖y‖²/yᵀs ≤ Λ`.
    ///
    /// With `M₃ = (n + m)Λ` bounding `tr(B_t)`, the largest eigenvalue of
    /// `B_t = H_t⁻¹` is at most `M₃` and `det(B_t) ≥ λⁿ (λ/M₃)^m`, so its
    /// smallest eigenvalue is at least `λⁿ (λ/M₃)^m / M₃^{n−1}`. Returns
    /// `(μ₁, μ₂) = (1/M₃, M₃^{n−1} / (λⁿ (λ/M₃)^m))`.
    pub fn lbfgs_spectrum_bounds(lambda_lo: f64, lambda_hi: f64, n: usize, m: usize) -> (f64, f64) {
        let m3 = (n + m) as f64 * lambda_hi;
        let det_lower = lambda_lo.powi(n as i32) * (lambda_lo / m3).powi(m as i32);
        let min_eig_b = det_lower / m3.powi(n as i32 - 1);
        (1.0 / m3, 1.0 / min_eig_b)
    }

    /// `1 / (2 μ₁ λ)`; the step constant β must exceed it.
    pub fn beta_threshold(&self) -> f64 {
        1.0 / (2.0 * self.mu1 * self.lambda_lo)
    }

    /// `Q(β) = max{ Λ μ₂² β² γ² / (2(2 μ₁ λ β − 1)), F(w¹) − F(w*) }`.
    pub fn q_beta(&self, beta: f64, f_gap_initial: f64) -> Result<f64> {
        if !(beta > self.beta_threshold()) {
            return Err(Error::invalid(format!(
                "β = {beta} does not exceed 1/(2μ₁λ) = {}",
                self.beta_threshold()
            )));
        }
        let noise = self.lambda_hi * self.mu2.powi(2) * beta.powi(2) * self.gamma.powi(2)
            / (2.0 * (2.0 * self.mu1 * self.lambda_lo * beta - 1.0));
        Ok(noise.max(f_gap_initial))
    }
}
