//! SGD, SQN and oLBFGS, plus the `β/k` schedule and the run driver.
//!
//! All three share the iteration `w^{k+1} = w^k − (β/k) H_k ∇̂F(w^k)`:
//! SGD uses `H_k = I`, SQN builds `H_k` from correction pairs formed every
//! `L` iterations with sub-sampled Hessian-vector products on averaged
//! iterates, and oLBFGS forms a pair each iteration by gradient differencing
//! on the current sample.

mod olbfgs;
mod run;
mod sgd;
mod sqn;

use crate::data::RngStreams;
use crate::error::{Error, Result};
use crate::objective::Objective;
use crate::vecmath::DenseVector;

pub use olbfgs::{CurvatureSource, InitialScaling, OlbfgsParams, OlbfgsState, DEFAULT_FIRST_STEP_SCALE};
pub use run::{run, OptimizerConfig, RunOptions, RunOutput, Stop};
pub use sgd::{SgdParams, SgdState};
pub use sqn::{SqnParams, SqnState};

/// Diminishing step length `α^k = β/k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepSchedule {
    beta: f64,
}

impl StepSchedule {
    pub fn new(beta: f64) -> Result<Self> {
        if !(beta > 0.0) || !beta.is_finite() {
            return Err(Error::invalid(format!("β must be positive, got {beta}")));
        }
        Ok(StepSchedule { beta })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// `β/k` for `k ≥ 1`.
    pub fn step_length(&self, k: u64) -> Result<f64> {
        if k < 1 {
            return Err(Error::invalid("iteration counter starts at 1"));
        }
        Ok(self.beta / k as f64)
    }
}

/// Floating-point work model, in operations where a multiply-add counts once:
/// a batch gradient costs `2bn`, a two-loop recursion `4Mn` and a
/// sub-sampled Hessian-vector product `3b_H n`.
///
/// Amortized over `L` iterations an SQN step costs
/// `2bn + 4Mn + 3b_H n / L`, so relative to a `2bn` gradient step the ratio
/// is `1 + 2M/b + 3b_H/(2bL)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WorkModel;

impl WorkModel {
    pub fn gradient(b: usize, n: usize) -> f64 {
        2.0 * b as f64 * n as f64
    }

    pub fn two_loop(m: usize, n: usize) -> f64 {
        4.0 * m as f64 * n as f64
    }

    pub fn hessian_vector(b_h: usize, n: usize) -> f64 {
        3.0 * b_h as f64 * n as f64
    }

    pub fn sqn_amortized(b: usize, b_h: usize, l: usize, m: usize, n: usize) -> f64 {
        Self::gradient(b, n) + Self::two_loop(m, n) + Self::hessian_vector(b_h, n) / l as f64
    }

    /// Amortized SQN cost over the cost of one batch gradient.
    pub fn sqn_to_gradient_ratio(b: usize, b_h: usize, l: usize, m: usize) -> f64 {
        Self::sqn_amortized(b, b_h, l, m, 1) / Self::gradient(b, 1)
    }
}

/// Cumulative cost counters of a run.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Accounting {
    /// Accessed data points: examples touched by gradient and Hessian evaluations.
    pub adp: u64,
    /// Work in the units of [`WorkModel`].
    pub work: f64,
    pub gradient_evals: u64,
    /// Iterations whose direction came from the two-loop recursion.
    pub quasi_newton_steps: u64,
    pub hessian_vector_evals: u64,
    pub pairs_accepted: u64,
    pub pairs_skipped: u64,
}

impl Accounting {
    pub(crate) fn charge_gradient(&mut self, b: usize, n: usize) {
        self.adp += b as u64;
        self.work += WorkModel::gradient(b, n);
        self.gradient_evals += 1;
    }

    pub(crate) fn charge_two_loop(&mut self, m: usize, n: usize) {
        self.work += WorkModel::two_loop(m, n);
        self.quasi_newton_steps += 1;
    }

    pub(crate) fn charge_hessian_vector(&mut self, b_h: usize, n: usize) {
        self.adp += b_h as u64;
        self.work += WorkModel::hessian_vector(b_h, n);
        self.hessian_vector_evals += 1;
    }
}

/// The most recent stochastic gradient, kept for the error monitors.
#[derive(Debug, Clone)]
pub struct GradientProbe {
    pub w: DenseVector,
    pub batch: Vec<usize>,
    pub gradient: DenseVector,
}

/// The most recent curvature product `y = ∇̂²F(w̄) s`.
#[derive(Debug, Clone)]
pub struct CurvatureProbe {
    pub point: DenseVector,
    pub s: DenseVector,
    pub batch: Vec<usize>,
    pub y: DenseVector,
}

/// Common interface the run driver uses.
pub trait Optimizer {
    /// Performs one iteration, advancing `k` by one.
    fn step(&mut self, oracle: &dyn Objective, streams: &mut RngStreams) -> Result<()>;

    fn iterate(&self) -> &DenseVector;

    /// Completed iterations.
    fn iterations(&self) -> u64;

    fn accounting(&self) -> &Accounting;

    /// Gradient batch size.
    fn batch_size(&self) -> usize;

    fn last_gradient(&self) -> Option<&GradientProbe>;

    /// Takes the curvature probe recorded since the previous call.
    fn take_curvature_probe(&mut self) -> Option<CurvatureProbe>;
}
