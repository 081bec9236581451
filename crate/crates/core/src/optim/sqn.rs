use crate::data::{EpochSampler, HessianSampler, RngStreams};
use crate::error::{Error, Result};
use crate::lbfgs::{make_pair, two_loop_apply, LbfgsMemory, PairOutcome, SkipReason, DEFAULT_EPSILON_CURV};
use crate::objective::{Batch, Objective};
use crate::vecmath::{axpy, DenseVector};

use super::{Accounting, CurvatureProbe, GradientProbe, Optimizer, StepSchedule};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SqnParams {
    /// Gradient batch size `b`.
    pub b: usize,
    /// Hessian batch size `b_H`.
    pub b_h: usize,
    /// Iterations between correction pairs.
    pub l: usize,
    /// L-BFGS memory; 0 keeps only the scaling `(sᵀy / yᵀy) I`.
    pub m: usize,
    pub beta: f64,
    pub epsilon_curv: f64,
}

impl SqnParams {
    pub fn new(b: usize, b_h: usize, l: usize, m: usize, beta: f64) -> Self {
        SqnParams {
            b,
            b_h,
            l,
            m,
            beta,
            epsilon_curv: DEFAULT_EPSILON_CURV,
        }
    }

    pub fn validate(&self, num_examples: usize) -> Result<()> {
        StepSchedule::new(self.beta)?;
        if self.b == 0 || self.b > num_examples {
            return Err(Error::invalid(format!(
                "batch size {} outside 1..={num_examples}",
                self.b
            )));
        }
        if self.b_h == 0 || self.b_h > num_examples {
            return Err(Error::invalid(format!(
                "Hessian batch size {} outside 1..={num_examples}",
                self.b_h
            )));
        }
        if self.l == 0 {
            return Err(Error::invalid("update spacing L must be ≥ 1"));
        }
        if !(self.epsilon_curv >= 0.0) {
            return Err(Error::invalid("curvature threshold must be ≥ 0"));
        }
        Ok(())
    }
}

/// Stochastic quasi-Newton iteration.
///
/// Each iteration draws a gradient batch and adds `w^k` to a running sum.
/// The first `2L` iterations are plain gradient steps; afterwards the step is
/// `−(β/k) H_t ∇̂F(w^k)` via the two-loop recursion. Every `L` iterations the
/// sum is averaged into `w̄_t`; from the second average on, a pair
/// `s = w̄_t − w̄_{t−1}`, `y = ∇̂²F(w̄_t) s` is formed on a fresh Hessian
/// batch.
///
/// A rejected pair leaves the memory unchanged but still advances `t` and
/// makes `w̄_t` the anchor for the next displacement, so consecutive
/// averaging windows stay disjoint.
#[derive(Debug, Clone)]
pub struct SqnState {
    params: SqnParams,
    schedule: StepSchedule,
    w: DenseVector,
    k: u64,
    /// Number of averages taken minus one; `-1` before the first.
    t: i64,
    wbar_sum: DenseVector,
    wbar_prev: Option<DenseVector>,
    mem: LbfgsMemory,
    accounting: Accounting,
    gradient_probe: Option<GradientProbe>,
    curvature_probe: Option<CurvatureProbe>,
    last_skip: Option<SkipReason>,
}

impl SqnState {
    pub fn new(w0: DenseVector, params: SqnParams) -> Result<Self> {
        if params.l == 0 {
            return Err(Error::invalid("update spacing L must be ≥ 1"));
        }
        let n = w0.len();
        Ok(SqnState {
            schedule: StepSchedule::new(params.beta)?,
            params,
            w: w0,
            k: 0,
            t: -1,
            wbar_sum: DenseVector::zeros(n),
            wbar_prev: None,
            mem: LbfgsMemory::new(params.m),
            accounting: Accounting::default(),
            gradient_probe: None,
            curvature_probe: None,
            last_skip: None,
        })
    }

    pub fn params(&self) -> &SqnParams {
        &self.params
    }

    pub fn memory(&self) -> &LbfgsMemory {
        &self.mem
    }

    pub fn pair_counter(&self) -> i64 {
        self.t
    }

    /// The most recent average `w̄_t`, once one exists.
    pub fn last_average(&self) -> Option<&DenseVector> {
        self.wbar_prev.as_ref()
    }

    pub fn last_skip(&self) -> Option<SkipReason> {
        self.last_skip
    }

    pub fn sqn_step(
        &mut self,
        oracle: &dyn Objective,
        grad_sampler: &mut EpochSampler,
        hess_sampler: &mut HessianSampler,
    ) -> Result<()> {
        let n = oracle.dim();
        let k = self.k + 1;
        let alpha = self.schedule.step_length(k)?;
        let l = self.params.l as u64;

        let batch = grad_sampler.next_batch(self.params.b)?;
        let g = oracle.gradient_on(&self.w, Batch::Sample(&batch))?;
        self.accounting.charge_gradient(self.params.b, n);
        axpy(1.0, &self.w, &mut self.wbar_sum)?;

        let w_prev = self.w.clone();
        if k <= 2 * l || self.mem.is_empty() {
            axpy(-alpha, &g, &mut self.w)?;
        } else {
            let direction = two_loop_apply(&self.mem, &g)?;
            self.accounting.charge_two_loop(self.params.m, n);
            axpy(-alpha, &direction, &mut self.w)?;
        }
        self.gradient_probe = Some(GradientProbe {
            w: w_prev,
            batch,
            gradient: g,
        });

        if k % l == 0 {
            self.t += 1;
            let mut wbar = std::mem::replace(&mut self.wbar_sum, DenseVector::zeros(n));
            wbar.scale(1.0 / l as f64);
            if self.t > 0 {
                let prev = self
                    .wbar_prev
                    .take()
                    .expect("an average exists once t > 0");
                self.form_pair(oracle, hess_sampler, &wbar, prev)?;
            }
            self.wbar_prev = Some(wbar);
        }
        self.k = k;
        Ok(())
    }

    fn form_pair(
        &mut self,
        oracle: &dyn Objective,
        hess_sampler: &mut HessianSampler,
        wbar: &DenseVector,
        wbar_prev: DenseVector,
    ) -> Result<()> {
        let hess_batch = hess_sampler.sample(self.params.b_h)?;
        let outcome = make_pair(wbar, &wbar_prev, oracle, &hess_batch, self.params.epsilon_curv)?;
        if outcome != PairOutcome::Skipped(SkipReason::ZeroDisplacement) {
            self.accounting
                .charge_hessian_vector(self.params.b_h, oracle.dim());
        }
        match outcome {
            PairOutcome::Accepted(pair) => {
                self.curvature_probe = Some(CurvatureProbe {
                    point: wbar.clone(),
                    s: pair.s().clone(),
                    batch: hess_batch,
                    y: pair.y().clone(),
                });
                self.mem.insert(pair);
                self.accounting.pairs_accepted += 1;
                self.last_skip = None;
            }
            PairOutcome::Skipped(reason) => {
                self.accounting.pairs_skipped += 1;
                self.last_skip = Some(reason);
            }
        }
        Ok(())
    }
}

impl Optimizer for SqnState {
    fn step(&mut self, oracle: &dyn Objective, streams: &mut RngStreams) -> Result<()> {
        self.sqn_step(oracle, &mut streams.grad, &mut streams.hess)
    }

    fn iterate(&self) -> &DenseVector {
        &self.w
    }

    fn iterations(&self) -> u64 {
        self.k
    }

    fn accounting(&self) -> &Accounting {
        &self.accounting
    }

    fn batch_size(&self) -> usize {
        self.params.b
    }

    fn last_gradient(&self) -> Option<&GradientProbe> {
        self.gradient_probe.as_ref()
    }

    fn take_curvature_probe(&mut self) -> Option<CurvatureProbe> {
        self.curvature_probe.take()
    }
}
