use std::collections::VecDeque;

use crate::data::{EpochSampler, RngStreams};
use crate::error::{Error, Result};
use crate::lbfgs::{accept_pair, two_loop_apply, two_loop_apply_scaled, LbfgsMemory, PairOutcome, DEFAULT_EPSILON_CURV};
use crate::objective::{Batch, Objective};
use crate::vecmath::{axpy, DenseVector};

use super::{Accounting, CurvatureProbe, GradientProbe, Optimizer, StepSchedule};

/// Scale applied to the very first step, `w¹ = w⁰ − ε α¹ ∇̂F(w⁰)`.
pub const DEFAULT_FIRST_STEP_SCALE: f64 = 1e-6;

/// How `y_k` is computed from the current sample `S_k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CurvatureSource {
    /// `y = ∇̂F_{S_k}(w^{k+1}) − ∇̂F_{S_k}(w^k)`.
    GradientDifference,
    /// `y = ∇̂²F_{S_k}(w^{k+1}) s`, a sub-sampled Hessian-vector product on
    /// the same sample (SQN-style curvature with `L = 1`, `b_H = b`).
    HessianVector,
}

/// Initial matrix `H₀ = γI` of each two-loop recursion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitialScaling {
    /// `γ` is the mean of `sᵀy / yᵀy` over the last `M` accepted pairs.
    Averaged,
    /// `γ = s_tᵀy_t / y_tᵀy_t` of the newest pair.
    Newest,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OlbfgsParams {
    pub b: usize,
    pub m: usize,
    pub beta: f64,
    pub first_step_scale: f64,
    pub epsilon_curv: f64,
    pub curvature: CurvatureSource,
    pub scaling: InitialScaling,
}

impl OlbfgsParams {
    pub fn new(b: usize, m: usize, beta: f64) -> Self {
        OlbfgsParams {
            b,
            m,
            beta,
            first_step_scale: DEFAULT_FIRST_STEP_SCALE,
            epsilon_curv: DEFAULT_EPSILON_CURV,
            curvature: CurvatureSource::GradientDifference,
            scaling: InitialScaling::Averaged,
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
        if self.m == 0 {
            return Err(Error::invalid("oLBFGS needs memory M ≥ 1"));
        }
        if !(self.first_step_scale > 0.0) {
            return Err(Error::invalid("first-step scale must be positive"));
        }
        Ok(())
    }
}

/// Online L-BFGS: one correction pair per iteration, formed on the same
/// sample as the step's gradient. No damping is applied to `y`.
///
/// Each iteration evaluates two gradients on `S_k` (or a gradient and a
/// Hessian-vector product), so it accesses `2b` data points.
#[derive(Debug, Clone)]
pub struct OlbfgsState {
    params: OlbfgsParams,
    schedule: StepSchedule,
    w: DenseVector,
    k: u64,
    mem: LbfgsMemory,
    scalings: VecDeque<f64>,
    accounting: Accounting,
    gradient_probe: Option<GradientProbe>,
    curvature_probe: Option<CurvatureProbe>,
}

impl OlbfgsState {
    pub fn new(w0: DenseVector, params: OlbfgsParams) -> Result<Self> {
        if params.m == 0 {
            return Err(Error::invalid("oLBFGS needs memory M ≥ 1"));
        }
        Ok(OlbfgsState {
            schedule: StepSchedule::new(params.beta)?,
            params,
            w: w0,
            k: 0,
            mem: LbfgsMemory::new(params.m),
            scalings: VecDeque::with_capacity(params.m),
            accounting: Accounting::default(),
            gradient_probe: None,
            curvature_probe: None,
        })
    }

    pub fn params(&self) -> &OlbfgsParams {
        &self.params
    }

    pub fn memory(&self) -> &LbfgsMemory {
        &self.mem
    }

    /// Current `γ` for `H₀`, if any pair has been accepted.
    pub fn initial_scaling(&self) -> Option<f64> {
        match self.params.scaling {
            InitialScaling::Newest => self.mem.newest().map(|p| p.scaling()),
            InitialScaling::Averaged if self.scalings.is_empty() => None,
            InitialScaling::Averaged => {
                Some(self.scalings.iter().sum::<f64>() / self.scalings.len() as f64)
            }
        }
    }

    pub fn olbfgs_step(&mut self, oracle: &dyn Objective, sampler: &mut EpochSampler) -> Result<()> {
        let n = oracle.dim();
        let b = self.params.b;
        let k = self.k + 1;
        let alpha = self.schedule.step_length(k)?;

        let batch = sampler.next_batch(b)?;
        let g = oracle.gradient_on(&self.w, Batch::Sample(&batch))?;
        self.accounting.charge_gradient(b, n);

        let direction = match self.initial_scaling() {
            Some(gamma) => {
                self.accounting.charge_two_loop(self.params.m, n);
                match self.params.scaling {
                    InitialScaling::Newest => two_loop_apply(&self.mem, &g)?,
                    InitialScaling::Averaged => two_loop_apply_scaled(&self.mem, &g, gamma)?,
                }
            }
            None if k == 1 => g.scaled(self.params.first_step_scale),
            None => g.clone(),
        };
        let mut w_next = self.w.clone();
        axpy(-alpha, &direction, &mut w_next)?;
        let s = w_next.sub(&self.w)?;

        let y = match self.params.curvature {
            CurvatureSource::GradientDifference => {
                let g_next = oracle.gradient_on(&w_next, Batch::Sample(&batch))?;
                self.accounting.charge_gradient(b, n);
                g_next.sub(&g)?
            }
            CurvatureSource::HessianVector => {
                let hv = oracle.hessian_vector_on(&w_next, &s, Batch::Sample(&batch))?;
                self.accounting.charge_hessian_vector(b, n);
                hv
            }
        };

        match accept_pair(s, y, self.params.epsilon_curv)? {
            PairOutcome::Accepted(pair) => {
                self.curvature_probe = Some(CurvatureProbe {
                    point: w_next.clone(),
                    s: pair.s().clone(),
                    batch: batch.clone(),
                    y: pair.y().clone(),
                });
                if self.scalings.len() == self.params.m {
                    self.scalings.pop_front();
                }
                self.scalings.push_back(pair.scaling());
                self.mem.insert(pair);
                self.accounting.pairs_accepted += 1;
            }
            PairOutcome::Skipped(_) => self.accounting.pairs_skipped += 1,
        }

        let w_prev = std::mem::replace(&mut self.w, w_next);
        self.gradient_probe = Some(GradientProbe {
            w: w_prev,
            batch,
            gradient: g,
        });
        self.k = k;
        Ok(())
    }
}

impl Optimizer for OlbfgsState {
    fn step(&mut self, oracle: &dyn Objective, streams: &mut RngStreams) -> Result<()> {
        self.olbfgs_step(oracle, &mut streams.grad)
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
