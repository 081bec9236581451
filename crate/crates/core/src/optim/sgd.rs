use crate::data::{EpochSampler, RngStreams};
use crate::error::{Error, Result};
use crate::objective::{Batch, Objective};
use crate::vecmath::{axpy, DenseVector};

use super::{Accounting, CurvatureProbe, GradientProbe, Optimizer, StepSchedule};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SgdParams {
    /// Gradient batch size `b`.
    pub b: usize,
    pub beta: f64,
}

impl SgdParams {
    pub fn validate(&self, num_examples: usize) -> Result<()> {
        StepSchedule::new(self.beta)?;
        if self.b == 0 || self.b > num_examples {
            return Err(Error::invalid(format!(
                "batch size {} outside 1..={num_examples}",
                self.b
            )));
        }
        Ok(())
    }
}

/// Plain stochastic gradient descent, `w ← w − (β/k) ∇̂F(w)`.
#[derive(Debug, Clone)]
pub struct SgdState {
    params: SgdParams,
    schedule: StepSchedule,
    w: DenseVector,
    k: u64,
    accounting: Accounting,
    probe: Option<GradientProbe>,
}

impl SgdState {
    pub fn new(w0: DenseVector, params: SgdParams) -> Result<Self> {
        Ok(SgdState {
            schedule: StepSchedule::new(params.beta)?,
            params,
            w: w0,
            k: 0,
            accounting: Accounting::default(),
            probe: None,
        })
    }

    pub fn params(&self) -> &SgdParams {
        &self.params
    }

    pub fn sgd_step(&mut self, oracle: &dyn Objective, sampler: &mut EpochSampler) -> Result<()> {
        let k = self.k + 1;
        let alpha = self.schedule.step_length(k)?;
        let batch = sampler.next_batch(self.params.b)?;
        let g = oracle.gradient_on(&self.w, Batch::Sample(&batch))?;
        self.accounting.charge_gradient(self.params.b, oracle.dim());
        let w_prev = self.w.clone();
        axpy(-alpha, &g, &mut self.w)?;
        self.probe = Some(GradientProbe {
            w: w_prev,
            batch,
            gradient: g,
        });
        self.k = k;
        Ok(())
    }
}

impl Optimizer for SgdState {
    fn step(&mut self, oracle: &dyn Objective, streams: &mut RngStreams) -> Result<()> {
        self.sgd_step(oracle, &mut streams.grad)
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
        self.probe.as_ref()
    }

    fn take_curvature_probe(&mut self) -> Option<CurvatureProbe> {
        None
    }
}
