use crate::data::{RngStreams, Seeds};
use crate::diagnostics::{relative_error, test_metrics, RunRecord};
use crate::error::{Error, Result};
use crate::objective::{Batch, Objective};
use crate::vecmath::DenseVector;

use super::{
    Accounting, CurvatureProbe, OlbfgsParams, OlbfgsState, Optimizer, SgdParams, SgdState,
    SqnParams, SqnState,
};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OptimizerConfig {
    Sgd(SgdParams),
    Sqn(SqnParams),
    Olbfgs(OlbfgsParams),
}

impl OptimizerConfig {
    pub fn validate(&self, num_examples: usize) -> Result<()> {
        match self {
            OptimizerConfig::Sgd(p) => p.validate(num_examples),
            OptimizerConfig::Sqn(p) => p.validate(num_examples),
            OptimizerConfig::Olbfgs(p) => p.validate(num_examples),
        }
    }

    pub fn batch_size(&self) -> usize {
        match self {
            OptimizerConfig::Sgd(p) => p.b,
            OptimizerConfig::Sqn(p) => p.b,
            OptimizerConfig::Olbfgs(p) => p.b,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            OptimizerConfig::Sgd(_) => "sgd",
            OptimizerConfig::Sqn(_) => "sqn",
            OptimizerConfig::Olbfgs(_) => "olbfgs",
        }
    }

    fn build(&self, w0: DenseVector) -> Result<Box<dyn Optimizer>> {
        Ok(match *self {
            OptimizerConfig::Sgd(p) => Box::new(SgdState::new(w0, p)?),
            OptimizerConfig::Sqn(p) => Box::new(SqnState::new(w0, p)?),
            OptimizerConfig::Olbfgs(p) => Box::new(OlbfgsState::new(w0, p)?),
        })
    }
}

/// When a run ends.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stop {
    /// `⌈E·N/b⌉` iterations.
    Epochs(u64),
    Iterations(u64),
    /// Stop at the first iteration whose cumulative adp reaches the budget.
    AccessedPoints(u64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOptions {
    pub stop: Stop,
    /// Record every this many iterations (and at the last one); 0 records only
    /// the start and the end.
    pub checkpoint_every: u64,
    /// Compute `grad_error` and `hv_error` at checkpoints.
    pub monitor_errors: bool,
    pub seeds: Seeds,
    /// Starting point; zeros when `None`.
    pub w0: Option<DenseVector>,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            stop: Stop::Epochs(4),
            checkpoint_every: 20,
            monitor_errors: false,
            seeds: Seeds::default(),
            w0: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub records: Vec<RunRecord>,
    pub w: DenseVector,
    pub accounting: Accounting,
}

/// Runs one optimizer from `options.w0` and records metrics at checkpoints,
/// starting with `k = 0`.
///
/// The monitors reuse the optimizer's stored gradient and curvature products,
/// so enabling them does not change the trajectory.
pub fn run(
    config: &OptimizerConfig,
    oracle: &dyn Objective,
    test: Option<&dyn Objective>,
    options: &RunOptions,
) -> Result<RunOutput> {
    let n_examples = oracle.num_examples();
    config.validate(n_examples)?;
    if let Some(t) = test {
        if t.dim() != oracle.dim() {
            return Err(Error::DimensionMismatch {
                expected: oracle.dim(),
                found: t.dim(),
            });
        }
    }
    let w0 = match &options.w0 {
        Some(w) if w.len() != oracle.dim() => {
            return Err(Error::DimensionMismatch {
                expected: oracle.dim(),
                found: w.len(),
            })
        }
        Some(w) => w.clone(),
        None => DenseVector::zeros(oracle.dim()),
    };
    let max_iters = match options.stop {
        Stop::Epochs(e) => (e * n_examples as u64).div_ceil(config.batch_size() as u64),
        Stop::Iterations(k) => k,
        Stop::AccessedPoints(_) => u64::MAX,
    };

    let mut opt = config.build(w0)?;
    let mut streams = RngStreams::new(n_examples, options.seeds)?;
    let mut last_curvature: Option<CurvatureProbe> = None;
    let mut records = vec![record(opt.as_ref(), oracle, test, None, false)?];

    loop {
        let k = opt.iterations();
        let done = match options.stop {
            Stop::AccessedPoints(budget) => opt.accounting().adp >= budget,
            _ => k >= max_iters,
        };
        if done {
            break;
        }
        opt.step(oracle, &mut streams)?;
        let k = k + 1;
        if !opt.iterate().is_finite() {
            return Err(Error::Diverged { k });
        }
        if let Some(p) = opt.take_curvature_probe() {
            last_curvature = Some(p);
        }
        let last = match options.stop {
            Stop::AccessedPoints(budget) => opt.accounting().adp >= budget,
            _ => k >= max_iters,
        };
        if last || (options.checkpoint_every > 0 && k % options.checkpoint_every == 0) {
            records.push(record(
                opt.as_ref(),
                oracle,
                test,
                last_curvature.as_ref(),
                options.monitor_errors,
            )?);
        }
    }

    Ok(RunOutput {
        records,
        w: opt.iterate().clone(),
        accounting: *opt.accounting(),
    })
}

fn record(
    opt: &dyn Optimizer,
    oracle: &dyn Objective,
    test: Option<&dyn Objective>,
    curvature: Option<&CurvatureProbe>,
    monitor: bool,
) -> Result<RunRecord> {
    let w = opt.iterate();
    let acc = opt.accounting();
    let metrics = test.map(|t| test_metrics(t, w)).transpose()?;
    let probe = opt.last_gradient();

    let grad_error = match (monitor, probe) {
        (true, Some(p)) => {
            let full = oracle.gradient_on(&p.w, Batch::Full)?;
            relative_error(&p.gradient, &full, "full gradient is zero").ok()
        }
        _ => None,
    };
    let hv_error = match (monitor, curvature) {
        (true, Some(c)) => {
            let full = oracle.hessian_vector_on(&c.point, &c.s, Batch::Full)?;
            relative_error(&c.y, &full, "full Hessian-vector product is zero").ok()
        }
        _ => None,
    };

    Ok(RunRecord {
        k: opt.iterations(),
        adp: acc.adp,
        work: acc.work,
        train_fx: oracle.value_on(w, Batch::Full)?,
        test_fx: metrics.map(|m| m.test_fx),
        test_accuracy: metrics.and_then(|m| m.test_accuracy),
        grad_error,
        hv_error,
        grad_norm: probe.map(|p| p.gradient.norm()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objective::NoisyQuadratic;

    fn quad() -> NoisyQuadratic {
        NoisyQuadratic::linspace(5, 1.0, 4.0, 0.1, 11).unwrap()
    }

    #[test]
    fn epochs_translate_to_iterations() {
        let q = quad().with_virtual_examples(103).unwrap();
        let cfg = OptimizerConfig::Sgd(SgdParams { b: 10, beta: 1.0 });
        let opts = RunOptions {
            stop: Stop::Epochs(2),
            checkpoint_every: 7,
            ..RunOptions::default()
        };
        let out = run(&cfg, &q, None, &opts).unwrap();
        let ks: Vec<u64> = out.records.iter().map(|r| r.k).collect();
        assert_eq!(ks, vec![0, 7, 14, 21]);
        assert_eq!(out.accounting.adp, 21 * 10);
    }

    #[test]
    fn adp_budget_stops_at_first_crossing() {
        let q = quad();
        let cfg = OptimizerConfig::Sqn(SqnParams::new(50, 600, 10, 10, 2.0));
        let opts = RunOptions {
            stop: Stop::AccessedPoints(5_000),
            checkpoint_every: 0,
            ..RunOptions::default()
        };
        let out = run(&cfg, &q, None, &opts).unwrap();
        let last = out.records.last().unwrap();
        assert!(last.adp >= 5_000);
        assert_eq!(out.records.len(), 2);
        // 60 gradient batches and 5 Hessian batches reach 6000; 59 reach < 5000
        // only once the last Hessian product is counted.
        assert!(last.adp - 5_000 < 650);
    }

    #[test]
    fn monitors_do_not_change_the_trajectory() {
        let q = quad();
        let cfg = OptimizerConfig::Sqn(SqnParams::new(20, 100, 5, 3, 1.0));
        let base = RunOptions {
            stop: Stop::Iterations(200),
            checkpoint_every: 10,
            ..RunOptions::default()
        };
        let monitored = RunOptions {
            monitor_errors: true,
            ..base.clone()
        };
        let a = run(&cfg, &q, None, &base).unwrap();
        let b = run(&cfg, &q, None, &monitored).unwrap();
        assert_eq!(a.w, b.w);
        for (x, y) in a.records.iter().zip(&b.records) {
            assert_eq!(x.train_fx, y.train_fx);
        }
        assert!(b.records.last().unwrap().grad_error.unwrap() > 0.0);
        // Hessian-vector products of a quadratic are exact.
        assert_eq!(b.records.last().unwrap().hv_error, Some(0.0));
        assert!(a.records.iter().all(|r| r.grad_error.is_none()));
    }

    #[test]
    fn invalid_configurations_are_rejected_before_running() {
        let q = quad().with_virtual_examples(100).unwrap();
        let bad = [
            OptimizerConfig::Sqn(SqnParams::new(10, 101, 5, 3, 1.0)),
            OptimizerConfig::Sqn(SqnParams::new(10, 0, 5, 3, 1.0)),
            OptimizerConfig::Sqn(SqnParams::new(10, 50, 0, 3, 1.0)),
            OptimizerConfig::Sgd(SgdParams { b: 0, beta: 1.0 }),
            OptimizerConfig::Olbfgs(OlbfgsParams::new(10, 0, 1.0)),
        ];
        for cfg in bad {
            assert!(run(&cfg, &q, None, &RunOptions::default()).is_err(), "{cfg:?}");
        }
        let wrong_w0 = RunOptions {
            w0: Some(DenseVector::zeros(4)),
            ..RunOptions::default()
        };
        let cfg = OptimizerConfig::Sgd(SgdParams { b: 10, beta: 1.0 });
        assert!(matches!(
            run(&cfg, &q, None, &wrong_w0),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn divergence_is_reported() {
        let q = NoisyQuadratic::new(vec![1e3], 0.0, 0).unwrap();
        let cfg = OptimizerConfig::Sgd(SgdParams { b: 1, beta: 1e300 });
        let opts = RunOptions {
            stop: Stop::Iterations(50),
            w0: Some(vec![1.0].into()),
            ..RunOptions::default()
        };
        assert!(matches!(run(&cfg, &q, None, &opts), Err(Error::Diverged { .. })));
    }
}
