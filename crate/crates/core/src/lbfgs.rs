//! Limited-memory BFGS: correction-pair storage, the curvature safeguard and
//! the two-loop recursion.
//!
//! The inverse-Hessian approximation `H_t` is the result of applying the
//! BFGS update
//!
//! ```text
//! H ← (I − ρ_j s_j y_jᵀ) H (I − ρ_j y_j s_jᵀ) + ρ_j s_j s_jᵀ,   ρ_j = 1 / y_jᵀs_j
//! ```
//!
//! to `H₀ = γI` for each stored pair, oldest first. `H_t` is never formed;
//! [`two_loop_apply`] computes `H_t g` in `O(Mn)`.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::objective::{Batch, Objective};
use crate::vecmath::{axpy, dot, DenseVector};

/// Default curvature threshold: pairs need `sᵀy ≥ 1e-8 · sᵀs`.
pub const DEFAULT_EPSILON_CURV: f64 = 1e-8;

/// One `(s, y)` pair with its cached inner products.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrectionPair {
    s: DenseVector,
    y: DenseVector,
    rho: f64,
    sy: f64,
    yy: f64,
    ss: f64,
}

impl CorrectionPair {
    /// Builds a pair, requiring finite entries and `sᵀy > 0`.
    pub fn new(s: DenseVector, y: DenseVector) -> Result<Self> {
        let sy = dot(&s, &y)?;
        if !(sy > 0.0) || !sy.is_finite() || !s.is_finite() || !y.is_finite() {
            return Err(Error::invalid(format!(
                "correction pair violates the curvature condition (sᵀy = {sy})"
            )));
        }
        let yy = y.norm_sq();
        let ss = s.norm_sq();
        Ok(CorrectionPair {
            s,
            y,
            rho: 1.0 / sy,
            sy,
            yy,
            ss,
        })
    }

    pub fn s(&self) -> &DenseVector {
        &self.s
    }

    pub fn y(&self) -> &DenseVector {
        &self.y
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn sy(&self) -> f64 {
        self.sy
    }

    pub fn yy(&self) -> f64 {
        self.yy
    }

    pub fn ss(&self) -> f64 {
        self.ss
    }

    /// `sᵀy / yᵀy`, the scaling of `H₀` this pair induces.
    pub fn scaling(&self) -> f64 {
        self.sy / self.yy
    }
}

/// Ring buffer of the `M` most recent correction pairs, oldest first.
///
/// The newest accepted pair is kept separately so that `M = 0` still yields
/// the scaling-only approximation `H_t = (s_tᵀy_t / y_tᵀy_t) I`.
#[derive(Debug, Clone)]
pub struct LbfgsMemory {
    capacity: usize,
    pairs: VecDeque<CorrectionPair>,
    newest: Option<CorrectionPair>,
    inserted: u64,
}

impl LbfgsMemory {
    pub fn new(capacity: usize) -> Self {
        LbfgsMemory {
            capacity,
            pairs: VecDeque::with_capacity(capacity),
            newest: None,
            inserted: 0,
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    /// Pairs currently used in the BFGS updates, `min(t, M)`.
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    /// True until the first pair has been inserted.
    pub fn is_empty(&self) -> bool {
        self.newest.is_none()
    }

    /// Total pairs ever inserted, including evicted ones.
    pub fn inserted(&self) -> u64 {
        self.inserted
    }

    pub fn newest(&self) -> Option<&CorrectionPair> {
        self.newest.as_ref()
    }

    /// Stored pairs, oldest first.
    pub fn pairs(&self) -> impl DoubleEndedIterator<Item = &CorrectionPair> + ExactSizeIterator {
        self.pairs.iter()
    }

    /// Appends `pair`, evicting the oldest when full.
    pub fn insert(&mut self, pair: CorrectionPair) {
        if self.capacity > 0 {
            if self.pairs.len() == self.capacity {
                self.pairs.pop_front();
            }
            self.pairs.push_back(pair.clone());
        }
        self.newest = Some(pair);
        self.inserted += 1;
    }

    pub fn clear(&mut self) {
        self.pairs.clear();
        self.newest = None;
    }
}

/// Why a candidate pair was not stored.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SkipReason {
    /// `s = 0`; no Hessian-vector product was evaluated.
    ZeroDisplacement,
    /// `sᵀy < ε·sᵀs`.
    WeakCurvature { sy: f64, ss: f64 },
    NonFinite,
}

#[derive(Debug, Clone, PartialEq)]
pub enum PairOutcome {
    Accepted(CorrectionPair),
    Skipped(SkipReason),
}

impl PairOutcome {
    pub fn is_accepted(&self) -> bool {
        matches!(self, PairOutcome::Accepted(_))
    }
}

/// Accepts `(s, y)` iff every entry is finite and `sᵀy ≥ ε·sᵀs` with `sᵀy > 0`.
pub fn accept_pair(s: DenseVector, y: DenseVector, epsilon_curv: f64) -> Result<PairOutcome> {
    let sy = dot(&s, &y)?;
    if !s.is_finite() || !y.is_finite() || !sy.is_finite() {
        return Ok(PairOutcome::Skipped(SkipReason::NonFinite));
    }
    let ss = s.norm_sq();
    if ss == 0.0 {
        return Ok(PairOutcome::Skipped(SkipReason::ZeroDisplacement));
    }
    if sy < epsilon_curv * ss || sy <= 0.0 {
        return Ok(PairOutcome::Skipped(SkipReason::WeakCurvature { sy, ss }));
    }
    Ok(PairOutcome::Accepted(CorrectionPair::new(s, y)?))
}

/// Forms `s = w̄_t − w̄_{t−1}` and `y = ∇̂²F(w̄_t) s` over the Hessian sample,
/// then applies [`accept_pair`].
///
/// A zero displacement is skipped before the oracle is called.
pub fn make_pair<O: Objective + ?Sized>(
    wbar: &[f64],
    wbar_prev: &[f64],
    oracle: &O,
    hessian_batch: &[usize],
    epsilon_curv: f64,
) -> Result<PairOutcome> {
    if hessian_batch.is_empty() {
        return Err(Error::EmptyBatch);
    }
    let s = DenseVector::from(wbar.to_vec()).sub(&DenseVector::from(wbar_prev.to_vec()))?;
    if s.is_zero() {
        return Ok(PairOutcome::Skipped(SkipReason::ZeroDisplacement));
    }
    let y = oracle.hessian_vector_on(wbar, &s, Batch::Sample(hessian_batch))?;
    accept_pair(s, y, epsilon_curv)
}

/// `H_t g` with `H₀` scaled by the newest pair's `sᵀy / yᵀy`.
pub fn two_loop_apply(mem: &LbfgsMemory, g: &[f64]) -> Result<DenseVector> {
    let gamma = mem.newest().ok_or(Error::EmptyMemory)?.scaling();
    two_loop_apply_scaled(mem, g, gamma)
}

/// `H_t g` with an explicit initial scaling `H₀ = γI`.
pub fn two_loop_apply_scaled(mem: &LbfgsMemory, g: &[f64], gamma: f64) -> Result<DenseVector> {
    if mem.is_empty() {
        return Err(Error::EmptyMemory);
    }
    let mut q = DenseVector::from(g.to_vec());
    let mut alphas = Vec::with_capacity(mem.len());
    for pair in mem.pairs().rev() {
        let alpha = pair.rho * dot(&pair.s, &q)?;
        axpy(-alpha, &pair.y, &mut q)?;
        alphas.push(alpha);
    }
    q.scale(gamma);
    for (pair, alpha) in mem.pairs().zip(alphas.into_iter().rev()) {
        let beta = pair.rho * dot(&pair.y, &q)?;
        axpy(alpha - beta, &pair.s, &mut q)?;
    }
    Ok(q)
}

/// Extremes of the Rayleigh-type ratios that bound the L-BFGS spectrum:
/// `yᵀs / sᵀs` and `‖y‖² / yᵀs` over the stored pairs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenBoundReport {
    pub min_curvature_ratio: f64,
    pub max_curvature_ratio: f64,
    pub min_scaling_ratio: f64,
    pub max_scaling_ratio: f64,
}

/// `None` when the memory holds no pairs.
pub fn eigen_bound_report(mem: &LbfgsMemory) -> Option<EigenBoundReport> {
    let pairs: Vec<&CorrectionPair> = if mem.len() > 0 {
        mem.pairs().collect()
    } else {
        mem.newest().into_iter().collect()
    };
    if pairs.is_empty() {
        return None;
    }
    let mut r = EigenBoundReport {
        min_curvature_ratio: f64::INFINITY,
        max_curvature_ratio: f64::NEG_INFINITY,
        min_scaling_ratio: f64::INFINITY,
        max_scaling_ratio: f64::NEG_INFINITY,
    };
    for p in pairs {
        let curv = p.sy / p.ss;
        let scal = p.yy / p.sy;
        r.min_curvature_ratio = r.min_curvature_ratio.min(curv);
        r.max_curvature_ratio = r.max_curvature_ratio.max(curv);
        r.min_scaling_ratio = r.min_scaling_ratio.min(scal);
        r.max_scaling_ratio = r.max_scaling_ratio.max(scal);
    }
    Some(r)
}
