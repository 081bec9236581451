#![allow(dead_code)]

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use sqn::lbfgs::{CorrectionPair, LbfgsMemory};

pub fn to_dvec(v: &[f64]) -> DVector<f64> {
    DVector::from_column_slice(v)
}

/// Inverse-Hessian approximation built as a dense matrix: start from
/// `(sᵀy / yᵀy) I` of the newest pair, then apply
/// `H ← (I − ρ s yᵀ) H (I − ρ y sᵀ) + ρ s sᵀ` for each stored pair, oldest first.
pub fn explicit_h(mem: &LbfgsMemory, n: usize) -> DMatrix<f64> {
    let newest = mem.newest().expect("memory holds a pair");
    let mut h = DMatrix::<f64>::identity(n, n) * newest.scaling();
    let eye = DMatrix::<f64>::identity(n, n);
    for p in mem.pairs() {
        let s = to_dvec(p.s());
        let y = to_dvec(p.y());
        let rho = 1.0 / s.dot(&y);
        let left = &eye - rho * &s * y.transpose();
        let right = &eye - rho * &y * s.transpose();
        h = &left * &h * &right + rho * &s * s.transpose();
    }
    h
}

/// Sorted eigenvalues of the symmetric part of `m`.
pub fn sym_eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    let sym = (m + m.transpose()) * 0.5;
    let mut ev: Vec<f64> = SymmetricEigen::new(sym).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

pub fn normal_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.sample(StandardNormal)).collect()
}

/// Random symmetric positive definite matrix `BᵀB + shift·I`.
pub fn random_spd(rng: &mut ChaCha8Rng, n: usize, shift: f64) -> DMatrix<f64> {
    let b = DMatrix::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal));
    b.transpose() * &b + DMatrix::identity(n, n) * shift
}

/// Memory of capacity `m` filled with `count` pairs `(s, A s)` for random
/// SPD `A` drawn per pair, so every pair has positive curvature.
pub fn random_memory(rng: &mut ChaCha8Rng, n: usize, m: usize, count: usize) -> LbfgsMemory {
    let mut mem = LbfgsMemory::new(m);
    for _ in 0..count {
        let a = random_spd(rng, n, 0.1);
        let s = to_dvec(&normal_vec(rng, n));
        let y = &a * &s;
        let pair = CorrectionPair::new(s.as_slice().to_vec().into(), y.as_slice().to_vec().into())
            .expect("positive curvature");
        mem.insert(pair);
    }
    mem
}

pub fn rel_diff(a: &[f64], b: &[f64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let den: f64 = b.iter().map(|y| y * y).sum::<f64>().sqrt();
    if den == 0.0 {
        num
    } else {
        num / den
    }
}

/// Least-squares slope of `y` against `x`.
pub fn ols_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}
