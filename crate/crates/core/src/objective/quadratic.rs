use rand::Rng;
use rand_distr::StandardNormal;

use crate::data::seeded_rng;
use crate::error::{Error, Result};
use crate::vecmath::DenseVector;

use super::{check_dim, Batch, Objective};

/// Default number of examples in the finite sum.
pub const DEFAULT_VIRTUAL_EXAMPLES: usize = 10_000;

/// `F(w) = ½ Σ_j d_j w_j²` written as a finite sum with per-example noise.
///
/// Example `i` contributes `f_i(w) = ½ wᵀDw + ξ_iᵀw` where the `ξ_i` are
/// drawn once from `N(0, σ²I)` and then centered, so `Σ ξ_i = 0` and the
/// full-batch value, gradient and minimizer `w* = 0` are those of the
/// noiseless quadratic. Sample gradients are `Dw + mean_{i∈S} ξ_i`;
/// Hessian-vector products are exact on every batch.
#[derive(Debug, Clone)]
pub struct NoisyQuadratic {
    curvature: Vec<f64>,
    noise_sigma: f64,
    seed: u64,
    num_examples: usize,
    /// Row-major `N × n` noise vectors.
    noise: Vec<f64>,
    noise_moment: f64,
}

impl NoisyQuadratic {
    pub fn new(curvature: Vec<f64>, noise_sigma: f64, seed: u64) -> Result<Self> {
        if curvature.is_empty() {
            return Err(Error::invalid("quadratic needs at least one coordinate"));
        }
        if let Some(d) = curvature.iter().find(|d| !(**d > 0.0) || !d.is_finite()) {
            return Err(Error::invalid(format!("curvature must be positive, got {d}")));
        }
        if !(noise_sigma >= 0.0) || !noise_sigma.is_finite() {
            return Err(Error::invalid("noise level must be ≥ 0"));
        }
        let mut q = NoisyQuadratic {
            curvature,
            noise_sigma,
            seed,
            num_examples: DEFAULT_VIRTUAL_EXAMPLES,
            noise: Vec::new(),
            noise_moment: 0.0,
        };
        q.draw_noise();
        Ok(q)
    }

    /// Curvatures evenly spaced on `[lo, hi]`.
    pub fn linspace(n: usize, lo: f64, hi: f64, noise_sigma: f64, seed: u64) -> Result<Self> {
        if n == 0 || !(lo <= hi) {
            return Err(Error::invalid("need n ≥ 1 and lo ≤ hi"));
        }
        let curvature = (0..n)
            .map(|i| if n == 1 { lo } else { lo + (hi - lo) * i as f64 / (n - 1) as f64 })
            .collect();
        Self::new(curvature, noise_sigma, seed)
    }

    /// Redraws the noise for a finite sum of `n` examples.
    pub fn with_virtual_examples(mut self, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("example count must be ≥ 1"));
        }
        self.num_examples = n;
        self.draw_noise();
        Ok(self)
    }

    fn draw_noise(&mut self) {
        let n = self.curvature.len();
        let count = self.num_examples;
        if self.noise_sigma == 0.0 {
            self.noise = Vec::new();
            self.noise_moment = 0.0;
            return;
        }
        let mut rng = seeded_rng(self.seed);
        let mut noise: Vec<f64> = (0..count * n)
            .map(|_| self.noise_sigma * rng.sample::<f64, _>(StandardNormal))
            .collect();
        for j in 0..n {
            let mean = (0..count).map(|i| noise[i * n + j]).sum::<f64>() / count as f64;
            for i in 0..count {
                noise[i * n + j] -= mean;
            }
        }
        self.noise_moment = noise.iter().map(|v| v * v).sum::<f64>() / count as f64;
        self.noise = noise;
    }

    pub fn curvature(&self) -> &[f64] {
        &self.curvature
    }

    pub fn noise_sigma(&self) -> f64 {
        self.noise_sigma
    }

    pub fn min_curvature(&self) -> f64 {
        self.curvature.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_curvature(&self) -> f64 {
        self.curvature.iter().copied().fold(0.0, f64::max)
    }

    /// `(1/N) Σ_i ‖ξ_i‖²`.
    pub fn noise_second_moment(&self) -> f64 {
        self.noise_moment
    }

    /// `E_i ‖∇f_i(w)‖² = ‖∇F(w)‖² + (1/N) Σ_i ‖ξ_i‖²` for a uniformly drawn example.
    pub fn expected_sq_gradient_norm(&self, w: &[f64]) -> f64 {
        let exact: f64 = self.curvature.iter().zip(w).map(|(d, x)| (d * x).powi(2)).sum();
        exact + self.noise_second_moment()
    }

    /// Mean noise vector over a batch, `None` when noiseless or full.
    fn batch_noise(&self, batch: Batch<'_>) -> Result<Option<DenseVector>> {
        let idx = batch.resolve(self.num_examples)?;
        if batch.is_full() || self.noise.is_empty() {
            return Ok(None);
        }
        let n = self.curvature.len();
        let mut mean = DenseVector::zeros(n);
        let mut count = 0usize;
        for i in idx {
            for (m, v) in mean.iter_mut().zip(&self.noise[i * n..(i + 1) * n]) {
                *m += v;
            }
            count += 1;
        }
        mean.scale(1.0 / count as f64);
        Ok(Some(mean))
    }
}

impl Objective for NoisyQuadratic {
    fn dim(&self) -> usize {
        self.curvature.len()
    }

    fn num_examples(&self) -> usize {
        self.num_examples
    }

    fn value_on(&self, w: &[f64], batch: Batch<'_>) -> Result<f64> {
        check_dim(self.dim(), w)?;
        let quad = 0.5 * self.curvature.iter().zip(w).map(|(d, x)| d * x * x).sum::<f64>();
        Ok(match self.batch_noise(batch)? {
            Some(xi) => quad + xi.iter().zip(w).map(|(a, b)| a * b).sum::<f64>(),
            None => quad,
        })
    }

    fn gradient_on(&self, w: &[f64], batch: Batch<'_>) -> Result<DenseVector> {
        check_dim(self.dim(), w)?;
        let mut g: DenseVector = self.curvature.iter().zip(w).map(|(d, x)| d * x).collect::<Vec<_>>().into();
        if let Some(xi) = self.batch_noise(batch)? {
            for (gi, v) in g.iter_mut().zip(xi.iter()) {
                *gi += v;
            }
        }
        Ok(g)
    }

    fn hessian_vector_on(&self, w: &[f64], s: &[f64], batch: Batch<'_>) -> Result<DenseVector> {
        check_dim(self.dim(), w)?;
        check_dim(self.dim(), s)?;
        batch.resolve(self.num_examples)?;
        Ok(self.curvature.iter().zip(s).map(|(d, x)| d * x).collect::<Vec<_>>().into())
    }
}
