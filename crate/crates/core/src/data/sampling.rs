use rand::seq::{index, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Portable seeded generator used for every random stream in the crate.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Seeds for the three independent random streams of a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Seeds {
    /// Data generation and train/test splitting.
    pub data: u64,
    /// Gradient batch selection.
    pub grad: u64,
    /// Hessian batch selection.
    pub hess: u64,
}

impl Default for Seeds {
    fn default() -> Self {
        Seeds {
            data: 1,
            grad: 2,
            hess: 3,
        }
    }
}

/// The gradient and Hessian samplers of one run, built from [`Seeds`].
#[derive(Debug, Clone)]
pub struct RngStreams {
    pub grad: EpochSampler,
    pub hess: HessianSampler,
}

impl RngStreams {
    pub fn new(num_examples: usize, seeds: Seeds) -> Result<Self> {
        Ok(RngStreams {
            grad: EpochSampler::new(num_examples, seeds.grad)?,
            hess: HessianSampler::new(num_examples, seeds.hess)?,
        })
    }
}

/// Draws gradient batches without replacement, one shuffled epoch at a time.
///
/// A batch that runs past the end of the current permutation takes the
/// remaining indices and continues in a freshly shuffled permutation, so
/// every call returns exactly `b` indices.
#[derive(Debug, Clone)]
pub struct EpochSampler {
    permutation: Vec<usize>,
    cursor: usize,
    epochs_started: u64,
    rng: ChaCha8Rng,
}

impl EpochSampler {
    pub fn new(num_examples: usize, seed: u64) -> Result<Self> {
        if num_examples == 0 {
            return Err(Error::invalid("sampler needs at least one example"));
        }
        let mut rng = seeded_rng(seed);
        let mut permutation: Vec<usize> = (0..num_examples).collect();
        permutation.shuffle(&mut rng);
        Ok(EpochSampler {
            permutation,
            cursor: 0,
            epochs_started: 1,
            rng,
        })
    }

    pub fn num_examples(&self) -> usize {
        self.permutation.len()
    }

    /// Number of permutations drawn so far, including the current one.
    pub fn epochs_started(&self) -> u64 {
        self.epochs_started
    }

    pub fn next_batch(&mut self, b: usize) -> Result<Vec<usize>> {
        let n = self.permutation.len();
        if b == 0 || b > n {
            return Err(Error::invalid(format!("batch size {b} outside 1..={n}")));
        }
        let mut batch = Vec::with_capacity(b);
        while batch.len() < b {
            if self.cursor == n {
                self.permutation.shuffle(&mut self.rng);
                self.cursor = 0;
                self.epochs_started += 1;
            }
            let take = (b - batch.len()).min(n - self.cursor);
            batch.extend_from_slice(&self.permutation[self.cursor..self.cursor + take]);
            self.cursor += take;
        }
        Ok(batch)
    }
}

/// `b_H` distinct indices from `0..num_examples`, uniformly without replacement.
pub fn sample_hessian_batch<R: Rng + ?Sized>(
    rng: &mut R,
    num_examples: usize,
    b_h: usize,
) -> Result<Vec<usize>> {
    if b_h == 0 || b_h > num_examples {
        return Err(Error::invalid(format!(
            "Hessian batch size {b_h} outside 1..={num_examples}"
        )));
    }
    Ok(index::sample(rng, num_examples, b_h).into_vec())
}

/// Owns the Hessian-batch stream, independent of the gradient sampler.
#[derive(Debug, Clone)]
pub struct HessianSampler {
    num_examples: usize,
    rng: ChaCha8Rng,
}

impl HessianSampler {
    pub fn new(num_examples: usize, seed: u64) -> Result<Self> {
        if num_examples == 0 {
            return Err(Error::invalid("sampler needs at least one example"));
        }
        Ok(HessianSampler {
            num_examples,
            rng: seeded_rng(seed),
        })
    }

    pub fn sample(&mut self, b_h: usize) -> Result<Vec<usize>> {
        sample_hessian_batch(&mut self.rng, self.num_examples, b_h)
    }
}
