use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::vecmath::SparseVector;

use super::sampling::seeded_rng;

/// One training pair `(x_i, z_i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseExample {
    pub features: SparseVector,
    pub label: usize,
}

/// Immutable set of `N ≥ 1` labelled examples over `dim` features.
///
/// Binary datasets use labels in `{0, 1}`; multiclass datasets use labels in
/// `0..num_classes`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    examples: Vec<SparseExample>,
    dim: usize,
    num_classes: usize,
}

impl Dataset {
    pub fn new(examples: Vec<SparseExample>, dim: usize, num_classes: usize) -> Result<Self> {
        if examples.is_empty() {
            return Err(Error::invalid("dataset must contain at least one example"));
        }
        if num_classes < 2 {
            return Err(Error::invalid("a dataset needs at least two classes"));
        }
        if dim == 0 {
            return Err(Error::invalid("a dataset needs at least one feature"));
        }
        for ex in &examples {
            if ex.features.min_dim() > dim {
                return Err(Error::IndexOutOfRange {
                    index: ex.features.min_dim() - 1,
                    len: dim,
                });
            }
            if ex.label >= num_classes {
                return Err(Error::invalid(format!(
                    "label {} outside 0..{num_classes}",
                    ex.label
                )));
            }
        }
        Ok(Dataset {
            examples,
            dim,
            num_classes,
        })
    }

    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn is_binary(&self) -> bool {
        self.num_classes == 2
    }

    pub fn examples(&self) -> &[SparseExample] {
        &self.examples
    }

    pub fn example(&self, i: usize) -> &SparseExample {
        &self.examples[i]
    }

    /// `max_i ‖x_i‖²`, the data term of the logistic Hessian's upper bound.
    pub fn max_feature_norm_sq(&self) -> f64 {
        self.examples
            .iter()
            .map(|e| e.features.norm_sq())
            .fold(0.0, f64::max)
    }

    /// New dataset holding the examples at `indices`, in that order.
    pub fn subset(&self, indices: &[usize]) -> Result<Dataset> {
        let examples = indices
            .iter()
            .map(|&i| {
                self.examples
                    .get(i)
                    .cloned()
                    .ok_or(Error::IndexOutOfRange {
                        index: i,
                        len: self.len(),
                    })
            })
            .collect::<Result<Vec<_>>>()?;
        Dataset::new(examples, self.dim, self.num_classes)
    }
}

/// Seeded shuffle split into `⌈fN⌉` training and `N − ⌈fN⌉` test examples.
pub fn train_test_split(
    data: &Dataset,
    train_fraction: f64,
    seed: u64,
) -> Result<(Dataset, Dataset)> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::invalid("train fraction must lie in (0, 1)"));
    }
    let n = data.len();
    let n_train = (train_fraction * n as f64).ceil() as usize;
    if n_train == 0 || n_train >= n {
        return Err(Error::invalid(format!(
            "split of {n} examples at fraction {train_fraction} leaves one side empty"
        )));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut seeded_rng(seed));
    let (train, test) = order.split_at(n_train);
    Ok((data.subset(train)?, data.subset(test)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    fn toy(n: usize) -> Dataset {
        let examples = (0..n)
            .map(|i| SparseExample {
                features: SparseVector::new(vec![0], vec![i as f64]).unwrap(),
                label: i % 2,
            })
            .collect();
        Dataset::new(examples, 1, 2).unwrap()
    }

    fn ids(d: &Dataset) -> Vec<usize> {
        d.examples().iter().map(|e| e.features.values()[0] as usize).collect()
    }

    #[test]
    fn split_sizes() {
        let (tr, te) = train_test_split(&toy(100), 0.75, 3).unwrap();
        assert_eq!((tr.len(), te.len()), (75, 25));

        let (tr, te) = train_test_split(&toy(4), 0.5, 3).unwrap();
        assert_eq!((tr.len(), te.len()), (2, 2));
        let all: BTreeSet<usize> = ids(&tr).into_iter().chain(ids(&te)).collect();
        assert_eq!(all, (0..4).collect());
    }

    #[test]
    fn split_is_deterministic() {
        let a = train_test_split(&toy(50), 0.6, 11).unwrap();
        let b = train_test_split(&toy(50), 0.6, 11).unwrap();
        assert_eq!(a, b);
        let c = train_test_split(&toy(50), 0.6, 12).unwrap();
        assert_ne!(ids(&a.0), ids(&c.0));
    }

    #[test]
    fn split_rejects_empty_sides() {
        assert!(train_test_split(&toy(1), 0.5, 0).is_err());
        assert!(train_test_split(&toy(10), 0.0, 0).is_err());
        assert!(train_test_split(&toy(10), 1.0, 0).is_err());
        // ⌈0.95·10⌉ = 10 leaves no test data.
        assert!(train_test_split(&toy(10), 0.95, 0).is_err());
    }

    #[test]
    fn dataset_validates_contents() {
        let ex = SparseExample {
            features: SparseVector::new(vec![3], vec![1.0]).unwrap(),
            label: 0,
        };
        assert!(Dataset::new(vec![ex.clone()], 3, 2).is_err());
        assert!(Dataset::new(vec![ex.clone()], 4, 2).is_ok());
        assert!(Dataset::new(vec![], 4, 2).is_err());
        let bad_label = SparseExample { label: 2, ..ex };
        assert!(Dataset::new(vec![bad_label], 4, 2).is_err());
    }
}
