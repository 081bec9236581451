//! Training data: the [`Dataset`] container, libsvm ingestion, synthetic
//! generators and the index samplers that produce gradient and Hessian
//! batches.

mod dataset;
pub mod libsvm;
mod sampling;
mod synthetic;

pub use dataset::{train_test_split, Dataset, SparseExample};
pub use libsvm::{parse_libsvm, parse_libsvm_str, write_libsvm};
pub use sampling::{
    sample_hessian_batch, seeded_rng, EpochSampler, HessianSampler, RngStreams, Seeds,
};
pub use synthetic::{
    generate_binary_with_weights, generate_synthetic_binary, generate_synthetic_multiclass,
    unit_normal_features,
};
