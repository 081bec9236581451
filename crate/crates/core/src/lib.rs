//! Stochastic quasi-Newton optimization for large-scale empirical risk
//! minimization.
//!
//! The [`optim`] module implements SQN, which collects curvature information
//! every `L` iterations from sub-sampled Hessian-vector products at averaged
//! iterates, alongside SGD and online L-BFGS baselines. Objectives live in
//! [`objective`], data handling in [`data`], monitors and theoretical
//! constants in [`diagnostics`], and the experiment command line in [`cli`].

pub mod cli;
pub mod data;
pub mod diagnostics;
pub mod error;
pub mod lbfgs;
pub mod objective;
pub mod optim;
pub mod vecmath;

pub use error::{Error, Result};
pub use vecmath::{DenseVector, SparseVector};
