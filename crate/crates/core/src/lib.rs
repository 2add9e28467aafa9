//! Model-based semi-supervised classification for binary API-call feature vectors.
//!
//! Gaussian mixtures are fit to labeled and unlabeled traces jointly by
//! conditional expectation-maximization ([`cem`]), the covariance family is
//! picked by BIC ([`model_select`]), and [`eval`] provides cross-validation,
//! detection-rate sweeps, ROC/AUC and PCA export. [`baselines`] holds the kNN
//! and LDA reference classifiers, [`synth`] generates seeded synthetic data and
//! [`cli`] backs the `mbss` binary.

pub mod baselines;
pub mod cem;
pub mod cli;
pub mod dataset;
pub mod error;
pub mod eval;
pub mod gmm;
pub mod math;
pub mod model_select;
pub mod synth;

pub use error::{Error, Result};
