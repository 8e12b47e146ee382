//! Balanced true-class-probability (BTCP) uncertainty estimation.
//!
//! A small dense network with a shared encoder, a classifier head and an
//! uncertainty head is trained in three stages: cross-entropy on the
//! classifier, a density-reweighted regression of the uncertainty head onto
//! true-class-probability targets, then joint fine-tuning. The crate also
//! carries the failure-prediction and OOD metrics used to evaluate the
//! learned uncertainty.
//!
//! Modules:
//!
//! - [`nn`]: matrices, dense layers, exact backprop, SGD with momentum,
//!   finite-difference gradient checks and checkpoints.
//! - [`losses`]: TCP targets, the density factor, auto-γ, the distributional
//!   focal loss and the focal / OHEM baselines.
//! - [`metrics`]: confusion counts, BACC, FPR, FNR, AUROC, OOD accuracy and
//!   distribution diagnostics.
//! - [`data`]: synthetic Gaussian blobs and IDX loaders.
//! - [`train`]: the three-stage pipeline and OOD evaluation.
//! - [`report`]: JSON and CSV serialization of experiment reports.
//!
//! With the default `parallel` feature the batch matrix kernels run on rayon.
//! Results are bit-identical to the sequential kernels.

pub mod data;
mod error;
pub mod losses;
pub mod metrics;
pub mod nn;
pub mod report;
pub mod train;

pub use error::{Error, Result};
