//! The three-stage training procedure.
//!
//! 1. **Classifier**: cross-entropy updates the encoder and classifier head.
//! 2. **Estimator**: each epoch snapshots the TCP targets of the whole
//!    training set, builds the target population, refreshes γ and the
//!    per-sample density factors, then regresses the uncertainty head onto
//!    the targets. Encoder and classifier are frozen.
//! 3. **Fine-tuning**: `CE + λ·L_u` at the fine-tuning learning rate.
//!    Cross-entropy reaches the encoder and classifier, the uncertainty loss
//!    the encoder and uncertainty head. Targets are refreshed per epoch and
//!    constant within it.
//!
//! Each stage starts a fresh optimizer (zero velocity). Batches come from a
//! per-epoch seeded shuffle; the last partial batch is kept.

mod config;
mod ood;
mod pipeline;

pub use config::{BaselineMode, TrainConfig};
pub use ood::{evaluate_ood, predict_uncertainty, OodReport};
pub use pipeline::{
    evaluate, run_btcp, run_many, EpochRecord, Evaluation, Pipeline, RunOptions, RunOutcome, Stage,
    EVAL_BATCH,
};
