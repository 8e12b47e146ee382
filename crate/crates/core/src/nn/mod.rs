//! Dense network engine: matrices, layers, exact backprop, SGD with momentum,
//! finite-difference checks and checkpoints.
//!
//! All arithmetic is `f64`. Batch losses are reduced by the mean over
//! samples, so output gradients handed to [`BtcpNetwork::backward`] already
//! carry the `1/n` factor.

mod checkpoint;
pub mod gradcheck;
pub mod kernels;
mod layer;
mod matrix;
mod network;
mod ops;
mod rng;
mod sgd;

pub use checkpoint::{Checkpoint, CHECKPOINT_FORMAT, CHECKPOINT_VERSION};
pub use gradcheck::{finite_diff_check, GradCheckReport};
pub use layer::{sigmoid, Activation, DenseLayer, LayerGrad, Stack, StackCache};
pub use matrix::Matrix;
pub use network::{
    Block, BlockSet, BtcpNetwork, ForwardCache, ForwardPass, NetworkGrads, NetworkSpec, OutputGrads,
};
pub use ops::{cross_entropy_loss, softmax, PROB_FLOOR};
pub use rng::XorShift64Star;
pub use sgd::{SgdConfig, SgdState};
