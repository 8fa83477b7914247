//! Layer primitives with exact analytic gradients.
//!
//! Each layer owns its parameters, accumulates parameter gradients in
//! place, and caches whatever forward activations its backward pass needs.
//! Caches are overwritten by the next forward call.

mod activation;
mod conv;
mod linear;
mod loss;
mod norm;
mod pool;

pub use activation::{Dropout, Relu};
pub use conv::Conv2d;
pub use linear::Linear;
pub use loss::{one_hot, softmax, softmax_cross_entropy, softmax_cross_entropy_ids};
pub use norm::BatchNorm2d;
pub use pool::GlobalMeanPool;

/// Forward-pass mode; training engages dropout masks and batch statistics.
///
/// `Calibrate` re-estimates batch norm running statistics from dropout-free
/// forward passes: dropout inflates the variance that the running stats
/// absorb during training, so eval-mode activations would otherwise be
/// systematically mis-scaled. Layers cache nothing in this mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Train,
    Eval,
    Calibrate,
}
