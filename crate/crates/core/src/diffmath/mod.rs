//! Dense tensors, reverse-mode autodiff, and the Adam optimizer.
//!
//! Everything runs in f64: the attack optimization is sensitive to
//! precision and the datasets are small enough that speed is not worth
//! the accuracy trade.

mod adam;
mod tape;
mod tensor;

pub use adam::{adam_step, AdamState};
pub use tape::{Gradients, Tape, VarId};
pub use tensor::Tensor;

pub(crate) use tape::{softmax_row, stable_sigmoid};
