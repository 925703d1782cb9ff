//! Dense tensors, the reverse-mode tape and the Adam optimizer.

mod adam;
mod graph;
mod tensor;

pub use adam::{Adam, AdamConfig};
pub use graph::{bce_with_logits, Activation, Gradients, Graph, Var};
pub use tensor::Tensor;

