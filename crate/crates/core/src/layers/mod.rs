//! Neural building blocks over the [`Graph`](crate::numerics::Graph) tape.
//!
//! Layers own [`ParamId`]s into a [`ParamStore`]; a forward pass binds the
//! store to a fresh tape through a [`Scope`], which copies each parameter
//! onto the tape the first time it is used.

mod attention;
mod embedding;
mod fm;
mod gradcheck;
mod gru;
mod linear;
mod mmoe;
mod params;

pub use attention::{self_attention, CosineAttention};
pub use embedding::Embedding;
pub use fm::FactorizationMachine;
pub(crate) use gradcheck::compare as compare_gradients;
pub use gradcheck::{check_gradients, GradCheckReport, NORM_FLOOR};
pub use gru::GruCell;
pub use linear::{Linear, Mlp};
pub use mmoe::Mmoe;
pub use params::{ParamId, ParamStore, Scope};
