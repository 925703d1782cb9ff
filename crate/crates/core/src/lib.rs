//! Session-context feed ranking.
//!
//! A feed session is modelled as a chain of exposures: at every position the
//! user decides independently whether to click the item and whether to scroll
//! on to the next one, and a latent intra-session context evolves with each
//! exposed item. This crate carries everything that is pure computation:
//!
//! - [`numerics`]: dense tensors, a define-by-run reverse-mode tape and Adam.
//! - [`layers`]: embeddings, cosine multi-head attention, factorization
//!   machines, a GRU cell and a multi-gate mixture of experts.
//! - [`model`]: the click/scroll network with its recurrent context encoder.
//! - [`training`]: the session negative log-likelihood, the Adam loop and AUC.
//! - [`simulator`]: a ground-truth user process with exact and Monte-Carlo
//!   evaluators of expected views plus clicks.
//! - [`generation`]: greedy slate generation against a trained model.
//!
//! The crate is `no_std` and only needs `alloc`; file formats and the command
//! line live in the `feedctx` crate.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

mod error;
pub mod generation;
pub mod layers;
pub(crate) mod math;
pub mod model;
pub mod numerics;
pub mod rng;
pub mod simulator;
pub mod training;

pub use error::{Error, Result};
pub use generation::{generate_slate, replay_rank, CandidateSet, GenerationOptions, ReplayReport, Slate};
pub use model::{ContextState, Labels, Model, ModelConfig, SessionInput};
pub use numerics::{Adam, AdamConfig, Graph, Tensor, Var};
pub use simulator::{GroundTruth, GroundTruthConfig, GroundTruthUser, PolicyEvalReport};
pub use training::{evaluate, train, EpochReport, LossBreakdown, MetricReport, TrainConfig, TrainOutcome};
