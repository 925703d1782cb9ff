//! File formats, configuration files and the `feedctx` command line on top
//! of [`feedctx_core`].

pub mod cli;
pub mod dataio;
mod error;
pub mod kv;

pub use error::DataError;
