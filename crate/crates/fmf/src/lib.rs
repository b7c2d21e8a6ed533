//! File formats, pipeline stages, CLI plumbing and the annotation service
//! around `fmf-core`.

pub mod annotation;
pub mod backend;
pub mod config;
pub mod error;
pub mod io;
pub mod pipeline;
pub mod record;

pub use error::{FmfError, Result};
