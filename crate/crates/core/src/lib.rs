//! Motion editing primitives without `std`: pose layout, snippet edits on
//! scripts and frames, tokenization, quality filters and retrieval metrics.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod compose;
pub mod edit;
pub mod embed;
pub mod error;
pub mod frames;
pub mod instruction;
pub mod layout;
pub mod metrics;
pub mod motion;
pub mod qc;
pub mod rewrite;
pub mod sample;
pub mod script;
pub mod stats;
pub mod synth;
pub mod tokenizer;
pub mod vocab;

pub use edit::{apply_edit_script, AtomicEdit, EditKind, Reverts, Scope};
pub use error::{Error, Result};
pub use layout::BodyPart;
pub use motion::{JointFrame, Motion, SnippetSpan};
pub use script::{FineScript, Sentence, Snippet};
