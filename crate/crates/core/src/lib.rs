//! Probing natural-language-inference models for fuzzy-set behavior.
//!
//! The pipeline expands temperature premise/hypothesis templates, scores each
//! pair for entailment, smooths the resulting curves, and fits linguistic
//! hedge exponents relating categories such as `warm` and `hot`.

mod banded;
pub mod analysis;
pub mod config;
pub mod curve;
pub mod error;
pub mod fuzzy;
pub mod jsonl;
pub mod pipeline;
pub mod plot;
pub mod scoring;
pub mod smoothing;
pub mod stimuli;

pub use error::{Error, Result};
