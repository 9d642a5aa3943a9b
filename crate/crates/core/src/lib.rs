//! Clone analysis for corpora of Jupyter notebooks.
//!
//! The pipeline parses notebooks ([`ingest`]), classifies their language
//! ([`langid`]), finds copy-modulo-whitespace clones ([`cmw`]) and near-miss
//! clone pairs ([`nearmiss`]), builds the notebook connection graph
//! ([`connections`]) and runs the rank statistics in [`stats`]. [`report`]
//! ties everything together and writes CSV outputs.

pub mod cmw;
pub mod connections;
pub mod corpus;
mod error;
pub mod ingest;
pub mod langid;
pub mod nearmiss;
pub mod report;
pub mod stats;

pub use corpus::{CloneCounts, Corpus, SnippetRef};
pub use error::{Error, Result};
