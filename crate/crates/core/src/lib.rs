//! Building blocks for a geo-referenced, deduplicated and language-identified
//! web corpus, plus the measurement tools used to evaluate it.
//!
//! The crate is organised by pipeline concern:
//!
//! * [`geo`] parses crawl records, assigns a country through the top-level
//!   domain and extracts `<p>` samples.
//! * [`clean`] strips noise, classifies scripts, applies sample filters and
//!   removes duplicates at site and period scope.
//! * [`lid`] is the short-text language identifier: hashed character
//!   trigrams fed to a multi-layer perceptron.
//! * [`stats`] builds unigram frequency lists and compares corpora with
//!   thresholded Spearman similarity.
//! * [`demographics`] correlates corpus density with census data.
//! * [`pipeline`] wires everything into reproducible end-to-end runs.
//!
//! Data-parallel loops go through [`Exec`], which uses rayon when the
//! `parallel` feature is enabled and falls back to plain iteration otherwise.

pub mod clean;
pub mod demographics;
mod error;
mod exec;
pub mod geo;
pub mod kv;
pub mod lid;
pub mod pipeline;
pub mod stats;
pub mod synth;

pub use error::{Error, Result};
pub use exec::Exec;
