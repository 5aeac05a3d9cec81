//! End-to-end runs over files: corpus builds, frequency lists, similarity
//! and demographic reports.

mod analysis;
mod build;
mod config;
mod corpus;
mod manifest;

pub use analysis::{corpus_index, load_source, run_compare, run_demographics, run_ngrams};
pub use build::{build_pages, run_build, write_pages, Batch, BatchFile, Page};
pub use config::{BuildConfig, Config, ROW_LIMIT};
pub use corpus::{decode_rows, encode_rows, list_corpus, read_corpus_file, write_group, CorpusFile, CorpusRow, HEADER};
pub use manifest::{Counters, InputFile, RunManifest};
