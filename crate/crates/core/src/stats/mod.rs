//! Unigram frequency lists and rank-based corpus similarity.

mod chisq;
mod freq;
mod rank;
mod similarity;

pub use chisq::{chi_square_similarity, ChiSquare};
pub use freq::{align, apply_threshold, build_frequency_list, AlignedVocab, FrequencyList, Threshold};
pub use rank::{average_ranks, pearson_exact, spearman};
pub use similarity::{
    cross_source_similarity, summarize, within_source_similarity, CrossSourceReport, LanguageSummary,
    SimilarityObservation, WithinSourceReport, WithinSourceRow,
};
