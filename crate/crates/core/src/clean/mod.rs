//! Sample cleaning, script classification, filters and deduplication.

mod dedup;
mod filter;
mod noise;
mod script;

pub use dedup::{dedup, digest, normalize, DedupPolicy, DedupState, DuplicateSet, Scope};
pub(crate) use filter::FILTER_KEYS;
pub use filter::{evaluate, passes_filters, Evaluated, FilterConfig, Reject, SampleView};
pub use noise::{is_emoji, strip_noise};
pub use script::{
    classify_script, count_words, is_cjk, is_other_nonalphabetic, tokens, HeuristicSegmenter, ScriptClass, Segmenter,
};
