//! Sample filters, applied to cleaned text.

use super::noise::strip_noise;
use super::script::{classify_script, count_words, ScriptClass, Segmenter};
use crate::kv::KeyValues;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct FilterConfig {
    pub min_words_alphabetic: usize,
    pub min_chars_nonalphabetic: usize,
    /// Matched case-insensitively against whole word tokens.
    pub error_words: Vec<String>,
    pub error_word_limit: usize,
    pub nav_chars: Vec<char>,
    pub nav_char_limit: usize,
    /// Maximum pages kept per country; `None` is unlimited.
    pub country_page_ceiling: Option<u64>,
}

impl Default for FilterConfig {
    fn default() -> Self {
        FilterConfig {
            min_words_alphabetic: 15,
            min_chars_nonalphabetic: 50,
            error_words: vec!["error".into(), "404".into()],
            error_word_limit: 2,
            nav_chars: vec!['|'],
            nav_char_limit: 4,
            country_page_ceiling: None,
        }
    }
}

pub(crate) const FILTER_KEYS: [&str; 7] = [
    "min_words_alphabetic",
    "min_chars_nonalphabetic",
    "error_words",
    "error_word_limit",
    "nav_chars",
    "nav_char_limit",
    "country_page_ceiling",
];

impl FilterConfig {
    pub fn validate(&self) -> Result<()> {
        let counts = [
            ("min_words_alphabetic", self.min_words_alphabetic),
            ("min_chars_nonalphabetic", self.min_chars_nonalphabetic),
            ("error_word_limit", self.error_word_limit),
            ("nav_char_limit", self.nav_char_limit),
        ];
        if let Some((k, _)) = counts.iter().find(|(_, v)| *v == 0) {
            return Err(Error::config(format!("`{k}` must be at least 1")));
        }
        if self.country_page_ceiling == Some(0) {
            return Err(Error::config("`country_page_ceiling` must be at least 1"));
        }
        if self.error_words.is_empty() || self.error_words.iter().any(|w| w.is_empty()) {
            return Err(Error::config("`error_words` must be a non-empty list"));
        }
        if self.nav_chars.is_empty() {
            return Err(Error::config("`nav_chars` must be non-empty"));
        }
        Ok(())
    }

    /// Overrides defaults with any filter keys present in `kv`.
    pub fn from_kv(kv: &KeyValues) -> Result<Self> {
        let mut cfg = FilterConfig::default();
        if let Some(v) = kv.parse_value("min_words_alphabetic")? {
            cfg.min_words_alphabetic = v;
        }
        if let Some(v) = kv.parse_value("min_chars_nonalphabetic")? {
            cfg.min_chars_nonalphabetic = v;
        }
        if let Some(v) = kv.list("error_words") {
            cfg.error_words = v;
        }
        if let Some(v) = kv.parse_value("error_word_limit")? {
            cfg.error_word_limit = v;
        }
        if let Some(v) = kv.get("nav_chars") {
            cfg.nav_chars = v.chars().filter(|c| !c.is_whitespace() && *c != ',').collect();
        }
        if let Some(v) = kv.parse_value("nav_char_limit")? {
            cfg.nav_char_limit = v;
        }
        match kv.get("country_page_ceiling") {
            None | Some("unlimited") | Some("") => {}
            Some(_) => cfg.country_page_ceiling = kv.parse_value("country_page_ceiling")?,
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_kv(&self, kv: &mut KeyValues) {
        kv.insert("min_words_alphabetic", self.min_words_alphabetic.to_string());
        kv.insert("min_chars_nonalphabetic", self.min_chars_nonalphabetic.to_string());
        kv.insert("error_words", self.error_words.join(","));
        kv.insert("error_word_limit", self.error_word_limit.to_string());
        kv.insert("nav_chars", self.nav_chars.iter().collect::<String>());
        kv.insert("nav_char_limit", self.nav_char_limit.to_string());
        kv.insert(
            "country_page_ceiling",
            self.country_page_ceiling
                .map_or("unlimited".to_string(), |c| c.to_string()),
        );
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Reject {
    TooFewWords,
    TooFewChars,
    ErrorWords,
    NavChars,
}

impl Reject {
    pub const ALL: [Reject; 4] = [
        Reject::TooFewWords,
        Reject::TooFewChars,
        Reject::ErrorWords,
        Reject::NavChars,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Reject::TooFewWords => "too-few-words",
            Reject::TooFewChars => "too-few-chars",
            Reject::ErrorWords => "error-words",
            Reject::NavChars => "nav-chars",
        }
    }
}

/// What the filters look at. `raw` is the markup-stripped text before noise
/// removal; the error-word and navigation rules read it because cleaning
/// deletes isolated symbols such as `|`.
#[derive(Debug, Clone, Copy)]
pub struct SampleView<'a> {
    pub raw: &'a str,
    pub cleaned: &'a str,
    pub class: ScriptClass,
    pub word_count: usize,
}

fn error_word_hits(text: &str, words: &[String]) -> usize {
    let words: Vec<String> = words.iter().map(|w| w.to_lowercase()).collect();
    text.split_whitespace()
        .map(|t| t.trim_matches(|c: char| !c.is_alphanumeric()))
        .filter(|t| !t.is_empty())
        .filter(|t| words.iter().any(|w| *w == t.to_lowercase()))
        .count()
}

/// First failing rule in the order word count, character count, error
/// words, navigation characters. Character counts exclude whitespace.
pub fn passes_filters(s: &SampleView<'_>, cfg: &FilterConfig) -> Result<(), Reject> {
    if s.class.is_alphabetic() {
        if s.word_count < cfg.min_words_alphabetic {
            return Err(Reject::TooFewWords);
        }
    } else if s.cleaned.chars().filter(|c| !c.is_whitespace()).count() < cfg.min_chars_nonalphabetic {
        return Err(Reject::TooFewChars);
    }
    if error_word_hits(s.raw, &cfg.error_words) >= cfg.error_word_limit {
        return Err(Reject::ErrorWords);
    }
    if s.raw.chars().filter(|c| cfg.nav_chars.contains(c)).count() > cfg.nav_char_limit {
        return Err(Reject::NavChars);
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Evaluated {
    pub cleaned: String,
    pub class: ScriptClass,
    pub word_count: usize,
    pub verdict: Result<(), Reject>,
}

/// Cleans `raw`, classifies and counts the cleaned text, then filters.
pub fn evaluate(raw: &str, cfg: &FilterConfig, segmenter: &dyn Segmenter) -> Evaluated {
    let cleaned = strip_noise(raw);
    let class = classify_script(&cleaned);
    let word_count = count_words(&cleaned, class, segmenter);
    let verdict = passes_filters(
        &SampleView {
            raw,
            cleaned: &cleaned,
            class,
            word_count,
        },
        cfg,
    );
    Evaluated {
        cleaned,
        class,
        word_count,
        verdict,
    }
}
