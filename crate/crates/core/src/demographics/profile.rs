use std::collections::BTreeMap;

use super::pearson::{pearson, Correlation};
use crate::Result;

/// Share of each country's corpus words in one language.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LanguageProfile {
    pub language: String,
    pub shares: BTreeMap<String, f64>,
}

/// Profiles from `(country, language) -> words`. Every country with words
/// gets a share for every language seen anywhere, zero included.
pub fn language_profiles(words: &BTreeMap<(String, String), u64>) -> BTreeMap<String, LanguageProfile> {
    let mut totals: BTreeMap<&str, u64> = BTreeMap::new();
    for ((country, _), &w) in words {
        *totals.entry(country.as_str()).or_insert(0) += w;
    }
    let mut languages: Vec<&str> = words.keys().map(|(_, l)| l.as_str()).collect();
    languages.sort();
    languages.dedup();
    languages
        .into_iter()
        .map(|lang| {
            let shares = totals
                .iter()
                .filter(|(_, &t)| t > 0)
                .map(|(&c, &t)| {
                    let w = words.get(&(c.to_string(), lang.to_string())).copied().unwrap_or(0);
                    (c.to_string(), w as f64 / t as f64)
                })
                .collect();
            (
                lang.to_string(),
                LanguageProfile {
                    language: lang.to_string(),
                    shares,
                },
            )
        })
        .collect()
}

/// Pearson's r between two profiles of a language over the countries both
/// contain.
pub fn profile_correlation(a: &LanguageProfile, b: &LanguageProfile) -> Result<Correlation> {
    let pairs: Vec<_> = a
        .shares
        .iter()
        .filter_map(|(c, &x)| b.shares.get(c).map(|&y| (Some(x), Some(y))))
        .collect();
    pearson(&pairs)
}
