//! Labelled training material.
//!
//! A manifest is a CSV with header `path,language,domain`; relative paths
//! resolve against the manifest's directory. Each file is cleaned, cut into
//! windows, and every window is assigned to a split by a hash of its label
//! and text.

use std::path::{Path, PathBuf};

use serde::Deserialize;
use xxhash_rust::xxh64::xxh64;

use super::window::{windows, Window50};
use crate::clean::strip_noise;
use crate::error::IoContext;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Split {
    Train,
    Test,
    Eval,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledSample {
    pub window: Window50,
    pub language: String,
    pub domain: String,
    pub split: Split,
}

#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
pub struct ManifestEntry {
    pub path: PathBuf,
    pub language: String,
    pub domain: String,
}

const SPLIT_SEED: u64 = 0x7370_6c69_7430_3830;

/// 80/10/10 by content hash, stable across runs.
pub fn split_of(language: &str, domain: &str, window: &str) -> Split {
    let mut key = Vec::with_capacity(language.len() + domain.len() + window.len() + 2);
    key.extend_from_slice(language.as_bytes());
    key.push(0);
    key.extend_from_slice(domain.as_bytes());
    key.push(0);
    key.extend_from_slice(window.as_bytes());
    match xxh64(&key, SPLIT_SEED) % 10 {
        0..=7 => Split::Train,
        8 => Split::Test,
        _ => Split::Eval,
    }
}

/// Labelled windows of one text.
pub fn samples_from_text(text: &str, language: &str, domain: &str) -> Vec<LabeledSample> {
    let cleaned = strip_noise(text).replace('\n', " ");
    windows(&cleaned)
        .into_iter()
        .map(|w| LabeledSample {
            split: split_of(language, domain, w.as_str()),
            window: w,
            language: language.to_string(),
            domain: domain.to_string(),
        })
        .collect()
}

pub fn read_manifest(path: &Path) -> Result<Vec<ManifestEntry>> {
    let file = std::fs::File::open(path).at(path)?;
    let base = path.parent().unwrap_or(Path::new("."));
    let mut out = Vec::new();
    for row in csv::Reader::from_reader(file).deserialize::<ManifestEntry>() {
        let mut e = row.map_err(|e| Error::config(format!("{}: {e}", path.display())))?;
        if e.language.is_empty() || e.domain.is_empty() {
            return Err(Error::config(format!("{}: empty language or domain", path.display())));
        }
        if e.path.is_relative() {
            e.path = base.join(&e.path);
        }
        out.push(e);
    }
    Ok(out)
}

/// Reads every manifest entry into labelled windows, in manifest order.
pub fn load_manifest(path: &Path) -> Result<Vec<LabeledSample>> {
    let mut out = Vec::new();
    for e in read_manifest(path)? {
        let text = std::fs::read_to_string(&e.path).at(&e.path)?;
        out.extend(samples_from_text(&text, &e.language, &e.domain));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn split_is_stable_and_roughly_proportional() {
        let mut counts = [0usize; 3];
        for i in 0..10_000 {
            let s = split_of("eng", "news", &format!("window number {i}"));
            assert_eq!(s, split_of("eng", "news", &format!("window number {i}")));
            counts[s as usize] += 1;
        }
        assert!((7700..8300).contains(&counts[0]), "{counts:?}");
        assert!((800..1200).contains(&counts[1]), "{counts:?}");
        assert!((800..1200).contains(&counts[2]), "{counts:?}");
    }

    #[test]
    fn samples_are_cleaned_windows() {
        let text = "visit http://spam.example now #ad\n".to_string() + &"lorem ipsum ".repeat(10);
        let s = samples_from_text(&text, "lat", "web");
        assert_eq!(s.len(), 2);
        assert!(s
            .iter()
            .all(|x| !x.window.as_str().contains("http") && !x.window.as_str().contains('#')));
    }
}
