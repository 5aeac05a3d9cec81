//! Hashed character-trigram features.

use xxhash_rust::xxh64::xxh64;

pub const DEFAULT_DIM: usize = 216_000;
pub const DEFAULT_HASH_SEED: u64 = 0x6C61_6E67_6D61_7031;

/// Sparse vector with strictly increasing indices.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub indices: Vec<u32>,
    pub values: Vec<f64>,
    pub dim: usize,
}

impl FeatureVector {
    pub fn nnz(&self) -> usize {
        self.indices.len()
    }

    pub fn get(&self, index: u32) -> f64 {
        match self.indices.binary_search(&index) {
            Ok(i) => self.values[i],
            Err(_) => 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Featurizer {
    pub dim: usize,
    pub hash_seed: u64,
    /// Divide counts by the number of trigrams; raw counts otherwise.
    pub normalize: bool,
}

impl Default for Featurizer {
    fn default() -> Self {
        Featurizer {
            dim: DEFAULT_DIM,
            hash_seed: DEFAULT_HASH_SEED,
            normalize: true,
        }
    }
}

impl Featurizer {
    pub fn new(dim: usize, hash_seed: u64) -> Self {
        Featurizer {
            dim,
            hash_seed,
            normalize: true,
        }
    }

    /// Bucket of one trigram given as its UTF-8 bytes.
    pub fn bucket(&self, trigram: &[u8]) -> u32 {
        (xxh64(trigram, self.hash_seed) % self.dim as u64) as u32
    }

    /// Features of every overlapping code-point trigram of `text`.
    pub fn featurize(&self, text: &str) -> FeatureVector {
        let starts: Vec<usize> = text.char_indices().map(|(i, _)| i).chain([text.len()]).collect();
        let n = starts.len().saturating_sub(3);
        let mut buckets: Vec<u32> = (0..n)
            .map(|k| self.bucket(&text.as_bytes()[starts[k]..starts[k + 3]]))
            .collect();
        buckets.sort_unstable();
        let scale = if self.normalize && n > 0 { 1.0 / n as f64 } else { 1.0 };
        let mut indices = Vec::with_capacity(buckets.len());
        let mut values = Vec::with_capacity(buckets.len());
        for b in buckets {
            if indices.last() == Some(&b) {
                *values.last_mut().unwrap() += 1.0;
            } else {
                indices.push(b);
                values.push(1.0);
            }
        }
        for v in &mut values {
            *v *= scale;
        }
        FeatureVector {
            indices,
            values,
            dim: self.dim,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn repeated_character() {
        let f = Featurizer::default().featurize(&"a".repeat(50));
        assert_eq!(f.nnz(), 1);
        assert_eq!(f.values, [1.0]);
        assert_eq!(f.indices[0], Featurizer::default().bucket(b"aaa"));
    }

    #[test]
    fn alternating_pair() {
        let fz = Featurizer::default();
        let f = fz.featurize(&"ab".repeat(25));
        // 48 trigrams alternate aba, bab: 24 each.
        assert_ne!(fz.bucket(b"aba"), fz.bucket(b"bab"));
        assert_eq!(f.get(fz.bucket(b"aba")), 0.5);
        assert_eq!(f.get(fz.bucket(b"bab")), 0.5);
        assert_eq!(f.nnz(), 2);
    }

    #[test]
    fn raw_counts() {
        let fz = Featurizer {
            normalize: false,
            ..Featurizer::default()
        };
        assert_eq!(fz.featurize(&"a".repeat(50)).values, [48.0]);
    }

    #[test]
    fn multibyte_trigrams() {
        let fz = Featurizer::new(1 << 20, 7);
        let f = fz.featurize("日本語");
        assert_eq!(f.indices, [fz.bucket("日本語".as_bytes())]);
    }

    proptest! {
        #[test]
        fn normalized_and_in_range(text in "\\PC{50}", dim in 1usize..5000) {
            let f = Featurizer::new(dim, DEFAULT_HASH_SEED).featurize(&text);
            prop_assert!(f.nnz() <= 48);
            prop_assert!(f.indices.iter().all(|&i| (i as usize) < dim));
            prop_assert!(f.indices.windows(2).all(|w| w[0] < w[1]));
            prop_assert!((f.values.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }

        #[test]
        fn one_char_edit_moves_few_buckets(text in "[a-h]{50}", pos in 0usize..50, c in "[i-p]") {
            let fz = Featurizer::default();
            let mut chars: Vec<char> = text.chars().collect();
            chars[pos] = c.chars().next().unwrap();
            let edited: String = chars.into_iter().collect();
            let (a, b) = (fz.featurize(&text), fz.featurize(&edited));
            let mut all: Vec<u32> = a.indices.iter().chain(&b.indices).copied().collect();
            all.sort_unstable();
            all.dedup();
            let differing = all.iter().filter(|&&i| a.get(i) != b.get(i)).count();
            prop_assert!(differing <= 6);
        }
    }
}
