use super::freq::AlignedVocab;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChiSquare {
    pub statistic: f64,
    /// Tokens skipped because an expected count was zero.
    pub skipped: usize,
}

/// Two-corpus χ² over the aligned tokens, with expected counts split in
/// proportion to the corpus totals.
pub fn chi_square_similarity(aligned: &AlignedVocab) -> Result<ChiSquare> {
    if aligned.is_empty() {
        return Err(Error::Undefined("no aligned tokens".into()));
    }
    if aligned.total_a == 0 || aligned.total_b == 0 {
        return Err(Error::Undefined("empty corpus".into()));
    }
    let (na, nb) = (aligned.total_a as f64, aligned.total_b as f64);
    let n = na + nb;
    let mut statistic = 0.0;
    let mut skipped = 0;
    for (&a, &b) in aligned.a.iter().zip(&aligned.b) {
        let (a, b) = (a as f64, b as f64);
        let row = a + b;
        let (ea, eb) = (row * na / n, row * nb / n);
        if ea == 0.0 || eb == 0.0 {
            skipped += 1;
            continue;
        }
        statistic += (a - ea) * (a - ea) / ea + (b - eb) * (b - eb) / eb;
    }
    Ok(ChiSquare { statistic, skipped })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn al(a: &[u64], b: &[u64], ta: u64, tb: u64) -> AlignedVocab {
        AlignedVocab {
            tokens: (0..a.len()).map(|i| i.to_string()).collect(),
            a: a.to_vec(),
            b: b.to_vec(),
            total_a: ta,
            total_b: tb,
        }
    }

    #[test]
    fn proportional_corpora_score_zero() {
        assert_eq!(
            chi_square_similarity(&al(&[5, 3, 2], &[5, 3, 2], 10, 10))
                .unwrap()
                .statistic,
            0.0
        );
        assert_eq!(
            chi_square_similarity(&al(&[5, 3, 2], &[10, 6, 4], 10, 20))
                .unwrap()
                .statistic,
            0.0
        );
    }

    #[test]
    fn hand_computed() {
        // totals 100 / 100, token counts (30, 10) and (15, 35)
        // token 1: E = 20, 20 -> 100/20 + 100/20 = 10
        // token 2: E = 25, 25 -> 100/25 + 100/25 = 8
        let c = chi_square_similarity(&al(&[30, 15], &[10, 35], 100, 100)).unwrap();
        assert!((c.statistic - 18.0).abs() < 1e-12);
        assert_eq!(c.skipped, 0);
    }

    #[test]
    fn degenerate() {
        assert!(chi_square_similarity(&al(&[], &[], 1, 1)).is_err());
        assert!(chi_square_similarity(&al(&[1], &[1], 0, 1)).is_err());
        assert_eq!(chi_square_similarity(&al(&[0, 1], &[0, 1], 5, 5)).unwrap().skipped, 1);
    }
}
