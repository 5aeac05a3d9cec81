use crate::{Error, Result};

use super::freq::AlignedVocab;

/// 1-based ranks in ascending order; tied values share their mean rank.
pub fn average_ranks(values: &[u64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by_key(|&i| values[i]);
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        // positions i..=j hold ranks i+1..=j+1
        let r = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = r;
        }
        i = j + 1;
    }
    ranks
}

/// Pearson correlation computed so that swapping `x` and `y` gives the
/// identical value and `x == y` gives exactly 1.
pub fn pearson_exact(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::contract("series lengths differ"));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (&a, &b) in x.iter().zip(y) {
        let (da, db) = (a - mx, b - my);
        sxy += da * db;
        sxx += da * da;
        syy += db * db;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::Undefined("constant series".into()));
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Spearman correlation of the two count columns.
pub fn spearman(aligned: &AlignedVocab) -> Result<f64> {
    if aligned.len() < 2 {
        return Err(Error::Undefined(format!(
            "{} aligned tokens, need at least 2",
            aligned.len()
        )));
    }
    pearson_exact(&average_ranks(&aligned.a), &average_ranks(&aligned.b))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn al(a: &[u64], b: &[u64]) -> AlignedVocab {
        AlignedVocab {
            tokens: (0..a.len()).map(|i| i.to_string()).collect(),
            a: a.to_vec(),
            b: b.to_vec(),
            total_a: a.iter().sum(),
            total_b: b.iter().sum(),
        }
    }

    #[test]
    fn ranks_with_ties() {
        assert_eq!(average_ranks(&[10, 20, 20, 5]), [2.0, 3.5, 3.5, 1.0]);
        assert_eq!(average_ranks(&[7, 7, 7]), [2.0, 2.0, 2.0]);
        assert!(average_ranks(&[]).is_empty());
    }

    #[test]
    fn identical_and_reversed() {
        assert_eq!(spearman(&al(&[3, 1, 4, 1, 5], &[3, 1, 4, 1, 5])).unwrap(), 1.0);
        assert_eq!(spearman(&al(&[1, 2, 3, 4, 5], &[5, 4, 3, 2, 1])).unwrap(), -1.0);
    }

    #[test]
    fn undefined_cases() {
        assert!(matches!(spearman(&al(&[1], &[1])), Err(Error::Undefined(_))));
        assert!(matches!(
            spearman(&al(&[2, 2, 2], &[1, 2, 3])),
            Err(Error::Undefined(_))
        ));
    }
}
