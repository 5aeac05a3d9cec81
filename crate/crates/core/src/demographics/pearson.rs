use std::collections::BTreeMap;

use crate::stats::pearson_exact;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Correlation {
    pub r: f64,
    /// Pairs left after null removal.
    pub n: usize,
}

/// Pearson's r over the pairs with both values present. Needs at least
/// three such pairs and two non-constant series.
pub fn pearson(pairs: &[(Option<f64>, Option<f64>)]) -> Result<Correlation> {
    let (x, y): (Vec<f64>, Vec<f64>) = pairs
        .iter()
        .filter_map(|&(a, b)| Some((a?, b?)))
        .filter(|(a, b)| a.is_finite() && b.is_finite())
        .unzip();
    if x.len() < 3 {
        return Err(Error::Undefined(format!("{} complete pairs, need at least 3", x.len())));
    }
    let r = pearson_exact(&x, &y)?;
    Ok(Correlation { r, n: x.len() })
}

/// Aligns two per-country series; a country missing from either side is a
/// null.
pub fn pearson_by_country(x: &BTreeMap<String, Option<f64>>, y: &BTreeMap<String, Option<f64>>) -> Result<Correlation> {
    let mut countries: Vec<&String> = x.keys().chain(y.keys()).collect();
    countries.sort();
    countries.dedup();
    let pairs: Vec<_> = countries
        .into_iter()
        .map(|c| (x.get(c).copied().flatten(), y.get(c).copied().flatten()))
        .collect();
    pearson(&pairs)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn some(v: &[f64]) -> Vec<Option<f64>> {
        v.iter().map(|&x| Some(x)).collect()
    }

    fn zip(a: Vec<Option<f64>>, b: Vec<Option<f64>>) -> Vec<(Option<f64>, Option<f64>)> {
        a.into_iter().zip(b).collect()
    }

    #[test]
    fn exact_linear() {
        let x: Vec<f64> = (1..=10).map(f64::from).collect();
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v + 3.0).collect();
        assert_eq!(pearson(&zip(some(&x), some(&y))).unwrap().r, 1.0);
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        assert_eq!(pearson(&zip(some(&x), some(&neg))).unwrap().r, -1.0);
    }

    #[test]
    fn nulls_are_removed_and_counted() {
        let x = vec![Some(1.0), None, Some(3.0), Some(4.0), Some(2.0)];
        let y = vec![Some(2.0), Some(5.0), None, Some(8.0), Some(4.0)];
        let c = pearson(&zip(x, y)).unwrap();
        assert_eq!(c.n, 3);
        assert_eq!(c.r, 1.0);
    }

    #[test]
    fn undefined() {
        assert!(matches!(
            pearson(&zip(some(&[1.0, 2.0]), some(&[1.0, 2.0]))),
            Err(Error::Undefined(_))
        ));
        assert!(matches!(
            pearson(&zip(some(&[1.0, 1.0, 1.0]), some(&[1.0, 2.0, 3.0]))),
            Err(Error::Undefined(_))
        ));
    }

    #[test]
    fn by_country_alignment() {
        let x: BTreeMap<String, Option<f64>> = [("A", 1.0), ("B", 2.0), ("C", 3.0), ("D", 9.0)]
            .iter()
            .map(|(c, v)| (c.to_string(), Some(*v)))
            .collect();
        let y: BTreeMap<String, Option<f64>> = [("A", 10.0), ("B", 20.0), ("C", 30.0), ("E", 1.0)]
            .iter()
            .map(|(c, v)| (c.to_string(), Some(*v)))
            .collect();
        let c = pearson_by_country(&x, &y).unwrap();
        assert_eq!((c.r, c.n), (1.0, 3));
    }
}
