use std::collections::BTreeMap;
use std::path::Path;

use crate::error::IoContext;
use crate::stats::average_ranks;
use crate::{Error, Result};

/// One census row; `None` marks an empty field.
#[derive(Debug, Clone, PartialEq)]
pub struct CountryStats {
    pub country: String,
    pub population: Option<f64>,
    pub gdp_per_capita: Option<f64>,
    pub internet_share: Option<f64>,
}

fn field(row: &csv::StringRecord, i: usize, name: &str, line: u64) -> Result<Option<f64>> {
    match row.get(i).map(str::trim) {
        None | Some("") => Ok(None),
        Some(s) => s
            .parse::<f64>()
            .map(Some)
            .map_err(|_| Error::Format(format!("line {line}: bad {name} `{s}`"))),
    }
}

/// Parses `country,population,gdp_per_capita,internet_share`.
#[allow(clippy::neg_cmp_op_on_partial_ord)]
pub fn parse_census(data: &[u8]) -> Result<Vec<CountryStats>> {
    let mut r = csv::ReaderBuilder::new().flexible(true).from_reader(data);
    let header: Vec<String> = r.headers()?.iter().map(|h| h.trim().to_string()).collect();
    let col = |name: &str| {
        header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Format(format!("census is missing column `{name}`")))
    };
    let (c, p, g, s) = (
        col("country")?,
        col("population")?,
        col("gdp_per_capita")?,
        col("internet_share")?,
    );
    let mut out = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for (i, row) in r.records().enumerate() {
        let row = row?;
        let line = i as u64 + 2;
        let country = row.get(c).unwrap_or("").trim().to_string();
        if country.is_empty() {
            return Err(Error::Format(format!("line {line}: empty country")));
        }
        if !seen.insert(country.clone()) {
            return Err(Error::Format(format!("line {line}: {country} listed twice")));
        }
        let stats = CountryStats {
            country,
            population: field(&row, p, "population", line)?,
            gdp_per_capita: field(&row, g, "gdp_per_capita", line)?,
            internet_share: field(&row, s, "internet_share", line)?,
        };
        if stats.population.is_some_and(|v| !(v > 0.0))
            || stats.gdp_per_capita.is_some_and(|v| !(v > 0.0))
            || stats.internet_share.is_some_and(|v| !(0.0..=1.0).contains(&v))
        {
            return Err(Error::Format(format!(
                "line {line}: value out of range for {}",
                stats.country
            )));
        }
        out.push(stats);
    }
    Ok(out)
}

pub fn load_census(path: &Path) -> Result<Vec<CountryStats>> {
    let data = std::fs::read(path).at(path)?;
    parse_census(&data).map_err(|e| Error::Format(format!("{}: {e}", path.display())))
}

/// Population with internet access.
pub fn digital_population(s: &CountryStats) -> Option<f64> {
    Some(s.population? * s.internet_share?)
}

/// Digital population scaled by `gdp_per_capita / normalizer`.
pub fn weighted_digital_estimate(s: &CountryStats, normalizer: f64) -> Option<f64> {
    Some(digital_population(s)? * s.gdp_per_capita? / normalizer)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Weighting {
    /// Weight = GDP per capita over its mean.
    #[default]
    MeanNormalized,
    /// Weight = average rank of GDP per capita over the mean rank.
    Rank,
}

impl Weighting {
    pub fn describe(self) -> &'static str {
        match self {
            Weighting::MeanNormalized => "digital_population * gdp_per_capita / mean(gdp_per_capita)",
            Weighting::Rank => "digital_population * rank(gdp_per_capita) / mean(rank)",
        }
    }

    /// Weighted estimate per country under this weighting over `stats`.
    pub fn estimates(self, stats: &[CountryStats]) -> BTreeMap<String, Option<f64>> {
        match self {
            Weighting::MeanNormalized => {
                let norm = gdp_normalizer(stats);
                stats
                    .iter()
                    .map(|s| (s.country.clone(), norm.and_then(|n| weighted_digital_estimate(s, n))))
                    .collect()
            }
            Weighting::Rank => {
                let with_gdp: Vec<&CountryStats> = stats.iter().filter(|s| s.gdp_per_capita.is_some()).collect();
                // ranks of the GDP bit patterns order positive floats correctly
                let keys: Vec<u64> = with_gdp.iter().map(|s| s.gdp_per_capita.unwrap().to_bits()).collect();
                let ranks = average_ranks(&keys);
                let mean = ranks.iter().sum::<f64>() / ranks.len().max(1) as f64;
                let rank_of: BTreeMap<&str, f64> = with_gdp
                    .iter()
                    .zip(&ranks)
                    .map(|(s, r)| (s.country.as_str(), *r))
                    .collect();
                stats
                    .iter()
                    .map(|s| {
                        let v = rank_of
                            .get(s.country.as_str())
                            .and_then(|r| Some(digital_population(s)? * r / mean));
                        (s.country.clone(), v)
                    })
                    .collect()
            }
        }
    }
}

impl std::str::FromStr for Weighting {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mean" | "mean-normalized" => Ok(Weighting::MeanNormalized),
            "rank" => Ok(Weighting::Rank),
            other => Err(Error::config(format!("unknown gdp weighting `{other}`"))),
        }
    }
}

/// Mean GDP per capita over countries where it is known.
pub fn gdp_normalizer(stats: &[CountryStats]) -> Option<f64> {
    let v: Vec<f64> = stats.iter().filter_map(|s| s.gdp_per_capita).collect();
    (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cs(country: &str, p: f64, g: f64, s: f64) -> CountryStats {
        CountryStats {
            country: country.into(),
            population: Some(p),
            gdp_per_capita: Some(g),
            internet_share: Some(s),
        }
    }

    #[test]
    fn worked_examples() {
        assert_eq!(
            digital_population(&cs("A", 100_000_000.0, 1.0, 0.5)),
            Some(50_000_000.0)
        );
        assert_eq!(digital_population(&cs("A", 100_000_000.0, 1.0, 0.0)), Some(0.0));
        assert_eq!(digital_population(&cs("A", 8_000_000.0, 1.0, 0.25)), Some(2_000_000.0));
    }

    #[test]
    fn gdp_weighting() {
        let a = cs("A", 2_000_000.0, 30_000.0, 0.5);
        assert_eq!(weighted_digital_estimate(&a, 30_000.0), Some(1_000_000.0));
        assert_eq!(weighted_digital_estimate(&a, 15_000.0), Some(2_000_000.0));
    }

    #[test]
    fn five_country_fixture() {
        // gdp 10k, 20k, 30k, 40k, 50k: mean 30k
        let stats: Vec<_> = (1..=5)
            .map(|i| cs(&format!("C{i}"), i as f64 * 1e6, i as f64 * 1e4, 0.1 * i as f64))
            .collect();
        let est = Weighting::MeanNormalized.estimates(&stats);
        for i in 1..=5 {
            let dp = i as f64 * 1e6 * 0.1 * i as f64;
            let want = dp * (i as f64 * 1e4) / 3e4;
            assert!((est[&format!("C{i}")].unwrap() - want).abs() < 1e-6);
        }
        let ranked = Weighting::Rank.estimates(&stats);
        // ranks 1..5, mean rank 3
        assert!((ranked["C5"].unwrap() - 5e6 * 0.5 * 5.0 / 3.0).abs() < 1e-6);
    }

    #[test]
    fn census_csv_with_nulls() {
        let data = b"country,population,gdp_per_capita,internet_share\nCAN,38000000,52000,0.92\nXYZ,,1000,\n";
        let s = parse_census(data).unwrap();
        assert_eq!(s[1].population, None);
        assert_eq!(digital_population(&s[1]), None);
        assert!(parse_census(b"country,population,gdp_per_capita,internet_share\nA,1,1,1.5\n").is_err());
        assert!(parse_census(b"country,population,gdp_per_capita,internet_share\nA,-1,1,0.5\n").is_err());
        assert!(parse_census(b"country,population\nA,1\n").is_err());
    }
}
