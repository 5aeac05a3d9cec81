//! Correlations of words per country with census measures.

use std::collections::BTreeMap;
use std::path::Path;

use super::census::{digital_population, CountryStats, Weighting};
use super::pearson::pearson_by_country;
use crate::error::IoContext;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct DensityRow {
    pub source: String,
    pub measure: String,
    pub r: Option<f64>,
    pub n: usize,
    pub note: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct DensityReport {
    pub header: Vec<(String, String)>,
    pub rows: Vec<DensityRow>,
}

impl DensityReport {
    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        for (k, v) in &self.header {
            s.push_str(&format!("# {k}: {v}\n"));
        }
        s.push_str("source,measure,r,n,note\n");
        for row in &self.rows {
            let r = row.r.map_or(String::new(), |r| format!("{r:.6}"));
            s.push_str(&format!("{},{},{r},{},{}\n", row.source, row.measure, row.n, row.note));
        }
        s
    }
}

/// Reads `country,words` into a series; an empty count is a null.
pub fn read_density(path: &Path) -> Result<BTreeMap<String, Option<f64>>> {
    let data = std::fs::read(path).at(path)?;
    let mut r = csv::Reader::from_reader(data.as_slice());
    let mut out = BTreeMap::new();
    for row in r.records() {
        let row = row?;
        let country = row.get(0).unwrap_or("").trim();
        let words = row.get(1).unwrap_or("").trim();
        let v = if words.is_empty() {
            None
        } else {
            Some(
                words
                    .parse::<f64>()
                    .map_err(|_| Error::Format(format!("{}: bad word count `{words}`", path.display())))?,
            )
        };
        if v.is_some_and(|w| w < 0.0) {
            return Err(Error::Format(format!(
                "{}: negative word count for {country}",
                path.display()
            )));
        }
        out.insert(country.to_string(), v);
    }
    Ok(out)
}

fn push(rows: &mut Vec<DensityRow>, source: &str, measure: &str, result: Result<super::Correlation>) {
    match result {
        Ok(c) => rows.push(DensityRow {
            source: source.into(),
            measure: measure.into(),
            r: Some(c.r),
            n: c.n,
            note: String::new(),
        }),
        Err(e) => rows.push(DensityRow {
            source: source.into(),
            measure: measure.into(),
            r: None,
            n: 0,
            note: e.to_string().replace(',', ";"),
        }),
    }
}

/// Words per country of every source against population, GDP per capita,
/// internet share, digital population and the weighted estimate, then
/// every pair of sources against each other. A country missing from a
/// table is a null, never a zero.
pub fn density_correlations(
    sources: &BTreeMap<String, BTreeMap<String, Option<f64>>>,
    census: &[CountryStats],
    weighting: Weighting,
) -> DensityReport {
    let series = |f: &dyn Fn(&CountryStats) -> Option<f64>| -> BTreeMap<String, Option<f64>> {
        census.iter().map(|s| (s.country.clone(), f(s))).collect()
    };
    let measures: Vec<(&str, BTreeMap<String, Option<f64>>)> = vec![
        ("population", series(&|s| s.population)),
        ("gdp_per_capita", series(&|s| s.gdp_per_capita)),
        ("internet_share", series(&|s| s.internet_share)),
        ("digital_population", series(&digital_population)),
        ("weighted_estimate", weighting.estimates(census)),
    ];
    let mut report = DensityReport::default();
    report.header.push(("weighting".into(), weighting.describe().into()));
    report
        .header
        .push(("census_countries".into(), census.len().to_string()));
    for (name, s) in &measures {
        let nulls = s.values().filter(|v| v.is_none()).count();
        report.header.push((format!("census_nulls.{name}"), nulls.to_string()));
    }
    for (src, words) in sources {
        let nulls = words.values().filter(|v| v.is_none()).count();
        report.header.push((format!("density_nulls.{src}"), nulls.to_string()));
        for (name, s) in &measures {
            push(&mut report.rows, src, name, pearson_by_country(words, s));
        }
    }
    let names: Vec<&String> = sources.keys().collect();
    for i in 0..names.len() {
        for j in i + 1..names.len() {
            push(
                &mut report.rows,
                names[i],
                &format!("source:{}", names[j]),
                pearson_by_country(&sources[names[i]], &sources[names[j]]),
            );
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn proportional_density_and_identical_sources() {
        let census: Vec<CountryStats> = (1..=6)
            .map(|i| CountryStats {
                country: format!("C{i}"),
                population: Some(i as f64 * 1e6),
                gdp_per_capita: Some(1e4 + (i % 3) as f64 * 5e3),
                internet_share: Some(0.1 * i as f64),
            })
            .collect();
        let words: BTreeMap<String, Option<f64>> = (1..=6).map(|i| (format!("C{i}"), Some(i as f64 * 300.0))).collect();
        let sources = BTreeMap::from([("a".to_string(), words.clone()), ("b".to_string(), words)]);
        let rep = density_correlations(&sources, &census, Weighting::MeanNormalized);
        let get = |src: &str, m: &str| {
            rep.rows
                .iter()
                .find(|r| r.source == src && r.measure == m)
                .unwrap()
                .clone()
        };
        assert_eq!(get("a", "population").r, Some(1.0));
        assert_eq!(get("a", "source:b").r, Some(1.0));
        assert_eq!(get("a", "source:b").n, 6);
        assert!(rep.to_csv().starts_with("# weighting: "));
    }
}
