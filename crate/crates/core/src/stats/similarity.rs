//! Similarity tables across registers and within one register.

use std::collections::BTreeMap;

use super::freq::{align, FrequencyList, Threshold};
use super::rank::spearman;
use crate::{Error, Exec};

#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityObservation {
    pub language: String,
    pub country: String,
    pub rho: f64,
    pub n_aligned: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LanguageSummary {
    pub mean: f64,
    /// Population standard deviation.
    pub stddev: f64,
    pub observations: usize,
    pub mean_aligned: f64,
}

/// Mean and population standard deviation; `None` for an empty slice.
pub fn summarize(values: &[f64]) -> Option<(f64, f64)> {
    if values.is_empty() {
        return None;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    Some((mean, var.sqrt()))
}

fn language_summaries<'a>(
    groups: impl IntoIterator<Item = (&'a str, f64, usize)>,
) -> BTreeMap<String, LanguageSummary> {
    let mut by_lang: BTreeMap<String, (Vec<f64>, Vec<usize>)> = BTreeMap::new();
    for (lang, rho, n) in groups {
        let e = by_lang.entry(lang.to_string()).or_default();
        e.0.push(rho);
        e.1.push(n);
    }
    by_lang
        .into_iter()
        .map(|(l, (rhos, ns))| {
            let (mean, stddev) = summarize(&rhos).unwrap();
            let mean_aligned = ns.iter().sum::<usize>() as f64 / ns.len() as f64;
            (
                l,
                LanguageSummary {
                    mean,
                    stddev,
                    observations: rhos.len(),
                    mean_aligned,
                },
            )
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct CrossSourceReport {
    pub observations: Vec<SimilarityObservation>,
    pub per_language: BTreeMap<String, LanguageSummary>,
    /// (language, country, reason) for qualifying pairs whose similarity is
    /// undefined.
    pub undefined: Vec<(String, String, String)>,
}

impl CrossSourceReport {
    pub fn from_observations(observations: Vec<SimilarityObservation>) -> Self {
        let per_language = language_summaries(observations.iter().map(|o| (o.language.as_str(), o.rho, o.n_aligned)));
        CrossSourceReport {
            observations,
            per_language,
            undefined: Vec::new(),
        }
    }

    pub fn observations_csv(&self) -> String {
        let mut s = String::from("language,country,rho,n_aligned\n");
        for o in &self.observations {
            s.push_str(&format!("{},{},{:.6},{}\n", o.language, o.country, o.rho, o.n_aligned));
        }
        s
    }

    pub fn summary_csv(&self) -> String {
        let mut s = String::from("language,mean_rho,stddev,observations,mean_aligned\n");
        for (l, x) in &self.per_language {
            s.push_str(&format!(
                "{l},{:.6},{:.6},{},{:.1}\n",
                x.mean, x.stddev, x.observations, x.mean_aligned
            ));
        }
        s
    }
}

/// One observation per (language, country) with at least `min_words`
/// tokens in both registers.
pub fn cross_source_similarity(
    a: &[FrequencyList],
    b: &[FrequencyList],
    min_words: u64,
    threshold: Threshold,
    exec: &Exec,
) -> CrossSourceReport {
    let index: BTreeMap<(&str, &str), &FrequencyList> = b
        .iter()
        .map(|f| ((f.language.as_str(), f.country.as_str()), f))
        .collect();
    let mut pairs: Vec<(&FrequencyList, &FrequencyList)> = a
        .iter()
        .filter(|f| f.total_tokens >= min_words)
        .filter_map(|f| {
            index
                .get(&(f.language.as_str(), f.country.as_str()))
                .filter(|g| g.total_tokens >= min_words)
                .map(|g| (f, *g))
        })
        .collect();
    pairs.sort_by(|x, y| (&x.0.language, &x.0.country).cmp(&(&y.0.language, &y.0.country)));
    let results = exec.map(&pairs, |(x, y)| {
        let al = align(x, y, threshold);
        (spearman(&al), al.len())
    });
    let mut observations = Vec::new();
    let mut undefined = Vec::new();
    for ((x, _), (rho, n)) in pairs.iter().zip(results) {
        match rho {
            Ok(rho) => observations.push(SimilarityObservation {
                language: x.language.clone(),
                country: x.country.clone(),
                rho,
                n_aligned: n,
            }),
            Err(e) => {
                log::warn!("{}/{}: {e}", x.language, x.country);
                undefined.push((x.language.clone(), x.country.clone(), e.to_string()));
            }
        }
    }
    let mut report = CrossSourceReport::from_observations(observations);
    report.undefined = undefined;
    report
}

#[derive(Debug, Clone, PartialEq)]
pub struct WithinSourceRow {
    pub language: String,
    pub pairs: Vec<(String, String, f64, usize)>,
    pub mean: f64,
    pub stddev: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct WithinSourceReport {
    pub rows: Vec<WithinSourceRow>,
    /// Languages with fewer than two qualifying countries.
    pub skipped: Vec<String>,
    pub undefined: Vec<(String, String, String, String)>,
}

impl WithinSourceReport {
    pub fn summary_csv(&self) -> String {
        let mut s = String::from("language,mean_rho,stddev,pairs\n");
        for r in &self.rows {
            s.push_str(&format!(
                "{},{:.6},{:.6},{}\n",
                r.language,
                r.mean,
                r.stddev,
                r.pairs.len()
            ));
        }
        s
    }

    pub fn pairs_csv(&self) -> String {
        let mut s = String::from("language,country_a,country_b,rho,n_aligned\n");
        for r in &self.rows {
            for (a, b, rho, n) in &r.pairs {
                s.push_str(&format!("{},{a},{b},{rho:.6},{n}\n", r.language));
            }
        }
        s
    }
}

/// Every unordered pair of qualifying countries per language within one
/// register.
pub fn within_source_similarity(
    lists: &[FrequencyList],
    min_words: u64,
    threshold: Threshold,
    exec: &Exec,
) -> WithinSourceReport {
    let mut by_lang: BTreeMap<&str, Vec<&FrequencyList>> = BTreeMap::new();
    for f in lists.iter().filter(|f| f.total_tokens >= min_words) {
        by_lang.entry(f.language.as_str()).or_default().push(f);
    }
    let mut report = WithinSourceReport::default();
    for (lang, mut group) in by_lang {
        if group.len() < 2 {
            log::info!("{lang}: fewer than two qualifying countries, skipped");
            report.skipped.push(lang.to_string());
            continue;
        }
        group.sort_by(|x, y| x.country.cmp(&y.country));
        let mut pairs = Vec::new();
        for i in 0..group.len() {
            for j in i + 1..group.len() {
                pairs.push((group[i], group[j]));
            }
        }
        let results = exec.map(&pairs, |(x, y)| {
            let al = align(x, y, threshold);
            (spearman(&al), al.len())
        });
        let mut row_pairs = Vec::new();
        for ((x, y), (rho, n)) in pairs.iter().zip(results) {
            match rho {
                Ok(r) => row_pairs.push((x.country.clone(), y.country.clone(), r, n)),
                Err(Error::Undefined(m)) | Err(Error::Contract(m)) => {
                    report
                        .undefined
                        .push((lang.into(), x.country.clone(), y.country.clone(), m))
                }
                Err(e) => report
                    .undefined
                    .push((lang.into(), x.country.clone(), y.country.clone(), e.to_string())),
            }
        }
        let rhos: Vec<f64> = row_pairs.iter().map(|p| p.2).collect();
        if let Some((mean, stddev)) = summarize(&rhos) {
            report.rows.push(WithinSourceRow {
                language: lang.to_string(),
                pairs: row_pairs,
                mean,
                stddev,
            });
        }
    }
    report
}
