//! Frequency lists, similarity and demographic reports over built trees.

use std::collections::BTreeMap;
use std::path::Path;

use super::corpus::{list_corpus, read_corpus_file};
use crate::clean::HeuristicSegmenter;
use crate::demographics::{
    density_correlations, language_profiles, profile_correlation, read_density, CountryStats, Weighting,
};
use crate::error::IoContext;
use crate::stats::{build_frequency_list, cross_source_similarity, within_source_similarity, FrequencyList, Threshold};
use crate::{Error, Exec, Result};

/// One frequency list per (language, country) of a corpus tree, written
/// under `out/register/language/COUNTRY.csv`.
pub fn run_ngrams(corpus: &Path, out: &Path, register: &str, exec: &Exec) -> Result<Vec<FrequencyList>> {
    let mut texts: BTreeMap<(String, String), Vec<String>> = BTreeMap::new();
    for f in list_corpus(corpus)? {
        let rows = read_corpus_file(&f.path)?;
        let e = texts.entry((f.language.clone(), f.country.clone())).or_default();
        e.extend(rows.into_iter().map(|r| r.text));
    }
    std::fs::create_dir_all(out).at(out)?;
    let mut lists = Vec::new();
    for ((language, country), samples) in texts {
        if samples.is_empty() {
            continue;
        }
        let fl = build_frequency_list(register, &language, &country, &samples, &HeuristicSegmenter, exec);
        if fl.total_tokens == 0 {
            continue;
        }
        fl.write_under(out)?;
        lists.push(fl);
    }
    Ok(lists)
}

/// Words per (country, language) from the "Number of Words" column.
pub fn corpus_index(corpus: &Path) -> Result<PageIndex> {
    let mut index = BTreeMap::new();
    for f in list_corpus(corpus)? {
        let words: u64 = read_corpus_file(&f.path)?.iter().map(|r| r.words).sum();
        *index.entry((f.country, f.language)).or_insert(0) += words;
    }
    Ok(index)
}

fn write(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).at(path)
}

/// Cross-source similarity of two frequency trees, plus the within-source
/// table of each. `countries` restricts the cross-source observations, as
/// for an inner-circle baseline.
pub fn run_compare(
    a: &Path,
    b: &Path,
    min_words: u64,
    countries: Option<&[String]>,
    out: &Path,
    exec: &Exec,
) -> Result<crate::stats::CrossSourceReport> {
    let la = FrequencyList::read_tree(a)?;
    let lb = FrequencyList::read_tree(b)?;
    let keep = |lists: &[FrequencyList]| -> Vec<FrequencyList> {
        lists
            .iter()
            .filter(|f| countries.is_none_or(|cs| cs.contains(&f.country)))
            .cloned()
            .collect()
    };
    let threshold = Threshold::default();
    let cross = cross_source_similarity(&keep(&la), &keep(&lb), min_words, threshold, exec);
    std::fs::create_dir_all(out).at(out)?;
    write(&out.join("cross_observations.csv"), &cross.observations_csv())?;
    write(&out.join("cross_summary.csv"), &cross.summary_csv())?;
    for (name, lists) in [("a", &la), ("b", &lb)] {
        let within = within_source_similarity(lists, min_words, threshold, exec);
        write(&out.join(format!("within_{name}_summary.csv")), &within.summary_csv())?;
        write(&out.join(format!("within_{name}_pairs.csv")), &within.pairs_csv())?;
    }
    let mut undefined = String::from("language,country,reason\n");
    for (l, c, r) in &cross.undefined {
        undefined.push_str(&format!("{l},{c},\"{}\"\n", r.replace('"', "'")));
    }
    write(&out.join("cross_undefined.csv"), &undefined)?;
    Ok(cross)
}

/// A density source: a `country,words` CSV or a corpus tree.
type Density = BTreeMap<String, Option<f64>>;
type PageIndex = BTreeMap<(String, String), u64>;

pub fn load_source(path: &Path) -> Result<(Density, Option<PageIndex>)> {
    if path.is_dir() {
        let index = corpus_index(path)?;
        let mut words: BTreeMap<String, Option<f64>> = BTreeMap::new();
        for ((country, _), w) in &index {
            let e = words.entry(country.clone()).or_insert(Some(0.0));
            *e = e.map(|v| v + *w as f64);
        }
        Ok((words, Some(index)))
    } else if path.is_file() {
        Ok((read_density(path)?, None))
    } else {
        Err(Error::io(path, std::io::Error::from(std::io::ErrorKind::NotFound)))
    }
}

/// Density correlations for every named source; language profiles and
/// their pairwise correlations for the sources given as corpus trees.
pub fn run_demographics(
    census: &[CountryStats],
    sources: &[(String, std::path::PathBuf)],
    weighting: Weighting,
    out: &Path,
) -> Result<()> {
    let mut densities = BTreeMap::new();
    let mut profiles = BTreeMap::new();
    for (name, path) in sources {
        if densities.contains_key(name) {
            return Err(Error::config(format!("source `{name}` given twice")));
        }
        let (words, index) = load_source(path)?;
        densities.insert(name.clone(), words);
        if let Some(index) = index {
            profiles.insert(name.clone(), language_profiles(&index));
        }
    }
    std::fs::create_dir_all(out).at(out)?;
    let report = density_correlations(&densities, census, weighting);
    write(&out.join("density_correlations.csv"), &report.to_csv())?;
    if profiles.is_empty() {
        return Ok(());
    }
    let mut shares = String::from("source,language,country,share\n");
    for (src, ps) in &profiles {
        for (lang, p) in ps {
            for (country, s) in &p.shares {
                shares.push_str(&format!("{src},{lang},{country},{s:.9}\n"));
            }
        }
    }
    write(&out.join("language_profiles.csv"), &shares)?;
    let names: Vec<&String> = profiles.keys().collect();
    let mut corr = String::from("# countries: present in both profiles\nsource_a,source_b,language,r,n,note\n");
    for i in 0..names.len() {
        for j in i + 1..names.len() {
            let (pa, pb) = (&profiles[names[i]], &profiles[names[j]]);
            for (lang, a) in pa {
                let Some(b) = pb.get(lang) else { continue };
                match profile_correlation(a, b) {
                    Ok(c) => corr.push_str(&format!("{},{},{lang},{:.6},{},\n", names[i], names[j], c.r, c.n)),
                    Err(e) => corr.push_str(&format!(
                        "{},{},{lang},,0,{}\n",
                        names[i],
                        names[j],
                        e.to_string().replace(',', ";")
                    )),
                }
            }
        }
    }
    write(&out.join("profile_correlations.csv"), &corr)?;
    Ok(())
}
