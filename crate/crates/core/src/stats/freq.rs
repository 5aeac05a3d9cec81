use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use crate::clean::{classify_script, tokens, Segmenter};
use crate::error::IoContext;
use crate::{Error, Exec, Result};

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct FrequencyList {
    pub register: String,
    pub language: String,
    pub country: String,
    pub counts: BTreeMap<String, u64>,
    /// Sum of all counts before any threshold.
    pub total_tokens: u64,
}

impl FrequencyList {
    pub fn new(register: &str, language: &str, country: &str) -> Self {
        FrequencyList {
            register: register.into(),
            language: language.into(),
            country: country.into(),
            ..Default::default()
        }
    }

    pub fn from_counts<'a>(
        register: &str,
        language: &str,
        country: &str,
        counts: impl IntoIterator<Item = (&'a str, u64)>,
    ) -> Self {
        let mut fl = FrequencyList::new(register, language, country);
        for (t, c) in counts {
            fl.add(t, c);
        }
        fl
    }

    pub fn add(&mut self, token: &str, count: u64) {
        if count == 0 {
            return;
        }
        *self.counts.entry(token.to_string()).or_insert(0) += count;
        self.total_tokens += count;
    }

    pub fn merge(&mut self, other: &FrequencyList) {
        for (t, &c) in &other.counts {
            self.add(t, c);
        }
    }

    pub fn count(&self, token: &str) -> u64 {
        self.counts.get(token).copied().unwrap_or(0)
    }

    /// Tokens by descending count, then token.
    pub fn sorted(&self) -> Vec<(&str, u64)> {
        let mut v: Vec<(&str, u64)> = self.counts.iter().map(|(t, &c)| (t.as_str(), c)).collect();
        v.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(b.0)));
        v
    }

    pub fn to_csv(&self) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["token", "count"])?;
        for (t, c) in self.sorted() {
            w.write_record([t, &c.to_string()])?;
        }
        w.into_inner().map_err(|e| Error::Format(e.to_string()))
    }

    pub fn from_csv(register: &str, language: &str, country: &str, data: &[u8]) -> Result<Self> {
        let mut fl = FrequencyList::new(register, language, country);
        let mut r = csv::Reader::from_reader(data);
        for row in r.records() {
            let row = row?;
            let (Some(t), Some(c)) = (row.get(0), row.get(1)) else {
                return Err(Error::Format("frequency row needs token and count".into()));
            };
            let c: u64 = c.parse().map_err(|_| Error::Format(format!("bad count `{c}`")))?;
            if fl.counts.contains_key(t) {
                return Err(Error::Format(format!("token `{t}` listed twice")));
            }
            fl.add(t, c);
        }
        Ok(fl)
    }

    /// `root/register/language/COUNTRY.csv`
    pub fn relative_path(&self) -> std::path::PathBuf {
        Path::new(&self.register)
            .join(&self.language)
            .join(format!("{}.csv", self.country))
    }

    pub fn write_under(&self, root: &Path) -> Result<()> {
        let path = root.join(self.relative_path());
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir).at(dir)?;
        }
        std::fs::write(&path, self.to_csv()?).at(&path)
    }

    /// Every list of a tree written by [`FrequencyList::write_under`], sorted
    /// by (register, language, country).
    pub fn read_tree(root: &Path) -> Result<Vec<FrequencyList>> {
        let mut out = Vec::new();
        for reg in sorted_dirs(root)? {
            for lang in sorted_dirs(&reg)? {
                let mut files: Vec<_> = std::fs::read_dir(&lang)
                    .at(&lang)?
                    .filter_map(|e| e.ok().map(|e| e.path()))
                    .filter(|p| p.extension().is_some_and(|x| x == "csv"))
                    .collect();
                files.sort();
                for f in files {
                    let data = std::fs::read(&f).at(&f)?;
                    let name = |p: &Path| p.file_name().unwrap().to_string_lossy().into_owned();
                    let country = f.file_stem().unwrap().to_string_lossy().into_owned();
                    out.push(
                        FrequencyList::from_csv(&name(&reg), &name(&lang), &country, &data)
                            .map_err(|e| Error::Format(format!("{}: {e}", f.display())))?,
                    );
                }
            }
        }
        Ok(out)
    }
}

fn sorted_dirs(p: &Path) -> Result<Vec<std::path::PathBuf>> {
    let mut v: Vec<_> = std::fs::read_dir(p)
        .at(p)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_dir())
        .collect();
    v.sort();
    Ok(v)
}

/// Counts case-folded word tokens of cleaned samples, tokenized as the
/// word counter does.
pub fn build_frequency_list<S: AsRef<str> + Sync>(
    register: &str,
    language: &str,
    country: &str,
    samples: &[S],
    segmenter: &dyn Segmenter,
    exec: &Exec,
) -> FrequencyList {
    let partials = exec.map(samples, |s| {
        let text = s.as_ref();
        let mut local: HashMap<String, u64> = HashMap::new();
        for t in tokens(text, classify_script(text), segmenter) {
            *local.entry(t.to_lowercase()).or_insert(0) += 1;
        }
        local
    });
    let mut fl = FrequencyList::new(register, language, country);
    for p in partials {
        for (t, c) in p {
            fl.add(&t, c);
        }
    }
    fl
}

/// Minimum relative frequency `count / per`; the boundary is inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Threshold {
    pub count: u64,
    pub per: u64,
}

impl Default for Threshold {
    fn default() -> Self {
        Threshold {
            count: 5,
            per: 10_000_000,
        }
    }
}

impl Threshold {
    /// Exact integer test of `count / total >= self.count / self.per`.
    pub fn admits(&self, count: u64, total: u64) -> bool {
        total > 0 && count as u128 * self.per as u128 >= self.count as u128 * total as u128
    }
}

pub fn apply_threshold(fl: &FrequencyList, threshold: Threshold) -> Vec<&str> {
    fl.counts
        .iter()
        .filter(|(_, &c)| threshold.admits(c, fl.total_tokens))
        .map(|(t, _)| t.as_str())
        .collect()
}

/// Tokens above threshold in both lists, in token order, with both counts.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct AlignedVocab {
    pub tokens: Vec<String>,
    pub a: Vec<u64>,
    pub b: Vec<u64>,
    pub total_a: u64,
    pub total_b: u64,
}

impl AlignedVocab {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

pub fn align(a: &FrequencyList, b: &FrequencyList, threshold: Threshold) -> AlignedVocab {
    let mut out = AlignedVocab {
        total_a: a.total_tokens,
        total_b: b.total_tokens,
        ..Default::default()
    };
    for t in apply_threshold(a, threshold) {
        let cb = b.count(t);
        if threshold.admits(cb, b.total_tokens) && cb > 0 {
            out.tokens.push(t.to_string());
            out.a.push(a.counts[t]);
            out.b.push(cb);
        }
    }
    out
}
