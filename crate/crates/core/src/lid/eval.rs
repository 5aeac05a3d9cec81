//! Precision, recall and F1 per label, macro-averaged per domain.

use std::collections::BTreeMap;

use super::data::LabeledSample;
use super::model::LidModel;
use crate::Exec;

/// Counts of (true label, predicted label).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Confusion {
    pub labels: Vec<String>,
    /// `counts[t][p]`
    pub counts: Vec<Vec<u64>>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: u64,
}

fn ratio(a: u64, b: u64) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

impl Confusion {
    pub fn new(labels: Vec<String>) -> Self {
        let n = labels.len();
        Confusion {
            labels,
            counts: vec![vec![0; n]; n],
        }
    }

    pub fn add(&mut self, truth: usize, predicted: usize) {
        self.counts[truth][predicted] += 1;
    }

    pub fn support(&self, label: usize) -> u64 {
        self.counts[label].iter().sum()
    }

    /// Precision and recall are 0 when undefined, and so is F1.
    pub fn metrics(&self, label: usize) -> ClassMetrics {
        let tp = self.counts[label][label];
        let predicted: u64 = self.counts.iter().map(|row| row[label]).sum();
        let support = self.support(label);
        let precision = ratio(tp, predicted);
        let recall = ratio(tp, support);
        let f1 = if tp == 0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        ClassMetrics {
            precision,
            recall,
            f1,
            support,
        }
    }

    /// Unweighted mean F1 over labels with non-zero support.
    pub fn macro_f1(&self) -> f64 {
        let present: Vec<usize> = (0..self.labels.len()).filter(|&l| self.support(l) > 0).collect();
        if present.is_empty() {
            return 0.0;
        }
        present.iter().map(|&l| self.metrics(l).f1).sum::<f64>() / present.len() as f64
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub per_domain_macro_f1: BTreeMap<String, f64>,
    pub per_language: BTreeMap<String, ClassMetrics>,
    pub macro_f1: f64,
    pub confusion: Confusion,
}

impl EvalReport {
    /// Builds the report from `(domain, truth, predicted)` label indices.
    pub fn from_predictions(labels: &[String], rows: impl IntoIterator<Item = (String, usize, usize)>) -> Self {
        let mut global = Confusion::new(labels.to_vec());
        let mut by_domain: BTreeMap<String, Confusion> = BTreeMap::new();
        for (domain, t, p) in rows {
            global.add(t, p);
            by_domain
                .entry(domain)
                .or_insert_with(|| Confusion::new(labels.to_vec()))
                .add(t, p);
        }
        let per_language = (0..labels.len())
            .filter(|&l| global.support(l) > 0)
            .map(|l| (labels[l].clone(), global.metrics(l)))
            .collect();
        EvalReport {
            per_domain_macro_f1: by_domain.iter().map(|(d, c)| (d.clone(), c.macro_f1())).collect(),
            per_language,
            macro_f1: global.macro_f1(),
            confusion: global,
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("scope,name,precision,recall,f1,support\n");
        for (d, f1) in &self.per_domain_macro_f1 {
            out.push_str(&format!("domain,{d},,,{f1:.6},\n"));
        }
        for (l, m) in &self.per_language {
            out.push_str(&format!(
                "language,{l},{:.6},{:.6},{:.6},{}\n",
                m.precision, m.recall, m.f1, m.support
            ));
        }
        out.push_str(&format!(
            "global,macro,,,{:.6},{}\n",
            self.macro_f1,
            self.confusion.total()
        ));
        out
    }
}

/// Scores every sample whose language the model knows; others are skipped
/// with a warning.
pub fn evaluate(model: &LidModel, samples: &[LabeledSample], exec: &Exec) -> EvalReport {
    let known: Vec<&LabeledSample> = samples
        .iter()
        .filter(|s| {
            let ok = model.label_index(&s.language).is_some();
            if !ok {
                log::warn!("skipping sample with unknown language `{}`", s.language);
            }
            ok
        })
        .collect();
    let predicted = exec.map(&known, |s| LidModel::argmax(&model.predict_window(&s.window)));
    EvalReport::from_predictions(
        &model.labels,
        known
            .iter()
            .zip(predicted)
            .map(|(s, p)| (s.domain.clone(), model.label_index(&s.language).unwrap(), p)),
    )
}
