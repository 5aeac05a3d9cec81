//! Document-level prediction and contamination filtering.

use std::collections::BTreeMap;

use super::data::LabeledSample;
use super::model::LidModel;
use super::window::windows;
use crate::{Error, Exec, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Aggregation {
    /// Argmax of the mean window probability vector.
    #[default]
    MeanProbability,
    /// Most frequent window argmax; ties go to the higher mean probability,
    /// then to the lower label index.
    MajorityVote,
}

impl std::str::FromStr for Aggregation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mean" => Ok(Aggregation::MeanProbability),
            "majority" => Ok(Aggregation::MajorityVote),
            other => Err(Error::config(format!("unknown aggregation `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum DocPrediction {
    Identified {
        language: String,
        confidence: f64,
    },
    /// Shorter than one window.
    Unidentifiable,
}

/// Per-window probabilities averaged over all windows of `text`. The
/// confidence is the chosen label's mean probability.
pub fn predict_document(model: &LidModel, text: &str, aggregation: Aggregation) -> DocPrediction {
    let ws = windows(text);
    if ws.is_empty() {
        return DocPrediction::Unidentifiable;
    }
    let probs: Vec<Vec<f64>> = ws.iter().map(|w| model.predict_window(w)).collect();
    aggregate(&model.labels, &probs, aggregation)
}

pub(crate) fn aggregate(labels: &[String], probs: &[Vec<f64>], aggregation: Aggregation) -> DocPrediction {
    let n = labels.len();
    let mut mean = vec![0.0; n];
    for p in probs {
        for (m, v) in mean.iter_mut().zip(p) {
            *m += v;
        }
    }
    for m in &mut mean {
        *m /= probs.len() as f64;
    }
    let best = match aggregation {
        Aggregation::MeanProbability => LidModel::argmax(&mean),
        Aggregation::MajorityVote => {
            let mut votes = vec![0usize; n];
            for p in probs {
                votes[LidModel::argmax(p)] += 1;
            }
            (0..n)
                .max_by(|&a, &b| {
                    votes[a]
                        .cmp(&votes[b])
                        .then(mean[a].total_cmp(&mean[b]))
                        .then(b.cmp(&a))
                })
                .unwrap()
        }
    };
    DocPrediction::Identified {
        language: labels[best].clone(),
        confidence: mean[best],
    }
}

/// Drops windows predicted as a contaminant label unless their own label is
/// a contaminant. Returns the kept samples and drop counts per nominal
/// label.
pub fn filter_contamination(
    samples: Vec<LabeledSample>,
    model: &LidModel,
    contaminants: &[String],
    exec: &Exec,
) -> Result<(Vec<LabeledSample>, BTreeMap<String, u64>)> {
    let mut targets = Vec::with_capacity(contaminants.len());
    for c in contaminants {
        match model.label_index(c) {
            Some(i) => targets.push(i),
            None => {
                return Err(Error::config(format!(
                    "contaminant label `{c}` is unknown to the model"
                )))
            }
        }
    }
    if targets.is_empty() {
        return Ok((samples, BTreeMap::new()));
    }
    let predicted = exec.map(&samples, |s| LidModel::argmax(&model.predict_window(&s.window)));
    let mut drops = BTreeMap::new();
    let kept = samples
        .into_iter()
        .zip(predicted)
        .filter(|(s, p)| {
            let drop = targets.contains(p) && !contaminants.contains(&s.language);
            if drop {
                *drops.entry(s.language.clone()).or_insert(0) += 1;
            }
            !drop
        })
        .map(|(s, _)| s)
        .collect();
    Ok((kept, drops))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labels() -> Vec<String> {
        vec!["a".into(), "b".into(), "c".into()]
    }

    #[test]
    fn mean_of_two_hand_set_windows() {
        // mean = (0.35, 0.45, 0.2): b wins although a wins the first window.
        let probs = vec![vec![0.6, 0.3, 0.1], vec![0.1, 0.6, 0.3]];
        match aggregate(&labels(), &probs, Aggregation::MeanProbability) {
            DocPrediction::Identified { language, confidence } => {
                assert_eq!(language, "b");
                assert!((confidence - 0.45).abs() < 1e-15);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn single_and_unanimous_windows() {
        let one = vec![vec![0.2, 0.7, 0.1]];
        assert_eq!(
            aggregate(&labels(), &one, Aggregation::MeanProbability),
            DocPrediction::Identified {
                language: "b".into(),
                confidence: 0.7
            }
        );
        let three = vec![vec![0.9, 0.05, 0.05], vec![0.6, 0.3, 0.1], vec![0.75, 0.2, 0.05]];
        match aggregate(&labels(), &three, Aggregation::MeanProbability) {
            DocPrediction::Identified { language, confidence } => {
                assert_eq!(language, "a");
                assert!((confidence - 0.75).abs() < 1e-12);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn majority_vote() {
        let probs = vec![vec![0.5, 0.4, 0.1], vec![0.5, 0.4, 0.1], vec![0.0, 1.0, 0.0]];
        let DocPrediction::Identified { language, .. } = aggregate(&labels(), &probs, Aggregation::MajorityVote) else {
            panic!()
        };
        assert_eq!(language, "a");
        let DocPrediction::Identified { language, .. } = aggregate(&labels(), &probs, Aggregation::MeanProbability)
        else {
            panic!()
        };
        assert_eq!(language, "b");
    }
}
