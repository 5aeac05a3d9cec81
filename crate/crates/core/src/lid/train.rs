//! Balanced mini-batch training.
//!
//! Every epoch draws the same number of windows from each (language,
//! domain) pair, without replacement when the pair has enough windows and
//! with replacement otherwise. A mini-batch is split into fixed-size chunks
//! whose gradients are computed independently and summed in chunk order, so
//! the trained weights do not depend on the worker count. Dropout masks are
//! seeded by (seed, epoch, position in epoch) for the same reason.

use std::collections::BTreeMap;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use xxhash_rust::xxh64::xxh64;

use super::data::{LabeledSample, Split};
use super::eval::EvalReport;
use super::features::{FeatureVector, Featurizer};
use super::mlp::{Gradient, Mlp};
use super::model::LidModel;
use crate::kv::KeyValues;
use crate::{Error, Exec, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Optimizer {
    Momentum { momentum: f64 },
    Adam { beta1: f64, beta2: f64, epsilon: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub featurizer: Featurizer,
    pub hidden: Vec<usize>,
    pub dropout: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub optimizer: Optimizer,
    pub per_pair: usize,
    /// Half-width of the uniform initialization of the input layer.
    pub input_init: f64,
    /// Samples per gradient chunk; fixed so reduction order is fixed.
    pub chunk_size: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            featurizer: Featurizer::default(),
            hidden: vec![300, 300, 300],
            dropout: 0.25,
            epochs: 30,
            batch_size: 256,
            learning_rate: 0.001,
            optimizer: Optimizer::Adam {
                beta1: 0.9,
                beta2: 0.999,
                epsilon: 1e-8,
            },
            per_pair: 1000,
            input_init: 0.01,
            chunk_size: 32,
            seed: 1,
        }
    }
}

pub(crate) const TRAIN_KEYS: [&str; 13] = [
    "lid_dim",
    "lid_hash_seed",
    "lid_normalize",
    "lid_hidden",
    "lid_dropout",
    "lid_epochs",
    "lid_batch_size",
    "lid_learning_rate",
    "lid_optimizer",
    "lid_momentum",
    "lid_per_pair",
    "lid_input_init",
    "lid_chunk_size",
];

impl TrainConfig {
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::config(m.to_string()));
        if self.featurizer.dim == 0 || self.featurizer.dim > u32::MAX as usize {
            return bad("lid_dim out of range");
        }
        if self.hidden.is_empty() || self.hidden.contains(&0) {
            return bad("lid_hidden needs at least one non-empty layer");
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return bad("lid_dropout must be in [0, 1)");
        }
        if self.epochs == 0 || self.batch_size == 0 || self.per_pair == 0 || self.chunk_size == 0 {
            return bad("lid_epochs, lid_batch_size, lid_per_pair and lid_chunk_size must be positive");
        }
        if !(self.learning_rate > 0.0) || !(self.input_init > 0.0) {
            return bad("lid_learning_rate and lid_input_init must be positive");
        }
        Ok(())
    }

    pub fn from_kv(kv: &KeyValues, seed: u64) -> Result<Self> {
        let mut c = TrainConfig {
            seed,
            ..Default::default()
        };
        if let Some(v) = kv.parse_value("lid_dim")? {
            c.featurizer.dim = v;
        }
        if let Some(v) = kv.parse_value("lid_hash_seed")? {
            c.featurizer.hash_seed = v;
        }
        if let Some(v) = kv.parse_value("lid_normalize")? {
            c.featurizer.normalize = v;
        }
        if let Some(v) = kv.list("lid_hidden") {
            c.hidden = v
                .iter()
                .map(|s| {
                    s.parse()
                        .map_err(|_| Error::config(format!("lid_hidden: bad size `{s}`")))
                })
                .collect::<Result<_>>()?;
        }
        if let Some(v) = kv.parse_value("lid_dropout")? {
            c.dropout = v;
        }
        if let Some(v) = kv.parse_value("lid_epochs")? {
            c.epochs = v;
        }
        if let Some(v) = kv.parse_value("lid_batch_size")? {
            c.batch_size = v;
        }
        if let Some(v) = kv.parse_value("lid_learning_rate")? {
            c.learning_rate = v;
        }
        let momentum = kv.parse_value("lid_momentum")?.unwrap_or(0.9);
        c.optimizer = match kv.get("lid_optimizer") {
            None => c.optimizer,
            Some("momentum" | "sgd") => Optimizer::Momentum { momentum },
            Some("adam") => Optimizer::Adam {
                beta1: 0.9,
                beta2: 0.999,
                epsilon: 1e-8,
            },
            Some(other) => return Err(Error::config(format!("unknown optimizer `{other}`"))),
        };
        if let Some(v) = kv.parse_value("lid_per_pair")? {
            c.per_pair = v;
        }
        if let Some(v) = kv.parse_value("lid_input_init")? {
            c.input_init = v;
        }
        if let Some(v) = kv.parse_value("lid_chunk_size")? {
            c.chunk_size = v;
        }
        c.validate()?;
        Ok(c)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpochMetrics {
    pub epoch: usize,
    pub samples: usize,
    pub mean_loss: f64,
    pub test_macro_f1: f64,
    pub seconds: f64,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub model: LidModel,
    pub best_epoch: usize,
    pub history: Vec<EpochMetrics>,
}

/// Indices of one epoch: exactly `per_pair` draws from every pair, shuffled.
pub fn balanced_epoch(
    pairs: &BTreeMap<(String, String), Vec<usize>>,
    per_pair: usize,
    rng: &mut impl Rng,
) -> Vec<usize> {
    let mut out = Vec::with_capacity(pairs.len() * per_pair);
    for members in pairs.values() {
        if members.is_empty() {
            continue;
        }
        if members.len() >= per_pair {
            let mut pool = members.clone();
            let (chosen, _) = pool.partial_shuffle(rng, per_pair);
            out.extend_from_slice(chosen);
        } else {
            out.extend((0..per_pair).map(|_| members[rng.random_range(0..members.len())]));
        }
    }
    out.shuffle(rng);
    out
}

fn mix(seed: u64, a: u64, b: u64) -> u64 {
    let mut key = [0u8; 24];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&a.to_le_bytes());
    key[16..].copy_from_slice(&b.to_le_bytes());
    xxh64(&key, 0x6472_6f70)
}

/// Optimizer buffers mirroring the parameter layout.
struct OptState {
    first: Vec<Vec<f32>>,
    second: Vec<Vec<f32>>,
    first_bias: Vec<Vec<f32>>,
    second_bias: Vec<Vec<f32>>,
    step: u64,
}

impl OptState {
    fn new(mlp: &Mlp<f32>, opt: Optimizer) -> Self {
        let zeros_w = || {
            mlp.layers
                .iter()
                .map(|l| vec![0.0f32; l.weights.len()])
                .collect::<Vec<_>>()
        };
        let zeros_b = || {
            mlp.layers
                .iter()
                .map(|l| vec![0.0f32; l.bias.len()])
                .collect::<Vec<_>>()
        };
        let adam = matches!(opt, Optimizer::Adam { .. });
        OptState {
            first: zeros_w(),
            second: if adam { zeros_w() } else { Vec::new() },
            first_bias: zeros_b(),
            second_bias: if adam { zeros_b() } else { Vec::new() },
            step: 0,
        }
    }
}

struct Update {
    lr: f64,
    scale: f32,
    opt: Optimizer,
    correction1: f64,
    correction2: f64,
}

impl Update {
    #[inline]
    fn apply(&self, w: &mut [f32], g: &[f32], m: &mut [f32], v: Option<&mut [f32]>) {
        match (self.opt, v) {
            (Optimizer::Momentum { momentum }, _) => {
                let (mu, lr) = (momentum as f32, self.lr as f32);
                for ((w, &g), m) in w.iter_mut().zip(g).zip(m.iter_mut()) {
                    *m = mu * *m - lr * g * self.scale;
                    *w += *m;
                }
            }
            (Optimizer::Adam { beta1, beta2, epsilon }, Some(v)) => {
                let (b1, b2) = (beta1 as f32, beta2 as f32);
                let step = (self.lr * self.correction2.sqrt() / self.correction1) as f32;
                let eps = epsilon as f32;
                for (((w, &g), m), v) in w.iter_mut().zip(g).zip(m.iter_mut()).zip(v.iter_mut()) {
                    let g = g * self.scale;
                    *m = b1 * *m + (1.0 - b1) * g;
                    *v = b2 * *v + (1.0 - b2) * g * g;
                    *w -= step * *m / (v.sqrt() + eps);
                }
            }
            (Optimizer::Adam { .. }, None) => unreachable!("adam state allocated"),
        }
    }
}

/// Applies one step. Input-layer rows absent from the gradient are left
/// untouched, including their optimizer state.
fn step(mlp: &mut Mlp<f32>, state: &mut OptState, grad: &Gradient<f32>, lr: f64, opt: Optimizer) {
    state.step += 1;
    let (c1, c2) = match opt {
        Optimizer::Adam { beta1, beta2, .. } => {
            (1.0 - beta1.powi(state.step as i32), 1.0 - beta2.powi(state.step as i32))
        }
        Optimizer::Momentum { .. } => (1.0, 1.0),
    };
    let up = Update {
        lr,
        scale: 1.0 / grad.samples.max(1) as f32,
        opt,
        correction1: c1,
        correction2: c2,
    };
    let adam = !state.second.is_empty();
    let width = mlp.layers[0].outputs;
    let mut rows: Vec<(&u32, &Vec<f32>)> = grad.input_rows.iter().collect();
    rows.sort_unstable_by_key(|r| *r.0);
    for (&r, g) in rows {
        let span = r as usize * width..(r as usize + 1) * width;
        let v = if adam {
            Some(&mut state.second[0][span.clone()])
        } else {
            None
        };
        up.apply(
            &mut mlp.layers[0].weights[span.clone()],
            g,
            &mut state.first[0][span],
            v,
        );
    }
    {
        let v = if adam {
            Some(&mut state.second_bias[0][..])
        } else {
            None
        };
        up.apply(&mut mlp.layers[0].bias, &grad.input_bias, &mut state.first_bias[0], v);
    }
    for (l, (gw, gb)) in grad.dense.iter().enumerate() {
        let l = l + 1;
        let layer = &mut mlp.layers[l];
        let v = if adam { Some(&mut state.second[l][..]) } else { None };
        up.apply(&mut layer.weights, gw, &mut state.first[l], v);
        let v = if adam {
            Some(&mut state.second_bias[l][..])
        } else {
            None
        };
        up.apply(&mut layer.bias, gb, &mut state.first_bias[l], v);
    }
}

struct Prepared {
    labels: Vec<String>,
    train: Vec<(FeatureVector, usize)>,
    pairs: BTreeMap<(String, String), Vec<usize>>,
    test: Vec<(FeatureVector, usize, String)>,
}

fn prepare(samples: &[LabeledSample], cfg: &TrainConfig, exec: &Exec) -> Result<Prepared> {
    let mut labels: Vec<String> = samples.iter().map(|s| s.language.clone()).collect();
    labels.sort();
    labels.dedup();
    if labels.len() < 2 {
        return Err(Error::config(format!(
            "training needs at least 2 labels, found {}",
            labels.len()
        )));
    }
    let index: BTreeMap<&str, usize> = labels.iter().enumerate().map(|(i, l)| (l.as_str(), i)).collect();
    let train_samples: Vec<&LabeledSample> = samples.iter().filter(|s| s.split == Split::Train).collect();
    for l in &labels {
        if !train_samples.iter().any(|s| &s.language == l) {
            return Err(Error::config(format!("language `{l}` has no training windows")));
        }
    }
    let mut pairs: BTreeMap<(String, String), Vec<usize>> = BTreeMap::new();
    for (i, s) in train_samples.iter().enumerate() {
        pairs.entry((s.language.clone(), s.domain.clone())).or_default().push(i);
    }
    for s in samples {
        let key = (s.language.clone(), s.domain.clone());
        if let std::collections::btree_map::Entry::Vacant(e) = pairs.entry(key) {
            log::warn!(
                "pair {}/{} has no training windows; it is not sampled",
                s.language,
                s.domain
            );
            e.insert(Vec::new());
        }
    }
    let fz = cfg.featurizer;
    let train = exec.map(&train_samples, |s| {
        (fz.featurize(s.window.as_str()), index[s.language.as_str()])
    });
    let test_samples: Vec<&LabeledSample> = samples.iter().filter(|s| s.split == Split::Test).collect();
    let test = exec.map(&test_samples, |s| {
        (
            fz.featurize(s.window.as_str()),
            index[s.language.as_str()],
            s.domain.clone(),
        )
    });
    Ok(Prepared {
        labels,
        train,
        pairs,
        test,
    })
}

fn test_macro_f1(mlp: &Mlp<f32>, labels: &[String], test: &[(FeatureVector, usize, String)], exec: &Exec) -> f64 {
    let predicted = exec.map(test, |(fv, _, _)| {
        LidModel::argmax(&mlp.predict(fv).expect("dimension checked"))
    });
    EvalReport::from_predictions(
        labels,
        test.iter().zip(predicted).map(|((_, t, d), p)| (d.clone(), *t, p)),
    )
    .macro_f1
}

/// Trains from scratch and keeps the epoch with the best test-split macro
/// F1 (the last epoch when there is no test split).
pub fn train(samples: &[LabeledSample], cfg: &TrainConfig, exec: &Exec) -> Result<TrainOutcome> {
    cfg.validate()?;
    let data = prepare(samples, cfg, exec)?;
    let mut mlp = Mlp::<f32>::new(
        cfg.featurizer.dim,
        &cfg.hidden,
        data.labels.len(),
        cfg.input_init,
        cfg.seed,
    );
    let mut state = OptState::new(&mlp, cfg.optimizer);
    let mut best: Option<(f64, usize, Mlp<f32>)> = None;
    let mut history = Vec::with_capacity(cfg.epochs);
    for epoch in 0..cfg.epochs {
        let started = Instant::now();
        let mut rng = ChaCha8Rng::seed_from_u64(mix(cfg.seed, epoch as u64, u64::MAX));
        let order = balanced_epoch(&data.pairs, cfg.per_pair, &mut rng);
        let mut loss = 0.0;
        for (b, batch) in order.chunks(cfg.batch_size).enumerate() {
            let chunks: Vec<&[usize]> = batch.chunks(cfg.chunk_size).collect();
            let base = b * cfg.batch_size;
            let model = &mlp;
            let grads = exec.map_range(chunks.len(), |c| {
                let mut g = Gradient::zeros(model);
                for (k, &i) in chunks[c].iter().enumerate() {
                    let pos = (base + c * cfg.chunk_size + k) as u64;
                    let mut drng = ChaCha8Rng::seed_from_u64(mix(cfg.seed, epoch as u64, pos));
                    let (fv, target) = &data.train[i];
                    let dropout = (cfg.dropout > 0.0).then_some((cfg.dropout, &mut drng));
                    model.backprop(fv, *target, dropout, &mut g).expect("dimension checked");
                }
                g
            });
            let mut grads = grads.into_iter();
            let mut total = grads.next().expect("non-empty batch");
            for g in grads {
                total.add(&g);
            }
            loss += total.loss;
            step(&mut mlp, &mut state, &total, cfg.learning_rate, cfg.optimizer);
        }
        let f1 = if data.test.is_empty() {
            f64::NAN
        } else {
            test_macro_f1(&mlp, &data.labels, &data.test, exec)
        };
        let metrics = EpochMetrics {
            epoch: epoch + 1,
            samples: order.len(),
            mean_loss: loss / order.len().max(1) as f64,
            test_macro_f1: f1,
            seconds: started.elapsed().as_secs_f64(),
        };
        log::info!(
            "epoch {} loss {:.4} test macro F1 {:.4} ({:.1}s)",
            metrics.epoch,
            metrics.mean_loss,
            metrics.test_macro_f1,
            metrics.seconds
        );
        history.push(metrics);
        let better = match &best {
            None => true,
            Some((bf, _, _)) => data.test.is_empty() || f1 > *bf,
        };
        if better {
            best = Some((f1, epoch + 1, mlp.clone()));
        }
    }
    let (_, best_epoch, best_mlp) = best.expect("at least one epoch");
    Ok(TrainOutcome {
        model: LidModel::new(cfg.featurizer, data.labels, best_mlp)?,
        best_epoch,
        history,
    })
}
