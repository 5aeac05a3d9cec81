//! Short-text language identification.
//!
//! Cleaned text is cut into 50-character windows, each window becomes a
//! hashed bag of character trigrams, and a multi-layer perceptron with ReLU
//! hidden layers and a softmax output scores the labels.

mod data;
mod eval;
mod features;
mod mlp;
mod model;
mod predict;
mod train;
mod window;

pub use data::{load_manifest, samples_from_text, split_of, LabeledSample, ManifestEntry, Split};
pub use eval::{evaluate, ClassMetrics, Confusion, EvalReport};
pub use features::{FeatureVector, Featurizer, DEFAULT_DIM, DEFAULT_HASH_SEED};
pub use mlp::{softmax, Gradient, Layer, Mlp, Scalar};
pub use model::{LidModel, MODEL_MAGIC, MODEL_VERSION};
pub use predict::{filter_contamination, predict_document, Aggregation, DocPrediction};
pub(crate) use train::TRAIN_KEYS;
pub use train::{balanced_epoch, train, EpochMetrics, Optimizer, TrainConfig, TrainOutcome};
pub use window::{windows, Window50, WINDOW};
