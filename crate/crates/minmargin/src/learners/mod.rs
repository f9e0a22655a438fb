//! Trainable discriminant models.
//!
//! Everything a selection strategy needs from a classifier is the per-class
//! score vector h(z;g), captured by [`DiscriminantModel`]. Three families are
//! provided: multinomial logistic regression, small feed-forward networks,
//! and the closed-form 2-D angular SVM used by the half-sphere analysis.

mod angular;
mod logreg;
mod mlp;

pub use angular::{train_angular_svm, AngularSvm};
pub use logreg::{train_logreg, LogisticRegression, LogisticRegressionConfig};
pub use mlp::{train_mlp, AdamConfig, Mlp, MlpConfig};

use crate::data::{Dataset, Row};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

/// A trained classifier exposing per-class discriminant scores.
///
/// Implementations are immutable after training and safe to score from many
/// threads at once. Probabilistic models (logistic regression, networks)
/// return softmax probabilities: non-negative, summing to 1 within 1e−6.
pub trait DiscriminantModel: Send + Sync {
    /// Number of classes C; `score` outputs have this length.
    fn num_classes(&self) -> usize;

    /// Expected feature dimensionality.
    fn input_dim(&self) -> usize;

    /// Write the class scores h(z;g) for g in 0..C into `out`.
    fn score_into(&self, z: Row<'_>, out: &mut [f64]);

    /// Class scores as a fresh vector.
    fn score(&self, z: Row<'_>) -> Vec<f64> {
        let mut out = vec![0.0; self.num_classes()];
        self.score_into(z, &mut out);
        out
    }

    /// Highest-scoring class, ties broken toward the smaller class id.
    fn predict(&self, z: Row<'_>) -> usize {
        let scores = self.score(z);
        argmax(&scores)
    }

    /// Serializable snapshot of the model parameters.
    fn dump(&self) -> ModelDump;
}

/// Index of the strictly largest value; earlier index wins ties.
pub(crate) fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// Numerically stable in-place softmax.
pub(crate) fn softmax_in_place(scores: &mut [f64]) {
    let max = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for s in scores.iter_mut() {
        *s = (*s - max).exp();
        sum += *s;
    }
    for s in scores.iter_mut() {
        *s /= sum;
    }
}

/// log Σ exp(scores), stabilized by the max.
pub(crate) fn log_sum_exp(scores: &[f64]) -> f64 {
    let max = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    max + scores.iter().map(|&s| (s - max).exp()).sum::<f64>().ln()
}

/// Fraction of examples the model labels correctly.
pub fn accuracy(model: &dyn DiscriminantModel, data: &Dataset) -> f64 {
    if data.is_empty() {
        return 0.0;
    }
    let mut scores = vec![0.0; model.num_classes()];
    let mut correct = 0usize;
    for i in 0..data.len() {
        model.score_into(data.row(i), &mut scores);
        if argmax(&scores) == data.label(i) {
            correct += 1;
        }
    }
    correct as f64 / data.len() as f64
}

/// Portable parameter snapshot: a model kind tag, layer dimensions, and flat
/// row-major weight arrays. Round-tripping through JSON reproduces scores to
/// 1e−12.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ModelDump {
    pub kind: String,
    pub dims: Vec<usize>,
    pub weights: Vec<Vec<f64>>,
}

impl ModelDump {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("model dumps serialize cleanly")
    }

    pub fn from_json(text: &str) -> Result<ModelDump> {
        serde_json::from_str(text)
            .map_err(|e| Error::InvalidData(format!("bad model JSON: {e}")))
    }
}

/// Rebuild a model from a dump produced by [`DiscriminantModel::dump`].
pub fn load_model(dump: &ModelDump) -> Result<Box<dyn DiscriminantModel>> {
    match dump.kind.as_str() {
        logreg::KIND => Ok(Box::new(LogisticRegression::from_dump(dump)?)),
        mlp::KIND => Ok(Box::new(Mlp::from_dump(dump)?)),
        angular::KIND => Ok(Box::new(AngularSvm::from_dump(dump)?)),
        other => Err(Error::InvalidData(format!("unknown model kind {other:?}"))),
    }
}

/// Wrapper that counts `score_into` invocations; used to verify that scoring
/// passes touch each candidate exactly as often as promised.
pub struct CountingModel {
    inner: Box<dyn DiscriminantModel>,
    calls: Arc<AtomicU64>,
}

impl CountingModel {
    pub fn new(inner: Box<dyn DiscriminantModel>) -> CountingModel {
        CountingModel {
            inner,
            calls: Arc::new(AtomicU64::new(0)),
        }
    }

    /// Shared handle to the call counter.
    pub fn counter(&self) -> Arc<AtomicU64> {
        Arc::clone(&self.calls)
    }
}

impl DiscriminantModel for CountingModel {
    fn num_classes(&self) -> usize {
        self.inner.num_classes()
    }

    fn input_dim(&self) -> usize {
        self.inner.input_dim()
    }

    fn score_into(&self, z: Row<'_>, out: &mut [f64]) {
        self.calls.fetch_add(1, Ordering::Relaxed);
        self.inner.score_into(z, out);
    }

    fn dump(&self) -> ModelDump {
        self.inner.dump()
    }
}

/// Shared precondition for the trainable learners.
pub(crate) fn check_trainable(train: &Dataset) -> Result<()> {
    if train.is_empty() {
        return Err(Error::Train("training set is empty".into()));
    }
    if train.present_classes() < 2 {
        return Err(Error::Train(
            "training set must contain at least 2 classes".into(),
        ));
    }
    Ok(())
}
