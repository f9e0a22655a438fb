//! JSON experiment configuration: parsing, defaulting, semantic validation,
//! and `key=value` overrides.
//!
//! Documents are deliberately lenient at parse time — every field is
//! optional and filled with a default — and strict at validation time, where
//! every semantic problem is collected and reported in one error rather than
//! first-failure-only. Unknown keys are rejected outright, which catches
//! config typos before they silently fall back to defaults.

use crate::data::BootstrapConfig;
use crate::error::{Error, Result};
use crate::halfsphere::{TheoryConfig, TheoryRunConfig};
use crate::harness::{DataSource, ExperimentConfig, LearnerSpec, SweepAxis, SweepSpec};
use crate::learners::{LogisticRegressionConfig, MlpConfig};
use crate::sampling::StrategyId;
use crate::simulation::GaussianSimConfig;
use serde::Deserialize;
use serde_json::Value;
use std::path::{Path, PathBuf};

/// Read and parse a JSON config file into a mutable document (so overrides
/// can be applied before validation).
pub fn load_document(path: &Path) -> Result<Value> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Parse {
        path: path.display().to_string(),
        line: e.line(),
        message: e.to_string(),
    })
}

/// Apply `key=value` assignments onto a JSON document. Dotted keys descend
/// into (or create) nested objects; values parse as JSON where possible and
/// fall back to strings, so `replicates=5`, `ensemble.num_models=50`,
/// `batch_sizes=[10,100]`, and `dataset.kind=gaussian` all work.
pub fn apply_overrides(document: &mut Value, assignments: &[String]) -> Result<()> {
    for assignment in assignments {
        let (key, raw_value) = assignment.split_once('=').ok_or_else(|| {
            Error::InvalidConfig(vec![format!(
                "override {assignment:?} is not of the form key=value"
            )])
        })?;
        let value: Value = serde_json::from_str(raw_value)
            .unwrap_or_else(|_| Value::String(raw_value.to_string()));
        let mut node = &mut *document;
        let segments: Vec<&str> = key.split('.').collect();
        for (i, segment) in segments.iter().enumerate() {
            let object = node.as_object_mut().ok_or_else(|| {
                Error::InvalidConfig(vec![format!(
                    "override {key:?} descends into {:?}, which is not an object",
                    segments[..i].join(".")
                )])
            })?;
            if i + 1 == segments.len() {
                object.insert(segment.to_string(), value);
                break;
            }
            node = object
                .entry(segment.to_string())
                .or_insert_with(|| Value::Object(Default::default()));
        }
    }
    Ok(())
}

fn from_document<'de, T: Deserialize<'de>>(document: &'de Value) -> Result<T> {
    T::deserialize(document).map_err(|e| Error::InvalidConfig(vec![e.to_string()]))
}

/// Collect strategy identifiers, reporting every unknown one.
fn parse_strategies(raw: &[String], problems: &mut Vec<String>) -> Vec<StrategyId> {
    let mut out = Vec::with_capacity(raw.len());
    for s in raw {
        match s.parse::<StrategyId>() {
            Ok(id) => out.push(id),
            // Unwrap the error's own prefix: the message joins a combined
            // "invalid configuration:" report.
            Err(Error::InvalidData(message)) => problems.push(message),
            Err(e) => problems.push(e.to_string()),
        }
    }
    out
}

/// Sort and deduplicate batch sizes, recording a warning for each fix.
fn normalize_batch_sizes(mut sizes: Vec<usize>, warnings: &mut Vec<String>) -> Vec<usize> {
    if !sizes.windows(2).all(|w| w[0] <= w[1]) {
        warnings.push(format!(
            "batch_sizes {sizes:?} were not ascending; sorted automatically"
        ));
        sizes.sort_unstable();
    }
    let before = sizes.len();
    sizes.dedup();
    if sizes.len() < before {
        warnings.push("duplicate batch sizes removed".to_string());
    }
    sizes
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDataset {
    kind: Option<String>,
    path: Option<PathBuf>,
    label_column: Option<usize>,
    has_header: Option<bool>,
    num_points: Option<usize>,
    mean_separation: Option<f64>,
}

impl RawDataset {
    fn build(&self, problems: &mut Vec<String>) -> DataSource {
        let fallback = DataSource::Gaussian {
            num_points: 20000,
            mean_separation: 2.0,
        };
        match self.kind.as_deref().unwrap_or("gaussian") {
            "gaussian" => {
                for (name, set) in [
                    ("path", self.path.is_some()),
                    ("label_column", self.label_column.is_some()),
                    ("has_header", self.has_header.is_some()),
                ] {
                    if set {
                        problems.push(format!("dataset.{name} applies only to file datasets"));
                    }
                }
                DataSource::Gaussian {
                    num_points: self.num_points.unwrap_or(20000),
                    mean_separation: self.mean_separation.unwrap_or(2.0),
                }
            }
            kind @ ("csv" | "libsvm") => {
                for (name, set) in [
                    ("num_points", self.num_points.is_some()),
                    ("mean_separation", self.mean_separation.is_some()),
                ] {
                    if set {
                        problems.push(format!("dataset.{name} applies only to gaussian datasets"));
                    }
                }
                let Some(path) = self.path.clone() else {
                    problems.push(format!("{kind} dataset requires dataset.path"));
                    return fallback;
                };
                if kind == "csv" {
                    let Some(label_column) = self.label_column else {
                        problems.push("csv dataset requires dataset.label_column".to_string());
                        return fallback;
                    };
                    DataSource::Csv {
                        path,
                        label_column,
                        has_header: self.has_header.unwrap_or(false),
                    }
                } else {
                    if self.label_column.is_some() || self.has_header.is_some() {
                        problems.push(
                            "dataset.label_column/has_header apply only to csv datasets"
                                .to_string(),
                        );
                    }
                    DataSource::Libsvm { path }
                }
            }
            other => {
                problems.push(format!(
                    "unknown dataset kind {other:?}; valid kinds: gaussian, csv, libsvm"
                ));
                fallback
            }
        }
    }
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLearner {
    kind: Option<String>,
    l2_strength: Option<f64>,
    max_iterations: Option<usize>,
    tolerance: Option<f64>,
    hidden_layers: Option<Vec<usize>>,
    epochs: Option<usize>,
    minibatch_size: Option<usize>,
    adam_step_size: Option<f64>,
}

impl RawLearner {
    fn build(&self, problems: &mut Vec<String>) -> LearnerSpec {
        let mlp_only = [
            ("hidden_layers", self.hidden_layers.is_some()),
            ("epochs", self.epochs.is_some()),
            ("minibatch_size", self.minibatch_size.is_some()),
            ("adam_step_size", self.adam_step_size.is_some()),
        ];
        let logreg_only = [
            ("l2_strength", self.l2_strength.is_some()),
            ("max_iterations", self.max_iterations.is_some()),
            ("tolerance", self.tolerance.is_some()),
        ];
        match self.kind.as_deref().unwrap_or("logreg") {
            "logreg" => {
                for (name, set) in mlp_only {
                    if set {
                        problems.push(format!("learner.{name} applies only to the mlp learner"));
                    }
                }
                let mut cfg = LogisticRegressionConfig::default();
                if let Some(v) = self.l2_strength {
                    cfg.l2_strength = v;
                }
                if let Some(v) = self.max_iterations {
                    cfg.max_iterations = v;
                }
                if let Some(v) = self.tolerance {
                    cfg.tolerance = v;
                }
                LearnerSpec::Logreg(cfg)
            }
            "mlp" => {
                for (name, set) in logreg_only {
                    if set {
                        problems.push(format!("learner.{name} applies only to the logreg learner"));
                    }
                }
                let mut cfg = MlpConfig::default();
                if let Some(v) = &self.hidden_layers {
                    cfg.hidden_layers = v.clone();
                }
                if let Some(v) = self.epochs {
                    cfg.epochs = v;
                }
                if let Some(v) = self.minibatch_size {
                    cfg.minibatch_size = v;
                }
                if let Some(v) = self.adam_step_size {
                    cfg.adam.step_size = v;
                }
                LearnerSpec::Mlp(cfg)
            }
            other => {
                problems.push(format!(
                    "unknown learner kind {other:?}; valid kinds: logreg, mlp"
                ));
                LearnerSpec::Logreg(LogisticRegressionConfig::default())
            }
        }
    }
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEnsemble {
    #[serde(alias = "K")]
    num_models: Option<usize>,
    #[serde(alias = "beta")]
    sample_fraction: Option<f64>,
}

impl RawEnsemble {
    fn build(&self) -> BootstrapConfig {
        let defaults = BootstrapConfig::default();
        BootstrapConfig {
            num_models: self.num_models.unwrap_or(defaults.num_models),
            sample_fraction: self.sample_fraction.unwrap_or(defaults.sample_fraction),
        }
    }
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSweep {
    axis: Option<String>,
    values: Option<Vec<f64>>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawExperiment {
    dataset: Option<RawDataset>,
    learner: Option<RawLearner>,
    replicates: Option<usize>,
    initial_size: Option<usize>,
    candidate_fraction: Option<f64>,
    stratify_initial: Option<bool>,
    batch_sizes: Option<Vec<usize>>,
    strategies: Option<Vec<String>>,
    ensemble: Option<RawEnsemble>,
    sweep: Option<RawSweep>,
    normalize: Option<bool>,
    balanced_lambda: Option<f64>,
    seed: Option<u64>,
}

/// Turn a parsed document into a validated [`ExperimentConfig`], filling
/// defaults. Returns the config together with normalization warnings, or one
/// error listing every problem found.
pub fn validate_experiment(document: &Value) -> Result<(ExperimentConfig, Vec<String>)> {
    let raw: RawExperiment = from_document(document)?;
    let mut problems = Vec::new();
    let mut warnings = Vec::new();

    let source = raw.dataset.unwrap_or_default().build(&mut problems);
    let learner = raw.learner.unwrap_or_default().build(&mut problems);
    let strategies = match &raw.strategies {
        Some(list) => parse_strategies(list, &mut problems),
        None => vec![StrategyId::Random, StrategyId::Margin, StrategyId::MinMargin],
    };
    let batch_sizes =
        normalize_batch_sizes(raw.batch_sizes.unwrap_or_else(|| vec![100]), &mut warnings);
    let sweep = raw.sweep.map(|s| {
        let axis = match s.axis.as_deref() {
            Some(text) => text.parse().unwrap_or_else(|e: Error| {
                problems.push(e.to_string());
                SweepAxis::NumModels
            }),
            None => {
                problems.push("sweep requires an axis (K or beta)".to_string());
                SweepAxis::NumModels
            }
        };
        SweepSpec {
            axis,
            values: s.values.unwrap_or_default(),
        }
    });

    let cfg = ExperimentConfig {
        source,
        learner,
        replicates: raw.replicates.unwrap_or(100),
        initial_size: raw.initial_size.unwrap_or(100),
        candidate_fraction: raw.candidate_fraction.unwrap_or(0.5),
        stratify_initial: raw.stratify_initial.unwrap_or(false),
        batch_sizes,
        strategies,
        ensemble: raw.ensemble.unwrap_or_default().build(),
        sweep,
        normalize: raw.normalize.unwrap_or(false),
        balanced_lambda: raw.balanced_lambda.unwrap_or(0.5),
        seed: raw.seed.unwrap_or(0),
    };
    finish(cfg, problems, warnings, |c| c.validate())
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSimulation {
    mean_separation: Option<f64>,
    initial_size: Option<usize>,
    pool_size: Option<usize>,
    test_size: Option<usize>,
    replicates: Option<usize>,
    batch_sizes: Option<Vec<usize>>,
    ensemble: Option<RawEnsemble>,
    strategies: Option<Vec<String>>,
    seed: Option<u64>,
}

/// Turn a parsed document into a validated [`GaussianSimConfig`].
pub fn validate_simulation(document: &Value) -> Result<(GaussianSimConfig, Vec<String>)> {
    let raw: RawSimulation = from_document(document)?;
    let mut problems = Vec::new();
    let mut warnings = Vec::new();
    let defaults = GaussianSimConfig::default();

    let strategies = match &raw.strategies {
        Some(list) => parse_strategies(list, &mut problems),
        None => defaults.strategies.clone(),
    };
    let batch_sizes = match raw.batch_sizes {
        Some(sizes) => normalize_batch_sizes(sizes, &mut warnings),
        None => defaults.batch_sizes.clone(),
    };
    let cfg = GaussianSimConfig {
        mean_separation: raw.mean_separation.unwrap_or(defaults.mean_separation),
        initial_size: raw.initial_size.unwrap_or(defaults.initial_size),
        pool_size: raw.pool_size.unwrap_or(defaults.pool_size),
        test_size: raw.test_size.unwrap_or(defaults.test_size),
        replicates: raw.replicates.unwrap_or(defaults.replicates),
        batch_sizes,
        ensemble: raw.ensemble.unwrap_or_default().build(),
        strategies,
        seed: raw.seed.unwrap_or(defaults.seed),
    };
    finish(cfg, problems, warnings, |c| c.validate())
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawComparison {
    m: Option<usize>,
    batch_size: Option<usize>,
    pool_size: Option<usize>,
    trials: Option<usize>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTheory {
    comparisons: Option<Vec<RawComparison>>,
    min_deviation_m: Option<Vec<usize>>,
    min_deviation_trials: Option<usize>,
    decay_m: Option<Vec<usize>>,
    margin_bias_m: Option<Vec<usize>>,
    margin_bias_trials: Option<usize>,
    seed: Option<u64>,
}

/// Turn a parsed document into a validated [`TheoryRunConfig`].
pub fn validate_theory(document: &Value) -> Result<(TheoryRunConfig, Vec<String>)> {
    let raw: RawTheory = from_document(document)?;
    let defaults = TheoryRunConfig::default();
    let seed = raw.seed.unwrap_or(defaults.seed);
    let comparisons = match raw.comparisons {
        Some(list) => list
            .iter()
            .map(|c| TheoryConfig {
                samples_per_class: c.m.unwrap_or(10),
                batch_size: c.batch_size.unwrap_or(200),
                pool_size: c.pool_size.unwrap_or(24000),
                trials: c.trials.unwrap_or(2000),
                seed,
            })
            .collect(),
        None => defaults.comparisons.clone(),
    };
    let cfg = TheoryRunConfig {
        comparisons,
        min_deviation_m: raw.min_deviation_m.unwrap_or(defaults.min_deviation_m),
        min_deviation_trials: raw
            .min_deviation_trials
            .unwrap_or(defaults.min_deviation_trials),
        decay_m: raw.decay_m.unwrap_or(defaults.decay_m),
        margin_bias_m: raw.margin_bias_m.unwrap_or(defaults.margin_bias_m),
        margin_bias_trials: raw
            .margin_bias_trials
            .unwrap_or(defaults.margin_bias_trials),
        seed,
    };
    finish(cfg, Vec::new(), Vec::new(), |c| c.validate())
}

/// Merge builder problems with the config's own semantic validation and
/// produce either the config or one combined error.
fn finish<T>(
    cfg: T,
    mut problems: Vec<String>,
    warnings: Vec<String>,
    validate: impl Fn(&T) -> Result<()>,
) -> Result<(T, Vec<String>)> {
    match validate(&cfg) {
        Ok(()) => {}
        Err(Error::InvalidConfig(more)) => problems.extend(more),
        Err(other) => problems.push(other.to_string()),
    }
    if problems.is_empty() {
        Ok((cfg, warnings))
    } else {
        Err(Error::InvalidConfig(problems))
    }
}
