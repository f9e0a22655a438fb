//! Benchmark experiment runner: repeated initial/candidate/test splits,
//! strategy comparison across batch sizes, and ensemble hyperparameter
//! sweeps.
//!
//! One experiment draws `replicates` independent splits of a dataset. Per
//! replicate it trains a base model on the initial labeled sample, fits one
//! bootstrap ensemble shared by every ensemble strategy, lets each strategy
//! pick its batch from the candidate pool, retrains on initial ∪ selected,
//! and scores the result on the held-out test partition. Partitions are
//! identical across strategies within a replicate, so accuracy differences
//! are attributable to the strategy alone. Each strategy's selection is
//! computed once at the largest batch size and reused as prefixes for the
//! smaller ones — exact for every built-in strategy, because sorted-score
//! selections nest, greedy selections append one pick at a time, and the
//! random order is a fixed shuffle. The only exception is the margin/random
//! mixture, whose 50/50 composition depends on the batch size; it is
//! recombined per batch size from one shared score pass and one shared
//! shuffle.

use crate::data::{
    self, load_csv, load_libsvm, BootstrapConfig, Dataset, FeatureMatrix, SplitSpec, DENSE_LIMIT,
};
use crate::error::{Error, Result};
use crate::learners::{
    accuracy, train_logreg, train_mlp, DiscriminantModel, LogisticRegressionConfig, MlpConfig,
};
use crate::sampling::{self, select_with, BatchSelection, Ensemble, SelectionContext, StrategyId};
use crate::seeding;
use crate::simulation;
use crate::stats::mean_std_stderr;
use rayon::prelude::*;
use serde::Serialize;
use std::path::PathBuf;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::Instant;

/// Seed stream reserved for loading/generating the dataset; replicate
/// streams count up from zero and never reach it.
const SOURCE_STREAM: u64 = u64::MAX;

/// Where the experiment's rows come from.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DataSource {
    /// Synthetic two-class Gaussian data, drawn once up front. The true
    /// decision boundary is known, so the oracle strategy is available.
    Gaussian {
        num_points: usize,
        mean_separation: f64,
    },
    /// Comma-separated file; `label_column` holds the class, every other
    /// column a numeric feature.
    Csv {
        path: PathBuf,
        label_column: usize,
        has_header: bool,
    },
    /// Sparse `label index:value` file with 1-based feature indices.
    Libsvm { path: PathBuf },
}

impl DataSource {
    /// Load (or draw) the full dataset the splits will partition.
    pub fn load(&self, seed: u64) -> Result<Dataset> {
        match self {
            DataSource::Gaussian {
                num_points,
                mean_separation,
            } => {
                let mut rng = seeding::stream_rng(seed, 0);
                simulation::gaussian_dataset(*num_points, *mean_separation, &mut rng)
            }
            DataSource::Csv {
                path,
                label_column,
                has_header,
            } => load_csv(path, *label_column, *has_header),
            DataSource::Libsvm { path } => load_libsvm(path),
        }
    }

    /// Whether the source knows its true decision boundary.
    pub fn has_true_margin(&self) -> bool {
        matches!(self, DataSource::Gaussian { .. })
    }

    fn collect_problems(&self, problems: &mut Vec<String>) {
        if let DataSource::Gaussian {
            num_points,
            mean_separation,
        } = self
        {
            if *num_points < 1 {
                problems.push("gaussian num_points must be at least 1".to_string());
            }
            if mean_separation.is_nan() || *mean_separation <= 0.0 {
                problems.push("gaussian mean_separation must be positive".to_string());
            }
        }
    }
}

/// Which model family the experiment trains, with its hyperparameters.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum LearnerSpec {
    Logreg(LogisticRegressionConfig),
    Mlp(MlpConfig),
}

impl LearnerSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            LearnerSpec::Logreg(cfg) => cfg.validate(),
            LearnerSpec::Mlp(cfg) => cfg.validate(),
        }
    }

    /// Train a fresh model of this family on `data`.
    pub fn train(&self, data: &Dataset, seed: u64) -> Result<Box<dyn DiscriminantModel>> {
        match self {
            LearnerSpec::Logreg(cfg) => Ok(Box::new(train_logreg(data, cfg)?)),
            LearnerSpec::Mlp(cfg) => Ok(Box::new(train_mlp(data, cfg, seed)?)),
        }
    }
}

/// Ensemble hyperparameter varied by a sweep.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum SweepAxis {
    /// Number of bootstrap members K.
    #[serde(rename = "K")]
    NumModels,
    /// Per-class resample fraction β.
    #[serde(rename = "beta")]
    SampleFraction,
}

impl SweepAxis {
    pub fn as_str(&self) -> &'static str {
        match self {
            SweepAxis::NumModels => "K",
            SweepAxis::SampleFraction => "beta",
        }
    }
}

impl std::fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for SweepAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<SweepAxis> {
        match s {
            "K" | "k" => Ok(SweepAxis::NumModels),
            "beta" => Ok(SweepAxis::SampleFraction),
            other => Err(Error::InvalidData(format!(
                "unknown sweep axis {other:?}; valid axes: K, beta"
            ))),
        }
    }
}

/// One hyperparameter sweep: the axis and the values to try.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepSpec {
    pub axis: SweepAxis,
    pub values: Vec<f64>,
}

/// Everything one benchmark run needs.
#[derive(Clone, Debug, Serialize)]
pub struct ExperimentConfig {
    pub source: DataSource,
    pub learner: LearnerSpec,
    pub replicates: usize,
    pub initial_size: usize,
    /// Fraction of the post-initial remainder assigned to the candidate
    /// pool; the rest becomes the test partition.
    pub candidate_fraction: f64,
    /// Force every class into the initial sample.
    pub stratify_initial: bool,
    /// Batch sizes to evaluate, strictly increasing.
    pub batch_sizes: Vec<usize>,
    pub strategies: Vec<StrategyId>,
    pub ensemble: BootstrapConfig,
    pub sweep: Option<SweepSpec>,
    /// Rescale features to [0, 1] per dimension, fit on the initial sample
    /// only.
    pub normalize: bool,
    /// Trade-off weight λ for the balanced-margin strategy.
    pub balanced_lambda: f64,
    pub seed: u64,
}

impl ExperimentConfig {
    /// A runnable starting point: the given source and learner with the
    /// standard benchmark protocol (100 replicates, initial 100, equal
    /// candidate/test split, K=25/β=1 ensemble).
    pub fn new(source: DataSource, learner: LearnerSpec) -> ExperimentConfig {
        ExperimentConfig {
            source,
            learner,
            replicates: 100,
            initial_size: 100,
            candidate_fraction: 0.5,
            stratify_initial: false,
            batch_sizes: vec![100],
            strategies: vec![StrategyId::Random, StrategyId::Margin, StrategyId::MinMargin],
            ensemble: BootstrapConfig::default(),
            sweep: None,
            normalize: false,
            balanced_lambda: 0.5,
            seed: 0,
        }
    }

    /// Load the dataset exactly as [`run_experiment`] would, including the
    /// derived generation seed for synthetic sources.
    pub fn load_source(&self) -> Result<Dataset> {
        self.source.load(seeding::mix_seed(self.seed, SOURCE_STREAM))
    }

    /// Check every semantic constraint at once, reporting all violations.
    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        self.source.collect_problems(&mut problems);
        push_config_problems(&mut problems, self.learner.validate());
        push_config_problems(&mut problems, self.ensemble.validate());
        if self.replicates < 1 {
            problems.push("replicates must be at least 1".to_string());
        }
        if self.initial_size < 1 {
            problems.push("initial_size must be at least 1".to_string());
        }
        if !(self.candidate_fraction > 0.0 && self.candidate_fraction <= 1.0) {
            problems.push(format!(
                "candidate_fraction must be in (0, 1], got {}",
                self.candidate_fraction
            ));
        }
        if self.batch_sizes.is_empty() {
            problems.push("batch_sizes must not be empty".to_string());
        } else if !self.batch_sizes.windows(2).all(|w| w[0] < w[1]) {
            problems.push("batch_sizes must be strictly increasing".to_string());
        }
        if self.strategies.is_empty() {
            problems.push("strategies must not be empty".to_string());
        }
        for (i, s) in self.strategies.iter().enumerate() {
            if self.strategies[..i].contains(s) {
                problems.push(format!("strategy {s} listed more than once"));
            }
            if s.uses_oracle() && !self.source.has_true_margin() {
                problems.push(format!(
                    "strategy {s} needs a source with a known boundary (gaussian)"
                ));
            }
        }
        if !(0.0..=1.0).contains(&self.balanced_lambda) {
            problems.push(format!(
                "balanced_lambda must be in [0, 1], got {}",
                self.balanced_lambda
            ));
        }
        if let Some(sweep) = &self.sweep {
            if sweep.values.is_empty() {
                problems.push("sweep values must not be empty".to_string());
            }
            for &v in &sweep.values {
                match sweep.axis {
                    SweepAxis::NumModels if v.is_nan() || v <= 0.0 || v.fract() != 0.0 => {
                        problems.push(format!("sweep over K needs positive integers, got {v}"));
                    }
                    SweepAxis::SampleFraction if v.is_nan() || v <= 0.0 => {
                        problems.push(format!("sweep over beta needs positive values, got {v}"));
                    }
                    _ => {}
                }
            }
            for s in &self.strategies {
                if !s.uses_ensemble() {
                    problems.push(format!(
                        "sweeping {} varies only the ensemble, which strategy {s} does not use",
                        sweep.axis
                    ));
                }
            }
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidConfig(problems))
        }
    }
}

fn push_config_problems(problems: &mut Vec<String>, result: Result<()>) {
    match result {
        Ok(()) => {}
        Err(Error::InvalidConfig(more)) => problems.extend(more),
        Err(other) => problems.push(other.to_string()),
    }
}

/// One aggregated (strategy, batch size, sweep value) measurement.
#[derive(Clone, Debug, Serialize)]
pub struct ResultCell {
    pub strategy: StrategyId,
    pub batch_size: usize,
    pub sweep_value: Option<f64>,
    pub mean_accuracy: f64,
    pub std: f64,
    pub stderr: f64,
    pub replicates: usize,
}

/// Seconds spent per phase. Phase fields accumulate across replicates (which
/// run in parallel), so they measure work, not wall time; `total_wall_secs`
/// is the elapsed clock time of the whole run.
#[derive(Clone, Copy, Debug, Default, Serialize)]
pub struct PhaseTimings {
    pub load_secs: f64,
    pub split_secs: f64,
    pub train_secs: f64,
    pub select_secs: f64,
    pub retrain_secs: f64,
    pub total_wall_secs: f64,
}

impl PhaseTimings {
    fn absorb(&mut self, other: &PhaseTimings) {
        self.load_secs += other.load_secs;
        self.split_secs += other.split_secs;
        self.train_secs += other.train_secs;
        self.select_secs += other.select_secs;
        self.retrain_secs += other.retrain_secs;
    }
}

/// Aggregated output of an experiment or sweep. The cells are deterministic
/// for a fixed config and seed; the timings are not.
#[derive(Clone, Debug, Serialize)]
pub struct RunResult {
    pub sweep_axis: Option<SweepAxis>,
    pub cells: Vec<ResultCell>,
    pub timings: PhaseTimings,
}

impl RunResult {
    /// Render the cells as CSV; sweep columns stay empty when no sweep ran.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "strategy,batch_size,sweep_axis,sweep_value,mean_accuracy,std,stderr,replicates\n",
        );
        let axis = self.sweep_axis.map_or("", |a| a.as_str());
        for c in &self.cells {
            let value = c.sweep_value.map(|v| v.to_string()).unwrap_or_default();
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                c.strategy,
                c.batch_size,
                axis,
                value,
                c.mean_accuracy,
                c.std,
                c.stderr,
                c.replicates
            ));
        }
        out
    }
}

/// Sample mean, standard deviation ((n−1) denominator), and standard error
/// std/√n of one result cell's replicate accuracies.
pub fn aggregate(accuracies: &[f64]) -> (f64, f64, f64) {
    mean_std_stderr(accuracies)
}

/// Callback invoked after each completed replicate with (done, total).
pub type Progress<'a> = &'a (dyn Fn(usize, usize) + Sync);

/// Run the configured experiment (no sweep axis).
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunResult> {
    run_experiment_with_progress(cfg, None)
}

/// As [`run_experiment`], reporting replicate completions to `progress`.
pub fn run_experiment_with_progress(
    cfg: &ExperimentConfig,
    progress: Option<Progress<'_>>,
) -> Result<RunResult> {
    cfg.validate()?;
    if cfg.sweep.is_some() {
        return Err(Error::InvalidConfig(vec![
            "config has a sweep axis; use run_sweep".to_string(),
        ]));
    }
    let wall = Instant::now();
    let t = Instant::now();
    let data = cfg.load_source()?;
    let load_secs = t.elapsed().as_secs_f64();
    let (cells, mut timings) = run_cells(cfg, &data, &cfg.ensemble, None, progress, 0, cfg.replicates)?;
    timings.load_secs = load_secs;
    timings.total_wall_secs = wall.elapsed().as_secs_f64();
    Ok(RunResult {
        sweep_axis: None,
        cells,
        timings,
    })
}

/// Run the experiment once per sweep value, varying only the swept ensemble
/// parameter. Split seeds depend on the base seed and replicate index alone,
/// so every sweep value sees identical partitions: the curves are paired.
pub fn run_sweep(cfg: &ExperimentConfig) -> Result<RunResult> {
    run_sweep_with_progress(cfg, None)
}

/// As [`run_sweep`], reporting replicate completions to `progress`.
pub fn run_sweep_with_progress(
    cfg: &ExperimentConfig,
    progress: Option<Progress<'_>>,
) -> Result<RunResult> {
    cfg.validate()?;
    let sweep = cfg.sweep.as_ref().ok_or_else(|| {
        Error::InvalidConfig(vec!["run_sweep requires a sweep axis in the config".to_string()])
    })?;
    let wall = Instant::now();
    let t = Instant::now();
    let data = cfg.load_source()?;
    let mut timings = PhaseTimings {
        load_secs: t.elapsed().as_secs_f64(),
        ..PhaseTimings::default()
    };
    let total = cfg.replicates * sweep.values.len();
    let mut cells = Vec::new();
    for (vi, &value) in sweep.values.iter().enumerate() {
        let mut ensemble = cfg.ensemble;
        match sweep.axis {
            SweepAxis::NumModels => ensemble.num_models = value as usize,
            SweepAxis::SampleFraction => ensemble.sample_fraction = value,
        }
        let (sub, sub_timings) = run_cells(
            cfg,
            &data,
            &ensemble,
            Some(value),
            progress,
            vi * cfg.replicates,
            total,
        )?;
        cells.extend(sub);
        timings.absorb(&sub_timings);
    }
    timings.total_wall_secs = wall.elapsed().as_secs_f64();
    Ok(RunResult {
        sweep_axis: Some(sweep.axis),
        cells,
        timings,
    })
}

/// Accuracies and timings from a single replicate,
/// indexed `[strategy][batch_size]`.
struct ReplicateOutcome {
    accuracies: Vec<Vec<f64>>,
    timings: PhaseTimings,
}

/// Run all replicates against one ensemble configuration and aggregate.
fn run_cells(
    cfg: &ExperimentConfig,
    data: &Dataset,
    ensemble_cfg: &BootstrapConfig,
    sweep_value: Option<f64>,
    progress: Option<Progress<'_>>,
    done_before: usize,
    total: usize,
) -> Result<(Vec<ResultCell>, PhaseTimings)> {
    let completed = AtomicUsize::new(done_before);
    let outcomes: Vec<ReplicateOutcome> = (0..cfg.replicates as u64)
        .into_par_iter()
        .map(|r| {
            let outcome = run_replicate(cfg, data, ensemble_cfg, r)?;
            if let Some(report) = progress {
                report(completed.fetch_add(1, Ordering::Relaxed) + 1, total);
            }
            Ok(outcome)
        })
        .collect::<Result<_>>()?;

    let accuracies: Vec<&Vec<Vec<f64>>> = outcomes.iter().map(|o| &o.accuracies).collect();
    let cells = aggregate_cells(&cfg.strategies, &cfg.batch_sizes, &accuracies, sweep_value);
    let mut timings = PhaseTimings::default();
    for o in &outcomes {
        timings.absorb(&o.timings);
    }
    Ok((cells, timings))
}

/// Collapse per-replicate `[strategy][batch]` accuracy grids into one
/// [`ResultCell`] per (strategy, batch size).
pub(crate) fn aggregate_cells(
    strategies: &[StrategyId],
    batch_sizes: &[usize],
    replicate_accuracies: &[&Vec<Vec<f64>>],
    sweep_value: Option<f64>,
) -> Vec<ResultCell> {
    let mut cells = Vec::with_capacity(strategies.len() * batch_sizes.len());
    for (si, &strategy) in strategies.iter().enumerate() {
        for (bi, &batch_size) in batch_sizes.iter().enumerate() {
            let accs: Vec<f64> = replicate_accuracies.iter().map(|a| a[si][bi]).collect();
            let (mean_accuracy, std, stderr) = aggregate(&accs);
            cells.push(ResultCell {
                strategy,
                batch_size,
                sweep_value,
                mean_accuracy,
                std,
                stderr,
                replicates: replicate_accuracies.len(),
            });
        }
    }
    cells
}

/// How one strategy's ranking is reused across nested batch sizes.
enum Ranked {
    /// Selection at the largest batch size; smaller sizes take prefixes.
    Prefix(BatchSelection),
    /// Margin/random mixture parts, recombined per batch size.
    Mix { margins: Vec<f64>, order: Vec<usize> },
}

fn run_replicate(
    cfg: &ExperimentConfig,
    data: &Dataset,
    ensemble_cfg: &BootstrapConfig,
    replicate: u64,
) -> Result<ReplicateOutcome> {
    let rep_seed = seeding::mix_seed(cfg.seed, replicate);
    let t = Instant::now();
    let split_spec = SplitSpec {
        seed: seeding::mix_seed(rep_seed, 0),
        initial_size: cfg.initial_size,
        candidate_fraction: cfg.candidate_fraction,
        stratify_initial: cfg.stratify_initial,
    };
    let (mut initial, mut pool, mut test) = data::split(data, &split_spec)?;
    if cfg.normalize {
        let scaler = MinMaxScaler::fit(&initial);
        initial = scaler.apply(&initial)?;
        pool = scaler.apply(&pool)?;
        test = scaler.apply(&test)?;
    }
    let split_secs = t.elapsed().as_secs_f64();

    let evaluation = evaluate_cells(&CellInputs {
        initial: &initial,
        pool: &pool,
        test: &test,
        learner: &cfg.learner,
        strategies: &cfg.strategies,
        batch_sizes: &cfg.batch_sizes,
        ensemble_cfg,
        has_oracle: cfg.source.has_true_margin(),
        balanced_lambda: cfg.balanced_lambda,
        rep_seed,
    })?;

    Ok(ReplicateOutcome {
        timings: PhaseTimings {
            load_secs: 0.0,
            split_secs,
            train_secs: evaluation.train_secs,
            select_secs: evaluation.select_secs,
            retrain_secs: evaluation.retrain_secs,
            total_wall_secs: 0.0,
        },
        accuracies: evaluation.accuracies,
    })
}

/// One replicate's prepared partitions and evaluation parameters; shared by
/// the benchmark harness and the Gaussian simulation.
pub(crate) struct CellInputs<'a> {
    pub initial: &'a Dataset,
    pub pool: &'a Dataset,
    pub test: &'a Dataset,
    pub learner: &'a LearnerSpec,
    pub strategies: &'a [StrategyId],
    /// Strictly increasing, non-empty.
    pub batch_sizes: &'a [usize],
    pub ensemble_cfg: &'a BootstrapConfig,
    /// Whether the generator knows its true boundary (enables true-margin).
    pub has_oracle: bool,
    pub balanced_lambda: f64,
    /// Replicate-scoped seed; training and selection streams derive from it.
    pub rep_seed: u64,
}

/// Accuracy of every (strategy, batch-size) cell on one replicate, plus the
/// selections made at the largest batch size.
pub(crate) struct CellEvaluation {
    /// Indexed `[strategy][batch_size]`.
    pub accuracies: Vec<Vec<f64>>,
    /// Pool indices each strategy chose at the largest batch size.
    pub selections_at_max: Vec<Vec<usize>>,
    pub train_secs: f64,
    pub select_secs: f64,
    pub retrain_secs: f64,
}

/// Train the base model and the shared ensemble, run every strategy once at
/// the largest batch size, and retrain/score each (strategy, batch) cell
/// from prefixes of that ranking.
///
/// Derived seed streams off `rep_seed`: 1 ensemble fit, 2 strategy
/// randomness, 3 base-model training, 4 retraining (further mixed per cell);
/// stream 0 is reserved for the caller's data preparation.
pub(crate) fn evaluate_cells(inputs: &CellInputs<'_>) -> Result<CellEvaluation> {
    let CellInputs {
        initial,
        pool,
        test,
        learner,
        strategies,
        batch_sizes,
        ensemble_cfg,
        has_oracle,
        balanced_lambda,
        rep_seed,
    } = *inputs;

    let t = Instant::now();
    let base_model = if strategies.iter().any(|s| s.uses_base_model()) {
        Some(learner.train(initial, seeding::mix_seed(rep_seed, 3))?)
    } else {
        None
    };
    let ensemble = if strategies.iter().any(|s| s.uses_ensemble()) {
        let trainer = |draw: &Dataset, seed: u64| learner.train(draw, seed);
        Some(Ensemble::fit(
            initial,
            ensemble_cfg,
            seeding::mix_seed(rep_seed, 1),
            &trainer,
        )?)
    } else {
        None
    };
    let train_secs = t.elapsed().as_secs_f64();

    let t = Instant::now();
    let ctx = SelectionContext {
        base_model: base_model.as_deref(),
        ensemble: ensemble.as_ref(),
        initial: Some(initial),
        true_margin: if has_oracle {
            Some(&simulation::true_margin_distance)
        } else {
            None
        },
        balanced_lambda,
        seed: seeding::mix_seed(rep_seed, 2),
    };
    let b_max = *batch_sizes.last().expect("validated non-empty");
    let mut ranked = Vec::with_capacity(strategies.len());
    for &strategy in strategies {
        if strategy == StrategyId::RandomMarginMix {
            let model = base_model.as_deref().ok_or_else(|| {
                Error::Selection("strategy random-margin-mix requires a trained base model".into())
            })?;
            ranked.push(Ranked::Mix {
                margins: sampling::margin_scores(model, pool)?,
                order: sampling::shuffled_order(pool.len(), ctx.seed),
            });
        } else {
            ranked.push(Ranked::Prefix(select_with(strategy, pool, b_max, &ctx)?));
        }
    }
    let select_secs = t.elapsed().as_secs_f64();

    let t = Instant::now();
    let nb = batch_sizes.len();
    let retrain_base = seeding::mix_seed(rep_seed, 4);
    let mut accuracies = vec![vec![0.0; nb]; strategies.len()];
    let mut selections_at_max = vec![Vec::new(); strategies.len()];
    for (si, ranking) in ranked.iter().enumerate() {
        for (bi, &b) in batch_sizes.iter().enumerate() {
            let indices: Vec<usize> = match ranking {
                Ranked::Prefix(sel) => sel.indices[..b.min(sel.indices.len())].to_vec(),
                Ranked::Mix { margins, order } => {
                    sampling::random_margin_mix_from_parts(margins, order, b).indices
                }
            };
            let train_set = if indices.is_empty() {
                initial.clone()
            } else {
                initial.vstack(&pool.subset(&indices))?
            };
            let cell_seed = seeding::mix_seed(retrain_base, (si * nb + bi) as u64);
            let model = learner.train(&train_set, cell_seed)?;
            accuracies[si][bi] = accuracy(model.as_ref(), test);
            if bi + 1 == nb {
                selections_at_max[si] = indices;
            }
        }
    }
    let retrain_secs = t.elapsed().as_secs_f64();

    Ok(CellEvaluation {
        accuracies,
        selections_at_max,
        train_secs,
        select_secs,
        retrain_secs,
    })
}

/// Per-feature affine rescale to [0, 1], fit on the initial labeled sample
/// and applied unchanged to every partition (values outside the fitted range
/// land outside [0, 1]; constant features map to 0).
struct MinMaxScaler {
    mins: Vec<f64>,
    ranges: Vec<f64>,
}

impl MinMaxScaler {
    fn fit(data: &Dataset) -> MinMaxScaler {
        let d = data.dim();
        let mut mins = vec![f64::INFINITY; d];
        let mut maxs = vec![f64::NEG_INFINITY; d];
        let mut present = vec![0usize; d];
        for i in 0..data.len() {
            for (j, v) in data.row(i).entries() {
                mins[j] = mins[j].min(v);
                maxs[j] = maxs[j].max(v);
                present[j] += 1;
            }
        }
        // Columns not stored in every row (sparse zeros, or entirely absent)
        // implicitly contain 0.
        for j in 0..d {
            if present[j] < data.len() {
                mins[j] = mins[j].min(0.0);
                maxs[j] = maxs[j].max(0.0);
            }
        }
        let ranges = mins
            .iter()
            .zip(&maxs)
            .map(|(&lo, &hi)| if hi > lo { hi - lo } else { 1.0 })
            .collect();
        MinMaxScaler { mins, ranges }
    }

    fn apply(&self, data: &Dataset) -> Result<Dataset> {
        let features = match data.features() {
            FeatureMatrix::Dense(m) => {
                let mut out = m.clone();
                for mut row in out.rows_mut() {
                    for (j, v) in row.iter_mut().enumerate() {
                        *v = (*v - self.mins[j]) / self.ranges[j];
                    }
                }
                FeatureMatrix::Dense(out)
            }
            FeatureMatrix::Sparse(_) if self.mins.iter().all(|&lo| lo == 0.0) => {
                // Zero stays a fixed point, so sparsity survives: only the
                // stored entries need rescaling.
                let rows: Vec<Vec<(usize, f64)>> = (0..data.len())
                    .map(|i| {
                        data.row(i)
                            .entries()
                            .map(|(j, v)| (j, (v - self.mins[j]) / self.ranges[j]))
                            .collect()
                    })
                    .collect();
                FeatureMatrix::Sparse(data::CsrMatrix::from_rows(&rows, data.dim())?)
            }
            FeatureMatrix::Sparse(m) if data.dim() <= DENSE_LIMIT => {
                let mut out = m.to_dense();
                for mut row in out.rows_mut() {
                    for (j, v) in row.iter_mut().enumerate() {
                        *v = (*v - self.mins[j]) / self.ranges[j];
                    }
                }
                FeatureMatrix::Dense(out)
            }
            FeatureMatrix::Sparse(_) => {
                return Err(Error::InvalidData(format!(
                    "normalization shifts this data's zeros, which would densify \
                     {} sparse columns; disable normalize for this dataset",
                    data.dim()
                )));
            }
        };
        Dataset::with_classes(features, data.labels().to_vec(), data.num_classes())
    }
}
