//! Two-Gaussian simulation: a synthetic problem whose true decision boundary
//! is known exactly, so strategies can be compared against the oracle that
//! queries by true distance to the boundary.
//!
//! Both classes are drawn from identity-covariance Gaussians in the plane,
//! centered at (±separation/2, 0); the Bayes rule is the sign of the first
//! coordinate. Every replicate draws a fresh initial sample, candidate pool,
//! and test set, trains logistic regression, and measures each strategy's
//! retrained test accuracy across batch sizes.

use crate::data::{BootstrapConfig, Dataset, FeatureMatrix, Row};
use crate::error::{Error, Result};
use crate::harness::{
    aggregate_cells, evaluate_cells, CellInputs, LearnerSpec, PhaseTimings, Progress, RunResult,
};
use crate::learners::LogisticRegressionConfig;
use crate::sampling::StrategyId;
use crate::seeding;
use ndarray::Array2;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::Instant;

/// Scale and contents of one simulation run.
#[derive(Clone, Debug, Serialize)]
pub struct GaussianSimConfig {
    /// Distance between the class means, placed at (±separation/2, 0).
    pub mean_separation: f64,
    /// Initial labeled sample, drawn half per class.
    pub initial_size: usize,
    /// Candidate pool size.
    pub pool_size: usize,
    /// Held-out test set size.
    pub test_size: usize,
    /// Independent replicates to average over.
    pub replicates: usize,
    /// Batch sizes to evaluate, strictly increasing.
    pub batch_sizes: Vec<usize>,
    pub ensemble: BootstrapConfig,
    pub strategies: Vec<StrategyId>,
    pub seed: u64,
}

impl Default for GaussianSimConfig {
    fn default() -> Self {
        GaussianSimConfig {
            mean_separation: 2.0,
            initial_size: 40,
            pool_size: 8000,
            test_size: 10000,
            replicates: 500,
            batch_sizes: vec![10, 50, 100, 200, 400, 800],
            ensemble: BootstrapConfig::default(),
            strategies: vec![
                StrategyId::Random,
                StrategyId::Margin,
                StrategyId::MinMargin,
                StrategyId::Committee,
                StrategyId::MeanMargin,
                StrategyId::TrueMargin,
            ],
            seed: 0,
        }
    }
}

impl GaussianSimConfig {
    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        if self.mean_separation.is_nan() || self.mean_separation <= 0.0 {
            problems.push("mean_separation must be positive".to_string());
        }
        if self.initial_size < 2 {
            problems.push("initial_size must be at least 2 (one point per class)".to_string());
        }
        for (name, v) in [
            ("pool_size", self.pool_size),
            ("test_size", self.test_size),
            ("replicates", self.replicates),
        ] {
            if v < 1 {
                problems.push(format!("{name} must be at least 1"));
            }
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
        }
        if let Err(Error::InvalidConfig(more)) = self.ensemble.validate() {
            problems.extend(more);
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidConfig(problems))
        }
    }
}

/// Distance from a point to the true decision boundary x₁ = 0.
pub fn true_margin_distance(z: Row<'_>) -> f64 {
    z.get(0).abs()
}

/// Draw `n` points with fair-coin class labels; class g is Gaussian with
/// identity covariance around ((2g−1)·separation/2, 0).
pub fn gaussian_dataset(n: usize, separation: f64, rng: &mut impl Rng) -> Result<Dataset> {
    let labels: Vec<usize> = (0..n).map(|_| usize::from(rng.random::<bool>())).collect();
    gaussian_features(&labels, separation, rng)
}

/// Draw points for the given labels (used for the stratified initial set).
fn gaussian_features(labels: &[usize], separation: f64, rng: &mut impl Rng) -> Result<Dataset> {
    let mut features = Array2::zeros((labels.len(), 2));
    for (i, &label) in labels.iter().enumerate() {
        let sign = if label == 1 { 1.0 } else { -1.0 };
        let dx: f64 = rng.sample(StandardNormal);
        let dy: f64 = rng.sample(StandardNormal);
        features[[i, 0]] = sign * separation / 2.0 + dx;
        features[[i, 1]] = dy;
    }
    Dataset::with_classes(FeatureMatrix::Dense(features), labels.to_vec(), 2)
}

/// Draw one replicate's (initial, candidates, test) triple. The initial
/// sample is stratified half per class; the pool and test set draw their
/// labels by fair coin.
pub fn generate_gaussian(
    cfg: &GaussianSimConfig,
    seed: u64,
) -> Result<(Dataset, Dataset, Dataset)> {
    let half = cfg.initial_size / 2;
    let labels: Vec<usize> = (0..cfg.initial_size).map(|i| usize::from(i >= half)).collect();
    let initial = gaussian_features(&labels, cfg.mean_separation, &mut seeding::stream_rng(seed, 0))?;
    let candidates = gaussian_dataset(
        cfg.pool_size,
        cfg.mean_separation,
        &mut seeding::stream_rng(seed, 1),
    )?;
    let test = gaussian_dataset(
        cfg.test_size,
        cfg.mean_separation,
        &mut seeding::stream_rng(seed, 2),
    )?;
    Ok((initial, candidates, test))
}

/// Run the full simulation: fresh data per replicate, every configured
/// strategy and batch size, aggregated mean/std/stderr per cell.
pub fn run_simulation(cfg: &GaussianSimConfig) -> Result<RunResult> {
    run_simulation_with_progress(cfg, None)
}

/// As [`run_simulation`], reporting replicate completions to `progress`.
pub fn run_simulation_with_progress(
    cfg: &GaussianSimConfig,
    progress: Option<Progress<'_>>,
) -> Result<RunResult> {
    cfg.validate()?;
    let wall = Instant::now();
    let completed = AtomicUsize::new(0);
    let outcomes: Vec<(Vec<Vec<f64>>, PhaseTimings)> = (0..cfg.replicates as u64)
        .into_par_iter()
        .map(|r| {
            let outcome = simulate_replicate(cfg, r)?;
            if let Some(report) = progress {
                report(completed.fetch_add(1, Ordering::Relaxed) + 1, cfg.replicates);
            }
            Ok(outcome)
        })
        .collect::<Result<_>>()?;

    let accuracies: Vec<&Vec<Vec<f64>>> = outcomes.iter().map(|(a, _)| a).collect();
    let cells = aggregate_cells(&cfg.strategies, &cfg.batch_sizes, &accuracies, None);
    let mut timings = PhaseTimings::default();
    for (_, t) in &outcomes {
        timings.load_secs += t.load_secs;
        timings.train_secs += t.train_secs;
        timings.select_secs += t.select_secs;
        timings.retrain_secs += t.retrain_secs;
    }
    timings.total_wall_secs = wall.elapsed().as_secs_f64();
    Ok(RunResult {
        sweep_axis: None,
        cells,
        timings,
    })
}

fn simulate_replicate(
    cfg: &GaussianSimConfig,
    replicate: u64,
) -> Result<(Vec<Vec<f64>>, PhaseTimings)> {
    let rep_seed = seeding::mix_seed(cfg.seed, replicate);
    let t = Instant::now();
    // Stream 0 feeds data generation, matching the convention that
    // evaluate_cells derives its own streams 1..=4 from the same seed.
    let (initial, pool, test) = generate_gaussian(cfg, seeding::mix_seed(rep_seed, 0))?;
    let load_secs = t.elapsed().as_secs_f64();

    let learner = LearnerSpec::Logreg(LogisticRegressionConfig::default());
    let evaluation = evaluate_cells(&CellInputs {
        initial: &initial,
        pool: &pool,
        test: &test,
        learner: &learner,
        strategies: &cfg.strategies,
        batch_sizes: &cfg.batch_sizes,
        ensemble_cfg: &cfg.ensemble,
        has_oracle: true,
        balanced_lambda: 0.5,
        rep_seed,
    })?;
    let timings = PhaseTimings {
        load_secs,
        split_secs: 0.0,
        train_secs: evaluation.train_secs,
        select_secs: evaluation.select_secs,
        retrain_secs: evaluation.retrain_secs,
        total_wall_secs: 0.0,
    };
    Ok((evaluation.accuracies, timings))
}

/// Render simulation cells as CSV.
pub fn simulation_csv(result: &RunResult) -> String {
    let mut out =
        String::from("strategy,batch_size,mean_accuracy,std_accuracy,stderr,replicates\n");
    for c in &result.cells {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            c.strategy, c.batch_size, c.mean_accuracy, c.std, c.stderr, c.replicates
        ));
    }
    out
}

/// The points each strategy selected in one replicate (at the largest batch
/// size), for external plotting against the known boundary.
pub fn dump_selection(cfg: &GaussianSimConfig, replicate: u64) -> Result<String> {
    cfg.validate()?;
    let rep_seed = seeding::mix_seed(cfg.seed, replicate);
    let (initial, pool, test) = generate_gaussian(cfg, seeding::mix_seed(rep_seed, 0))?;
    let learner = LearnerSpec::Logreg(LogisticRegressionConfig::default());
    let b_max = *cfg.batch_sizes.last().expect("validated non-empty");
    let evaluation = evaluate_cells(&CellInputs {
        initial: &initial,
        pool: &pool,
        test: &test,
        learner: &learner,
        strategies: &cfg.strategies,
        batch_sizes: std::slice::from_ref(&b_max),
        ensemble_cfg: &cfg.ensemble,
        has_oracle: true,
        balanced_lambda: 0.5,
        rep_seed,
    })?;
    let mut out = String::from("x1,x2,strategy\n");
    for (strategy, indices) in cfg.strategies.iter().zip(&evaluation.selections_at_max) {
        for &i in indices {
            let row = pool.row(i);
            out.push_str(&format!("{},{},{}\n", row.get(0), row.get(1), strategy));
        }
    }
    Ok(out)
}
