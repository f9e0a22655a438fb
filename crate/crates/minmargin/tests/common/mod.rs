// Shared by every integration-test binary; not all of them use every
// helper, so unused-item warnings are off.
#![allow(dead_code)]

//! Shared fixtures for the integration tests: small synthetic datasets,
//! ensembles with instrumented members, and exhaustive per-step references
//! for the greedy strategies.

use std::sync::atomic::AtomicU64;
use std::sync::Arc;

use minmargin::data::{cosine_similarity, BootstrapConfig, Dataset};
use minmargin::learners::{
    train_logreg, CountingModel, DiscriminantModel, LogisticRegressionConfig,
};
use minmargin::sampling::{margin, Ensemble};
use minmargin::simulation;
use minmargin::{seeding, Result};

/// Two-Gaussian dataset (±separation/2 on the first axis) with fair-coin
/// labels.
pub fn gaussian(n: usize, separation: f64, seed: u64) -> Dataset {
    let mut rng = seeding::stream_rng(seed, 0);
    simulation::gaussian_dataset(n, separation, &mut rng).unwrap()
}

/// A labeled/unlabeled pair drawn from one Gaussian dataset: the first
/// `labeled` rows and the rest.
pub fn labeled_and_pool(n: usize, labeled: usize, separation: f64, seed: u64) -> (Dataset, Dataset) {
    let data = gaussian(n, separation, seed);
    let initial: Vec<usize> = (0..labeled).collect();
    let rest: Vec<usize> = (labeled..n).collect();
    (data.subset(&initial), data.subset(&rest))
}

/// Default-config logistic regression, boxed for ensembles.
pub fn boxed_logreg(train: &Dataset, _seed: u64) -> Result<Box<dyn DiscriminantModel>> {
    Ok(Box::new(train_logreg(
        train,
        &LogisticRegressionConfig::default(),
    )?))
}

/// Bootstrap ensemble of K logistic regressions.
pub fn logreg_ensemble(initial: &Dataset, k: usize, seed: u64) -> Ensemble {
    let config = BootstrapConfig {
        num_models: k,
        sample_fraction: 1.0,
    };
    Ensemble::fit(initial, &config, seed, &boxed_logreg).unwrap()
}

/// Ensemble whose members count their own score evaluations; returns one
/// counter handle per member.
pub fn counting_ensemble(
    initial: &Dataset,
    k: usize,
    seed: u64,
) -> (Ensemble, Vec<Arc<AtomicU64>>) {
    let plain = logreg_ensemble(initial, k, seed);
    let mut counters = Vec::with_capacity(k);
    let mut members: Vec<Box<dyn DiscriminantModel>> = Vec::with_capacity(k);
    for model in plain.into_models() {
        let counting = CountingModel::new(model);
        counters.push(counting.counter());
        members.push(Box::new(counting));
    }
    let ensemble = Ensemble::new(
        members,
        BootstrapConfig {
            num_models: k,
            sample_fraction: 1.0,
        },
    )
    .unwrap();
    (ensemble, counters)
}

/// Exhaustive per-step reference for the greedy margin/diversity trade-off:
/// every step rescans the whole pool and recomputes each candidate's maximum
/// cosine similarity to the already-selected set from scratch (0 while the
/// set is empty). Ties go to the smaller index.
pub fn balanced_margin_reference(
    model: &dyn DiscriminantModel,
    pool: &Dataset,
    batch: usize,
    lambda: f64,
) -> Vec<usize> {
    let margins: Vec<f64> = (0..pool.len())
        .map(|i| margin(model, pool.row(i)).unwrap())
        .collect();
    let mut selected: Vec<usize> = Vec::new();
    while selected.len() < batch.min(pool.len()) {
        let mut best: Option<(usize, f64)> = None;
        for (i, &margin_i) in margins.iter().enumerate() {
            if selected.contains(&i) {
                continue;
            }
            let max_sim = selected
                .iter()
                .map(|&j| cosine_similarity(&pool.row(i), &pool.row(j)))
                .fold(0.0f64, f64::max);
            let objective = lambda * margin_i + (1.0 - lambda) * max_sim;
            if best.is_none_or(|(_, b)| objective < b) {
                best = Some((i, objective));
            }
        }
        selected.push(best.unwrap().0);
    }
    selected
}

/// Exhaustive per-step reference for greedy k-centers under 1 − cosine:
/// every step recomputes each candidate's distance to its nearest center
/// (initial rows plus already-selected picks) from scratch and takes the
/// farthest, ties to the smaller index.
pub fn k_centers_reference(initial: &Dataset, pool: &Dataset, batch: usize) -> Vec<usize> {
    let n = pool.len();
    let mut selected: Vec<usize> = Vec::new();
    while selected.len() < batch.min(n) {
        let mut best: Option<(usize, f64)> = None;
        for i in 0..n {
            if selected.contains(&i) {
                continue;
            }
            let mut dist = f64::INFINITY;
            for j in 0..initial.len() {
                dist = dist.min(1.0 - cosine_similarity(&pool.row(i), &initial.row(j)));
            }
            for &j in &selected {
                dist = dist.min(1.0 - cosine_similarity(&pool.row(i), &pool.row(j)));
            }
            if best.is_none_or(|(_, b)| dist > b) {
                best = Some((i, dist));
            }
        }
        selected.push(best.unwrap().0);
    }
    selected
}
