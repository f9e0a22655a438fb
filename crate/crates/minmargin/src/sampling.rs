//! Batch selection strategies.
//!
//! Every strategy maps (trained model(s), candidate pool, batch size B) to a
//! [`BatchSelection`]. The flagship is min-margin: score each candidate by
//! the minimum classification margin over an ensemble of bootstrap-trained
//! models and take the B lowest. The rest are the standard baselines it is
//! compared against.
//!
//! All strategies are pure functions of immutable inputs, parallelize their
//! scoring over the pool, break every tie toward the smaller candidate
//! index, and return bit-identical results regardless of thread count.

use crate::data::{cosine_similarity, BootstrapConfig, Dataset, Row};
use crate::error::{Error, Result};
use crate::learners::DiscriminantModel;
use crate::seeding;
use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

/// Identifier of a selection strategy, matching the strings used in configs
/// and result files.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum StrategyId {
    #[serde(rename = "margin")]
    Margin,
    #[serde(rename = "min-margin")]
    MinMargin,
    #[serde(rename = "random")]
    Random,
    #[serde(rename = "committee")]
    Committee,
    #[serde(rename = "var-softmax")]
    VarSoftmax,
    #[serde(rename = "mean-margin")]
    MeanMargin,
    #[serde(rename = "balanced-margin")]
    BalancedMargin,
    #[serde(rename = "k-centers")]
    KCenters,
    #[serde(rename = "random-margin-mix")]
    RandomMarginMix,
    #[serde(rename = "true-margin")]
    TrueMargin,
}

impl StrategyId {
    pub const ALL: [StrategyId; 10] = [
        StrategyId::Margin,
        StrategyId::MinMargin,
        StrategyId::Random,
        StrategyId::Committee,
        StrategyId::VarSoftmax,
        StrategyId::MeanMargin,
        StrategyId::BalancedMargin,
        StrategyId::KCenters,
        StrategyId::RandomMarginMix,
        StrategyId::TrueMargin,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            StrategyId::Margin => "margin",
            StrategyId::MinMargin => "min-margin",
            StrategyId::Random => "random",
            StrategyId::Committee => "committee",
            StrategyId::VarSoftmax => "var-softmax",
            StrategyId::MeanMargin => "mean-margin",
            StrategyId::BalancedMargin => "balanced-margin",
            StrategyId::KCenters => "k-centers",
            StrategyId::RandomMarginMix => "random-margin-mix",
            StrategyId::TrueMargin => "true-margin",
        }
    }

    /// Strategies that score with the bootstrap ensemble.
    pub fn uses_ensemble(&self) -> bool {
        matches!(
            self,
            StrategyId::MinMargin
                | StrategyId::Committee
                | StrategyId::VarSoftmax
                | StrategyId::MeanMargin
        )
    }

    /// Strategies that score with the single base model.
    pub fn uses_base_model(&self) -> bool {
        matches!(
            self,
            StrategyId::Margin | StrategyId::BalancedMargin | StrategyId::RandomMarginMix
        )
    }

    /// Strategies that need the true-boundary oracle (simulation only).
    pub fn uses_oracle(&self) -> bool {
        matches!(self, StrategyId::TrueMargin)
    }
}

impl fmt::Display for StrategyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for StrategyId {
    type Err = Error;

    fn from_str(s: &str) -> Result<StrategyId> {
        StrategyId::ALL
            .iter()
            .find(|id| id.as_str() == s)
            .copied()
            .ok_or_else(|| {
                let valid: Vec<&str> = StrategyId::ALL.iter().map(|id| id.as_str()).collect();
                Error::InvalidData(format!(
                    "unknown strategy id {s:?}; valid identifiers: {}",
                    valid.join(", ")
                ))
            })
    }
}

/// A training function: labeled data plus a seed in, a trained model out.
/// [`Ensemble::fit`] calls it once per bootstrap draw.
pub type Trainer<'a> = dyn Fn(&Dataset, u64) -> Result<Box<dyn DiscriminantModel>> + Sync + 'a;

/// K models trained on stratified bootstrap resamples, plus the resampling
/// parameters they came from.
pub struct Ensemble {
    models: Vec<Box<dyn DiscriminantModel>>,
    config: BootstrapConfig,
}

impl Ensemble {
    /// Wrap already-trained members; all must agree on the class count.
    pub fn new(models: Vec<Box<dyn DiscriminantModel>>, config: BootstrapConfig) -> Result<Ensemble> {
        if models.is_empty() {
            return Err(Error::InvalidData("ensemble must have at least one model".into()));
        }
        let classes = models[0].num_classes();
        if models.iter().any(|m| m.num_classes() != classes) {
            return Err(Error::InvalidData(
                "ensemble members disagree on the class count".into(),
            ));
        }
        Ok(Ensemble { models, config })
    }

    /// Resample `initial` K times (stratified, fraction β) and train one
    /// member per draw, in parallel with per-member derived seeds.
    pub fn fit(
        initial: &Dataset,
        config: &BootstrapConfig,
        seed: u64,
        trainer: &Trainer<'_>,
    ) -> Result<Ensemble> {
        let bootstrap_seed = seeding::mix_seed(seed, 0);
        let train_seed = seeding::mix_seed(seed, 1);
        let draws = crate::data::stratified_bootstrap(initial, config, bootstrap_seed)?;
        let models: Vec<Box<dyn DiscriminantModel>> = draws
            .par_iter()
            .enumerate()
            .map(|(k, draw)| trainer(draw, seeding::mix_seed(train_seed, k as u64)))
            .collect::<Result<_>>()?;
        Ensemble::new(models, *config)
    }

    pub fn len(&self) -> usize {
        self.models.len()
    }

    pub fn is_empty(&self) -> bool {
        self.models.is_empty()
    }

    pub fn num_classes(&self) -> usize {
        self.models[0].num_classes()
    }

    pub fn models(&self) -> &[Box<dyn DiscriminantModel>] {
        &self.models
    }

    /// Consume the ensemble, yielding its members (e.g. to rewrap them in
    /// instrumented adapters).
    pub fn into_models(self) -> Vec<Box<dyn DiscriminantModel>> {
        self.models
    }

    pub fn config(&self) -> &BootstrapConfig {
        &self.config
    }
}

/// The outcome of one strategy invocation: which pool rows to label, the
/// scores that ranked them, and which strategy produced them.
#[derive(Clone, Debug)]
pub struct BatchSelection {
    pub strategy: StrategyId,
    /// Distinct candidate-pool row indices, best-first.
    pub indices: Vec<usize>,
    /// Score of each selected index, parallel to `indices`.
    pub scores: Vec<f64>,
}

/// Whether low or high scores win selection.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScoreOrder {
    LowestFirst,
    HighestFirst,
}

/// Classification margin of a score vector: highest minus second-highest.
pub fn margin_from_scores(scores: &[f64]) -> Result<f64> {
    if scores.len() < 2 {
        return Err(Error::Selection(
            "margin requires at least 2 class scores".into(),
        ));
    }
    Ok(margin_of(scores))
}

fn margin_of(scores: &[f64]) -> f64 {
    let (mut best, mut second) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    for &v in scores {
        if v > best {
            second = best;
            best = v;
        } else if v > second {
            second = v;
        }
    }
    best - second
}

/// Margin of a single model at one candidate.
pub fn margin(model: &dyn DiscriminantModel, z: Row<'_>) -> Result<f64> {
    let mut scores = vec![0.0; model.num_classes()];
    if scores.len() < 2 {
        return Err(Error::Selection(
            "margin requires a model with at least 2 classes".into(),
        ));
    }
    model.score_into(z, &mut scores);
    Ok(margin_of(&scores))
}

/// Minimum margin over the ensemble members at one candidate.
pub fn min_margin_score(ensemble: &Ensemble, z: Row<'_>) -> Result<f64> {
    if ensemble.num_classes() < 2 {
        return Err(Error::Selection(
            "margin requires models with at least 2 classes".into(),
        ));
    }
    let mut scratch = vec![0.0; ensemble.num_classes()];
    let mut lowest = f64::INFINITY;
    for model in ensemble.models() {
        model.score_into(z, &mut scratch);
        lowest = lowest.min(margin_of(&scratch));
    }
    Ok(lowest)
}

/// Take the `batch` most extreme scores, ties broken toward the smaller
/// candidate index. `batch` larger than the pool saturates to the pool.
pub fn select_by_score(
    scores: &[f64],
    batch: usize,
    order: ScoreOrder,
    strategy: StrategyId,
) -> BatchSelection {
    let n = scores.len();
    let b = batch.min(n);
    let rank = |a: &usize, c: &usize| -> Ordering {
        let primary = match order {
            ScoreOrder::LowestFirst => scores[*a].total_cmp(&scores[*c]),
            ScoreOrder::HighestFirst => scores[*c].total_cmp(&scores[*a]),
        };
        primary.then(a.cmp(c))
    };
    let mut idx: Vec<usize> = (0..n).collect();
    if b > 0 && b < n {
        // O(n) partition; only the kept prefix needs a full sort.
        idx.select_nth_unstable_by(b, rank);
    }
    idx.truncate(b);
    idx.sort_unstable_by(rank);
    let picked_scores = idx.iter().map(|&i| scores[i]).collect();
    BatchSelection {
        strategy,
        indices: idx,
        scores: picked_scores,
    }
}

/// Parallel per-candidate scoring with a reusable per-thread scratch buffer.
fn score_pool<T, F>(
    pool: &Dataset,
    make_scratch: impl Fn() -> T + Sync + Send,
    f: F,
) -> Vec<f64>
where
    T: Send,
    F: Fn(&mut T, Row<'_>) -> f64 + Sync,
{
    (0..pool.len())
        .into_par_iter()
        .map_init(make_scratch, |scratch, i| f(scratch, pool.row(i)))
        .collect()
}

fn require_classes(classes: usize) -> Result<()> {
    if classes < 2 {
        Err(Error::Selection(
            "selection requires models with at least 2 classes".into(),
        ))
    } else {
        Ok(())
    }
}

/// Margin sampling: B candidates with the smallest single-model margin.
pub fn strategy_margin(
    model: &dyn DiscriminantModel,
    pool: &Dataset,
    batch: usize,
) -> Result<BatchSelection> {
    Ok(select_by_score(
        &margin_scores(model, pool)?,
        batch,
        ScoreOrder::LowestFirst,
        StrategyId::Margin,
    ))
}

pub(crate) fn margin_scores(model: &dyn DiscriminantModel, pool: &Dataset) -> Result<Vec<f64>> {
    require_classes(model.num_classes())?;
    Ok(score_pool(
        pool,
        || vec![0.0; model.num_classes()],
        |scratch, row| {
            model.score_into(row, scratch);
            margin_of(scratch)
        },
    ))
}

/// Min-margin sampling: B candidates whose *minimum* margin over the
/// ensemble members is smallest.
pub fn strategy_min_margin(
    ensemble: &Ensemble,
    pool: &Dataset,
    batch: usize,
) -> Result<BatchSelection> {
    require_classes(ensemble.num_classes())?;
    let scores = score_pool(
        pool,
        || vec![0.0; ensemble.num_classes()],
        |scratch, row| {
            let mut lowest = f64::INFINITY;
            for model in ensemble.models() {
                model.score_into(row, scratch);
                lowest = lowest.min(margin_of(scratch));
            }
            lowest
        },
    );
    Ok(select_by_score(
        &scores,
        batch,
        ScoreOrder::LowestFirst,
        StrategyId::MinMargin,
    ))
}

/// Uniform sample of B candidates without replacement.
pub fn strategy_random(pool: &Dataset, batch: usize, seed: u64) -> BatchSelection {
    let order = shuffled_order(pool.len(), seed);
    let b = batch.min(pool.len());
    BatchSelection {
        strategy: StrategyId::Random,
        indices: order[..b].to_vec(),
        // The "score" of a random pick is its position in the draw order.
        scores: (0..b).map(|p| p as f64).collect(),
    }
}

/// A seeded uniform shuffle of `0..n`; taking any prefix of it is a uniform
/// draw without replacement, so nested batch sizes stay consistent.
pub(crate) fn shuffled_order(n: usize, seed: u64) -> Vec<usize> {
    let mut rng = seeding::stream_rng(seed, 0);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    order
}

/// Vote-margin committee: score (v₁ − v₂)/K from the members' top-two vote
/// counts; the most contested candidates are selected first.
pub fn strategy_committee(
    ensemble: &Ensemble,
    pool: &Dataset,
    batch: usize,
) -> Result<BatchSelection> {
    require_classes(ensemble.num_classes())?;
    let k = ensemble.len() as f64;
    let classes = ensemble.num_classes();
    let scores = score_pool(
        pool,
        || (vec![0.0; classes], vec![0usize; classes]),
        |(scratch, votes), row| {
            votes.fill(0);
            for model in ensemble.models() {
                model.score_into(row, scratch);
                votes[crate::learners::argmax(scratch)] += 1;
            }
            let (mut v1, mut v2) = (0usize, 0usize);
            for &v in votes.iter() {
                if v > v1 {
                    v2 = v1;
                    v1 = v;
                } else if v > v2 {
                    v2 = v;
                }
            }
            (v1 - v2) as f64 / k
        },
    );
    Ok(select_by_score(
        &scores,
        batch,
        ScoreOrder::LowestFirst,
        StrategyId::Committee,
    ))
}

/// Softmax-variance: sum over classes of the population variance of the
/// members' scores; the highest-variance candidates are selected first.
pub fn strategy_var_softmax(
    ensemble: &Ensemble,
    pool: &Dataset,
    batch: usize,
) -> Result<BatchSelection> {
    require_classes(ensemble.num_classes())?;
    let k = ensemble.len() as f64;
    let classes = ensemble.num_classes();
    let scores = score_pool(
        pool,
        || (vec![0.0; classes], vec![0.0; classes], vec![0.0; classes]),
        |(scratch, sum, sumsq), row| {
            sum.fill(0.0);
            sumsq.fill(0.0);
            for model in ensemble.models() {
                model.score_into(row, scratch);
                for ((s, sq), &v) in sum.iter_mut().zip(sumsq.iter_mut()).zip(scratch.iter()) {
                    *s += v;
                    *sq += v * v;
                }
            }
            sum.iter()
                .zip(sumsq.iter())
                .map(|(&s, &sq)| {
                    let mean = s / k;
                    (sq / k - mean * mean).max(0.0)
                })
                .sum()
        },
    );
    Ok(select_by_score(
        &scores,
        batch,
        ScoreOrder::HighestFirst,
        StrategyId::VarSoftmax,
    ))
}

/// Margin of the ensemble-mean score vector, lowest first.
pub fn strategy_mean_margin(
    ensemble: &Ensemble,
    pool: &Dataset,
    batch: usize,
) -> Result<BatchSelection> {
    require_classes(ensemble.num_classes())?;
    let k = ensemble.len() as f64;
    let classes = ensemble.num_classes();
    let scores = score_pool(
        pool,
        || (vec![0.0; classes], vec![0.0; classes]),
        |(scratch, mean), row| {
            mean.fill(0.0);
            for model in ensemble.models() {
                model.score_into(row, scratch);
                for (m, &v) in mean.iter_mut().zip(scratch.iter()) {
                    *m += v / k;
                }
            }
            margin_of(mean)
        },
    );
    Ok(select_by_score(
        &scores,
        batch,
        ScoreOrder::LowestFirst,
        StrategyId::MeanMargin,
    ))
}

/// Greedy margin-diversity trade-off: each pick minimizes
/// λ·margin(z) + (1−λ)·max_{j∈S} cos(z, z_j), with the similarity term
/// defined as 0 while the selected set S is empty.
pub fn strategy_balanced_margin(
    model: &dyn DiscriminantModel,
    pool: &Dataset,
    batch: usize,
    lambda: f64,
) -> Result<BatchSelection> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::InvalidData(format!(
            "balanced-margin lambda must be in [0, 1], got {lambda}"
        )));
    }
    let margins = margin_scores(model, pool)?;
    let n = pool.len();
    let b = batch.min(n);
    let mut max_sim = vec![0.0f64; n];
    let mut picked = vec![false; n];
    let mut indices = Vec::with_capacity(b);
    let mut objectives = Vec::with_capacity(b);
    for _ in 0..b {
        let best = (0..n)
            .into_par_iter()
            .filter(|&i| !picked[i])
            .map(|i| (i, lambda * margins[i] + (1.0 - lambda) * max_sim[i]))
            .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)))
            .expect("pool has unpicked candidates");
        picked[best.0] = true;
        indices.push(best.0);
        objectives.push(best.1);
        let anchor = pool.row(best.0);
        let updates: Vec<f64> = (0..n)
            .into_par_iter()
            .map(|i| {
                if picked[i] {
                    max_sim[i]
                } else {
                    max_sim[i].max(cosine_similarity(&pool.row(i), &anchor))
                }
            })
            .collect();
        max_sim = updates;
    }
    Ok(BatchSelection {
        strategy: StrategyId::BalancedMargin,
        indices,
        scores: objectives,
    })
}

/// Greedy k-centers under the distance 1 − cosine similarity: centers start
/// at the initial-sample rows, and each pick is the candidate farthest from
/// its nearest center.
pub fn strategy_k_centers(initial: &Dataset, pool: &Dataset, batch: usize) -> Result<BatchSelection> {
    if initial.dim() != pool.dim() && !initial.is_empty() {
        return Err(Error::InvalidData(format!(
            "initial set dimension {} does not match pool dimension {}",
            initial.dim(),
            pool.dim()
        )));
    }
    let n = pool.len();
    let b = batch.min(n);
    let mut min_dist: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| {
            let row = pool.row(i);
            let mut best = f64::INFINITY;
            for j in 0..initial.len() {
                best = best.min(1.0 - cosine_similarity(&row, &initial.row(j)));
            }
            best
        })
        .collect();
    let mut picked = vec![false; n];
    let mut indices = Vec::with_capacity(b);
    let mut distances = Vec::with_capacity(b);
    for _ in 0..b {
        let best = (0..n)
            .into_par_iter()
            .filter(|&i| !picked[i])
            .map(|i| (i, min_dist[i]))
            .max_by(|a, b| a.1.total_cmp(&b.1).then(b.0.cmp(&a.0)))
            .expect("pool has unpicked candidates");
        picked[best.0] = true;
        indices.push(best.0);
        distances.push(best.1);
        let anchor = pool.row(best.0);
        let updates: Vec<f64> = (0..n)
            .into_par_iter()
            .map(|i| {
                if picked[i] {
                    min_dist[i]
                } else {
                    min_dist[i].min(1.0 - cosine_similarity(&pool.row(i), &anchor))
                }
            })
            .collect();
        min_dist = updates;
    }
    Ok(BatchSelection {
        strategy: StrategyId::KCenters,
        indices,
        scores: distances,
    })
}

/// Half margin, half random: ⌈B/2⌉ lowest-margin picks, then ⌊B/2⌋ drawn
/// uniformly without replacement from the rest of the pool.
pub fn strategy_random_margin_mix(
    model: &dyn DiscriminantModel,
    pool: &Dataset,
    batch: usize,
    seed: u64,
) -> Result<BatchSelection> {
    let margins = margin_scores(model, pool)?;
    let order = shuffled_order(pool.len(), seed);
    Ok(random_margin_mix_from_parts(
        &margins, &order, batch,
    ))
}

/// Deterministic core of the margin/random mixture, reusable with a fixed
/// shuffle so that selections at nested batch sizes share their prefixes.
pub(crate) fn random_margin_mix_from_parts(
    margins: &[f64],
    shuffle: &[usize],
    batch: usize,
) -> BatchSelection {
    let n = margins.len();
    let b = batch.min(n);
    let want_margin = batch.div_ceil(2).min(n);
    let margin_part = select_by_score(
        margins,
        want_margin,
        ScoreOrder::LowestFirst,
        StrategyId::RandomMarginMix,
    );
    let mut taken = vec![false; n];
    let mut indices = margin_part.indices;
    let mut scores = margin_part.scores;
    for &i in &indices {
        taken[i] = true;
    }
    // A prefix of the shuffle restricted to unselected candidates is still a
    // uniform draw without replacement.
    for &i in shuffle {
        if indices.len() == b {
            break;
        }
        if !taken[i] {
            taken[i] = true;
            indices.push(i);
            scores.push(margins[i]);
        }
    }
    BatchSelection {
        strategy: StrategyId::RandomMarginMix,
        indices,
        scores,
    }
}

/// Oracle selection: B candidates with the smallest |distance| to the true
/// decision boundary. Only available where the generator knows the boundary.
pub fn strategy_true_margin(
    oracle: &(dyn Fn(Row<'_>) -> f64 + Sync),
    pool: &Dataset,
    batch: usize,
) -> BatchSelection {
    let scores = score_pool(pool, || (), |_, row| oracle(row).abs());
    select_by_score(
        &scores,
        batch,
        ScoreOrder::LowestFirst,
        StrategyId::TrueMargin,
    )
}

/// Everything a strategy might need, bundled for dispatch by identifier.
/// Leave unused components unset; a strategy whose inputs are missing
/// reports which one.
pub struct SelectionContext<'a> {
    pub base_model: Option<&'a dyn DiscriminantModel>,
    pub ensemble: Option<&'a Ensemble>,
    pub initial: Option<&'a Dataset>,
    pub true_margin: Option<&'a (dyn Fn(Row<'_>) -> f64 + Sync)>,
    /// Trade-off weight for balanced-margin.
    pub balanced_lambda: f64,
    /// Seed for the randomized strategies.
    pub seed: u64,
}

impl<'a> Default for SelectionContext<'a> {
    fn default() -> Self {
        SelectionContext {
            base_model: None,
            ensemble: None,
            initial: None,
            true_margin: None,
            balanced_lambda: 0.5,
            seed: 0,
        }
    }
}

impl<'a> SelectionContext<'a> {
    fn base_model(&self, strategy: StrategyId) -> Result<&'a dyn DiscriminantModel> {
        self.base_model.ok_or_else(|| {
            Error::Selection(format!("strategy {strategy} requires a trained base model"))
        })
    }

    fn ensemble(&self, strategy: StrategyId) -> Result<&'a Ensemble> {
        self.ensemble.ok_or_else(|| {
            Error::Selection(format!("strategy {strategy} requires a bootstrap ensemble"))
        })
    }
}

/// Run the strategy named by `strategy` against the pool.
pub fn select_with(
    strategy: StrategyId,
    pool: &Dataset,
    batch: usize,
    ctx: &SelectionContext<'_>,
) -> Result<BatchSelection> {
    match strategy {
        StrategyId::Margin => strategy_margin(ctx.base_model(strategy)?, pool, batch),
        StrategyId::MinMargin => strategy_min_margin(ctx.ensemble(strategy)?, pool, batch),
        StrategyId::Random => Ok(strategy_random(pool, batch, ctx.seed)),
        StrategyId::Committee => strategy_committee(ctx.ensemble(strategy)?, pool, batch),
        StrategyId::VarSoftmax => strategy_var_softmax(ctx.ensemble(strategy)?, pool, batch),
        StrategyId::MeanMargin => strategy_mean_margin(ctx.ensemble(strategy)?, pool, batch),
        StrategyId::BalancedMargin => strategy_balanced_margin(
            ctx.base_model(strategy)?,
            pool,
            batch,
            ctx.balanced_lambda,
        ),
        StrategyId::KCenters => {
            let initial = ctx.initial.ok_or_else(|| {
                Error::Selection("strategy k-centers requires the initial dataset".into())
            })?;
            strategy_k_centers(initial, pool, batch)
        }
        StrategyId::RandomMarginMix => {
            strategy_random_margin_mix(ctx.base_model(strategy)?, pool, batch, ctx.seed)
        }
        StrategyId::TrueMargin => {
            let oracle = ctx.true_margin.ok_or_else(|| {
                Error::Selection(
                    "strategy true-margin requires a boundary-distance oracle".into(),
                )
            })?;
            Ok(strategy_true_margin(oracle, pool, batch))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learners::{train_logreg, LogisticRegressionConfig, ModelDump};
    use ndarray::Array2;
    use rand::Rng;

    /// Model returning fixed per-row scores, keyed by the row's first value.
    struct TableModel {
        rows: Vec<Vec<f64>>,
    }

    impl DiscriminantModel for TableModel {
        fn num_classes(&self) -> usize {
            self.rows[0].len()
        }
        fn input_dim(&self) -> usize {
            1
        }
        fn score_into(&self, z: Row<'_>, out: &mut [f64]) {
            out.copy_from_slice(&self.rows[z.get(0) as usize]);
        }
        fn dump(&self) -> ModelDump {
            ModelDump {
                kind: "table".into(),
                dims: vec![],
                weights: vec![],
            }
        }
    }

    fn index_pool(n: usize) -> Dataset {
        let features = Array2::from_shape_fn((n, 1), |(i, _)| i as f64);
        let labels = (0..n).map(|i| i % 2).collect();
        Dataset::from_dense(features, labels).unwrap()
    }

    fn table_ensemble(tables: Vec<Vec<Vec<f64>>>) -> Ensemble {
        let models: Vec<Box<dyn DiscriminantModel>> = tables
            .into_iter()
            .map(|rows| Box::new(TableModel { rows }) as Box<dyn DiscriminantModel>)
            .collect();
        Ensemble::new(models, BootstrapConfig::default()).unwrap()
    }

    #[test]
    fn margin_is_gap_between_top_two() {
        assert!((margin_from_scores(&[0.7, 0.3]).unwrap() - 0.4).abs() < 1e-15);
        assert_eq!(margin_from_scores(&[0.5, 0.5]).unwrap(), 0.0);
        assert!((margin_from_scores(&[0.5, 0.3, 0.2]).unwrap() - 0.2).abs() < 1e-15);
        assert!(margin_from_scores(&[1.0]).is_err());
    }

    #[test]
    fn min_margin_takes_member_minimum() {
        let ens = table_ensemble(vec![
            vec![vec![0.9, 0.1]],
            vec![vec![0.6, 0.4]],
            vec![vec![0.55, 0.45]],
        ]);
        let pool = index_pool(1);
        let score = min_margin_score(&ens, pool.row(0)).unwrap();
        assert!((score - 0.1).abs() < 1e-12);
    }

    #[test]
    fn min_margin_never_exceeds_any_member_margin() {
        let data = crate::learners::test_support::separable_clusters(30, 1.0, 41);
        let cfg = BootstrapConfig {
            num_models: 5,
            sample_fraction: 1.0,
        };
        let ens = Ensemble::fit(&data, &cfg, 9, &|d, _s| {
            Ok(Box::new(train_logreg(d, &LogisticRegressionConfig::default())?))
        })
        .unwrap();
        let mut rng = crate::seeding::stream_rng(1, 2);
        for _ in 0..100 {
            let probe = [rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0)];
            let m = min_margin_score(&ens, Row::Dense(&probe)).unwrap();
            for member in ens.models() {
                assert!(m <= margin(member.as_ref(), Row::Dense(&probe)).unwrap() + 1e-15);
            }
        }
    }

    #[test]
    fn select_by_score_breaks_ties_by_index() {
        let sel = select_by_score(
            &[0.3, 0.1, 0.1, 0.9],
            2,
            ScoreOrder::LowestFirst,
            StrategyId::Margin,
        );
        assert_eq!(sel.indices, vec![1, 2]);
        assert_eq!(sel.scores, vec![0.1, 0.1]);
    }

    #[test]
    fn select_by_score_saturates() {
        let sel = select_by_score(
            &[0.5, 0.2, 0.8],
            4,
            ScoreOrder::LowestFirst,
            StrategyId::Margin,
        );
        assert_eq!(sel.indices, vec![1, 0, 2]);
    }

    #[test]
    fn select_by_score_highest_first() {
        let sel = select_by_score(
            &[5.0, 4.0, 3.0, 2.0, 1.0],
            2,
            ScoreOrder::HighestFirst,
            StrategyId::VarSoftmax,
        );
        assert_eq!(sel.indices, vec![0, 1]);
        assert_eq!(sel.scores, vec![5.0, 4.0]);
    }

    #[test]
    fn constant_scores_select_first_indices() {
        let model = TableModel {
            rows: vec![vec![0.6, 0.4]; 10],
        };
        let sel = strategy_margin(&model, &index_pool(10), 3).unwrap();
        assert_eq!(sel.indices, vec![0, 1, 2]);
    }

    #[test]
    fn min_margin_with_one_member_reduces_to_margin() {
        let data = crate::learners::test_support::separable_clusters(25, 1.0, 43);
        let model = train_logreg(&data, &LogisticRegressionConfig::default()).unwrap();
        let pool = crate::learners::test_support::separable_clusters(50, 1.0, 44);
        let by_margin = strategy_margin(&model, &pool, 10).unwrap();
        let dump = model.dump();
        let ens = Ensemble::new(
            vec![crate::learners::load_model(&dump).unwrap()],
            BootstrapConfig {
                num_models: 1,
                sample_fraction: 1.0,
            },
        )
        .unwrap();
        let by_min = strategy_min_margin(&ens, &pool, 10).unwrap();
        assert_eq!(by_margin.indices, by_min.indices);
    }

    #[test]
    fn identical_members_reduce_to_margin() {
        let data = crate::learners::test_support::separable_clusters(25, 1.0, 47);
        let model = train_logreg(&data, &LogisticRegressionConfig::default()).unwrap();
        let pool = crate::learners::test_support::separable_clusters(40, 1.0, 48);
        let by_margin = strategy_margin(&model, &pool, 8).unwrap();
        let dump = model.dump();
        let members: Vec<Box<dyn DiscriminantModel>> = (0..4)
            .map(|_| crate::learners::load_model(&dump).unwrap())
            .collect();
        let ens = Ensemble::new(members, BootstrapConfig::default()).unwrap();
        let by_min = strategy_min_margin(&ens, &pool, 8).unwrap();
        assert_eq!(by_margin.indices, by_min.indices);
    }

    #[test]
    fn random_is_deterministic_and_saturates() {
        let pool = index_pool(10);
        let a = strategy_random(&pool, 4, 7);
        let b = strategy_random(&pool, 4, 7);
        assert_eq!(a.indices, b.indices);
        let all = strategy_random(&pool, 10, 7);
        let mut sorted = all.indices.clone();
        sorted.sort_unstable();
        assert_eq!(sorted, (0..10).collect::<Vec<_>>());
        // Nested prefix: the B=2 draw is a prefix of the B=4 draw.
        let two = strategy_random(&pool, 2, 7);
        assert_eq!(two.indices, a.indices[..2]);
    }

    #[test]
    fn random_index_frequency_is_uniform() {
        let pool = index_pool(10);
        let mut hits = 0u32;
        for seed in 0..10_000 {
            if strategy_random(&pool, 1, seed).indices[0] == 0 {
                hits += 1;
            }
        }
        let freq = hits as f64 / 10_000.0;
        assert!((freq - 0.1).abs() < 0.01, "frequency {freq}");
    }

    #[test]
    fn committee_scores_vote_margins() {
        // 25 members: 13 vote class 0, 12 vote class 1 on row 0; unanimous
        // on row 1; K=2 split vote handled by the second ensemble.
        let mut tables = Vec::new();
        for k in 0..25 {
            let first = if k < 13 {
                vec![0.9, 0.1]
            } else {
                vec![0.1, 0.9]
            };
            tables.push(vec![first, vec![1.0, 0.0]]);
        }
        let ens = table_ensemble(tables);
        let pool = index_pool(2);
        let sel = strategy_committee(&ens, &pool, 2).unwrap();
        assert_eq!(sel.indices, vec![0, 1]);
        assert!((sel.scores[0] - 0.04).abs() < 1e-12);
        assert!((sel.scores[1] - 1.0).abs() < 1e-12);

        let ens2 = table_ensemble(vec![
            vec![vec![0.9, 0.1]],
            vec![vec![0.2, 0.8]],
        ]);
        let sel2 = strategy_committee(&ens2, &index_pool(1), 1).unwrap();
        assert_eq!(sel2.scores[0], 0.0);
    }

    #[test]
    fn var_softmax_scores_summed_variance() {
        let ens = table_ensemble(vec![
            vec![vec![0.9, 0.1], vec![0.6, 0.4]],
            vec![vec![0.1, 0.9], vec![0.6, 0.4]],
        ]);
        let pool = index_pool(2);
        let sel = strategy_var_softmax(&ens, &pool, 2).unwrap();
        // Disagreeing row: per-class variance 0.16, summed 0.32; agreeing row 0.
        assert_eq!(sel.indices, vec![0, 1]);
        assert!((sel.scores[0] - 0.32).abs() < 1e-12);
        assert_eq!(sel.scores[1], 0.0);
    }

    #[test]
    fn mean_margin_averages_members() {
        let ens = table_ensemble(vec![
            vec![vec![0.9, 0.1]],
            vec![vec![0.5, 0.5]],
        ]);
        let sel = strategy_mean_margin(&ens, &index_pool(1), 1).unwrap();
        assert!((sel.scores[0] - 0.4).abs() < 1e-12);
    }

    #[test]
    fn balanced_margin_lambda_one_is_pure_margin() {
        let data = crate::learners::test_support::separable_clusters(20, 1.0, 51);
        let model = train_logreg(&data, &LogisticRegressionConfig::default()).unwrap();
        let pool = crate::learners::test_support::separable_clusters(30, 1.0, 52);
        let balanced = strategy_balanced_margin(&model, &pool, 10, 1.0).unwrap();
        let margin_sel = strategy_margin(&model, &pool, 10).unwrap();
        assert_eq!(balanced.indices, margin_sel.indices);
    }

    #[test]
    fn balanced_margin_lambda_zero_on_orthonormal_basis() {
        let features = Array2::from_shape_fn((4, 4), |(i, j)| f64::from(i == j));
        let pool = Dataset::from_dense(features, vec![0, 1, 0, 1]).unwrap();
        struct Flat;
        impl DiscriminantModel for Flat {
            fn num_classes(&self) -> usize {
                2
            }
            fn input_dim(&self) -> usize {
                4
            }
            fn score_into(&self, _z: Row<'_>, out: &mut [f64]) {
                out.copy_from_slice(&[0.5, 0.5]);
            }
            fn dump(&self) -> ModelDump {
                ModelDump {
                    kind: "flat".into(),
                    dims: vec![],
                    weights: vec![],
                }
            }
        }
        let sel = strategy_balanced_margin(&Flat, &pool, 3, 0.0).unwrap();
        assert_eq!(sel.indices, vec![0, 1, 2]);
    }

    #[test]
    fn balanced_margin_skips_near_duplicate() {
        // Candidates 0 and 1 sit on the margin (tiny margin score) and point
        // the same way; candidate 2 is farther from the boundary but points
        // elsewhere. With λ=0.5 the second pick must skip the duplicate.
        let model = TableModel {
            rows: vec![
                vec![0.50, 0.50],
                vec![0.505, 0.495],
                vec![0.60, 0.40],
                vec![0.95, 0.05],
            ],
        };
        // Feature 0 keys the score table; feature layout in 3-D so the first
        // coordinate also drives cosine similarity.
        let features = ndarray::array![
            [0.0, 1.0, 0.0],
            [1.0, 100.0, 0.0],
            [2.0, 0.0, 1.0],
            [3.0, 1.0, 1.0]
        ];
        let pool = Dataset::from_dense(features, vec![0, 1, 0, 1]).unwrap();
        let sel = strategy_balanced_margin(&model, &pool, 2, 0.5).unwrap();
        assert_eq!(sel.indices[0], 0);
        // Candidate 1 is nearly parallel to candidate 0 (cos ≈ 1), so the
        // diversity term pushes the second pick to candidate 2.
        assert_eq!(sel.indices[1], 2);
    }

    #[test]
    fn k_centers_picks_farthest_from_initial() {
        let to_xy = |deg: f64| {
            let r = deg.to_radians();
            [r.cos(), r.sin()]
        };
        let initial =
            Dataset::from_dense(Array2::from_shape_vec((1, 2), to_xy(0.0).to_vec()).unwrap(), vec![0])
                .unwrap();
        let flat: Vec<f64> = [10.0, 90.0, 170.0]
            .iter()
            .flat_map(|&d| to_xy(d).to_vec())
            .collect();
        let pool =
            Dataset::from_dense(Array2::from_shape_vec((3, 2), flat).unwrap(), vec![0, 1, 0])
                .unwrap();
        let sel = strategy_k_centers(&initial, &pool, 1).unwrap();
        assert_eq!(sel.indices, vec![2]);
        // 1 − cos(170°) ≈ 1.985.
        assert!((sel.scores[0] - (1.0 - 170f64.to_radians().cos())).abs() < 1e-12);
    }

    #[test]
    fn k_centers_picks_are_distinct_and_skip_duplicates() {
        let features = ndarray::array![
            [1.0, 0.0], // duplicate of the initial row
            [0.6, 0.8],
            [0.0, 1.0],
            [-1.0, 0.1]
        ];
        let initial = Dataset::from_dense(ndarray::array![[1.0, 0.0]], vec![0]).unwrap();
        let pool = Dataset::from_dense(features, vec![0, 1, 0, 1]).unwrap();
        let sel = strategy_k_centers(&initial, &pool, 3).unwrap();
        let mut uniq = sel.indices.clone();
        uniq.sort_unstable();
        uniq.dedup();
        assert_eq!(uniq.len(), 3);
        // The exact duplicate (distance 0) is the one left out.
        assert!(!sel.indices.contains(&0));
    }

    #[test]
    fn random_margin_mix_splits_ceil_floor() {
        let model = TableModel {
            rows: (0..10).map(|i| vec![0.5 + 0.04 * i as f64, 0.5 - 0.04 * i as f64]).collect(),
        };
        let pool = index_pool(10);
        let sel = strategy_random_margin_mix(&model, &pool, 2, 3).unwrap();
        assert_eq!(sel.indices.len(), 2);
        // Margin pick is the lowest-margin candidate (row 0).
        assert_eq!(sel.indices[0], 0);
        let one = strategy_random_margin_mix(&model, &pool, 1, 3).unwrap();
        assert_eq!(one.indices, vec![0]);
        let all = strategy_random_margin_mix(&model, &pool, 10, 3).unwrap();
        let mut sorted = all.indices.clone();
        sorted.sort_unstable();
        assert_eq!(sorted, (0..10).collect::<Vec<_>>());
    }

    #[test]
    fn random_margin_mix_prefixes_nest() {
        let margins = (0..20).map(|i| 0.04 * i as f64).collect::<Vec<_>>();
        let order = shuffled_order(20, 9);
        let big = random_margin_mix_from_parts(&margins, &order, 12);
        for small_b in [2usize, 4, 8] {
            let small = random_margin_mix_from_parts(&margins, &order, small_b);
            // Same margin picks up front, same shuffle suffix: the smaller
            // selection as a set is contained in the larger one.
            for i in &small.indices {
                assert!(big.indices.contains(i), "B={small_b}: {i} missing");
            }
        }
    }

    #[test]
    fn true_margin_selects_smallest_absolute_coordinate() {
        let features = ndarray::array![[0.3, 5.0], [-0.1, 2.0], [0.0, -7.0], [2.0, 0.0]];
        let pool = Dataset::from_dense(features, vec![0, 1, 0, 1]).unwrap();
        let oracle = |row: Row<'_>| row.get(0);
        let sel = strategy_true_margin(&oracle, &pool, 2);
        assert_eq!(sel.indices, vec![2, 1]);
        let all = strategy_true_margin(&oracle, &pool, 4);
        assert_eq!(all.indices.len(), 4);
    }

    #[test]
    fn true_margin_symmetric_points_rank_adjacent() {
        let features = ndarray::array![[1.0, 0.0], [0.01, 1.0], [-0.01, -1.0], [0.5, 0.5]];
        let pool = Dataset::from_dense(features, vec![0, 1, 0, 1]).unwrap();
        let oracle = |row: Row<'_>| row.get(0);
        let sel = strategy_true_margin(&oracle, &pool, 4);
        assert_eq!(&sel.indices[..2], &[1, 2]);
    }

    #[test]
    fn dispatcher_reports_missing_inputs() {
        let pool = index_pool(4);
        let ctx = SelectionContext::default();
        for strategy in [
            StrategyId::Margin,
            StrategyId::MinMargin,
            StrategyId::KCenters,
            StrategyId::TrueMargin,
        ] {
            let err = select_with(strategy, &pool, 2, &ctx).unwrap_err();
            assert!(
                err.to_string().contains(strategy.as_str()),
                "{strategy}: {err}"
            );
        }
        // Random needs nothing beyond the seed.
        assert!(select_with(StrategyId::Random, &pool, 2, &ctx).is_ok());
    }

    #[test]
    fn strategy_ids_round_trip_through_strings() {
        for id in StrategyId::ALL {
            assert_eq!(id.as_str().parse::<StrategyId>().unwrap(), id);
            let json = serde_json::to_string(&id).unwrap();
            assert_eq!(json, format!("\"{}\"", id.as_str()));
            let back: StrategyId = serde_json::from_str(&json).unwrap();
            assert_eq!(back, id);
        }
        let err = "margin-min".parse::<StrategyId>().unwrap_err();
        assert!(err.to_string().contains("min-margin"), "{err}");
    }

    #[test]
    fn ensemble_fit_trains_k_members() {
        let data = crate::learners::test_support::separable_clusters(20, 1.0, 61);
        let cfg = BootstrapConfig {
            num_models: 7,
            sample_fraction: 0.5,
        };
        let ens = Ensemble::fit(&data, &cfg, 11, &|d, _s| {
            Ok(Box::new(train_logreg(d, &LogisticRegressionConfig::default())?))
        })
        .unwrap();
        assert_eq!(ens.len(), 7);
        assert_eq!(ens.num_classes(), 2);
        assert_eq!(ens.config(), &cfg);
    }

    #[test]
    fn selected_scores_bound_unselected_scores() {
        let data = crate::learners::test_support::separable_clusters(25, 1.0, 63);
        let model = train_logreg(&data, &LogisticRegressionConfig::default()).unwrap();
        let pool = crate::learners::test_support::separable_clusters(60, 1.0, 64);
        let sel = strategy_margin(&model, &pool, 15).unwrap();
        let margins = margin_scores(&model, &pool).unwrap();
        let worst_selected = sel.scores.last().copied().unwrap();
        for (i, &m) in margins.iter().enumerate() {
            if !sel.indices.contains(&i) {
                assert!(m >= worst_selected - 1e-15);
            }
        }
    }
}
