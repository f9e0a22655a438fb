//! The core capability: score every candidate by its *minimum* margin over
//! a bootstrap ensemble and label the B lowest.
//!
//! A single model's low-margin band hugs that model's decision boundary —
//! which may be badly placed when the labeled set is small. The ensemble
//! floor keeps a candidate "interesting" if *any* resampled model is unsure
//! about it, so the batch spreads across every plausible boundary.
//!
//! ```sh
//! cargo run --example batch_selection
//! ```

use minmargin::data::{split, BootstrapConfig, Dataset, SplitSpec};
use minmargin::learners::{train_logreg, DiscriminantModel, LogisticRegressionConfig};
use minmargin::sampling::{margin, min_margin_score, strategy_min_margin, Ensemble};
use minmargin::seeding;
use minmargin::simulation::gaussian_dataset;
use minmargin::Result;

fn train(data: &Dataset, _seed: u64) -> Result<Box<dyn DiscriminantModel>> {
    Ok(Box::new(train_logreg(
        data,
        &LogisticRegressionConfig::default(),
    )?))
}

fn main() -> Result<()> {
    let mut rng = seeding::stream_rng(3, 0);
    let data = gaussian_dataset(4_040, 2.0, &mut rng)?;
    let (initial, pool, _test) = split(
        &data,
        &SplitSpec {
            seed: 1,
            initial_size: 40,
            candidate_fraction: 1.0,
            stratify_initial: false,
        },
    )?;

    // K models on stratified bootstrap resamples of the 40 labeled points.
    let config = BootstrapConfig {
        num_models: 25,
        sample_fraction: 1.0,
    };
    let ensemble = Ensemble::fit(&initial, &config, 11, &train)?;
    println!(
        "ensemble: {} members trained on resamples of {} labeled points",
        ensemble.len(),
        initial.len()
    );

    let batch = strategy_min_margin(&ensemble, &pool, 10)?;
    println!("\nselected batch (best first):");
    println!("{:>6} {:>8} {:>8} {:>12} {:>14}", "index", "x1", "x2", "floor", "member range");
    for (&i, &score) in batch.indices.iter().zip(&batch.scores) {
        let row = pool.row(i);
        let margins: Vec<f64> = ensemble
            .models()
            .iter()
            .map(|m| margin(m.as_ref(), row).unwrap())
            .collect();
        let lo = margins.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = margins.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        println!(
            "{i:>6} {:>8.3} {:>8.3} {score:>12.6} {:>6.3}..{:<6.3}",
            row.get(0),
            row.get(1),
            lo,
            hi
        );
    }

    // The score is a floor: never above any single member's margin.
    let probe = pool.row(batch.indices[0]);
    let floor = min_margin_score(&ensemble, probe)?;
    let tightest = ensemble
        .models()
        .iter()
        .map(|m| margin(m.as_ref(), probe).unwrap())
        .fold(f64::INFINITY, f64::min);
    println!("\nfloor == tightest member margin: {}", floor == tightest);
    Ok(())
}
