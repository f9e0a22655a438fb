//! Every selection strategy on one shared fixture, with a look at how much
//! each batch overlaps min-margin's and how widely it spreads.
//!
//! ```sh
//! cargo run --example strategy_tour
//! ```

use std::collections::HashSet;

use minmargin::data::{split, BootstrapConfig, Dataset, SplitSpec};
use minmargin::learners::{train_logreg, DiscriminantModel, LogisticRegressionConfig};
use minmargin::sampling::{select_with, Ensemble, SelectionContext, StrategyId};
use minmargin::seeding;
use minmargin::simulation::{gaussian_dataset, true_margin_distance};
use minmargin::Result;

fn train(data: &Dataset, _seed: u64) -> Result<Box<dyn DiscriminantModel>> {
    Ok(Box::new(train_logreg(
        data,
        &LogisticRegressionConfig::default(),
    )?))
}

/// Mean coordinate variance of the selected points: higher = more spread.
fn spread(pool: &Dataset, indices: &[usize]) -> f64 {
    let n = indices.len() as f64;
    let (mut mx, mut my) = (0.0, 0.0);
    for &i in indices {
        mx += pool.row(i).get(0) / n;
        my += pool.row(i).get(1) / n;
    }
    indices
        .iter()
        .map(|&i| {
            let (dx, dy) = (pool.row(i).get(0) - mx, pool.row(i).get(1) - my);
            (dx * dx + dy * dy) / n
        })
        .sum()
}

fn main() -> Result<()> {
    let mut rng = seeding::stream_rng(5, 0);
    let data = gaussian_dataset(8_040, 2.0, &mut rng)?;
    let (initial, pool, _) = split(
        &data,
        &SplitSpec {
            seed: 2,
            initial_size: 40,
            candidate_fraction: 1.0,
            stratify_initial: false,
        },
    )?;

    let base = train(&initial, 0)?;
    let ensemble = Ensemble::fit(
        &initial,
        &BootstrapConfig {
            num_models: 25,
            sample_fraction: 1.0,
        },
        9,
        &train,
    )?;
    let ctx = SelectionContext {
        base_model: Some(base.as_ref()),
        ensemble: Some(&ensemble),
        initial: Some(&initial),
        // The generator's boundary is x1 = 0, so the oracle distance is
        // |x1| — only synthetic data can offer this.
        true_margin: Some(&true_margin_distance),
        balanced_lambda: 0.5,
        seed: 17,
    };

    let batch = 50;
    let reference: HashSet<usize> = select_with(StrategyId::MinMargin, &pool, batch, &ctx)?
        .indices
        .into_iter()
        .collect();

    println!("batch size {batch} from a pool of {}:", pool.len());
    println!(
        "{:<18} {:>8} {:>16} {:>22}",
        "strategy", "spread", "vs min-margin", "first picks"
    );
    for id in StrategyId::ALL {
        let selection = select_with(id, &pool, batch, &ctx)?;
        let overlap = selection
            .indices
            .iter()
            .filter(|i| reference.contains(i))
            .count();
        let head: Vec<usize> = selection.indices.iter().take(4).copied().collect();
        println!(
            "{:<18} {:>8.3} {:>13}/{batch} {:>22}",
            id.as_str(),
            spread(&pool, &selection.indices),
            overlap,
            format!("{head:?}"),
        );
    }
    println!(
        "\nmargin's batch is a thin slab along one model's boundary (low spread);\n\
         min-margin covers every member's boundary; random covers everything."
    );
    Ok(())
}
