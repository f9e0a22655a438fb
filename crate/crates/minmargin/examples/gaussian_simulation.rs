//! Learning curves on the two-Gaussian task: label a batch of B candidates
//! with each strategy, retrain, and compare test accuracy over replicated
//! draws. A scaled-down version of the full study (which defaults to 500
//! replicates and an 8000-candidate pool).
//!
//! ```sh
//! cargo run --release --example gaussian_simulation
//! ```

use minmargin::sampling::StrategyId;
use minmargin::simulation::{run_simulation, GaussianSimConfig};
use minmargin::Result;

fn main() -> Result<()> {
    let cfg = GaussianSimConfig {
        replicates: 25,
        pool_size: 2_000,
        test_size: 4_000,
        batch_sizes: vec![10, 50, 200, 800],
        strategies: vec![
            StrategyId::Random,
            StrategyId::Margin,
            StrategyId::MinMargin,
            StrategyId::Committee,
            StrategyId::MeanMargin,
            StrategyId::TrueMargin,
        ],
        ..GaussianSimConfig::default()
    };
    println!(
        "two Gaussians at separation {} (best possible accuracy ~0.841), \
         {} labeled to start,\n{} candidates, {} test points, {} replicates\n",
        cfg.mean_separation, cfg.initial_size, cfg.pool_size, cfg.test_size, cfg.replicates
    );

    let result = run_simulation(&cfg)?;

    print!("{:<14}", "strategy");
    for &b in &cfg.batch_sizes {
        print!(" {:>16}", format!("B={b}"));
    }
    println!();
    for &strategy in &cfg.strategies {
        print!("{:<14}", strategy.as_str());
        for &b in &cfg.batch_sizes {
            let cell = result
                .cells
                .iter()
                .find(|c| c.strategy == strategy && c.batch_size == b)
                .expect("cell exists");
            print!(
                " {:>16}",
                format!("{:.4}+/-{:.4}", cell.mean_accuracy, cell.stderr)
            );
        }
        println!();
    }
    println!(
        "\nmargin ~ min-margin at small B; the ensemble floor pulls ahead as the\n\
         batch grows and a single model's narrow low-margin band runs out of\n\
         informative points. mean-margin averages the ensemble first and loses\n\
         the diversity signal."
    );
    Ok(())
}
