//! Why the ensemble floor wins, measured in the setting where selection
//! quality has an exact answer.
//!
//! Points live on a half-circle of angles; the true boundary is at angle 0.
//! Each class contributes m labeled angles, an ensemble is formed from all
//! m x m bootstrap pairings (midpoints of a positive and a negative draw),
//! and a strategy selects B of the candidate angles. Selection quality is
//! the squared angle to the true boundary of the best selected candidate —
//! smaller is better, since that candidate pins the boundary most tightly.
//!
//! ```sh
//! cargo run --release --example halfsphere_comparison
//! ```

use minmargin::halfsphere::{run_comparison, TheoryConfig};
use minmargin::Result;

fn describe(cfg: &TheoryConfig) -> Result<()> {
    let s = run_comparison(cfg)?;
    println!(
        "m={:<4} B={:<6} pool={:<6} trials={:<5} margin {:.3e}+/-{:.1e}  \
         min-margin {:.3e}+/-{:.1e}  p={:.1e}{}",
        s.samples_per_class,
        s.batch_size,
        s.pool_size,
        s.trials,
        s.mean_margin,
        s.stderr_margin,
        s.mean_min_margin,
        s.stderr_min_margin,
        s.p_value,
        if s.in_regime { "  [in guaranteed regime]" } else { "" },
    );
    Ok(())
}

fn main() -> Result<()> {
    println!("mean squared angle to the true boundary of the best selected point:\n");

    // Margin selection ranks candidates by distance to the single fitted
    // boundary; min-margin ranks by distance to the *nearest* bootstrap
    // boundary. More boundaries = more places a batch can pin.
    for (m, batch, pool) in [(5, 50, 6_000), (10, 200, 24_000), (20, 400, 48_000)] {
        describe(&TheoryConfig {
            samples_per_class: m,
            batch_size: batch,
            pool_size: pool,
            trials: 2_000,
            seed: 5,
        })?;
    }

    // When the batch swallows the whole pool the two strategies select the
    // same set and tie exactly.
    println!("\nsaturated batch (B = pool size) ties exactly:");
    describe(&TheoryConfig {
        samples_per_class: 5,
        batch_size: 500,
        pool_size: 500,
        trials: 200,
        seed: 6,
    })?;

    println!(
        "\nthe guaranteed-improvement regime needs m >= 100, B >= 3m^2 ln m and\n\
         a pool of at least 12Bm candidates — far beyond desk scale, which is\n\
         why these runs report the trend plus a paired significance test\n\
         instead."
    );
    Ok(())
}
