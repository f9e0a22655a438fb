//! The closed-form checks behind the half-sphere analysis, each verified
//! numerically: a decay inequality evaluated exactly, the expected minimum
//! deviation cross-checked by Monte-Carlo, and the selection-bias formula
//! for single-model margin sampling.
//!
//! ```sh
//! cargo run --release --example bound_checks
//! ```

use minmargin::halfsphere::{run_theory, TheoryRunConfig};
use minmargin::Result;

fn main() -> Result<()> {
    let cfg = TheoryRunConfig {
        min_deviation_trials: 200_000,
        margin_bias_trials: 200_000,
        ..TheoryRunConfig::default()
    };
    let report = run_theory(&cfg)?;

    println!("decay inequality (exact evaluation at B = ceil(3 m^2 ln m)):");
    for d in &report.decay {
        println!(
            "  m={:<5} B={:<9} lhs {:.3e} <= rhs {:.3e}  holds: {}",
            d.samples_per_class, d.batch_size, d.lhs, d.rhs, d.holds
        );
    }

    println!("\nexpected minimum squared deviation (closed form vs bound vs Monte-Carlo):");
    for d in &report.min_deviation {
        println!(
            "  m={:<4} closed {:.6e} <= bound {:.6e}: {}   MC {:.6e}+/-{:.1e} within 3 stderr: {}",
            d.samples_per_class, d.closed_form, d.bound, d.holds, d.mc_estimate, d.mc_stderr,
            d.mc_within_3_stderr
        );
    }

    println!("\nexpected deviation of single-model margin selection (selection bias):");
    for b in &report.margin_bias {
        println!(
            "  m={:<4} closed {:.6e}   MC {:.6e}+/-{:.1e}   relative error {:.2}%",
            b.samples_per_class,
            b.closed_form,
            b.mc_estimate,
            b.mc_stderr,
            100.0 * b.relative_error
        );
    }

    println!("\nthe same report as CSV (what the `theory` subcommand writes):\n");
    print!("{}", report.to_csv());
    Ok(())
}
