//! Loading data from the three supported sources: dense CSV, sparse LIBSVM
//! text, and the built-in two-Gaussian generator.
//!
//! ```sh
//! cargo run --example ingest
//! ```

use minmargin::data::{load_csv, load_libsvm, Dataset};
use minmargin::seeding;
use minmargin::simulation::gaussian_dataset;
use minmargin::Result;

fn describe(name: &str, data: &Dataset) {
    println!(
        "{name}: {} rows x {} features, {} classes, counts {:?}, stored {}",
        data.len(),
        data.dim(),
        data.num_classes(),
        data.class_counts(),
        if data.features().is_dense() { "dense" } else { "sparse" },
    );
}

fn main() -> Result<()> {
    let dir = std::env::temp_dir();

    // CSV: one row per example, features plus a label column. Integer
    // labels under 2^20 are used as class ids directly; anything else
    // (including strings such as magic04's g/h) maps by first appearance.
    let csv_path = dir.join("ingest_demo.csv");
    std::fs::write(
        &csv_path,
        "x1,x2,class\n1.5,0.2,g\n0.3,2.2,h\n2.0,0.1,g\n0.5,1.9,h\n1.8,0.4,g\n",
    )
    .map_err(|e| minmargin::Error::io(&csv_path, e))?;
    let csv = load_csv(&csv_path, 2, true)?;
    describe("csv   ", &csv);
    println!("        first row: ({}, {}) -> class {}", csv.row(0).get(0), csv.row(0).get(1), csv.label(0));

    // LIBSVM: `label index:value ...` with 1-based indices. Files whose
    // dimensionality stays small are densified; this one keeps a column
    // at index 5000, so it stays sparse.
    let libsvm_path = dir.join("ingest_demo.libsvm");
    std::fs::write(
        &libsvm_path,
        "+1 1:0.5 5000:1.0\n-1 2:0.25\n+1 1:1.5 3:0.75\n-1 5000:2.0\n",
    )
    .map_err(|e| minmargin::Error::io(&libsvm_path, e))?;
    let sparse = load_libsvm(&libsvm_path)?;
    describe("libsvm", &sparse);

    // Synthetic: two unit-variance Gaussians at +/- separation/2 on the
    // first axis, fair-coin labels. The same generator backs the
    // simulation and the `dataset.kind = "gaussian"` source.
    let mut rng = seeding::stream_rng(7, 0);
    let gauss = gaussian_dataset(10_000, 2.0, &mut rng)?;
    describe("gauss ", &gauss);

    Ok(())
}
