//! Runs a JSON experiment config (default `configs/scalar_demo.json`) and
//! prints the summary table.

use std::path::PathBuf;

use parareal_lab::experiment::{emit_table, run_experiment, ExperimentConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| {
            PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("configs/scalar_demo.json")
        });
    let config = ExperimentConfig::from_path(&path)?;
    let out = std::env::temp_dir().join("parareal-lab-example");
    let outcome = run_experiment(&config, &out, false)?;
    print!("{}", emit_table(&outcome.report.rows)?);
    for row in outcome.report.rows.iter().filter(|r| r.policy.is_some()) {
        println!(
            "p={} {} seed={} D={}: κ/k = {:.2}",
            row.p,
            row.policy.as_deref().unwrap_or(""),
            row.seed.unwrap_or(0),
            row.delay_bound.unwrap_or(0),
            row.kappa_over_k.unwrap_or(f64::NAN)
        );
    }
    println!(
        "all converged: {} (outputs in {})",
        outcome.all_converged,
        out.display()
    );
    Ok(())
}
