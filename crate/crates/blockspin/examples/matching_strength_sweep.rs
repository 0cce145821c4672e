//! Convergence of the two-block law toward its limit as N grows.
//!
//! Sweeps N over {100, 200, 400, 800} for the slowly decaying matching
//! schedule alpha_N = N^(-1/2) (N*alpha -> infinity: the blocks lock
//! together) and for the fast schedule alpha_N = N^(-3/2) (N*alpha -> 0:
//! the blocks decouple), printing well masses and total-variation distance
//! to the limit at each size. Artifacts (CSV, JSON report, SVG plots) land
//! in target/example-output/.

use blockspin::{run_experiment, ExperimentConfig, ScheduleSpec};
use std::path::PathBuf;

fn sweep(label: &str, rho: f64) -> blockspin::Result<()> {
    let schedule = ScheduleSpec::two_block(4.0, 1.0, rho)?;
    let mut config = ExperimentConfig::new(schedule, vec![100, 200, 400, 800]);
    config.output_dir = Some(PathBuf::from(format!(
        "target/example-output/matching_{label}"
    )));
    let outcome = run_experiment(&config)?;

    println!("-- {label} coupling (rho = {rho}) --");
    println!("{}", outcome.classification.note);
    for row in &outcome.rows {
        let masses: Vec<String> = row.well_masses.iter().map(|m| format!("{m:.4}")).collect();
        let tv = row.tv.map(|tv| format!("{tv:.4}")).unwrap_or_default();
        println!("N = {:>4}: wells [{}], tv {}", row.n, masses.join(", "), tv);
    }
    println!(
        "artifacts: {}\n",
        config.output_dir.as_ref().unwrap().display()
    );
    Ok(())
}

fn main() -> blockspin::Result<()> {
    sweep("slow", 0.5)?;
    sweep("fast", 1.5)?;
    Ok(())
}
