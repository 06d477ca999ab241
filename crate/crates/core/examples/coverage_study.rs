//! Empirical frequentist coverage of posterior L² balls and pointwise bands.
//! A diagnostic only: no coverage guarantee is claimed. With a strong prior
//! (η = 1) the shrinkage bias dominates at these horizons and coverage collapses;
//! a weak prior (η = 1e-4) lets the data speak.
//!
//!     cargo run --release --example coverage_study -- [replicates]

use periodic_drift::experiment::{run_coverage, ExperimentConfig};
use periodic_drift::PriorSpec;

fn main() -> periodic_drift::Result<()> {
    let replicates = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(4);
    for eta in [1.0, 1e-4] {
        let cfg = ExperimentConfig {
            prior: PriorSpec::new(2, eta, 1.0, 64)?,
            t_grid: vec![250.0, 1000.0],
            replicates,
            seed: 17,
            ..ExperimentConfig::default()
        };
        let report = run_coverage(&cfg)?;
        println!("η = {eta:e}, T = {:?}: {}", cfg.t_grid, report.diagnostics);
    }
    Ok(())
}
