//! Law of large numbers and fluctuation scaling of the local time: sup|L/T − ρ|
//! and ‖L/T − ρ‖_{H^s} versus T.
//!
//!     cargo run --release --example occupation_study -- [replicates]

use periodic_drift::experiment::{run_fluctuation, run_lln, ExperimentConfig};

fn main() -> periodic_drift::Result<()> {
    let replicates = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(4);
    for drift in ["zero", "sin"] {
        let cfg = ExperimentConfig {
            drift: drift.into(),
            t_grid: vec![100.0, 400.0, 1600.0],
            replicates,
            seed: 9,
            ..ExperimentConfig::default()
        };
        let lln = run_lln(&cfg)?;
        let sup = lln.fit("sup_error").expect("fitted");
        println!("b = {drift}: median sup|L/T − ρ| {:?}, {}", sup.medians, lln.diagnostics);
        let fl = run_fluctuation(&cfg)?;
        for fit in &fl.fits {
            println!("  {:>13}: slope {:+.3}", fit.metric, fit.slope.unwrap_or(f64::NAN));
        }
    }
    Ok(())
}
