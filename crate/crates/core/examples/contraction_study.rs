//! Posterior contraction: L² error and spread of the posterior versus T, with
//! log-log slope fits over replicates.
//!
//!     cargo run --release --example contraction_study -- [replicates] [out_dir]

use periodic_drift::experiment::{run_contraction, ExperimentConfig};
use periodic_drift::PriorSpec;

fn main() -> periodic_drift::Result<()> {
    let mut args = std::env::args().skip(1);
    let replicates = args.next().and_then(|a| a.parse().ok()).unwrap_or(4);
    let cfg = ExperimentConfig {
        prior: PriorSpec::new(2, 1e-4, 1.0, 64)?,
        t_grid: vec![100.0, 400.0, 1600.0],
        replicates,
        seed: 3,
        ..ExperimentConfig::default()
    };
    let report = run_contraction(&cfg)?;
    for fit in &report.fits {
        println!(
            "{:>9}: medians {:?}, slope {:.3} (target: l2_error −0.375, trace −0.75)",
            fit.metric,
            fit.medians.iter().map(|m| format!("{m:.4}")).collect::<Vec<_>>(),
            fit.slope.unwrap_or(f64::NAN)
        );
    }
    if let Some(dir) = args.next() {
        report.write(&dir)?;
        println!("wrote {dir}/contraction.csv and {dir}/summary.json");
    }
    Ok(())
}
