//! Euler–Maruyama simulation of dX = b(X)dt + dW, the mean-drift estimator and
//! winding times compared with the speed mass m[0,1].
//!
//!     cargo run --release --example simulate_windings -- [T] [dt]

use periodic_drift::local_time::stationary_density;
use periodic_drift::sde::{estimate_mean_drift, simulate, winding_times, DriftSpec};

fn main() -> periodic_drift::Result<()> {
    let args: Vec<f64> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let horizon = args.first().copied().unwrap_or(200.0);
    let dt = args.get(1).copied().unwrap_or(1e-3);

    for drift in [DriftSpec::Zero, DriftSpec::sine()] {
        let path = simulate(&drift, horizon, dt, 7, true)?;
        let times = winding_times(&path);
        let mean_increment = times.last().map_or(f64::NAN, |t| t / times.len() as f64);
        let m_mass = stationary_density(&drift, 1024)?.m_mass;
        println!(
            "{:>8}: X_T = {:+.3}, X_T/T = {:+.4}, {} windings, mean τ increment {:.3} (m[0,1] = {:.4})",
            drift.describe(),
            path.final_value(),
            estimate_mean_drift(&path),
            times.len(),
            mean_increment,
            m_mass
        );
    }
    Ok(())
}
