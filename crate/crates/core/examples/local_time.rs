//! Periodic local time, winding field and stationary law; the local time
//! normalized by T approaches the invariant density ρ.
//!
//!     cargo run --release --example local_time -- [out_dir]

use periodic_drift::io::{write_field, write_stationary_law};
use periodic_drift::local_time::{estimate_local_time, chi_field, stationary_density, sup_deviation};
use periodic_drift::sde::{simulate, DriftSpec};

fn main() -> periodic_drift::Result<()> {
    let out_dir = std::env::args().nth(1);
    let drift = DriftSpec::sine();
    let m = 64;
    let law = stationary_density(&drift, m)?;
    println!("stationary law: ρ(0) = {:.4}, ρ(1/2) = {:.4}, m[0,1] = {:.6}", law.rho[0], law.rho[m / 2], law.m_mass);

    for horizon in [50.0, 200.0, 800.0] {
        let path = simulate(&drift, horizon, 1e-3, 3, true)?;
        let lt = estimate_local_time(&path, m)?;
        let chi = chi_field(&path, m)?;
        println!(
            "T = {horizon:>5}: sup|L/T − ρ| = {:.4}, mean χ = {:+.3} vs X_T = {:+.3}",
            sup_deviation(&lt, &law)?,
            chi.mean(),
            path.final_value()
        );
        if let Some(dir) = &out_dir {
            write_field(format!("{dir}/field_T{horizon}.csv"), &lt, &chi)?;
        }
    }
    if let Some(dir) = &out_dir {
        write_stationary_law(format!("{dir}/stationary.csv"), &law)?;
        println!("wrote CSV files to {dir}");
    }
    Ok(())
}
