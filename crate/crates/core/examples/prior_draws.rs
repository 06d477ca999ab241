// Karhunen–Loève draws from the Sobolev-type Gaussian prior and their
// Cameron–Martin norms. The RKHS norm of a truncated draw is `‖z‖ ≈ √N` for any
// prior parameters: draws are rougher than the Cameron–Martin space, and the norm
// grows without bound as the truncation is refined.
//
//     cargo run --release --example prior_draws

use periodic_drift::prior::{rkhs_norm, sample_prior, PriorSpec};
use periodic_drift::spectral::{sobolev_norm, synthesize};

pub fn main() -> periodic_drift::Result<()> {
    for p in [2, 3] {
        let spec = PriorSpec::new(p, 1.0, 1.0, 64)?;
        println!("p = {p}: λ_1 = {:.4e}, λ_64 = {:.4e}, tr C₀ = {:.4e}", spec.eigenvalue(1), spec.eigenvalue(64), spec.tail_trace(0));
        for seed in 0..3 {
            let c = sample_prior(&spec, seed);
            let grid = synthesize(&c, 256)?;
            println!(
                "  draw {seed}: sup = {:.4}, ‖·‖_L2 = {:.4}, ‖·‖_H^(p-1) = {:.4}, RKHS norm = {:.2}",
                grid.sup_norm(),
                c.l2_norm(),
                sobolev_norm(&c, p as f64 - 1.0),
                rkhs_norm(&c, &spec)?
            );
        }
    }
    Ok(())
}
