// Real Fourier basis: synthesis, analysis, derivatives and Sobolev norms.
//
//     cargo run --release --example spectral_basics

use periodic_drift::spectral::{analyze, differentiate, sobolev_norm, synthesize, FourierCoeffs};

pub fn main() -> periodic_drift::Result<()> {
    // b(x) = sin(2πx) + 0.3 cos(4πx) = (1/√2)φ_1 + (0.3/√2)φ_4
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let c = FourierCoeffs::new(vec![s, 0.0, 0.0, 0.3 * s])?;
    let grid = synthesize(&c, 64)?;
    println!("b(0.25) = {:.6} (grid), {:.6} (direct)", grid.values()[16], c.eval(0.25));
    println!("grid L2 = {:.12}, coefficient norm = {:.12}", grid.l2_norm(), c.l2_norm());

    let back = analyze(&grid, 8)?;
    println!("analyzed coefficients: {:?}", back.as_slice().iter().map(|v| (v * 1e12).round() / 1e12).collect::<Vec<_>>());

    let db = differentiate(&c, 1);
    println!("b'(0) = {:.6} (expected 2π = {:.6})", db.eval(0.0), 2.0 * std::f64::consts::PI);
    for order in [0.0, 1.0, 2.0] {
        println!("‖b‖_H^{order} = {:.4}", sobolev_norm(&c, order));
    }
    Ok(())
}
