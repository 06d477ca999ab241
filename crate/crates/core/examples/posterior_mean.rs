//! End-to-end posterior: simulate, estimate local time, Galerkin solve, then
//! report the error of the posterior mean, its spread and pointwise bands.
//!
//!     cargo run --release --example posterior_mean -- [T] [out.json]

use periodic_drift::io::write_posterior;
use periodic_drift::local_time::OccupationAccumulator;
use periodic_drift::posterior::{covariance_trace, sample_posterior};
use periodic_drift::sde::{euler_maruyama, rng_stream, DriftSpec};
use periodic_drift::{PosteriorGaussian, PriorSpec};

fn main() -> periodic_drift::Result<()> {
    let mut args = std::env::args().skip(1);
    let horizon: f64 = args.next().and_then(|a| a.parse().ok()).unwrap_or(500.0);
    let out = args.next();

    let drift = DriftSpec::sine();
    let dt = 1e-3;
    let mut acc = OccupationAccumulator::new(256, dt)?;
    euler_maruyama(&drift, 0.0, (horizon / dt) as u64, dt, &mut rng_stream(11, 0), true, |x| acc.push(x))?;
    let (lt, chi) = acc.finish()?;

    for eta in [1.0, 1e-4] {
        let spec = PriorSpec::new(2, eta, 1.0, 64)?;
        let post = PosteriorGaussian::fit(&spec, &lt, &chi)?;
        let truth = drift.coefficients(64)?;
        let err: f64 = post
            .mean()
            .as_slice()
            .iter()
            .zip(truth.as_slice())
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            .sqrt();
        println!("η = {eta:e}: ‖b̂ − b₀‖_L2 = {err:.4}, tr C_T = {:.4e}", covariance_trace(&post));
        for x in [0.125, 0.25, 0.5, 0.75] {
            let sd = post.pointwise_variance(x, 256).sqrt();
            println!(
                "  x = {x:<5}: b̂ = {:+.3} ± {:.3}, b₀ = {:+.3}",
                post.mean().eval(x),
                1.96 * sd,
                drift.eval(x)
            );
        }
        let draw = sample_posterior(&post, 5, 256)?;
        println!("  one posterior draw: b(1/4) = {:+.3}", draw.values()[64]);
        if let (Some(path), true) = (&out, eta == 1.0) {
            write_posterior(path, &post)?;
            println!("  wrote {path}");
        }
    }
    Ok(())
}
