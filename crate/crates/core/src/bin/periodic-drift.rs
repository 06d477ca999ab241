//! Command-line front end: simulate, local time, posterior, experiments.
//!
//! Exit codes: 0 success, 2 configuration/validation error, 3 numerical failure,
//! 4 experiment finished with failed rows.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use periodic_drift::experiment::{self, ExperimentConfig, ExperimentKind};
use periodic_drift::local_time::OccupationAccumulator;
use periodic_drift::{io, sde, Error, PosteriorGaussian, PriorSpec};

#[derive(Parser)]
#[command(name = "periodic-drift", version, about = "Bayesian estimation of a periodic diffusion drift")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate dX = b(X)dt + dW from X_0 = 0 and write a `t,x` CSV.
    Simulate {
        /// zero | sin[:a] | rough[:p[:n]] | path to a coefficient file
        #[arg(long)]
        drift: String,
        #[arg(long = "T")]
        horizon: f64,
        #[arg(long)]
        dt: f64,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Estimate the periodic local time and winding field of a path.
    Localtime {
        #[arg(long)]
        path: PathBuf,
        #[arg(long)]
        grid: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compute the Gaussian posterior of the drift and write it as JSON.
    Posterior {
        #[arg(long)]
        path: PathBuf,
        #[arg(long)]
        p: u32,
        #[arg(long)]
        eta: f64,
        #[arg(long)]
        kappa: f64,
        #[arg(long)]
        nbasis: usize,
        #[arg(long)]
        grid: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a simulation study and write `<name>.csv` plus `summary.json`.
    Experiment {
        /// contraction | lln | fluctuation | coverage
        name: String,
        #[arg(long)]
        config: PathBuf,
        #[arg(long = "out-dir")]
        out_dir: PathBuf,
    },
}

fn exit_code(err: &Error) -> u8 {
    if err.is_numerical() {
        3
    } else {
        2
    }
}

fn run(cli: Cli) -> Result<u8, Error> {
    match cli.command {
        Command::Simulate {
            drift,
            horizon,
            dt,
            seed,
            out,
        } => {
            let drift = sde::DriftSpec::from_descriptor(&drift)?;
            let path = sde::simulate(&drift, horizon, dt, seed, true)?;
            io::write_path(out, &path)?;
        }
        Command::Localtime { path, grid, out } => {
            let path = io::read_path(path)?;
            let mut acc = OccupationAccumulator::new(grid, path.dt())?;
            path.values().iter().for_each(|&x| acc.push(x));
            let (lt, chi) = acc.finish()?;
            io::write_field(out, &lt, &chi)?;
        }
        Command::Posterior {
            path,
            p,
            eta,
            kappa,
            nbasis,
            grid,
            out,
        } => {
            let spec = PriorSpec::new(p, eta, kappa, nbasis)?;
            let path = io::read_path(path)?;
            let mut acc = OccupationAccumulator::new(grid, path.dt())?;
            path.values().iter().for_each(|&x| acc.push(x));
            let (lt, chi) = acc.finish()?;
            let post = PosteriorGaussian::fit(&spec, &lt, &chi)?;
            io::write_posterior(out, &post)?;
        }
        Command::Experiment { name, config, out_dir } => {
            let kind: ExperimentKind = name.parse()?;
            let mut cfg = ExperimentConfig::load(config)?;
            cfg.output_dir = out_dir.to_string_lossy().into_owned();
            let report = experiment::run(kind, &cfg)?;
            report.write(&out_dir)?;
            if report.failures > 0 {
                eprintln!("{} of {} rows failed", report.failures, report.rows.len());
                return Ok(4);
            }
        }
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code(&err))
        }
    }
}
