//! Nonparametric Bayesian estimation of the periodic drift of a scalar diffusion
//! `dX = b(X)dt + dW` from a finely sampled path.
//!
//! The Gaussian prior with precision `η((−Δ)^p + κI)` is conjugate for the
//! Girsanov likelihood, which depends on the path only through its periodic local
//! time and winding field. The posterior mean is the weak solution of an elliptic
//! problem, computed here by a spectral Galerkin solve in the real Fourier basis.
//!
//! Pipeline: [`sde::simulate`] → [`local_time::OccupationAccumulator`] →
//! [`posterior::assemble`] → [`posterior::PosteriorGaussian`].

pub mod error;
pub mod experiment;
pub mod io;
pub mod local_time;
pub mod posterior;
pub mod prior;
pub mod sde;
pub mod spectral;

pub use error::{Error, Result};
pub use local_time::{ChiField, LocalTimeField, OccupationAccumulator, StationaryLaw};
pub use posterior::{AssembledSystem, PosteriorGaussian};
pub use prior::PriorSpec;
pub use sde::{DriftSpec, SamplePath};
pub use spectral::{FourierCoeffs, GridFunction};

/// Version string embedded in experiment reports.
pub const VERSION: &str = concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION"));
