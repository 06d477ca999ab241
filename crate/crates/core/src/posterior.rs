//! Gaussian posterior of the drift given the local-time data of a path.
//!
//! The posterior mean solves the weak problem `a(b̂, v) = r(v)` for all `v`, with
//!
//! ```text
//! a(u, v) = η∫u⁽ᵖ⁾v⁽ᵖ⁾ + ηκ∫uv + ∫uv L°
//! r(v)    = −½∫v′L° + ∫vχ°
//! ```
//!
//! Restricted to `span{φ_1..φ_N}` this is the SPD system `A m = r` with
//! `A = diag(1/λ_k) + M_L`, where the local-time mass matrix `M_L` and the load
//! are rectangle-rule quadratures on the local-time grid. The load never
//! differentiates the local time. The posterior covariance is `A⁻¹` on the
//! Galerkin subspace and the prior covariance on its complement.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::local_time::{ChiField, LocalTimeField};
use crate::prior::PriorSpec;
use crate::sde::rng_stream;
use crate::spectral::{sobolev_norm, synthesize, BasisTable, FourierCoeffs, GridFunction};

/// Variance floor below which prior-tail modes are dropped from samples.
pub const TAIL_VARIANCE_FLOOR: f64 = 1e-16;

/// Galerkin matrix and load vector.
#[derive(Debug, Clone, PartialEq)]
pub struct AssembledSystem {
    pub spec: PriorSpec,
    pub precision: DMatrix<f64>,
    pub load: DVector<f64>,
}

fn check_fields(lt: &LocalTimeField, chi: &ChiField) -> Result<()> {
    if lt.len() != chi.len() {
        return Err(Error::GridMismatch {
            left: lt.len(),
            right: chi.len(),
        });
    }
    Ok(())
}

/// Builds `A` and `r` for the first `spec.n` modes. Requires `M ≥ 2N + 2`.
pub fn assemble(spec: &PriorSpec, lt: &LocalTimeField, chi: &ChiField) -> Result<AssembledSystem> {
    spec.validate()?;
    check_fields(lt, chi)?;
    let n = spec.n;
    let m = lt.len();
    if m < 2 * n + 2 {
        return Err(Error::invalid(format!(
            "local-time grid M = {m} too coarse for N = {n} (need M >= 2N + 2)"
        )));
    }
    if let Some(j) = lt.values().iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite(format!("local time at node {j}")));
    }

    let table = BasisTable::new(n, m);
    let inv_m = 1.0 / m as f64;
    let basis = DMatrix::from_fn(n, m, |i, j| table.row(i + 1)[j]);
    let weighted = DMatrix::from_fn(n, m, |i, j| table.row(i + 1)[j] * lt.values()[j] * inv_m);
    let mut precision = &weighted * basis.transpose();
    precision = (&precision + precision.transpose()) * 0.5;
    for k in 1..=n {
        precision[(k - 1, k - 1)] += spec.precision(k);
    }

    let load = DVector::from_fn(n, |i, _| {
        let phi = table.row(i + 1);
        let dphi = table.derivative_row(i + 1);
        let mut acc = 0.0;
        for j in 0..m {
            acc += -0.5 * dphi[j] * lt.values()[j] + phi[j] * chi.values()[j] as f64;
        }
        acc * inv_m
    });

    Ok(AssembledSystem {
        spec: *spec,
        precision,
        load,
    })
}

fn factor(precision: &DMatrix<f64>) -> Result<Cholesky<f64, Dyn>> {
    if precision.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("Galerkin matrix".into()));
    }
    Cholesky::new(precision.clone())
        .ok_or_else(|| Error::NotPositiveDefinite("Cholesky factorization of the Galerkin matrix failed".into()))
}

/// Posterior mean coefficients: the Cholesky solution of `A m = r`.
pub fn solve_mean(sys: &AssembledSystem) -> Result<FourierCoeffs> {
    let chol = factor(&sys.precision)?;
    FourierCoeffs::new(chol.solve(&sys.load).iter().copied().collect())
}

/// Gaussian posterior: mean, Galerkin precision, and the prior tail beyond `spec.n`.
#[derive(Debug, Clone)]
pub struct PosteriorGaussian {
    spec: PriorSpec,
    mean: FourierCoeffs,
    precision: DMatrix<f64>,
    horizon: f64,
    chol: Cholesky<f64, Dyn>,
}

impl PosteriorGaussian {
    /// Validates symmetry and positive definiteness of `precision`.
    pub fn new(spec: PriorSpec, mean: FourierCoeffs, precision: DMatrix<f64>, horizon: f64) -> Result<Self> {
        spec.validate()?;
        let n = spec.n;
        if precision.nrows() != n || precision.ncols() != n || mean.len() != n {
            return Err(Error::invalid(format!(
                "posterior dimensions ({}x{}, mean {}) do not match N = {n}",
                precision.nrows(),
                precision.ncols(),
                mean.len()
            )));
        }
        let scale = precision.amax().max(f64::MIN_POSITIVE);
        let asym = (&precision - precision.transpose()).amax();
        if asym > 1e-10 * scale {
            return Err(Error::NotPositiveDefinite(format!("precision asymmetric by {asym:e}")));
        }
        let chol = factor(&precision)?;
        Ok(Self {
            spec,
            mean,
            precision,
            horizon,
            chol,
        })
    }

    pub fn from_system(sys: AssembledSystem, horizon: f64) -> Result<Self> {
        let chol = factor(&sys.precision)?;
        let mean = FourierCoeffs::new(chol.solve(&sys.load).iter().copied().collect())?;
        Ok(Self {
            spec: sys.spec,
            mean,
            precision: sys.precision,
            horizon,
            chol,
        })
    }

    /// Assemble and solve in one go.
    pub fn fit(spec: &PriorSpec, lt: &LocalTimeField, chi: &ChiField) -> Result<Self> {
        Self::from_system(assemble(spec, lt, chi)?, lt.horizon())
    }

    pub fn spec(&self) -> &PriorSpec {
        &self.spec
    }

    pub fn mean(&self) -> &FourierCoeffs {
        &self.mean
    }

    pub fn precision(&self) -> &DMatrix<f64> {
        &self.precision
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    /// `A⁻¹`, the covariance of the Galerkin coefficients.
    pub fn covariance(&self) -> DMatrix<f64> {
        self.chol.inverse()
    }

    /// `A^{-1/2} z` in the sense of a square root of `A⁻¹`: solves `Lᵀ y = z` with `A = LLᵀ`.
    pub fn correlate(&self, z: &DVector<f64>) -> DVector<f64> {
        self.chol
            .l()
            .transpose()
            .solve_upper_triangular(z)
            .expect("Cholesky factor has a positive diagonal")
    }

    /// Posterior variance of `b(x)`, including the prior tail up to `total_len` modes.
    pub fn pointwise_variance(&self, x: f64, total_len: usize) -> f64 {
        let n = self.spec.n;
        let phi = DVector::from_fn(n, |i, _| crate::spectral::basis_eval(i + 1, x).expect("k >= 1"));
        let galerkin = phi.dot(&self.chol.solve(&phi));
        let tail: f64 = (n + 1..=total_len)
            .map(|k| self.spec.eigenvalue(k) * crate::spectral::basis_eval(k, x).expect("k >= 1").powi(2))
            .sum();
        galerkin + tail
    }
}

/// One posterior draw in coefficient space: `mean + A^{-1/2} z` on the first `N`
/// modes and independent prior draws on modes `N+1..=total_len`.
pub fn sample_coefficients<R: Rng + ?Sized>(post: &PosteriorGaussian, rng: &mut R, total_len: usize) -> FourierCoeffs {
    let n = post.spec.n;
    let z = DVector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));
    let y = post.correlate(&z);
    let mut coeffs: Vec<f64> = post.mean.as_slice().iter().zip(y.iter()).map(|(m, d)| m + d).collect();
    for k in n + 1..=total_len {
        let z: f64 = rng.sample(StandardNormal);
        coeffs.push(post.spec.eigenvalue(k).sqrt() * z);
    }
    FourierCoeffs::new(coeffs).expect("N >= 2")
}

/// Number of modes a grid of size `m` can carry in posterior draws: the prior tail
/// is kept while `λ_k ≥ 1e-16` and `2k ≤ M`.
pub fn sample_length(spec: &PriorSpec, m: usize) -> usize {
    let mut len = spec.n;
    while 2 * (len + 1) <= m && spec.eigenvalue(len + 1) >= TAIL_VARIANCE_FLOOR {
        len += 1;
    }
    len
}

/// A posterior draw synthesized on the grid `x_j = j/M`.
pub fn sample_posterior(post: &PosteriorGaussian, seed: u64, m: usize) -> Result<GridFunction> {
    let mut rng = rng_stream(seed, 0);
    let c = sample_coefficients(post, &mut rng, sample_length(&post.spec, m));
    synthesize(&c, m)
}

/// Posterior spread `tr(C_T) = tr(A⁻¹) + Σ_{k>N} λ_k`.
pub fn covariance_trace(post: &PosteriorGaussian) -> f64 {
    post.covariance().trace() + post.spec.tail_trace(post.spec.n)
}

/// `‖mean_N − mean_{2N}‖_{H^p}` with the finer mean truncated to `N` modes: the
/// change in the leading coefficients when the Galerkin space is doubled.
pub fn galerkin_refinement_check(spec: &PriorSpec, lt: &LocalTimeField, chi: &ChiField) -> Result<f64> {
    let coarse = solve_mean(&assemble(spec, lt, chi)?)?;
    let fine = solve_mean(&assemble(&spec.with_truncation(2 * spec.n), lt, chi)?)?;
    let diff: Vec<f64> = coarse
        .as_slice()
        .iter()
        .zip(fine.as_slice())
        .map(|(a, b)| a - b)
        .collect();
    Ok(sobolev_norm(&FourierCoeffs::new(diff)?, spec.p as f64))
}

/// `−Φ_T(b; X) = −½(1/M)Σ L_j(b² + b′)(x_j) + (1/M)Σ χ_j b(x_j)`.
pub fn log_likelihood(c: &FourierCoeffs, lt: &LocalTimeField, chi: &ChiField) -> Result<f64> {
    check_fields(lt, chi)?;
    let m = lt.len();
    let table = BasisTable::new(c.len(), m);
    let (b, db) = table.eval(c);
    let total: f64 = (0..m)
        .map(|j| -0.5 * lt.values()[j] * (b[j] * b[j] + db[j]) + chi.values()[j] as f64 * b[j])
        .sum();
    Ok(total / m as f64)
}

/// Penalized least-squares objective
/// `(1/M)Σ[½b²(ηκ + L) + ½b′L − bχ] + ½η‖b⁽ᵖ⁾‖²`.
pub fn penalized_objective(c: &FourierCoeffs, lt: &LocalTimeField, chi: &ChiField, spec: &PriorSpec) -> Result<f64> {
    check_fields(lt, chi)?;
    let m = lt.len();
    let table = BasisTable::new(c.len(), m);
    let (b, db) = table.eval(c);
    let ek = spec.eta * spec.kappa;
    let data: f64 = (0..m)
        .map(|j| {
            let l = lt.values()[j];
            0.5 * b[j] * b[j] * (ek + l) + 0.5 * db[j] * l - b[j] * chi.values()[j] as f64
        })
        .sum::<f64>()
        / m as f64;
    Ok(data + 0.5 * spec.eta * sobolev_norm(c, spec.p as f64).powi(2))
}
