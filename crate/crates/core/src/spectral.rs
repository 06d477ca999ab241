//! Real Fourier basis on the circle `[0, 1)`.
//!
//! Mean-zero functions are stored as coefficients against
//!
//! ```text
//! φ_{2m-1}(x) = √2 sin(2π m x),   φ_{2m}(x) = √2 cos(2π m x),   m = 1, 2, ...
//! ```
//!
//! an orthonormal basis of the mean-zero subspace of L²(𝕋). Index `k` is
//! 1-based throughout and `⌈k/2⌉` is its frequency. Grid functions live on the
//! left-endpoint grid `x_j = j/M` with rectangle-rule quadrature, which is exact
//! for trigonometric polynomials of degree below `M`.

use std::f64::consts::{PI, SQRT_2};

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};

const TWO_PI: f64 = 2.0 * PI;

/// Frequency `⌈k/2⌉` of basis index `k`.
#[inline]
pub fn frequency(k: usize) -> usize {
    k.div_ceil(2)
}

/// `2π⌈k/2⌉`, the magnitude of `d/dx` on the pair containing `φ_k`.
#[inline]
pub fn wavenumber(k: usize) -> f64 {
    TWO_PI * frequency(k) as f64
}

/// Evaluates `φ_k(x)`. The constant mode `k = 0` is not part of the basis.
pub fn basis_eval(k: usize, x: f64) -> Result<f64> {
    if k == 0 {
        return Err(Error::invalid("basis index k = 0 is the excluded constant mode"));
    }
    let arg = TWO_PI * frequency(k) as f64 * x;
    Ok(if k.is_multiple_of(2) {
        SQRT_2 * arg.cos()
    } else {
        SQRT_2 * arg.sin()
    })
}

/// Evaluates `φ_k'(x)`.
pub fn basis_derivative(k: usize, x: f64) -> Result<f64> {
    if k == 0 {
        return Err(Error::invalid("basis index k = 0 is the excluded constant mode"));
    }
    let w = wavenumber(k);
    let arg = w * x;
    Ok(if k.is_multiple_of(2) {
        -w * SQRT_2 * arg.sin()
    } else {
        w * SQRT_2 * arg.cos()
    })
}

/// A zero-mean function `Σ c_k φ_k` on the circle.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierCoeffs {
    coeffs: Vec<f64>,
}

impl FourierCoeffs {
    pub fn new(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() < 2 {
            return Err(Error::invalid(format!(
                "need at least 2 Fourier coefficients, got {}",
                coeffs.len()
            )));
        }
        Ok(Self { coeffs })
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            coeffs: vec![0.0; n.max(2)],
        }
    }

    /// Unit weight on `φ_k` (1-based) in an `n`-dimensional truncation.
    pub fn unit(n: usize, k: usize) -> Result<Self> {
        if k == 0 || k > n {
            return Err(Error::invalid(format!("unit index {k} outside 1..={n}")));
        }
        let mut c = Self::zeros(n);
        c.coeffs[k - 1] = 1.0;
        Ok(c)
    }

    /// Truncation level N.
    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.coeffs
    }

    /// Coefficient `c_k` (1-based); zero beyond the truncation.
    pub fn get(&self, k: usize) -> f64 {
        if k == 0 {
            return 0.0;
        }
        self.coeffs.get(k - 1).copied().unwrap_or(0.0)
    }

    /// Keeps the first `n` coefficients, zero-padding if `n` exceeds the current length.
    pub fn resized(&self, n: usize) -> Self {
        let mut coeffs = self.coeffs.clone();
        coeffs.resize(n.max(2), 0.0);
        Self { coeffs }
    }

    pub fn l2_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_finite())
    }

    /// Highest frequency present, `⌈N/2⌉`.
    pub fn max_frequency(&self) -> usize {
        frequency(self.coeffs.len())
    }

    /// Evaluates the function at `x` (any real; the result is 1-periodic).
    pub fn eval(&self, x: f64) -> f64 {
        self.eval_with_derivative(x).0
    }

    /// Evaluates `(f(x), f'(x))` with one `sin_cos` call and an angle-addition recurrence.
    pub fn eval_with_derivative(&self, x: f64) -> (f64, f64) {
        let (s1, c1) = (TWO_PI * x.rem_euclid(1.0)).sin_cos();
        let (mut s, mut c) = (s1, c1);
        let mut value = 0.0;
        let mut slope = 0.0;
        for (m, pair) in self.coeffs.chunks(2).enumerate() {
            let w = TWO_PI * (m + 1) as f64;
            let a = pair[0];
            let b = pair.get(1).copied().unwrap_or(0.0);
            value += a * s + b * c;
            slope += w * (a * c - b * s);
            let next_s = s * c1 + c * s1;
            c = c * c1 - s * s1;
            s = next_s;
        }
        (SQRT_2 * value, SQRT_2 * slope)
    }
}

/// Values `g_j` on the uniform grid `x_j = j/M`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        check_grid_size(values.len())?;
        Ok(Self { values })
    }

    /// Samples `f` at the grid nodes.
    pub fn from_fn(m: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        check_grid_size(m)?;
        Ok(Self {
            values: (0..m).map(|j| f(j as f64 / m as f64)).collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn node(&self, j: usize) -> f64 {
        j as f64 / self.values.len() as f64
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// Rectangle-rule L² norm, `((1/M) Σ g_j²)^{1/2}`.
    pub fn l2_norm(&self) -> f64 {
        (self.values.iter().map(|v| v * v).sum::<f64>() / self.values.len() as f64).sqrt()
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
    }
}

fn check_grid_size(m: usize) -> Result<()> {
    if m < 4 || !m.is_power_of_two() {
        return Err(Error::invalid(format!(
            "grid size must be a power of two >= 4, got {m}"
        )));
    }
    Ok(())
}

/// Grid values of `Σ c_k φ_k` at `x_j = j/M`. Requires `M ≥ 2N`.
pub fn synthesize(c: &FourierCoeffs, m: usize) -> Result<GridFunction> {
    check_grid_size(m)?;
    if m < 2 * c.len() {
        return Err(Error::invalid(format!(
            "grid size {m} aliases {} coefficients (need M >= 2N)",
            c.len()
        )));
    }
    let mut spectrum = vec![Complex64::new(0.0, 0.0); m];
    for (idx, pair) in c.as_slice().chunks(2).enumerate() {
        let sine = pair[0];
        let cosine = pair.get(1).copied().unwrap_or(0.0);
        spectrum[idx + 1] = Complex64::new(SQRT_2 * cosine, -SQRT_2 * sine);
    }
    FftPlanner::new().plan_fft_inverse(m).process(&mut spectrum);
    Ok(GridFunction {
        values: spectrum.into_iter().map(|z| z.re).collect(),
    })
}

/// Rectangle-rule projection `c_k = (1/M) Σ_j g_j φ_k(x_j)` onto the first `n` modes.
/// Requires `n ≤ M/2 − 1`.
pub fn analyze(g: &GridFunction, n: usize) -> Result<FourierCoeffs> {
    let m = g.len();
    if n < 2 || n + 1 > m / 2 {
        return Err(Error::invalid(format!(
            "truncation {n} too large for grid size {m} (need 2 <= N <= M/2 - 1)"
        )));
    }
    let mut spectrum: Vec<Complex64> = g.values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(m).process(&mut spectrum);
    let scale = SQRT_2 / m as f64;
    let coeffs = (1..=n)
        .map(|k| {
            let f = spectrum[frequency(k)];
            if k % 2 == 0 {
                scale * f.re
            } else {
                -scale * f.im
            }
        })
        .collect();
    FourierCoeffs::new(coeffs)
}

/// Applies `d/dx` `order` times in coefficient space.
///
/// `φ_{2m-1}' = 2πm φ_{2m}` and `φ_{2m}' = −2πm φ_{2m-1}`. An odd-length input is
/// padded to even length so the cosine partner of the last sine mode is kept.
pub fn differentiate(c: &FourierCoeffs, order: usize) -> FourierCoeffs {
    let n = c.len() + c.len() % 2;
    let mut out = c.resized(n).into_vec();
    for _ in 0..order {
        for (m, pair) in out.chunks_mut(2).enumerate() {
            let w = TWO_PI * (m + 1) as f64;
            let (sine, cosine) = (pair[0], pair[1]);
            pair[0] = -w * cosine;
            pair[1] = w * sine;
        }
    }
    FourierCoeffs { coeffs: out }
}

/// Homogeneous Sobolev norm `(Σ_k (2π⌈k/2⌉)^{2s} c_k²)^{1/2}`; the L² norm at `s = 0`.
pub fn sobolev_norm(c: &FourierCoeffs, s: f64) -> f64 {
    c.as_slice()
        .iter()
        .enumerate()
        .map(|(i, ck)| wavenumber(i + 1).powf(2.0 * s) * ck * ck)
        .sum::<f64>()
        .sqrt()
}

/// Tabulated `φ_k(x_j)` and `φ_k'(x_j)` for `k = 1..=n` on the grid `x_j = j/M`.
///
/// Rows are basis indices, columns are grid nodes. Used for quadrature against
/// histogram-valued fields whose size need not be a power of two.
#[derive(Debug, Clone)]
pub struct BasisTable {
    n: usize,
    m: usize,
    values: Vec<f64>,
    derivatives: Vec<f64>,
}

impl BasisTable {
    pub fn new(n: usize, m: usize) -> Self {
        let mut values = vec![0.0; n * m];
        let mut derivatives = vec![0.0; n * m];
        for j in 0..m {
            let x = j as f64 / m as f64;
            for k in 1..=n {
                let w = wavenumber(k);
                let (s, c) = (w * x).sin_cos();
                let (v, d) = if k % 2 == 0 {
                    (SQRT_2 * c, -w * SQRT_2 * s)
                } else {
                    (SQRT_2 * s, w * SQRT_2 * c)
                };
                values[(k - 1) * m + j] = v;
                derivatives[(k - 1) * m + j] = d;
            }
        }
        Self {
            n,
            m,
            values,
            derivatives,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// `φ_k` at every node (1-based `k`).
    pub fn row(&self, k: usize) -> &[f64] {
        &self.values[(k - 1) * self.m..k * self.m]
    }

    /// `φ_k'` at every node (1-based `k`).
    pub fn derivative_row(&self, k: usize) -> &[f64] {
        &self.derivatives[(k - 1) * self.m..k * self.m]
    }

    /// `(Σ c_k φ_k(x_j), Σ c_k φ_k'(x_j))` at every node, for `c` of length ≤ n.
    pub fn eval(&self, c: &FourierCoeffs) -> (Vec<f64>, Vec<f64>) {
        let mut f = vec![0.0; self.m];
        let mut df = vec![0.0; self.m];
        for (i, &ck) in c.as_slice().iter().enumerate().take(self.n) {
            if ck == 0.0 {
                continue;
            }
            for (dst, src) in f.iter_mut().zip(self.row(i + 1)) {
                *dst += ck * src;
            }
            for (dst, src) in df.iter_mut().zip(self.derivative_row(i + 1)) {
                *dst += ck * src;
            }
        }
        (f, df)
    }
}
