//! Euler–Maruyama simulation of `dX = b(X) dt + dW`, `X_0 = 0`, with a
//! 1-periodic mean-zero drift, plus the path functionals used downstream.

use std::f64::consts::{PI, SQRT_2};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::spectral::{frequency, FourierCoeffs};

const TWO_PI: f64 = 2.0 * PI;

/// Upper bound on the number of Euler steps in a single path.
pub const MAX_STEPS: u64 = 1 << 40;

/// Exponent offset of the rough registry drift: coefficients decay like `⌈k/2⌉^{-(p + 0.51)}`.
pub const ROUGH_DECAY_OFFSET: f64 = 0.51;

/// Independent random stream `stream` of the generator seeded with `seed`.
///
/// ChaCha streams with distinct ids never overlap, so Monte Carlo replicates that
/// derive their stream id from their position in an experiment are independent.
pub fn rng_stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// A 1-periodic, mean-zero drift function.
#[derive(Debug, Clone, PartialEq)]
pub enum DriftSpec {
    Zero,
    /// `amplitude · sin(2πx)`, i.e. `amplitude/√2 · φ_1`.
    Sine { amplitude: f64 },
    /// Finite series `Σ c_k φ_k`.
    Fourier(FourierCoeffs),
}

impl DriftSpec {
    pub fn sine() -> Self {
        DriftSpec::Sine { amplitude: 1.0 }
    }

    /// Drift with coefficients `c_k = ⌈k/2⌉^{-(p + 0.51)} / √2` for `k ≤ n`: in Ḣ^p,
    /// but only just.
    pub fn rough(p: u32, n: usize) -> Result<Self> {
        let exponent = p as f64 + ROUGH_DECAY_OFFSET;
        let coeffs = (1..=n)
            .map(|k| (frequency(k) as f64).powf(-exponent) / SQRT_2)
            .collect();
        Ok(DriftSpec::Fourier(FourierCoeffs::new(coeffs)?))
    }

    /// Parses a registry name (`zero`, `sin`, `sin:<amplitude>`, `rough`,
    /// `rough:<p>`, `rough:<p>:<n>`) or, failing that, a coefficient file path.
    pub fn from_descriptor(descriptor: &str) -> Result<Self> {
        let mut parts = descriptor.split(':');
        let head = parts.next().unwrap_or_default();
        let args: Vec<&str> = parts.collect();
        let number = |s: &str| -> Result<f64> {
            s.parse::<f64>()
                .map_err(|_| Error::invalid(format!("bad number '{s}' in drift '{descriptor}'")))
        };
        let integer = |s: &str| -> Result<usize> {
            s.parse::<usize>()
                .map_err(|_| Error::invalid(format!("bad integer '{s}' in drift '{descriptor}'")))
        };
        match (head, args.as_slice()) {
            ("zero", []) => Ok(DriftSpec::Zero),
            ("sin", []) => Ok(DriftSpec::sine()),
            ("sin", [a]) => {
                let amplitude = number(a)?;
                if !amplitude.is_finite() {
                    return Err(Error::invalid("sine amplitude must be finite"));
                }
                Ok(DriftSpec::Sine { amplitude })
            }
            ("rough", []) => DriftSpec::rough(2, 64),
            ("rough", [p]) => DriftSpec::rough(integer(p)? as u32, 64),
            ("rough", [p, n]) => DriftSpec::rough(integer(p)? as u32, integer(n)?),
            _ if Path::new(descriptor).is_file() => {
                Ok(DriftSpec::Fourier(crate::io::read_coefficients(descriptor)?))
            }
            _ => Err(Error::invalid(format!(
                "unknown drift '{descriptor}' (expected zero, sin[:a], rough[:p[:n]] or a coefficient file)"
            ))),
        }
    }

    /// Short label used in reports.
    pub fn describe(&self) -> String {
        match self {
            DriftSpec::Zero => "zero".into(),
            DriftSpec::Sine { amplitude } => format!("sin:{amplitude}"),
            DriftSpec::Fourier(c) => format!("fourier[{}]", c.len()),
        }
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            DriftSpec::Zero => 0.0,
            DriftSpec::Sine { amplitude } => amplitude * (TWO_PI * x.rem_euclid(1.0)).sin(),
            DriftSpec::Fourier(c) => c.eval(x),
        }
    }

    /// `(b(x), b'(x))`.
    pub fn eval_with_derivative(&self, x: f64) -> (f64, f64) {
        match self {
            DriftSpec::Zero => (0.0, 0.0),
            DriftSpec::Sine { amplitude } => {
                let (s, c) = (TWO_PI * x.rem_euclid(1.0)).sin_cos();
                (amplitude * s, amplitude * TWO_PI * c)
            }
            DriftSpec::Fourier(c) => c.eval_with_derivative(x),
        }
    }

    /// Exact `∫₀ˣ b(y) dy` for `x ∈ [0, 1]`.
    pub fn antiderivative(&self, x: f64) -> f64 {
        match self {
            DriftSpec::Zero => 0.0,
            DriftSpec::Sine { amplitude } => amplitude * (1.0 - (TWO_PI * x).cos()) / TWO_PI,
            DriftSpec::Fourier(c) => c
                .as_slice()
                .chunks(2)
                .enumerate()
                .map(|(m, pair)| {
                    let w = TWO_PI * (m + 1) as f64;
                    let (s, co) = (w * x).sin_cos();
                    let sine = pair[0] * (1.0 - co) / w;
                    let cosine = pair.get(1).copied().unwrap_or(0.0) * s / w;
                    SQRT_2 * (sine + cosine)
                })
                .sum(),
        }
    }

    /// Coefficients against `φ_1..φ_n`. Fails if the drift has weight beyond mode `n`.
    pub fn coefficients(&self, n: usize) -> Result<FourierCoeffs> {
        match self {
            DriftSpec::Zero => Ok(FourierCoeffs::zeros(n)),
            DriftSpec::Sine { amplitude } => {
                let mut c = vec![0.0; n.max(2)];
                c[0] = amplitude / SQRT_2;
                FourierCoeffs::new(c)
            }
            DriftSpec::Fourier(c) => {
                if c.as_slice().iter().skip(n).any(|&v| v != 0.0) {
                    return Err(Error::invalid(format!(
                        "drift has {} modes, more than the truncation {n}",
                        c.len()
                    )));
                }
                Ok(c.resized(n))
            }
        }
    }
}

/// A uniformly time-stepped path `x_0 = 0, x_1, ..., x_n` (unwrapped, on ℝ).
#[derive(Debug, Clone, PartialEq)]
pub struct SamplePath {
    dt: f64,
    values: Vec<f64>,
}

impl SamplePath {
    pub fn new(dt: f64, values: Vec<f64>) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::invalid(format!("time step must be positive, got {dt}")));
        }
        if values.len() < 2 {
            return Err(Error::invalid("a path needs at least one step"));
        }
        if values[0] != 0.0 {
            return Err(Error::invalid(format!("path must start at 0, got {}", values[0])));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("path value at index {i}")));
        }
        Ok(Self { dt, values })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Number of steps n.
    pub fn steps(&self) -> usize {
        self.values.len() - 1
    }

    /// `T = n · dt`.
    pub fn horizon(&self) -> f64 {
        self.steps() as f64 * self.dt
    }

    pub fn time(&self, i: usize) -> f64 {
        i as f64 * self.dt
    }

    pub fn final_value(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    /// Every `factor`-th state: the same trajectory observed at step `factor · dt`.
    pub fn subsample(&self, factor: usize) -> Result<SamplePath> {
        if factor == 0 || !self.steps().is_multiple_of(factor) {
            return Err(Error::invalid(format!(
                "subsampling factor {factor} does not divide {} steps",
                self.steps()
            )));
        }
        SamplePath::new(
            self.dt * factor as f64,
            self.values.iter().copied().step_by(factor).collect(),
        )
    }
}

/// Number of Euler steps covering `[0, horizon]` with step `dt`.
pub fn step_count(horizon: f64, dt: f64) -> Result<u64> {
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(Error::invalid(format!("horizon must be positive, got {horizon}")));
    }
    if !(dt > 0.0 && dt.is_finite()) || dt > horizon {
        return Err(Error::invalid(format!("time step {dt} must lie in (0, T = {horizon}]")));
    }
    let ratio = (horizon / dt).round();
    if ratio > MAX_STEPS as f64 {
        return Err(Error::invalid(format!("T/dt = {ratio:e} exceeds the step limit {MAX_STEPS}")));
    }
    Ok((ratio as u64).max(1))
}

/// Runs `steps` Euler–Maruyama steps from `x0`, passing every state `x_0..=x_n` to `visit`.
///
/// Returns the final state. With `noise_on = false` the Brownian increments are
/// dropped and the scheme is the explicit Euler method for `x' = b(x)`.
pub fn euler_maruyama<R: Rng + ?Sized>(
    drift: &DriftSpec,
    x0: f64,
    steps: u64,
    dt: f64,
    rng: &mut R,
    noise_on: bool,
    mut visit: impl FnMut(f64),
) -> Result<f64> {
    let sqrt_dt = dt.sqrt();
    let mut x = x0;
    visit(x);
    for i in 0..steps {
        let b = drift.eval(x);
        if !b.is_finite() {
            return Err(Error::NonFinite(format!("drift at step {i}, x = {x}")));
        }
        let noise = if noise_on {
            let xi: f64 = rng.sample(StandardNormal);
            sqrt_dt * xi
        } else {
            0.0
        };
        x += b * dt + noise;
        visit(x);
    }
    Ok(x)
}

/// Simulates a path on `[0, horizon]`. Deterministic given `seed`.
pub fn simulate(
    drift: &DriftSpec,
    horizon: f64,
    dt: f64,
    seed: u64,
    noise_on: bool,
) -> Result<SamplePath> {
    simulate_with_rng(drift, horizon, dt, &mut rng_stream(seed, 0), noise_on)
}

pub fn simulate_with_rng<R: Rng + ?Sized>(
    drift: &DriftSpec,
    horizon: f64,
    dt: f64,
    rng: &mut R,
    noise_on: bool,
) -> Result<SamplePath> {
    let steps = step_count(horizon, dt)?;
    let mut values = Vec::with_capacity(steps as usize + 1);
    euler_maruyama(drift, 0.0, steps, dt, rng, noise_on, |x| values.push(x))?;
    SamplePath::new(dt, values)
}

/// `X_T / T`, the consistent estimator of the drift's mean.
pub fn estimate_mean_drift(path: &SamplePath) -> f64 {
    path.final_value() / path.horizon()
}

/// Grid winding times: `τ_k` is the first step time with `|x_i − x_{τ_{k−1}}| ≥ 1`.
pub fn winding_times(path: &SamplePath) -> Vec<f64> {
    let mut times = Vec::new();
    let mut anchor = path.values[0];
    for (i, &x) in path.values.iter().enumerate().skip(1) {
        if (x - anchor).abs() >= 1.0 {
            times.push(path.time(i));
            anchor = x;
        }
    }
    times
}

/// Streaming counterpart of [`winding_times`] for paths that are never stored.
#[derive(Debug, Clone)]
pub struct WindingCounter {
    dt: f64,
    anchor: Option<f64>,
    index: u64,
    times: Vec<f64>,
}

impl WindingCounter {
    pub fn new(dt: f64) -> Self {
        Self {
            dt,
            anchor: None,
            index: 0,
            times: Vec::new(),
        }
    }

    pub fn push(&mut self, x: f64) {
        match self.anchor {
            None => self.anchor = Some(x),
            Some(a) if (x - a).abs() >= 1.0 => {
                self.times.push(self.index as f64 * self.dt);
                self.anchor = Some(x);
            }
            Some(_) => {}
        }
        self.index += 1;
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn into_times(self) -> Vec<f64> {
        self.times
    }
}

/// Left-point Itô sum `Σ f(x_i)(x_{i+1} − x_i)` over consecutive states.
pub fn ito_sum(states: &[f64], f: &FourierCoeffs) -> f64 {
    states
        .windows(2)
        .map(|w| f.eval(w[0]) * (w[1] - w[0]))
        .sum()
}

/// `∫₀ᵀ f(X_t) dX_t` along the path.
pub fn ito_integral(path: &SamplePath, f: &FourierCoeffs) -> f64 {
    ito_sum(&path.values, f)
}
