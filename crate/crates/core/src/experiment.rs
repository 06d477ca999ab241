//! Simulation studies: local-time LLN, fluctuation scaling, posterior contraction
//! and an empirical coverage diagnostic.
//!
//! Every `(T, replicate)` cell simulates its own path on an independent stream
//! `(seed, t_index << 32 | replicate)`, so results do not depend on scheduling.
//! Cells run on the rayon pool; collection is ordered and the report is assembled
//! by a single writer. A failing cell is recorded and excluded from the fits.

use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{Error, Result};
use crate::io::{fmt_f64, write_table};
use crate::local_time::{fluctuation_field, grid_sobolev_norm, stationary_density, sup_deviation, ChiField, LocalTimeField, OccupationAccumulator};
use crate::posterior::{covariance_trace, sample_coefficients, PosteriorGaussian};
use crate::prior::PriorSpec;
use crate::sde::{euler_maruyama, rng_stream, step_count, DriftSpec};
use crate::spectral::{sobolev_norm, FourierCoeffs};

/// Posterior draws per replicate in the coverage study.
pub const COVERAGE_DRAWS: usize = 500;
/// Number of equispaced points `x = j/8` for pointwise bands.
pub const BAND_POINTS: usize = 8;
/// Sobolev orders for the fluctuation study.
pub const FLUCTUATION_ORDERS: [f64; 3] = [0.0, 0.25, 0.4];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    Contraction,
    Lln,
    Fluctuation,
    Coverage,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::Contraction => "contraction",
            Self::Lln => "lln",
            Self::Fluctuation => "fluctuation",
            Self::Coverage => "coverage",
        }
    }
}

impl FromStr for ExperimentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "contraction" => Ok(Self::Contraction),
            "lln" => Ok(Self::Lln),
            "fluctuation" => Ok(Self::Fluctuation),
            "coverage" => Ok(Self::Coverage),
            other => Err(Error::invalid(format!(
                "unknown experiment {other:?} (expected contraction, lln, fluctuation or coverage)"
            ))),
        }
    }
}

/// Experiment configuration; the JSON keys are the field names below.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub drift: String,
    pub prior: PriorSpec,
    #[serde(rename = "T_grid")]
    pub t_grid: Vec<f64>,
    pub dt: f64,
    #[serde(rename = "M")]
    pub m: usize,
    pub replicates: usize,
    pub seed: u64,
    pub output_dir: String,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            drift: "sin".into(),
            prior: PriorSpec::default(),
            t_grid: vec![250.0, 1000.0, 4000.0],
            dt: 1e-3,
            m: 256,
            replicates: 50,
            seed: 0,
            output_dir: "out".into(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::invalid(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path.as_ref())?)
    }

    pub fn validate(&self) -> Result<()> {
        self.prior.validate()?;
        DriftSpec::from_descriptor(&self.drift)?;
        if self.t_grid.is_empty() {
            return Err(Error::invalid("T_grid is empty"));
        }
        if self.t_grid.iter().any(|&t| !(t > 0.0 && t.is_finite())) {
            return Err(Error::invalid("T_grid entries must be positive"));
        }
        if self.t_grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid("T_grid must be strictly increasing"));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::invalid(format!("dt must be positive, got {}", self.dt)));
        }
        for &t in &self.t_grid {
            step_count(t, self.dt)?;
        }
        if self.m < 4 {
            return Err(Error::invalid(format!("M must be >= 4, got {}", self.m)));
        }
        if self.replicates == 0 {
            return Err(Error::invalid("replicates must be >= 1"));
        }
        Ok(())
    }

    fn drift(&self) -> Result<DriftSpec> {
        DriftSpec::from_descriptor(&self.drift)
    }

    fn stream(t_index: usize, replicate: usize) -> u64 {
        ((t_index as u64) << 32) | replicate as u64
    }
}

/// One `(T, replicate)` cell. `values` is aligned with [`RateReport::metrics`] and
/// empty when the cell failed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportRow {
    #[serde(rename = "T")]
    pub t: f64,
    pub replicate: usize,
    pub values: Vec<f64>,
    pub error: Option<String>,
    /// Seconds spent on the cell. Kept out of every output file so that reruns are byte-identical.
    #[serde(skip)]
    pub wall_time: f64,
}

/// OLS fit of `log median(metric)` against `log T`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SlopeFit {
    pub metric: String,
    pub medians: Vec<f64>,
    pub slope: Option<f64>,
    pub std_error: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RateReport {
    pub experiment: String,
    pub version: String,
    pub config: ExperimentConfig,
    pub metrics: Vec<String>,
    pub fits: Vec<SlopeFit>,
    pub failures: usize,
    pub diagnostics: serde_json::Value,
    #[serde(skip)]
    pub rows: Vec<ReportRow>,
}

impl RateReport {
    pub fn metric_index(&self, name: &str) -> Option<usize> {
        self.metrics.iter().position(|m| m == name)
    }

    pub fn fit(&self, metric: &str) -> Option<&SlopeFit> {
        self.fits.iter().find(|f| f.metric == metric)
    }

    /// Successful values of `metric` at horizon index `t_index`.
    pub fn values_at(&self, metric: &str, t_index: usize) -> Vec<f64> {
        let Some(i) = self.metric_index(metric) else {
            return Vec::new();
        };
        let t = self.config.t_grid[t_index];
        self.rows
            .iter()
            .filter(|r| r.t == t && r.error.is_none())
            .map(|r| r.values[i])
            .collect()
    }

    pub fn summary_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    /// Writes `<experiment>.csv` and `summary.json` into `dir`.
    pub fn write(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir)?;
        let mut header = vec!["T", "replicate"];
        header.extend(self.metrics.iter().map(String::as_str));
        header.push("status");
        let rows: Vec<Vec<String>> = self
            .rows
            .iter()
            .map(|r| {
                let mut out = vec![fmt_f64(r.t), r.replicate.to_string()];
                match &r.error {
                    None => {
                        out.extend(r.values.iter().map(|&v| fmt_f64(v)));
                        out.push("ok".into());
                    }
                    Some(e) => {
                        out.extend(self.metrics.iter().map(|_| String::new()));
                        out.push(e.clone());
                    }
                }
                out
            })
            .collect();
        write_table(dir.join(format!("{}.csv", self.experiment)), &header, &rows)?;
        std::fs::write(dir.join("summary.json"), self.summary_json()?)?;
        Ok(())
    }

    pub fn output_dir(&self) -> PathBuf {
        PathBuf::from(&self.config.output_dir)
    }
}

/// Median of a sample (mean of the two central values for even sizes).
pub fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// OLS slope and its standard error. The standard error needs at least three points.
pub fn ols_slope(x: &[f64], y: &[f64]) -> Option<(f64, Option<f64>)> {
    let n = x.len();
    if n < 2 || n != y.len() {
        return None;
    }
    let mx = x.iter().sum::<f64>() / n as f64;
    let my = y.iter().sum::<f64>() / n as f64;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let se = (n > 2).then(|| {
        let ssr: f64 = x
            .iter()
            .zip(y)
            .map(|(a, b)| (b - my - slope * (a - mx)).powi(2))
            .sum();
        (ssr / (n - 2) as f64 / sxx).sqrt()
    });
    Some((slope, se))
}

/// Simulates one path of length `horizon` and returns the local time and winding
/// field on every grid in `grids`.
pub fn observe<R: Rng + ?Sized>(
    drift: &DriftSpec,
    horizon: f64,
    dt: f64,
    grids: &[usize],
    rng: &mut R,
) -> Result<Vec<(LocalTimeField, ChiField)>> {
    let steps = step_count(horizon, dt)?;
    let mut accs = grids
        .iter()
        .map(|&m| OccupationAccumulator::new(m, dt))
        .collect::<Result<Vec<_>>>()?;
    euler_maruyama(drift, 0.0, steps, dt, rng, true, |x| {
        for acc in accs.iter_mut() {
            acc.push(x);
        }
    })?;
    accs.iter().map(OccupationAccumulator::finish).collect()
}

fn run_cells(
    cfg: &ExperimentConfig,
    cell: impl Fn(usize, &mut rand_chacha::ChaCha8Rng) -> Result<Vec<f64>> + Sync,
) -> Vec<ReportRow> {
    let cells: Vec<(usize, usize)> = (0..cfg.t_grid.len())
        .flat_map(|ti| (0..cfg.replicates).map(move |r| (ti, r)))
        .collect();
    cells
        .into_par_iter()
        .map(|(ti, rep)| {
            let start = Instant::now();
            let mut rng = rng_stream(cfg.seed, ExperimentConfig::stream(ti, rep));
            let outcome = cell(ti, &mut rng);
            let wall_time = start.elapsed().as_secs_f64();
            let (values, error) = match outcome {
                Ok(v) if v.iter().all(|x| x.is_finite()) => (v, None),
                Ok(_) => (Vec::new(), Some("non-finite metric".to_string())),
                Err(e) => (Vec::new(), Some(e.to_string())),
            };
            ReportRow {
                t: cfg.t_grid[ti],
                replicate: rep,
                values,
                error,
                wall_time,
            }
        })
        .collect()
}

fn build_report(
    kind: ExperimentKind,
    cfg: &ExperimentConfig,
    metrics: &[&str],
    fitted: &[&str],
    rows: Vec<ReportRow>,
) -> RateReport {
    let mut report = RateReport {
        experiment: kind.name().into(),
        version: crate::VERSION.into(),
        config: cfg.clone(),
        metrics: metrics.iter().map(|s| s.to_string()).collect(),
        fits: Vec::new(),
        failures: rows.iter().filter(|r| r.error.is_some()).count(),
        diagnostics: json!({}),
        rows,
    };
    let log_t: Vec<f64> = cfg.t_grid.iter().map(|t| t.ln()).collect();
    for &metric in fitted {
        let medians: Vec<f64> = (0..cfg.t_grid.len())
            .map(|ti| median(&report.values_at(metric, ti)))
            .collect();
        let usable = medians.iter().all(|m| *m > 0.0 && m.is_finite());
        let fit = if usable {
            let log_m: Vec<f64> = medians.iter().map(|m| m.ln()).collect();
            ols_slope(&log_t, &log_m)
        } else {
            None
        };
        report.fits.push(SlopeFit {
            metric: metric.into(),
            medians,
            slope: fit.map(|f| f.0),
            std_error: fit.and_then(|f| f.1),
        });
    }
    report
}

/// Posterior contraction: L² and H^p error of the posterior mean and the posterior spread.
pub fn run_contraction(cfg: &ExperimentConfig) -> Result<RateReport> {
    cfg.validate()?;
    let drift = cfg.drift()?;
    let spec = cfg.prior;
    let truth = drift.coefficients(spec.n)?;
    if cfg.m < 2 * spec.n + 2 {
        return Err(Error::invalid(format!("M = {} too coarse for N = {} (need M >= 2N + 2)", cfg.m, spec.n)));
    }
    let rows = run_cells(cfg, |ti, rng| {
        let (lt, chi) = observe(&drift, cfg.t_grid[ti], cfg.dt, &[cfg.m], rng)?.remove(0);
        let post = PosteriorGaussian::fit(&spec, &lt, &chi)?;
        let diff = difference(post.mean(), &truth);
        Ok(vec![diff.l2_norm(), sobolev_norm(&diff, spec.p as f64), covariance_trace(&post)])
    });
    let metrics = ["l2_error", "hp_error", "trace"];
    Ok(build_report(ExperimentKind::Contraction, cfg, &metrics, &metrics, rows))
}

fn difference(a: &FourierCoeffs, b: &FourierCoeffs) -> FourierCoeffs {
    let n = a.len().max(b.len());
    let (a, b) = (a.resized(n), b.resized(n));
    FourierCoeffs::new(a.as_slice().iter().zip(b.as_slice()).map(|(x, y)| x - y).collect())
        .expect("length >= 2")
}

/// Law of large numbers for the local time: `sup |L/T − ρ|` on grids `M` and `2M`.
pub fn run_lln(cfg: &ExperimentConfig) -> Result<RateReport> {
    cfg.validate()?;
    let drift = cfg.drift()?;
    let law = stationary_density(&drift, cfg.m)?;
    let law_fine = stationary_density(&drift, 2 * cfg.m)?;
    let rows = run_cells(cfg, |ti, rng| {
        let fields = observe(&drift, cfg.t_grid[ti], cfg.dt, &[cfg.m, 2 * cfg.m], rng)?;
        Ok(vec![sup_deviation(&fields[0].0, &law)?, sup_deviation(&fields[1].0, &law_fine)?])
    });
    let metrics = ["sup_error", "sup_error_2M"];
    let mut report = build_report(ExperimentKind::Lln, cfg, &metrics, &metrics, rows);
    let medians = &report.fits[0].medians;
    let decreasing = medians.windows(2).all(|w| w[1] < w[0]);
    let sensitivity: Vec<f64> = report.fits[0]
        .medians
        .iter()
        .zip(&report.fits[1].medians)
        .map(|(a, b)| (b - a).abs() / a)
        .collect();
    report.diagnostics = json!({
        "median_decreasing": decreasing,
        "grid_doubling_relative_change": sensitivity,
    });
    Ok(report)
}

/// Fluctuation scaling of `‖L/T − ρ‖_{H^s}` for `s ∈ {0, 0.25, 0.4}`, raw and `√T`-scaled.
pub fn run_fluctuation(cfg: &ExperimentConfig) -> Result<RateReport> {
    cfg.validate()?;
    if !cfg.m.is_power_of_two() {
        return Err(Error::invalid(format!("fluctuation study needs M a power of two, got {}", cfg.m)));
    }
    let drift = cfg.drift()?;
    let law = stationary_density(&drift, cfg.m)?;
    let rows = run_cells(cfg, |ti, rng| {
        let t = cfg.t_grid[ti];
        let (lt, _) = observe(&drift, t, cfg.dt, &[cfg.m], rng)?.remove(0);
        let field = fluctuation_field(&lt, &law)?;
        let mut raw = Vec::new();
        for s in FLUCTUATION_ORDERS {
            raw.push(grid_sobolev_norm(&field, s)? / t.sqrt());
        }
        let scaled: Vec<f64> = raw.iter().map(|v| v * t.sqrt()).collect();
        raw.extend(scaled);
        Ok(raw)
    });
    let metrics = ["h0", "h0.25", "h0.4", "scaled_h0", "scaled_h0.25", "scaled_h0.4"];
    Ok(build_report(ExperimentKind::Fluctuation, cfg, &metrics, &metrics, rows))
}

/// Coverage diagnostic. Per replicate: whether `b₀` lies in the 95% posterior L² ball
/// around the mean (radius = 95th percentile of 500 draws, prior tail to `4N` modes),
/// and the fraction of the points `x = j/8` where `b₀` lies inside the pointwise 95%
/// band. Frequencies are reported; nothing is asserted.
pub fn run_coverage(cfg: &ExperimentConfig) -> Result<RateReport> {
    cfg.validate()?;
    let drift = cfg.drift()?;
    let spec = cfg.prior;
    let truth = drift.coefficients(spec.n)?;
    if cfg.m < 2 * spec.n + 2 {
        return Err(Error::invalid(format!("M = {} too coarse for N = {} (need M >= 2N + 2)", cfg.m, spec.n)));
    }
    let rows = run_cells(cfg, |ti, rng| {
        let (lt, chi) = observe(&drift, cfg.t_grid[ti], cfg.dt, &[cfg.m], rng)?.remove(0);
        let post = PosteriorGaussian::fit(&spec, &lt, &chi)?;
        Ok(coverage_metrics(&post, &truth, rng))
    });
    let metrics = ["l2_error", "radius95", "ball_covered", "band_coverage"];
    let mut report = build_report(ExperimentKind::Coverage, cfg, &metrics, &["l2_error", "radius95"], rows);
    let freq = |metric: &str| -> Vec<f64> {
        (0..cfg.t_grid.len())
            .map(|ti| {
                let v = report.values_at(metric, ti);
                if v.is_empty() {
                    f64::NAN
                } else {
                    v.iter().sum::<f64>() / v.len() as f64
                }
            })
            .collect()
    };
    report.diagnostics = json!({
        "ball_coverage_frequency": freq("ball_covered"),
        "band_coverage_frequency": freq("band_coverage"),
    });
    Ok(report)
}

/// `[‖b₀ − mean‖, radius95, ball covered (0/1), pointwise band coverage fraction]`.
pub fn coverage_metrics<R: Rng + ?Sized>(post: &PosteriorGaussian, truth: &FourierCoeffs, rng: &mut R) -> Vec<f64> {
    let len = 4 * post.spec().n;
    let mean = post.mean().resized(len);
    let mut radii: Vec<f64> = (0..COVERAGE_DRAWS)
        .map(|_| difference(&sample_coefficients(post, rng, len), &mean).l2_norm())
        .collect();
    radii.sort_by(f64::total_cmp);
    let radius = radii[(0.95 * COVERAGE_DRAWS as f64).ceil() as usize - 1];
    let error = difference(post.mean(), truth).l2_norm();
    let inside = (0..BAND_POINTS)
        .filter(|&j| {
            let x = j as f64 / BAND_POINTS as f64;
            let half_width = 1.959963984540054 * post.pointwise_variance(x, len).sqrt();
            (post.mean().eval(x) - truth.eval(x)).abs() <= half_width
        })
        .count();
    vec![
        error,
        radius,
        if error <= radius { 1.0 } else { 0.0 },
        inside as f64 / BAND_POINTS as f64,
    ]
}

pub fn run(kind: ExperimentKind, cfg: &ExperimentConfig) -> Result<RateReport> {
    match kind {
        ExperimentKind::Contraction => run_contraction(cfg),
        ExperimentKind::Lln => run_lln(cfg),
        ExperimentKind::Fluctuation => run_fluctuation(cfg),
        ExperimentKind::Coverage => run_coverage(cfg),
    }
}
