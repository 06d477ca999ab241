//! Periodic local time `L°_T`, the winding field `χ°_T`, and the stationary law of
//! the wrapped diffusion.
//!
//! Fields are sampled at the nodes `x_j = j/M`. The local time is the occupation
//! histogram of the wrapped path with bins centred on the nodes, so that
//! `(1/M) Σ_j f(x_j) L_j = Σ_i f(node(x_i)) dt` holds exactly for every `f`.

use crate::error::{Error, Result};
use crate::sde::{DriftSpec, SamplePath};
use crate::spectral::{analyze, sobolev_norm, GridFunction};

/// Node index of the bin containing `x` (wrapped onto the circle).
#[inline]
pub fn bin_index(x: f64, m: usize) -> usize {
    ((x * m as f64).round() as i64).rem_euclid(m as i64) as usize
}

/// Gridded periodic local time, in time per unit space.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalTimeField {
    horizon: f64,
    values: Vec<f64>,
}

impl LocalTimeField {
    pub fn new(horizon: f64, values: Vec<f64>) -> Result<Self> {
        if values.len() < 4 {
            return Err(Error::invalid(format!("local-time grid needs M >= 4, got {}", values.len())));
        }
        if !(horizon >= 0.0 && horizon.is_finite()) {
            return Err(Error::invalid(format!("horizon must be non-negative, got {horizon}")));
        }
        if let Some(j) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("local time at node {j}")));
        }
        if let Some(j) = values.iter().position(|&v| v < 0.0) {
            return Err(Error::invalid(format!("negative local time at node {j}")));
        }
        Ok(Self { horizon, values })
    }

    /// Constant field `L ≡ level` with horizon `level` (the occupation identity then holds).
    pub fn constant(m: usize, level: f64) -> Result<Self> {
        Self::new(level, vec![level; m])
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

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn node(&self, j: usize) -> f64 {
        j as f64 / self.values.len() as f64
    }

    /// `(1/M) Σ_j L_j`, equal to the horizon.
    pub fn total_time(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    pub fn max(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |a, &v| a.max(v))
    }

    /// Rectangle-rule L² norm.
    pub fn l2_norm(&self) -> f64 {
        (self.values.iter().map(|v| v * v).sum::<f64>() / self.values.len() as f64).sqrt()
    }
}

/// Periodized winding indicator on the nodes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChiField {
    values: Vec<i64>,
}

impl ChiField {
    pub fn new(values: Vec<i64>) -> Result<Self> {
        if values.len() < 4 {
            return Err(Error::invalid(format!("chi grid needs M >= 4, got {}", values.len())));
        }
        Ok(Self { values })
    }

    pub fn zeros(m: usize) -> Result<Self> {
        Self::new(vec![0; m])
    }

    /// χ° for a path running from `start` to `end`.
    pub fn from_endpoints(start: f64, end: f64, m: usize) -> Result<Self> {
        Self::new(
            (0..m)
                .map(|j| periodized_chi(start, end, j as f64 / m as f64))
                .collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[i64] {
        &self.values
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<i64>() as f64 / self.values.len() as f64
    }

    pub fn l2_norm(&self) -> f64 {
        let sq: i64 = self.values.iter().map(|v| v * v).sum();
        (sq as f64 / self.values.len() as f64).sqrt()
    }
}

/// `χ°(x) = Σ_k χ(x + k)`: the signed number of translates `x + k` lying strictly
/// between `start` and `end`.
///
/// For `start < end` this is the integer count of the open interval
/// `(start − x, end − x)`, i.e. `⌈end − x⌉ − ⌊start − x⌋ − 1`; the reversed
/// orientation carries a minus sign. Away from the measure-zero set where
/// `start − x` or `end − x` is an integer this equals `⌊end − x⌋ − ⌊start − x⌋`.
pub fn periodized_chi(start: f64, end: f64, x: f64) -> i64 {
    let open_count = |lo: f64, hi: f64| (hi.ceil() - lo.floor()) as i64 - 1;
    if end > start {
        open_count(start - x, end - x)
    } else if end < start {
        -open_count(end - x, start - x)
    } else {
        0
    }
}

/// Streaming occupation histogram and endpoint tracker.
///
/// Feed every state `x_0, ..., x_n` in order; state `x_i` for `i < n` is charged
/// one step `dt` to the bin of its node.
#[derive(Debug, Clone)]
pub struct OccupationAccumulator {
    dt: f64,
    counts: Vec<u64>,
    first: Option<f64>,
    last: Option<f64>,
    steps: u64,
}

impl OccupationAccumulator {
    pub fn new(m: usize, dt: f64) -> Result<Self> {
        if m < 4 {
            return Err(Error::invalid(format!("local-time grid needs M >= 4, got {m}")));
        }
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::invalid(format!("time step must be positive, got {dt}")));
        }
        Ok(Self {
            dt,
            counts: vec![0; m],
            first: None,
            last: None,
            steps: 0,
        })
    }

    #[inline]
    pub fn push(&mut self, x: f64) {
        if let Some(prev) = self.last {
            let m = self.counts.len();
            self.counts[bin_index(prev, m)] += 1;
            self.steps += 1;
        } else {
            self.first = Some(x);
        }
        self.last = Some(x);
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn local_time(&self) -> Result<LocalTimeField> {
        let m = self.counts.len();
        let scale = m as f64 * self.dt;
        LocalTimeField::new(
            self.steps as f64 * self.dt,
            self.counts.iter().map(|&c| c as f64 * scale).collect(),
        )
    }

    pub fn chi(&self) -> Result<ChiField> {
        let (start, end) = match (self.first, self.last) {
            (Some(a), Some(b)) => (a, b),
            _ => (0.0, 0.0),
        };
        ChiField::from_endpoints(start, end, self.counts.len())
    }

    pub fn finish(&self) -> Result<(LocalTimeField, ChiField)> {
        Ok((self.local_time()?, self.chi()?))
    }
}

/// Occupation histogram `L_j = M · dt · #{i < n : node(x_i) = j}` of a path.
pub fn estimate_local_time(path: &SamplePath, m: usize) -> Result<LocalTimeField> {
    let mut acc = OccupationAccumulator::new(m, path.dt())?;
    path.values().iter().for_each(|&x| acc.push(x));
    acc.local_time()
}

/// χ°_T of a path on `M` nodes.
pub fn chi_field(path: &SamplePath, m: usize) -> Result<ChiField> {
    ChiField::from_endpoints(path.values()[0], path.final_value(), m)
}

/// Invariant density of the wrapped diffusion and its scale/speed data.
///
/// `rho ∝ exp(2∫₀ˣ b)` has grid mean one. `s_prime` is the derivative of the
/// scale function normalized so that `s(1) − s(0) = 1`, and `m_mass = ∫₀¹ 1/s'`
/// is the speed mass of a period, which equals the mean winding time.
#[derive(Debug, Clone, PartialEq)]
pub struct StationaryLaw {
    pub rho: Vec<f64>,
    pub s_prime: Vec<f64>,
    pub m_mass: f64,
}

impl StationaryLaw {
    pub fn len(&self) -> usize {
        self.rho.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rho.is_empty()
    }
}

/// Stationary law of `drift` on `M` nodes, using the exact antiderivative of the series.
pub fn stationary_density(drift: &DriftSpec, m: usize) -> Result<StationaryLaw> {
    if m < 4 {
        return Err(Error::invalid(format!("grid needs M >= 4, got {m}")));
    }
    let potential: Vec<f64> = (0..m)
        .map(|j| drift.antiderivative(j as f64 / m as f64))
        .collect();
    let grid_mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;

    let weight: Vec<f64> = potential.iter().map(|&b| (2.0 * b).exp()).collect();
    let inverse: Vec<f64> = potential.iter().map(|&b| (-2.0 * b).exp()).collect();
    if weight.iter().chain(&inverse).any(|v| !v.is_finite() || *v == 0.0) {
        return Err(Error::NonFinite("stationary density overflows".into()));
    }
    let c = 1.0 / grid_mean(&weight);
    let scale_norm = grid_mean(&inverse);
    let rho = weight.iter().map(|w| c * w).collect();
    let s_prime: Vec<f64> = inverse.iter().map(|q| q / scale_norm).collect();
    let m_mass = s_prime.iter().map(|s| 1.0 / s).sum::<f64>() / m as f64;
    Ok(StationaryLaw { rho, s_prime, m_mass })
}

/// `√T (L/T − ρ)` on the common grid.
pub fn fluctuation_field(lt: &LocalTimeField, law: &StationaryLaw) -> Result<GridFunction> {
    if lt.len() != law.len() {
        return Err(Error::GridMismatch {
            left: lt.len(),
            right: law.len(),
        });
    }
    let t = lt.horizon();
    if t <= 0.0 {
        return Err(Error::invalid("fluctuation field needs a positive horizon"));
    }
    GridFunction::new(
        lt.values()
            .iter()
            .zip(&law.rho)
            .map(|(l, r)| t.sqrt() * (l / t - r))
            .collect(),
    )
}

/// `sup_j |L_j/T − ρ_j|`.
pub fn sup_deviation(lt: &LocalTimeField, law: &StationaryLaw) -> Result<f64> {
    if lt.len() != law.len() {
        return Err(Error::GridMismatch {
            left: lt.len(),
            right: law.len(),
        });
    }
    let t = lt.horizon();
    Ok(lt
        .values()
        .iter()
        .zip(&law.rho)
        .fold(0.0_f64, |acc, (l, r)| acc.max((l / t - r).abs())))
}

/// Homogeneous `H^s` norm of a grid function, through its projection onto all
/// `M/2 − 1` resolvable modes.
pub fn grid_sobolev_norm(field: &GridFunction, s: f64) -> Result<f64> {
    let c = analyze(field, field.len() / 2 - 1)?;
    Ok(sobolev_norm(&c, s))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sde::simulate;
    use crate::spectral::FourierCoeffs;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn enumerate_chi(start: f64, end: f64, x: f64) -> i64 {
        let reach = (start.abs() + end.abs()).ceil() as i64 + 1;
        let (lo, hi, sign) = if end >= start { (start, end, 1) } else { (end, start, -1) };
        (-reach - 1..=reach + 1)
            .filter(|&k| lo < x + k as f64 && (x + k as f64) < hi)
            .count() as i64
            * sign
    }

    #[test]
    fn constant_path_occupies_one_bin() {
        let mut acc = OccupationAccumulator::new(10, 0.01).unwrap();
        for _ in 0..=100 {
            acc.push(0.3);
        }
        let lt = acc.local_time().unwrap();
        assert!((lt.values()[3] - 10.0).abs() < 1e-12);
        assert!(lt.values().iter().enumerate().all(|(j, &v)| j == 3 || v == 0.0));
        assert!((lt.total_time() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn chi_examples() {
        assert_eq!(periodized_chi(0.0, 2.5, 0.3), 3);
        assert_eq!(periodized_chi(2.5, 0.0, 0.3), -3);
        assert_eq!(periodized_chi(1.7, 1.7, 0.3), 0);
        let chi = ChiField::from_endpoints(0.4, 0.4, 16).unwrap();
        assert!(chi.values().iter().all(|&v| v == 0));
    }

    #[test]
    fn chi_matches_enumeration_at_integer_offsets() {
        for &(a, b) in &[(0.0, 2.0), (0.0, -2.0), (-1.0, 3.0), (0.5, -0.5), (0.0, 0.75)] {
            for j in 0..8 {
                let x = j as f64 / 8.0;
                assert_eq!(periodized_chi(a, b, x), enumerate_chi(a, b, x), "({a},{b},{x})");
            }
        }
    }

    #[test]
    fn chi_closed_form_matches_enumeration_on_random_triples() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let a: f64 = rng.random_range(-6.0..6.0);
            let b: f64 = rng.random_range(-6.0..6.0);
            let x: f64 = rng.random_range(0.0..1.0);
            let floor_form = (b - x).floor() as i64 - (a - x).floor() as i64;
            assert_eq!(periodized_chi(a, b, x), enumerate_chi(a, b, x));
            assert_eq!(periodized_chi(a, b, x), floor_form);
        }
    }

    #[test]
    fn chi_takes_two_adjacent_values_and_integrates_to_displacement() {
        for seed in 0..10 {
            let path = simulate(&DriftSpec::sine(), 30.0, 1e-3, seed, true).unwrap();
            let chi = chi_field(&path, 128).unwrap();
            let lo = *chi.values().iter().min().unwrap();
            let hi = *chi.values().iter().max().unwrap();
            assert!(hi - lo <= 1);
            assert!((chi.mean() - path.final_value()).abs() <= 2.0 / 128.0);
        }
    }

    #[test]
    fn occupation_identity_for_random_test_functions() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for seed in 0..5 {
            let path = simulate(&DriftSpec::sine(), 20.0, 1e-3, seed, true).unwrap();
            let m = 64;
            let lt = estimate_local_time(&path, m).unwrap();
            assert!((lt.total_time() - path.horizon()).abs() <= 1e-9 * path.horizon());
            let f = FourierCoeffs::new((0..6).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap();
            let grid: f64 = (0..m).map(|j| f.eval(j as f64 / m as f64) * lt.values()[j]).sum::<f64>() / m as f64;
            let along: f64 = path.values()[..path.steps()]
                .iter()
                .map(|&x| f.eval(bin_index(x, m) as f64 / m as f64) * path.dt())
                .sum();
            assert!((grid - along).abs() <= 1e-9 * path.horizon());
        }
    }

    #[test]
    fn stationary_law_of_zero_drift_is_uniform() {
        let law = stationary_density(&DriftSpec::Zero, 32).unwrap();
        assert!(law.rho.iter().all(|&r| (r - 1.0).abs() < 1e-15));
        assert!(law.s_prime.iter().all(|&s| (s - 1.0).abs() < 1e-15));
        assert!((law.m_mass - 1.0).abs() < 1e-15);
    }

    #[test]
    fn stationary_law_of_sine_drift() {
        let m = 256;
        let law = stationary_density(&DriftSpec::sine(), m).unwrap();
        // normalizer by composite Simpson on 20000 panels of exp((1 - cos 2πx)/π)
        let n = 20_000;
        let h = 1.0 / n as f64;
        let integral: f64 = (0..=n)
            .map(|i| {
                let x = i as f64 * h;
                let w = if i == 0 || i == n { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
                w * ((1.0 - (2.0 * std::f64::consts::PI * x).cos()) / std::f64::consts::PI).exp()
            })
            .sum::<f64>()
            * h
            / 3.0;
        assert!((law.rho[0] - 1.0 / integral).abs() < 1e-10);
        for j in [0, 17, 128, 200] {
            let x = j as f64 / m as f64;
            let closed = ((1.0 - (2.0 * std::f64::consts::PI * x).cos()) / std::f64::consts::PI).exp() / integral;
            assert!((law.rho[j] - closed).abs() < 1e-10);
        }
        // m[0,1] = I0(1/π)^2 for this drift
        assert!((law.m_mass - 1.051_632_107_050_667_3).abs() < 1e-10);
    }

    #[test]
    fn stationary_identities_for_random_drifts() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let m = 256;
        for _ in 0..20 {
            let drift = DriftSpec::Fourier(
                FourierCoeffs::new((0..6).map(|_| rng.random_range(-0.8..0.8)).collect()).unwrap(),
            );
            let law = stationary_density(&drift, m).unwrap();
            assert!(law.rho.iter().all(|&r| r > 0.0));
            assert!((law.rho.iter().sum::<f64>() / m as f64 - 1.0).abs() < 1e-9);
            for j in 0..m {
                assert!((law.rho[j] * law.s_prime[j] * law.m_mass - 1.0).abs() < 1e-8);
            }
            // weak form of ρ' = 2bρ against a random trigonometric test function
            let f = FourierCoeffs::new((0..4).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap();
            let (lhs, rhs) = (0..m).fold((0.0, 0.0), |(l, r), j| {
                let x = j as f64 / m as f64;
                let (fv, df) = f.eval_with_derivative(x);
                (l - df * law.rho[j] / m as f64, r + 2.0 * fv * drift.eval(x) * law.rho[j] / m as f64)
            });
            assert!((lhs - rhs).abs() < 1e-6, "{lhs} vs {rhs}");
        }
    }

    #[test]
    fn fluctuation_field_vanishes_at_the_limit() {
        let law = stationary_density(&DriftSpec::sine(), 64).unwrap();
        let t = 500.0;
        let lt = LocalTimeField::new(t, law.rho.iter().map(|r| r * t).collect()).unwrap();
        let field = fluctuation_field(&lt, &law).unwrap();
        assert!(field.sup_norm() < 1e-12);
        let other = stationary_density(&DriftSpec::sine(), 32).unwrap();
        assert!(matches!(fluctuation_field(&lt, &other), Err(Error::GridMismatch { .. })));
    }

    #[test]
    fn local_time_rejects_invalid_values() {
        assert!(LocalTimeField::new(1.0, vec![1.0, 1.0, -1.0, 1.0]).is_err());
        assert!(LocalTimeField::new(1.0, vec![1.0, f64::NAN, 1.0, 1.0]).is_err());
        assert!(LocalTimeField::new(1.0, vec![1.0; 3]).is_err());
    }
}
