//! File formats: path CSV (`t,x`), field CSV (`x,L,chi`), stationary-law CSV
//! (`x,rho,s_prime` + `# m_mass=` trailer), posterior JSON and coefficient lists.
//!
//! Floats are written with 17 significant digits so that every value reads back
//! bit-exactly.

use std::fs;
use std::io::Write;
use std::path::Path;

use nalgebra::DMatrix;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::local_time::{ChiField, LocalTimeField, StationaryLaw};
use crate::posterior::PosteriorGaussian;
use crate::prior::PriorSpec;
use crate::sde::SamplePath;
use crate::spectral::FourierCoeffs;

/// Round-trip float formatting (17 significant digits).
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn parse_f64(field: &str, what: &str) -> Result<f64> {
    field
        .trim()
        .parse::<f64>()
        .map_err(|e| Error::Parse(format!("{what}: {e} in {field:?}")))
}

fn create(path: &Path) -> Result<fs::File> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)?;
        }
    }
    Ok(fs::File::create(path)?)
}

fn check_header(reader: &mut csv::Reader<fs::File>, expected: &[&str]) -> Result<()> {
    let header = reader.headers()?;
    if header.iter().map(str::trim).ne(expected.iter().copied()) {
        return Err(Error::Parse(format!(
            "expected header {:?}, found {:?}",
            expected.join(","),
            header.iter().collect::<Vec<_>>().join(",")
        )));
    }
    Ok(())
}

fn reader(path: &Path) -> Result<csv::Reader<fs::File>> {
    Ok(csv::ReaderBuilder::new().comment(Some(b'#')).from_path(path)?)
}

pub fn write_path(path: impl AsRef<Path>, sample: &SamplePath) -> Result<()> {
    let mut w = csv::Writer::from_writer(std::io::BufWriter::new(create(path.as_ref())?));
    w.write_record(["t", "x"])?;
    for (i, x) in sample.values().iter().enumerate() {
        w.write_record([fmt_f64(sample.time(i)), fmt_f64(*x)])?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a path file. The step is taken from the second time stamp and the
/// remaining time stamps must be consistent with it.
pub fn read_path(path: impl AsRef<Path>) -> Result<SamplePath> {
    let mut r = reader(path.as_ref())?;
    check_header(&mut r, &["t", "x"])?;
    let mut times = Vec::new();
    let mut values = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        if rec.len() != 2 {
            return Err(Error::Parse(format!("path row has {} fields", rec.len())));
        }
        times.push(parse_f64(&rec[0], "t")?);
        values.push(parse_f64(&rec[1], "x")?);
    }
    if times.len() < 2 {
        return Err(Error::Parse("path file needs at least two rows".into()));
    }
    if times[0] != 0.0 {
        return Err(Error::Parse(format!("path must start at t = 0, found {}", times[0])));
    }
    let dt = times[1];
    for (i, &t) in times.iter().enumerate() {
        let expected = i as f64 * dt;
        if (t - expected).abs() > 1e-9 * expected.max(1.0) {
            return Err(Error::Parse(format!("row {i}: time {t} is off the uniform grid (dt = {dt})")));
        }
    }
    SamplePath::new(dt, values)
}

pub fn write_field(path: impl AsRef<Path>, lt: &LocalTimeField, chi: &ChiField) -> Result<()> {
    if lt.len() != chi.len() {
        return Err(Error::GridMismatch {
            left: lt.len(),
            right: chi.len(),
        });
    }
    let mut w = csv::Writer::from_writer(std::io::BufWriter::new(create(path.as_ref())?));
    w.write_record(["x", "L", "chi"])?;
    for j in 0..lt.len() {
        w.write_record([fmt_f64(lt.node(j)), fmt_f64(lt.values()[j]), chi.values()[j].to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a field file; the horizon is recovered from the occupation identity `T = mean(L)`.
pub fn read_field(path: impl AsRef<Path>) -> Result<(LocalTimeField, ChiField)> {
    let mut r = reader(path.as_ref())?;
    check_header(&mut r, &["x", "L", "chi"])?;
    let mut l = Vec::new();
    let mut chi = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        if rec.len() != 3 {
            return Err(Error::Parse(format!("field row has {} fields", rec.len())));
        }
        l.push(parse_f64(&rec[1], "L")?);
        chi.push(
            rec[2]
                .trim()
                .parse::<i64>()
                .map_err(|e| Error::Parse(format!("chi: {e}")))?,
        );
    }
    let horizon = l.iter().sum::<f64>() / l.len().max(1) as f64;
    Ok((LocalTimeField::new(horizon, l)?, ChiField::new(chi)?))
}

pub fn write_stationary_law(path: impl AsRef<Path>, law: &StationaryLaw) -> Result<()> {
    let mut file = std::io::BufWriter::new(create(path.as_ref())?);
    {
        let mut w = csv::Writer::from_writer(&mut file);
        w.write_record(["x", "rho", "s_prime"])?;
        let m = law.len();
        for j in 0..m {
            w.write_record([
                fmt_f64(j as f64 / m as f64),
                fmt_f64(law.rho[j]),
                fmt_f64(law.s_prime[j]),
            ])?;
        }
        w.flush()?;
    }
    writeln!(file, "# m_mass={}", fmt_f64(law.m_mass))?;
    file.flush()?;
    Ok(())
}

pub fn read_stationary_law(path: impl AsRef<Path>) -> Result<StationaryLaw> {
    let text = fs::read_to_string(path.as_ref())?;
    let m_mass = text
        .lines()
        .find_map(|line| line.trim().strip_prefix("# m_mass="))
        .ok_or_else(|| Error::Parse("missing '# m_mass=' trailer".into()))
        .and_then(|v| parse_f64(v, "m_mass"))?;
    let mut r = reader(path.as_ref())?;
    check_header(&mut r, &["x", "rho", "s_prime"])?;
    let mut rho = Vec::new();
    let mut s_prime = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        rho.push(parse_f64(&rec[1], "rho")?);
        s_prime.push(parse_f64(&rec[2], "s_prime")?);
    }
    Ok(StationaryLaw { rho, s_prime, m_mass })
}

fn json_array(values: impl Iterator<Item = f64>) -> String {
    let items: Vec<String> = values.map(fmt_f64).collect();
    format!("[{}]", items.join(","))
}

/// Posterior JSON `{p, eta, kappa, N, T, mean, precision}`.
pub fn posterior_to_json(post: &PosteriorGaussian) -> String {
    let spec = post.spec();
    let a = post.precision();
    let rows: Vec<String> = (0..a.nrows()).map(|i| json_array(a.row(i).iter().copied())).collect();
    format!(
        "{{\n  \"p\": {},\n  \"eta\": {},\n  \"kappa\": {},\n  \"N\": {},\n  \"T\": {},\n  \"mean\": {},\n  \"precision\": [\n    {}\n  ]\n}}\n",
        spec.p,
        fmt_f64(spec.eta),
        fmt_f64(spec.kappa),
        spec.n,
        fmt_f64(post.horizon()),
        json_array(post.mean().as_slice().iter().copied()),
        rows.join(",\n    ")
    )
}

#[derive(Deserialize)]
struct PosteriorFile {
    p: u32,
    eta: f64,
    kappa: f64,
    #[serde(rename = "N")]
    n: usize,
    #[serde(rename = "T")]
    horizon: f64,
    mean: Vec<f64>,
    precision: Vec<Vec<f64>>,
}

pub fn posterior_from_json(text: &str) -> Result<PosteriorGaussian> {
    let f: PosteriorFile = serde_json::from_str(text)?;
    let spec = PriorSpec::new(f.p, f.eta, f.kappa, f.n)?;
    if f.precision.len() != f.n || f.precision.iter().any(|row| row.len() != f.n) {
        return Err(Error::Parse(format!("precision must be {0}x{0}", f.n)));
    }
    let a = DMatrix::from_fn(f.n, f.n, |i, j| f.precision[i][j]);
    PosteriorGaussian::new(spec, FourierCoeffs::new(f.mean)?, a, f.horizon)
}

pub fn write_posterior(path: impl AsRef<Path>, post: &PosteriorGaussian) -> Result<()> {
    create(path.as_ref())?.write_all(posterior_to_json(post).as_bytes())?;
    Ok(())
}

pub fn read_posterior(path: impl AsRef<Path>) -> Result<PosteriorGaussian> {
    posterior_from_json(&fs::read_to_string(path.as_ref())?)
}

/// Coefficient list: one number per line, blank lines and `#` comments ignored.
pub fn read_coefficients(path: impl AsRef<Path>) -> Result<FourierCoeffs> {
    let text = fs::read_to_string(path.as_ref())?;
    let mut coeffs = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        coeffs.push(parse_f64(line, &format!("coefficient on line {}", i + 1))?);
    }
    let c = FourierCoeffs::new(coeffs)?;
    if !c.is_finite() {
        return Err(Error::NonFinite("drift coefficients".into()));
    }
    Ok(c)
}

/// Writes a CSV with the given header and pre-formatted rows.
pub fn write_table(path: impl AsRef<Path>, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut w = csv::Writer::from_writer(std::io::BufWriter::new(create(path.as_ref())?));
    w.write_record(header)?;
    for row in rows {
        w.write_record(row)?;
    }
    w.flush()?;
    Ok(())
}
