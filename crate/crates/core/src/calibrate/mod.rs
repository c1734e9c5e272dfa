//! Least-squares recovery of device parameters from measured data.
//!
//! Every fitter returns a [`FitReport`]. Frequencies inside reports are angular
//! (rad/s) unless converted with [`FitReport::in_hz`].

mod doublet;
pub mod lm;
mod power;
mod s11;
mod step;

use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub use doublet::{fit_doublet, DoubletModel};
pub use power::{fit_efficiency_power, PowerFitInputs, PowerPoint};
pub use s11::{fit_s11, S11Mode, S11Model};
pub use step::{fit_rc_step, RcStep};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitParameter {
    pub name: String,
    pub value: f64,
    pub unit: String,
    /// One-sigma uncertainty; `NaN` (`null` in JSON) when it cannot be estimated.
    pub std_err: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub kind: String,
    pub parameters: Vec<FitParameter>,
    /// Euclidean norm of the final residual vector.
    pub residual_norm: f64,
    pub iterations: usize,
    pub converged: bool,
    pub flags: Vec<String>,
    pub seed: Option<u64>,
}

impl FitReport {
    pub fn get(&self, name: &str) -> Option<&FitParameter> {
        self.parameters.iter().find(|p| p.name == name)
    }

    /// Value of `name`; panics on an unknown name.
    pub fn value(&self, name: &str) -> f64 {
        self.get(name).unwrap_or_else(|| panic!("no fit parameter `{name}`")).value
    }

    pub fn std_err(&self, name: &str) -> f64 {
        self.get(name).unwrap_or_else(|| panic!("no fit parameter `{name}`")).std_err
    }

    pub fn covariance_diag(&self) -> Vec<f64> {
        self.parameters.iter().map(|p| p.std_err * p.std_err).collect()
    }

    pub fn has_flag(&self, flag: &str) -> bool {
        self.flags.iter().any(|f| f == flag)
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    /// Copy with every `rad/s` parameter expressed in Hz.
    pub fn in_hz(&self) -> Self {
        let mut out = self.clone();
        for p in &mut out.parameters {
            if p.unit == "rad/s" {
                p.value = crate::model::to_hz(p.value);
                p.std_err = crate::model::to_hz(p.std_err);
                p.unit = "Hz".into();
            }
        }
        out
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

fn param(name: &str, value: f64, unit: &str, std_err: f64) -> FitParameter {
    FitParameter { name: name.into(), value, unit: unit.into(), std_err }
}

/// Seeded zero-mean Gaussian samples.
pub fn gaussian_noise(seed: u64, n: usize, sigma: f64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match Normal::new(0.0, sigma) {
        Ok(d) => (0..n).map(|_| d.sample(&mut rng)).collect(),
        Err(_) => vec![0.0; n],
    }
}

/// Robust white-noise estimate from second differences.
pub(crate) fn noise_floor(y: &[f64]) -> f64 {
    if y.len() < 3 {
        return 0.0;
    }
    let mut d: Vec<f64> = y.windows(3).map(|w| (w[0] - 2.0 * w[1] + w[2]).abs()).collect();
    d.sort_by(|a, b| a.total_cmp(b));
    d[d.len() / 2] / (0.6745 * 6f64.sqrt())
}

/// Sort `(x, ys...)` rows by `x` so results do not depend on input order.
pub(crate) fn sorted_by_x<T: Copy>(x: &[f64], y: &[T]) -> Result<(Vec<f64>, Vec<T>)> {
    if x.len() != y.len() {
        return Err(Error::InvalidParameter(format!("{} abscissae for {} samples", x.len(), y.len())));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::DegenerateData("non-finite abscissa".into()));
    }
    let mut idx: Vec<usize> = (0..x.len()).collect();
    idx.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    Ok((idx.iter().map(|&i| x[i]).collect(), idx.iter().map(|&i| y[i]).collect()))
}

/// Numeric rows of a CSV file. `#` lines and one optional header row are skipped.
pub fn read_numeric_csv(path: &Path) -> Result<Vec<Vec<f64>>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_path(path)?;
    let mut rows = Vec::new();
    for (k, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let parsed: std::result::Result<Vec<f64>, _> = rec.iter().map(str::parse::<f64>).collect();
        match parsed {
            Ok(v) => rows.push(v),
            Err(_) if k == 0 => continue,
            Err(e) => {
                return Err(Error::Config(format!("{}: record {}: {e}", path.display(), k + 1)));
            }
        }
    }
    if rows.is_empty() {
        return Err(Error::Config(format!("{}: no data rows", path.display())));
    }
    let width = rows[0].len();
    if let Some(k) = rows.iter().position(|r| r.len() != width) {
        return Err(Error::Config(format!("{}: row {} has {} columns, expected {width}", path.display(), k + 1, rows[k].len())));
    }
    Ok(rows)
}

/// Spectrum from `(freq_hz, transmission)` or `(freq_hz, re, im)` columns.
/// Two columns give a real channel `transmission`; three give a complex channel `s11`.
pub fn read_spectrum_csv(path: &Path) -> Result<crate::Spectrum> {
    use crate::response::Values;
    use num_complex::Complex64;
    let rows = read_numeric_csv(path)?;
    let omega = rows.iter().map(|r| crate::model::hz(r[0])).collect();
    let mut s = crate::Spectrum::new(omega)?;
    match rows[0].len() {
        2 => s.push("transmission", Values::Real(rows.iter().map(|r| r[1]).collect()))?,
        3 => s.push("s11", Values::Complex(rows.iter().map(|r| Complex64::new(r[1], r[2])).collect()))?,
        w => return Err(Error::Config(format!("{}: {w} columns, expected 2 or 3", path.display()))),
    }
    Ok(s)
}
