//! One-port microwave reflection of an acoustic resonance.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::lm::{minimize, LmOptions, Problem};
use super::{noise_floor, param, sorted_by_x, FitReport};
use crate::response::chi;
use crate::{Error, Result, Spectrum};

/// `S11(w) = -1 + kappa_ex_m chi_m(w - omega_m)` with `kappa_m = omega_m / Q_m`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct S11Model {
    pub omega_m: f64,
    pub q_m: f64,
    pub eta_m: f64,
}

impl S11Model {
    pub fn kappa_m(&self) -> f64 {
        self.omega_m / self.q_m
    }

    pub fn reflection(&self, omega: f64) -> Complex64 {
        let k = self.kappa_m();
        -1.0 + self.eta_m * k * chi(k, omega - self.omega_m)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum S11Mode {
    /// Real and imaginary residuals stacked.
    Complex,
    /// `|S11|` only. Under- and over-coupling are indistinguishable here, so
    /// `eta_m <= 1/2` is assumed.
    MagnitudeOnly,
}

/// Fit the complex channel `s11` (or, magnitude-only, a real `s11_mag` channel
/// if no complex one exists) around a single resonance.
pub fn fit_s11(spectrum: &Spectrum, mode: S11Mode) -> Result<FitReport> {
    let complex = spectrum.complex("s11");
    let mags: Vec<f64> = match (complex, spectrum.real("s11_mag")) {
        (Some(c), _) => c.iter().map(|z| z.norm()).collect(),
        (None, Some(m)) if mode == S11Mode::MagnitudeOnly => m.to_vec(),
        _ => return Err(Error::InvalidParameter("spectrum lacks an `s11` channel".into())),
    };
    let (omega, mags) = sorted_by_x(spectrum.omega(), &mags)?;
    let (_, data) = match complex {
        Some(c) => sorted_by_x(spectrum.omega(), c)?,
        None => (omega.clone(), mags.iter().map(|&m| Complex64::new(m, 0.0)).collect()),
    };
    let n = omega.len();
    if n < 8 {
        return Err(Error::DegenerateData(format!("{n} samples")));
    }

    // Dip of 1 - |S|^2 = 4 eta (1 - eta) L(w), whose FWHM is kappa_m.
    let absorb: Vec<f64> = mags.iter().map(|m| 1.0 - m * m).collect();
    let (i0, &peak) = absorb.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).unwrap();
    let floor = 5.0 * noise_floor(&mags);
    let depth = 1.0 - mags[i0];
    if depth <= floor.max(1e-12) {
        let center = 0.5 * (omega[0] + omega[n - 1]);
        return Ok(FitReport {
            kind: "s11".into(),
            parameters: vec![
                param("omega_m", center, "rad/s", f64::NAN),
                param("Q_m", f64::NAN, "1", f64::NAN),
                param("eta_m", 0.0, "1", f64::NAN),
            ],
            residual_norm: mags.iter().map(|m| (m - 1.0).powi(2)).sum::<f64>().sqrt(),
            iterations: 0,
            converged: false,
            flags: vec!["no-resonance".into()],
            seed: None,
        });
    }
    let half = 0.5 * peak;
    let cross = |a: usize, b: usize| omega[a] + (half - absorb[a]) / (absorb[b] - absorb[a]) * (omega[b] - omega[a]);
    let left = (0..i0).rev().find(|&k| absorb[k] <= half).map(|k| cross(k, k + 1));
    let right = (i0 + 1..n).find(|&k| absorb[k] <= half).map(|k| cross(k - 1, k));
    let width = match (left, right) {
        (Some(l), Some(r)) => r - l,
        (Some(l), None) => 2.0 * (omega[i0] - l),
        (None, Some(r)) => 2.0 * (r - omega[i0]),
        (None, None) => return Err(Error::InsufficientSpan),
    };
    let origin = omega[i0];
    let q0 = origin / width;
    let eta0 = (0.5 * (1.0 - (1.0 - peak).max(0.0).sqrt())).clamp(1e-3, 0.5);
    let x: Vec<f64> = omega.iter().map(|w| w - origin).collect();

    let model = |p: &[f64]| S11Model { omega_m: origin + p[0], q_m: p[1], eta_m: p[2] };
    let residual = |p: &[f64]| -> Result<Vec<f64>> {
        let m = model(p);
        Ok(match mode {
            S11Mode::Complex => {
                let mut r = Vec::with_capacity(2 * n);
                for (xi, d) in x.iter().zip(&data) {
                    let z = m.reflection(origin + xi) - d;
                    r.push(z.re);
                    r.push(z.im);
                }
                r
            }
            S11Mode::MagnitudeOnly => x.iter().zip(&mags).map(|(xi, d)| m.reflection(origin + xi).norm() - d).collect(),
        })
    };
    let eta_max = if mode == S11Mode::MagnitudeOnly { 0.5 } else { 1.0 };
    let mut best: Option<super::lm::LmSolution> = None;
    let mut last_err = None;
    let etas: &[f64] = if mode == S11Mode::Complex { &[eta0, 1.0 - eta0] } else { &[eta0] };
    for &e in etas {
        let problem = Problem {
            x0: vec![0.0, q0, e],
            scale: vec![width, q0, 0.1],
            lower: vec![x[0], 1.0, 0.0],
            upper: vec![x[n - 1], 1e3 * q0, eta_max],
            residuals: &residual,
        };
        match minimize(&problem, &LmOptions::default()) {
            Ok(sol) if best.as_ref().is_none_or(|b| sol.cost < b.cost) => best = Some(sol),
            Ok(_) => {}
            Err(e) => last_err = Some(e),
        }
    }
    let sol = best.ok_or_else(|| last_err.unwrap_or(Error::NoConvergence(0)))?;
    let se = sol.std_errors();
    let m = model(&sol.x);
    let mut flags = Vec::new();
    if sol.covariance.is_none() {
        flags.push("singular-covariance".to_string());
    }
    Ok(FitReport {
        kind: "s11".into(),
        parameters: vec![
            param("omega_m", m.omega_m, "rad/s", se[0]),
            param("Q_m", m.q_m, "1", se[1]),
            param("eta_m", m.eta_m, "1", se[2]),
        ],
        residual_norm: sol.cost.sqrt(),
        iterations: sol.iterations,
        converged: sol.converged,
        flags,
        seed: None,
    })
}
