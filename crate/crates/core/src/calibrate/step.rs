//! Single-pole RC step response.

use serde::Serialize;

use super::lm::{minimize, LmOptions, Problem};
use super::{param, sorted_by_x, FitReport};
use crate::{Error, Result};

/// `A (1 - exp(-(t - t0) / tau))` for `t >= t0`, zero before.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RcStep {
    pub tau: f64,
    pub amplitude: f64,
    pub t0: f64,
}

impl RcStep {
    pub fn value(&self, t: f64) -> f64 {
        if t < self.t0 {
            0.0
        } else {
            -self.amplitude * (-(t - self.t0) / self.tau).exp_m1()
        }
    }
}

/// Fit the first rising edge of `envelope(t)`. Samples after the envelope falls
/// back below half of its peak are ignored.
pub fn fit_rc_step(t: &[f64], envelope: &[f64]) -> Result<FitReport> {
    let (t, y) = sorted_by_x(t, envelope)?;
    if t.len() < 8 {
        return Err(Error::DegenerateData(format!("{} samples", t.len())));
    }
    let (ipk, &peak) = y.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).unwrap();
    let no_edge = || Error::DegenerateData("no rising edge in the envelope".into());
    if !(peak > 0.0) || y[0] >= 0.1 * peak {
        return Err(no_edge());
    }
    let i10 = (0..=ipk).find(|&k| y[k] >= 0.1 * peak).ok_or_else(no_edge)?;
    let i90 = (i10..=ipk).find(|&k| y[k] >= 0.9 * peak).ok_or_else(no_edge)?;
    let end = (ipk..y.len()).find(|&k| y[k] < 0.5 * peak).unwrap_or(y.len());
    let (t, y) = (&t[..end], &y[..end]);
    let rise = (t[i90] - t[i10]).max(t[1] - t[0]);
    let tau0 = rise / 2.2;
    let t00 = t[i10] - tau0 * (1.0f64 / 0.9).ln();
    let plateau = &y[i90..];
    let a0 = plateau.iter().sum::<f64>() / plateau.len() as f64;
    let a0 = a0.max(0.9 * peak);
    let origin = t00;
    let x: Vec<f64> = t.iter().map(|v| v - origin).collect();

    let model = |p: &[f64]| RcStep { tau: p[0], amplitude: p[1], t0: origin + p[2] };
    let residual = |p: &[f64]| -> Result<Vec<f64>> {
        let m = RcStep { tau: p[0], amplitude: p[1], t0: p[2] };
        Ok(x.iter().zip(y).map(|(xi, yi)| m.value(*xi) - yi).collect())
    };
    let problem = Problem {
        x0: vec![tau0, a0, 0.0],
        scale: vec![tau0, a0.abs(), tau0],
        lower: vec![1e-3 * tau0, 0.0, x[0]],
        upper: vec![1e3 * tau0, 10.0 * peak, x[x.len() - 1]],
        residuals: &residual,
    };
    let sol = minimize(&problem, &LmOptions::default())?;
    let se = sol.std_errors();
    let m = model(&sol.x);
    let mut flags = Vec::new();
    if sol.covariance.is_none() {
        flags.push("singular-covariance".to_string());
    }
    Ok(FitReport {
        kind: "step".into(),
        parameters: vec![
            param("tau_rc", m.tau, "s", se[0]),
            param("amplitude", m.amplitude, "1", se[1]),
            param("t0", m.t0, "s", se[2]),
        ],
        residual_norm: sol.cost.sqrt(),
        iterations: sol.iterations,
        converged: sol.converged,
        flags,
        seed: None,
    })
}
