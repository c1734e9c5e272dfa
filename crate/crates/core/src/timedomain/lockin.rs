//! Digital lock-in: quadrature mixing followed by a single-pole RC low-pass.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LockInConfig {
    pub omega_ref: f64,
    pub tau_rc: f64,
}

impl LockInConfig {
    pub fn new(omega_ref: f64, tau_rc: f64) -> Result<Self> {
        if !(omega_ref > 0.0 && omega_ref.is_finite()) {
            return Err(Error::InvalidParameter(format!("reference {omega_ref} rad/s")));
        }
        if !(tau_rc > 0.0 && tau_rc.is_finite()) {
            return Err(Error::InvalidParameter(format!("tau_rc = {tau_rc} s")));
        }
        Ok(Self { omega_ref, tau_rc })
    }

    /// Minimum sample rate (Hz): 20 samples per reference period.
    pub fn required_sample_rate(&self) -> f64 {
        20.0 * self.omega_ref / (2.0 * PI)
    }
}

/// Filtered quadratures. A real input `A cos(omega_ref t + phi)` settles to `A e^{i phi}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Demodulated {
    pub t: Vec<f64>,
    pub iq: Vec<Complex64>,
}

impl Demodulated {
    pub fn amplitude(&self) -> Vec<f64> {
        self.iq.iter().map(|z| z.norm()).collect()
    }

    pub fn phase(&self) -> Vec<f64> {
        self.iq.iter().map(|z| z.arg()).collect()
    }
}

/// Demodulate `signal`, sampled at `sample_rate` (Hz) starting at `t0`.
pub fn lockin_demodulate(signal: &[f64], sample_rate: f64, t0: f64, config: &LockInConfig) -> Result<Demodulated> {
    let required = config.required_sample_rate();
    if !(sample_rate >= required) {
        return Err(Error::Undersampled { rate: sample_rate, required });
    }
    let dt = 1.0 / sample_rate;
    let alpha = -(-dt / config.tau_rc).exp_m1();
    let mut y = Complex64::new(0.0, 0.0);
    let mut t = Vec::with_capacity(signal.len());
    let mut iq = Vec::with_capacity(signal.len());
    for (k, &x) in signal.iter().enumerate() {
        let tk = t0 + k as f64 * dt;
        let mixed = 2.0 * x * Complex64::from_polar(1.0, -config.omega_ref * tk);
        y += alpha * (mixed - y);
        t.push(tk);
        iq.push(y);
    }
    Ok(Demodulated { t, iq })
}
