//! Thermal occupancies, added noise, pair generation and cross-correlations.
//!
//! Operator-valued noise expressions are evaluated as stationary mean occupancies
//! of thermal or vacuum inputs, so terms linear in the input amplitudes vanish.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::Mutex;

use rayon::prelude::*;
use serde::Serialize;

use crate::model::{PumpConfiguration, HBAR, K_B};
use crate::response::{onchip_efficiency, transfer, OperatingPoint, Port};
use crate::{Error, Result};

/// Bose-Einstein occupancy `1 / (exp(hbar omega / k_B T) - 1)`.
pub fn n_thermal(omega: f64, temperature: f64) -> Result<f64> {
    if !(omega > 0.0) || !(temperature >= 0.0) {
        return Err(Error::InvalidParameter(format!("omega = {omega}, T = {temperature}")));
    }
    if temperature == 0.0 {
        return Ok(0.0);
    }
    Ok(1.0 / (HBAR * omega / (K_B * temperature)).exp_m1())
}

/// Bath at a fixed temperature with memoized occupancies.
#[derive(Debug)]
pub struct ThermalEnvironment {
    temperature: f64,
    cache: Mutex<HashMap<u64, f64>>,
}

impl ThermalEnvironment {
    pub fn new(temperature: f64) -> Result<Self> {
        if !(temperature >= 0.0 && temperature.is_finite()) {
            return Err(Error::InvalidParameter(format!("temperature {temperature} K")));
        }
        Ok(Self { temperature, cache: Mutex::new(HashMap::new()) })
    }

    pub fn temperature(&self) -> f64 {
        self.temperature
    }

    pub fn occupancy(&self, omega: f64) -> Result<f64> {
        let key = omega.to_bits();
        if let Some(&n) = self.cache.lock().expect("cache lock").get(&key) {
            return Ok(n);
        }
        let n = n_thermal(omega, self.temperature)?;
        self.cache.lock().expect("cache lock").insert(key, n);
        Ok(n)
    }
}

impl Clone for ThermalEnvironment {
    fn clone(&self) -> Self {
        let cache = self.cache.lock().expect("cache lock").clone();
        Self { temperature: self.temperature, cache: Mutex::new(cache) }
    }
}

/// Thermal decoherence rate `kappa_m n_th / 2 pi`, in Hz.
pub fn decoherence_rate(kappa_m: f64, n_th: f64) -> f64 {
    kappa_m / (2.0 * PI) * n_th
}

/// Pair generation rate, closed form and numeric, in two integration conventions.
///
/// `per_rad` integrates the efficiency over angular frequency (rad/s);
/// `per_hz` integrates over ordinary frequency, i.e. divides by `2 pi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PairRate {
    pub eta_peak: f64,
    pub closed_form_per_rad: f64,
    pub numeric_per_rad: f64,
    pub closed_form_per_hz: f64,
    pub numeric_per_hz: f64,
    /// Relative change of the numeric integral when the step is halved.
    pub step_sensitivity: f64,
}

/// Which convention, if any, reproduces an externally quoted rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConventionCheck {
    pub reported: f64,
    pub ratio_per_rad: f64,
    pub ratio_per_hz: f64,
    pub reproduced: bool,
}

impl PairRate {
    /// Compare with a quoted rate; reproduced if either convention lands within `rel_tol`.
    pub fn compare(&self, reported: f64, rel_tol: f64) -> ConventionCheck {
        let ratio_per_rad = self.closed_form_per_rad / reported;
        let ratio_per_hz = self.closed_form_per_hz / reported;
        ConventionCheck {
            reported,
            ratio_per_rad,
            ratio_per_hz,
            reproduced: (ratio_per_rad - 1.0).abs() <= rel_tol || (ratio_per_hz - 1.0).abs() <= rel_tol,
        }
    }
}

/// `(pi/2) (1/kappa_- + 1/kappa_m)^-1 eta_peak`, in photons per unit angular bandwidth.
pub fn pair_rate_closed_form(eta_peak: f64, kappa_minus: f64, kappa_m: f64) -> f64 {
    0.5 * PI * eta_peak / (1.0 / kappa_minus + 1.0 / kappa_m)
}

/// Composite trapezoid of `f` over `[-half_span, half_span]` with `n` intervals.
pub fn trapezoid<F: Fn(f64) -> f64 + Sync>(f: F, half_span: f64, n: usize) -> f64 {
    let h = 2.0 * half_span / n as f64;
    let inner: f64 = (1..n).into_par_iter().map(|k| f(-half_span + h * k as f64)).sum();
    h * (inner + 0.5 * (f(-half_span) + f(half_span)))
}

/// Spontaneous pair rate of a Stokes operating point.
pub fn pair_rate(op: &OperatingPoint) -> Result<PairRate> {
    if op.configuration != PumpConfiguration::Stokes {
        return Err(Error::OutOfRegime("pair generation requires the Stokes configuration".into()));
    }
    op.check_stability()?;
    let eta_peak = onchip_efficiency(op, 0.0)?;
    let closed = pair_rate_closed_form(eta_peak, op.kappa_minus, op.kappa_m);
    let narrow = op.kappa_minus.min(op.kappa_m);
    let half_span = 400.0 * op.kappa_minus.max(op.kappa_m);
    let n = ((2.0 * half_span / (narrow / 40.0)).ceil() as usize).max(1000);
    let eta = |w: f64| onchip_efficiency(op, w).unwrap_or(f64::NAN);
    let coarse = trapezoid(eta, half_span, n);
    let fine = trapezoid(eta, half_span, 2 * n);
    if !fine.is_finite() {
        return Err(Error::Diverged(fine));
    }
    let step_sensitivity = if fine == 0.0 { 0.0 } else { ((fine - coarse) / fine).abs() };
    Ok(PairRate {
        eta_peak,
        closed_form_per_rad: closed,
        numeric_per_rad: fine,
        closed_form_per_hz: closed / (2.0 * PI),
        numeric_per_hz: fine / (2.0 * PI),
        step_sensitivity,
    })
}

/// Pair rate from quoted inputs alone, treating the efficiency as a product of
/// two Lorentzians. Rates in rad/s.
pub fn pair_rate_from_inputs(eta_peak: f64, kappa_minus: f64, kappa_m: f64) -> PairRate {
    let closed = pair_rate_closed_form(eta_peak, kappa_minus, kappa_m);
    let lorentz = |k: f64, w: f64| 0.25 * k * k / (w * w + 0.25 * k * k);
    let f = |w: f64| eta_peak * lorentz(kappa_minus, w) * lorentz(kappa_m, w);
    let half_span = 400.0 * kappa_minus.max(kappa_m);
    let n = ((2.0 * half_span / (kappa_minus.min(kappa_m) / 40.0)).ceil() as usize).max(1000);
    let coarse = trapezoid(f, half_span, n);
    let fine = trapezoid(f, half_span, 2 * n);
    PairRate {
        eta_peak,
        closed_form_per_rad: closed,
        numeric_per_rad: fine,
        closed_form_per_hz: closed / (2.0 * PI),
        numeric_per_hz: fine / (2.0 * PI),
        step_sensitivity: if fine == 0.0 { 0.0 } else { ((fine - coarse) / fine).abs() },
    }
}

/// Contributions to the input-referred added noise of one conversion direction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NoiseBreakdown {
    pub optical_leakage: f64,
    pub microwave_thermal: f64,
    pub squeezing_floor: f64,
}

impl NoiseBreakdown {
    pub fn total(&self) -> f64 {
        self.optical_leakage + self.microwave_thermal + self.squeezing_floor
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NoiseReport {
    pub configuration: PumpConfiguration,
    pub n_th: f64,
    pub n_added_up: f64,
    pub n_added_down: f64,
    pub up: NoiseBreakdown,
    pub down: NoiseBreakdown,
}

fn ratio(num: num_complex::Complex64, den: num_complex::Complex64) -> Result<f64> {
    let r = num.norm_sqr() / den.norm_sqr();
    if den.norm_sqr() == 0.0 || !r.is_finite() {
        return Err(Error::UnboundedNoise);
    }
    Ok(r)
}

/// Added noise quanta at offset `omega` for optical input occupancy `n_optical_in`.
pub fn added_noise(
    op: &OperatingPoint,
    omega: f64,
    env: &ThermalEnvironment,
    n_optical_in: f64,
) -> Result<NoiseReport> {
    if !(n_optical_in >= 0.0) {
        return Err(Error::InvalidParameter(format!("optical occupancy {n_optical_in}")));
    }
    let microwave = match op.configuration {
        PumpConfiguration::AntiStokes => op.omega_m + omega,
        PumpConfiguration::Stokes => op.omega_m - omega,
    };
    let n_th = env.occupancy(microwave)?;
    let s_aa = transfer(op, Port::Optical, Port::Optical, omega)?;
    let s_ac = transfer(op, Port::Microwave, Port::Optical, omega)?;
    let s_ca = transfer(op, Port::Optical, Port::Microwave, omega)?;
    let s_cc = transfer(op, Port::Microwave, Port::Microwave, omega)?;
    let leak = ratio(s_aa, s_ac)? * n_optical_in;
    let back = ratio(s_cc, s_ca)? * n_th;
    let (up, down) = match op.configuration {
        PumpConfiguration::AntiStokes => (
            NoiseBreakdown { optical_leakage: leak, microwave_thermal: 0.0, squeezing_floor: 0.0 },
            NoiseBreakdown { optical_leakage: 0.0, microwave_thermal: back, squeezing_floor: 0.0 },
        ),
        PumpConfiguration::Stokes => (
            NoiseBreakdown { optical_leakage: leak, microwave_thermal: n_th, squeezing_floor: 1.0 },
            NoiseBreakdown { optical_leakage: 0.0, microwave_thermal: back, squeezing_floor: 1.0 },
        ),
    };
    Ok(NoiseReport {
        configuration: op.configuration,
        n_th,
        n_added_up: up.total(),
        n_added_down: down.total(),
        up,
        down,
    })
}

/// Cross-correlation with a Cauchy-Schwarz verdict.
///
/// The bound assumes thermal marginals, `g_aa = g_cc = 2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CrossCorrelation {
    pub g2: f64,
    pub bound: f64,
    pub violates_cauchy_schwarz: bool,
}

pub const ASSUMED_AUTO_CORRELATION: f64 = 2.0;

/// `g2_ac` at offset `omega` for a spontaneous (no coherent input) Stokes point.
pub fn g2_cross(op: &OperatingPoint, omega: f64, n_th: f64) -> Result<CrossCorrelation> {
    if op.configuration != PumpConfiguration::Stokes {
        return Err(Error::OutOfRegime("cross-correlation requires the Stokes configuration".into()));
    }
    if !(n_th >= 0.0) {
        return Err(Error::InvalidParameter(format!("thermal occupancy {n_th}")));
    }
    let s_aa = transfer(op, Port::Optical, Port::Optical, omega)?;
    let s_ac = transfer(op, Port::Microwave, Port::Optical, omega)?;
    let s_ca = transfer(op, Port::Optical, Port::Microwave, omega)?;
    let s_cc = transfer(op, Port::Microwave, Port::Microwave, omega)?;
    let eta = s_ac.norm_sqr();
    if eta == 0.0 {
        return Err(Error::UnboundedNoise);
    }
    let denom = (eta + s_cc.norm_sqr() * n_th) * (1.0 + n_th);
    let interference = 2.0 * (s_aa.conj() * s_ac * s_ca.conj() * s_cc).re;
    let g2 = (s_aa.norm_sqr() + eta) / denom + n_th / (1.0 + n_th) + interference * n_th / (eta * denom);
    if !g2.is_finite() {
        return Err(Error::UnboundedNoise);
    }
    let bound = ASSUMED_AUTO_CORRELATION;
    Ok(CrossCorrelation { g2, bound, violates_cauchy_schwarz: g2 > bound })
}

/// `int a^2/(w^2+a^2) * b^2/(w^2+b^2) dw = pi a b / (a + b)`.
pub fn lorentzian_product_integral(a: f64, b: f64) -> f64 {
    PI * a * b / (a + b)
}
