//! Single-photon cooperativity from the low-power efficiency slope.

use serde::{Deserialize, Serialize};

use super::{param, FitReport};
use crate::model::HBAR;
use crate::{Error, Result};

/// One measured point: fiber input power (W) and linear off-chip efficiency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerPoint {
    pub power_in: f64,
    pub eta_tot: f64,
}

/// Quantities held fixed while inverting the efficiency slope.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerFitInputs {
    pub eta_probes: f64,
    pub eta_fiber_fiber: f64,
    pub eta_m: f64,
    pub eta_o: f64,
    pub kappa_o: f64,
    pub kappa_m: f64,
    /// Pump angular frequency.
    pub omega_l: f64,
}

impl PowerFitInputs {
    /// `d eta_tot / d P_in` per unit single-photon cooperativity.
    pub fn gain_per_c0(&self) -> f64 {
        16.0 * self.eta_probes * self.eta_fiber_fiber * self.eta_m * self.eta_o * self.eta_o / (HBAR * self.omega_l * self.kappa_o)
    }

    /// Low-cooperativity off-chip efficiency.
    pub fn eta_tot(&self, c0: f64, power_in: f64) -> f64 {
        self.gain_per_c0() * c0 * power_in
    }

    fn validate(&self) -> Result<()> {
        let ratios = [self.eta_probes, self.eta_fiber_fiber, self.eta_m, self.eta_o];
        if ratios.iter().any(|r| !(*r > 0.0 && *r <= 1.0)) {
            return Err(Error::InvalidParameter(format!("efficiencies {ratios:?} must lie in (0, 1]")));
        }
        if !(self.kappa_o > 0.0 && self.kappa_m > 0.0 && self.omega_l > 0.0) {
            return Err(Error::InvalidParameter("rates must be positive".into()));
        }
        Ok(())
    }
}

/// Relative curvature above which the data is not treated as linear in power.
pub const MAX_CURVATURE: f64 = 0.1;

/// Fit `eta_tot = s P_in` with relative weights and invert the slope for `C0`
/// and `g0 = sqrt(kappa_o kappa_m C0)`.
pub fn fit_efficiency_power(points: &[PowerPoint], fixed: &PowerFitInputs) -> Result<FitReport> {
    fixed.validate()?;
    if points.is_empty() {
        return Err(Error::DegenerateData("no efficiency points".into()));
    }
    if points.iter().any(|p| !(p.power_in > 0.0 && p.eta_tot > 0.0 && p.eta_tot.is_finite())) {
        return Err(Error::DegenerateData("powers and efficiencies must be positive".into()));
    }
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a.power_in.total_cmp(&b.power_in).then(a.eta_tot.total_cmp(&b.eta_tot)));
    let n = pts.len();
    // With unit log-log slope, eta/P is the slope itself at every point.
    let ratio: Vec<f64> = pts.iter().map(|p| p.eta_tot / p.power_in).collect();
    let slope = ratio.iter().sum::<f64>() / n as f64;
    let spread = ratio.iter().map(|r| (r - slope).powi(2)).sum::<f64>();
    let mut flags = Vec::new();

    let distinct = pts.windows(2).filter(|w| w[1].power_in > w[0].power_in).count() + 1;
    if distinct >= 3 {
        // eta/P = s + q P; curvature measured at the largest power.
        let pm = pts.iter().map(|p| p.power_in).sum::<f64>() / n as f64;
        let sxx: f64 = pts.iter().map(|p| (p.power_in - pm).powi(2)).sum();
        let sxy: f64 = pts.iter().zip(&ratio).map(|(p, r)| (p.power_in - pm) * (r - slope)).sum();
        let q = sxy / sxx;
        let s0 = slope - q * pm;
        let curvature = (q * pts[n - 1].power_in / s0).abs();
        if !(curvature <= MAX_CURVATURE) {
            return Err(Error::OutOfRegime(format!(
                "efficiency deviates from linear power dependence by {:.1}%",
                100.0 * curvature
            )));
        }
    }

    let slope_err = if n > 1 {
        (spread / (n - 1) as f64 / n as f64).sqrt() * slope / slope.abs()
    } else {
        flags.push("single-point".to_string());
        f64::NAN
    };
    let c0 = slope / fixed.gain_per_c0();
    let c0_err = c0 * slope_err / slope;
    let g0 = (fixed.kappa_o * fixed.kappa_m * c0).sqrt();
    let g0_err = 0.5 * g0 * c0_err / c0;
    let rel_res = (spread.sqrt() / slope).abs();
    Ok(FitReport {
        kind: "power".into(),
        parameters: vec![
            param("C0", c0, "1", c0_err),
            param("g0", g0, "rad/s", g0_err),
            param("slope", slope, "1/W", slope_err),
        ],
        residual_norm: rel_res,
        iterations: 1,
        converged: true,
        flags,
        seed: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{db_to_linear, dbm_to_watts, hz, wavelength_to_omega, DEFAULT_WAVELENGTH};

    fn inputs() -> PowerFitInputs {
        PowerFitInputs {
            eta_probes: db_to_linear(-3.0),
            eta_fiber_fiber: db_to_linear(-8.0),
            eta_m: 0.11,
            eta_o: 0.35,
            kappa_o: hz(170e6),
            kappa_m: hz(13e6),
            omega_l: wavelength_to_omega(DEFAULT_WAVELENGTH),
        }
    }

    #[test]
    fn single_point_inversion() {
        let p = [PowerPoint { power_in: dbm_to_watts(10.0), eta_tot: db_to_linear(-60.0) }];
        let r = fit_efficiency_power(&p, &inputs()).unwrap();
        // Hand evaluation of the inversion formula.
        assert!((r.value("C0") / 7.9909e-13 - 1.0).abs() < 1e-3, "{}", r.value("C0"));
        assert!((r.value("g0") / hz(42.03) - 1.0).abs() < 1e-3);
        assert!(r.has_flag("single-point"));
    }

    #[test]
    fn loss_scaling_is_consistent() {
        let f = inputs();
        let doubled = PowerFitInputs { eta_probes: 0.5 * f.eta_probes, ..f };
        let p = dbm_to_watts(15.0);
        let a = fit_efficiency_power(&[PowerPoint { power_in: p, eta_tot: f.eta_tot(8e-13, p) }], &f).unwrap();
        let b = fit_efficiency_power(&[PowerPoint { power_in: p, eta_tot: doubled.eta_tot(8e-13, p) }], &doubled).unwrap();
        assert!((a.value("C0") / b.value("C0") - 1.0).abs() < 1e-12);
    }

    #[test]
    fn saturation_is_out_of_regime() {
        let f = inputs();
        let pts: Vec<PowerPoint> = (10..=21)
            .map(|dbm| {
                let p = dbm_to_watts(dbm as f64);
                PowerPoint { power_in: p, eta_tot: f.eta_tot(8e-13, p) / (1.0 + p / 0.05) }
            })
            .collect();
        assert!(matches!(fit_efficiency_power(&pts, &f), Err(Error::OutOfRegime(_))));
    }
}
