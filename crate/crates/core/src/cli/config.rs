//! Run configuration files. Every dimensional key carries its unit as a suffix and
//! unknown keys are rejected.

use std::path::Path;

use serde::Deserialize;
use sha2::{Digest, Sha256};

use crate::calibrate::PowerFitInputs;
use crate::hybridize::{self, detuning_for_splitting};
use crate::model::{
    db_to_linear, dbm_to_watts, hz, wavelength_to_omega, AcousticMode, DeviceParams, OpticalModeBare, PortLosses,
    PumpConfig, PumpConfiguration,
};
use crate::{Error, Result};

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub optics: Optics,
    pub acoustic: Vec<Acoustic>,
    pub coupling: Coupling,
    pub losses: Losses,
    pub pump: Pump,
    pub sweep: Option<Sweep>,
    pub environment: Option<Environment>,
    pub pulse: Option<Pulse>,
    pub calibration: Option<Calibration>,
    pub output: Option<Output>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Optics {
    pub wavelength_m: f64,
    pub left_kappa_int_hz: f64,
    pub left_kappa_ex_hz: f64,
    pub right_kappa_int_hz: f64,
    pub right_kappa_ex_hz: f64,
    pub coupling_j_hz: f64,
    /// `omega_l - omega_r`; solved for triple resonance when absent.
    pub ring_detuning_hz: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Acoustic {
    pub frequency_hz: f64,
    pub linewidth_hz: f64,
    /// Microwave extraction ratio `kappa_ex_m / kappa_m`.
    pub eta: f64,
    pub mass_kg: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Coupling {
    pub g0_hz: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Losses {
    pub probes_db: f64,
    pub fiber_chip_db: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Pump {
    pub configuration: PumpConfiguration,
    /// `-inf` switches the pump off.
    pub power_dbm: f64,
    #[serde(default)]
    pub detuning_hz: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    pub start_hz: Option<f64>,
    pub stop_hz: Option<f64>,
    pub points: Option<usize>,
    pub power_start_dbm: Option<f64>,
    pub power_stop_dbm: Option<f64>,
    pub power_points: Option<usize>,
    /// Explicit power list; takes precedence over the power range.
    pub powers_dbm: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Environment {
    pub temperatures_k: Vec<f64>,
    #[serde(default)]
    pub optical_occupancy: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Pulse {
    pub tau_on_s: f64,
    pub rep_rate_hz: f64,
    pub edge_s: Option<f64>,
    pub tau_rc_s: f64,
    pub t_end_s: Option<f64>,
    /// On-chip CW optical power at the signal resonance.
    pub optical_power_dbm: f64,
    pub output_points: Option<usize>,
    /// Detection noise per sample, in output amplitude units (sqrt(photons/s)).
    pub noise_rms: Option<f64>,
}

/// Overrides for the fixed quantities of the efficiency-vs-power fit.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Calibration {
    pub eta_o: Option<f64>,
    pub eta_m: Option<f64>,
    pub kappa_o_hz: Option<f64>,
    pub kappa_m_hz: Option<f64>,
    pub fiber_fiber_db: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Output {
    pub path: Option<String>,
}

/// Parsed configuration with the digest of its source text.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub config: RunConfig,
    pub sha256: String,
}

impl LoadedConfig {
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_str(&text)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn from_str(text: &str) -> Result<Self> {
        let config: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        let sha256 = Sha256::digest(text.as_bytes()).iter().map(|b| format!("{b:02x}")).collect();
        Ok(Self { config, sha256 })
    }
}

fn config_err(e: Error) -> Error {
    match e {
        Error::InvalidParameter(m) | Error::Config(m) => Error::Config(m),
        Error::InvalidFrequency(w) => Error::Config(format!("invalid frequency {w} rad/s")),
        other => other,
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        self.device().map_err(config_err)?;
        if self.pump.power_dbm.is_nan() || self.pump.power_dbm == f64::INFINITY {
            return Err(Error::Config(format!("pump power {} dBm", self.pump.power_dbm)));
        }
        if let Some(env) = &self.environment {
            if env.temperatures_k.iter().any(|t| !(*t >= 0.0 && t.is_finite())) {
                return Err(Error::Config("temperatures must be finite and non-negative".into()));
            }
        }
        Ok(())
    }

    pub fn losses(&self) -> Result<PortLosses> {
        PortLosses::from_db(self.losses.probes_db, self.losses.fiber_chip_db)
    }

    pub fn acoustic_modes(&self) -> Result<Vec<AcousticMode>> {
        self.acoustic
            .iter()
            .map(|a| {
                let kappa = hz(a.linewidth_hz);
                let m = AcousticMode::new(hz(a.frequency_hz), kappa, a.eta * kappa)?;
                Ok(match a.mass_kg {
                    Some(mass) => m.with_mass(mass),
                    None => m,
                })
            })
            .collect()
    }

    /// Device with rings placed for triple resonance unless a detuning is given.
    pub fn device(&self) -> Result<DeviceParams> {
        let o = &self.optics;
        if !(o.wavelength_m > 0.0) {
            return Err(Error::Config(format!("wavelength {} m", o.wavelength_m)));
        }
        let omega_bar = wavelength_to_omega(o.wavelength_m);
        let j = hz(o.coupling_j_hz);
        let acoustic_modes = self.acoustic_modes()?;
        if acoustic_modes.is_empty() {
            return Err(Error::Config("at least one [[acoustic]] mode is required".into()));
        }
        let left = OpticalModeBare::new(omega_bar, hz(o.left_kappa_int_hz), hz(o.left_kappa_ex_hz))?;
        let right = OpticalModeBare::new(omega_bar, hz(o.right_kappa_int_hz), hz(o.right_kappa_ex_hz))?;
        let delta = match o.ring_detuning_hz {
            Some(d) => hz(d),
            None => detuning_for_splitting(&left, &right, j, acoustic_modes[0].omega_m)?,
        };
        let params = DeviceParams {
            left: OpticalModeBare { omega: omega_bar + 0.5 * delta, ..left },
            right: OpticalModeBare { omega: omega_bar - 0.5 * delta, ..right },
            j,
            acoustic_modes,
            g0: hz(self.coupling.g0_hz),
            losses: self.losses()?,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn pump_at(&self, power_dbm: f64) -> Result<PumpConfig> {
        let p = if power_dbm == f64::NEG_INFINITY { 0.0 } else { dbm_to_watts(power_dbm) };
        PumpConfig::new(self.pump.configuration, p).map_err(config_err)
    }

    pub fn pump(&self) -> Result<PumpConfig> {
        self.pump_at(self.pump.power_dbm)
    }

    pub fn pump_detuning(&self) -> f64 {
        hz(self.pump.detuning_hz)
    }

    /// Fixed inputs of the power fit: device values unless overridden.
    pub fn power_fit_inputs(&self) -> Result<PowerFitInputs> {
        let params = self.device()?;
        let modes = hybridize::supermodes(&params.left, &params.right, params.j)?;
        let (kappa_s, kappa_ex_s) = match self.pump.configuration {
            PumpConfiguration::AntiStokes => (modes.kappa_plus, modes.kappa_ex_plus),
            PumpConfiguration::Stokes => (modes.kappa_minus, modes.kappa_ex_minus),
        };
        let cal = self.calibration.clone().unwrap_or_default();
        let acoustic = params.acoustic();
        Ok(PowerFitInputs {
            eta_probes: params.losses.eta_probes,
            eta_fiber_fiber: cal.fiber_fiber_db.map(db_to_linear).unwrap_or(params.losses.eta_fiber_fiber()),
            eta_m: cal.eta_m.unwrap_or(acoustic.eta()),
            eta_o: cal.eta_o.unwrap_or(kappa_ex_s / kappa_s),
            kappa_o: cal.kappa_o_hz.map(hz).unwrap_or(kappa_s),
            kappa_m: cal.kappa_m_hz.map(hz).unwrap_or(acoustic.kappa_m),
            omega_l: wavelength_to_omega(self.optics.wavelength_m),
        })
    }
}
