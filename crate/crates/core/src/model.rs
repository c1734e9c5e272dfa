//! Device parameters, unit conventions and photon-budget helpers.
//!
//! Every rate stored in these types is angular (rad/s); conversions from Hz
//! happen once, at the file boundary.

use std::f64::consts::PI;

use serde::Serialize;

use crate::hybridize;
use crate::{Error, Result};

/// Reduced Planck constant (J s).
pub const HBAR: f64 = 1.054571817e-34;
/// Boltzmann constant (J/K).
pub const K_B: f64 = 1.380649e-23;
/// Speed of light in vacuum (m/s).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
/// Operating wavelength used when a pump frequency is not given.
pub const DEFAULT_WAVELENGTH: f64 = 1550e-9;

pub fn db_to_linear(x_db: f64) -> f64 {
    10f64.powf(x_db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

pub fn dbm_to_watts(p_dbm: f64) -> f64 {
    1e-3 * db_to_linear(p_dbm)
}

pub fn watts_to_dbm(p: f64) -> f64 {
    linear_to_db(p / 1e-3)
}

/// Ordinary frequency (Hz) to angular frequency (rad/s).
pub fn hz(f: f64) -> f64 {
    2.0 * PI * f
}

/// Angular frequency (rad/s) to ordinary frequency (Hz).
pub fn to_hz(omega: f64) -> f64 {
    omega / (2.0 * PI)
}

/// Angular optical frequency of a vacuum wavelength.
pub fn wavelength_to_omega(lambda: f64) -> f64 {
    2.0 * PI * SPEED_OF_LIGHT / lambda
}

/// Photon flux `P / (hbar omega_L)` carried by a beam of power `power`.
pub fn photon_flux(power: f64, omega_l: f64) -> Result<f64> {
    if !(omega_l > 0.0) {
        return Err(Error::InvalidFrequency(omega_l));
    }
    if power < 0.0 {
        return Err(Error::InvalidParameter(format!("negative power {power} W")));
    }
    Ok(power / (HBAR * omega_l))
}

/// Zero-point displacement `sqrt(hbar / (2 m_eff omega_m))` of a mechanical mode.
pub fn x_zpf(m_eff: f64, omega_m: f64) -> Result<f64> {
    if !(m_eff > 0.0) {
        return Err(Error::InvalidParameter(format!("effective mass {m_eff} kg")));
    }
    if !(omega_m > 0.0) {
        return Err(Error::InvalidFrequency(omega_m));
    }
    Ok((HBAR / (2.0 * m_eff * omega_m)).sqrt())
}

/// Intracavity photons of a resonantly pumped mode, `(4 kappa_ex / kappa^2) P_wg / (hbar omega_L)`.
pub fn intracavity_photons_resonant(kappa_ex: f64, kappa: f64, power_wg: f64, omega_l: f64) -> Result<f64> {
    Ok(4.0 * kappa_ex / (kappa * kappa) * photon_flux(power_wg, omega_l)?)
}

/// Bare resonance of one micro-ring.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OpticalModeBare {
    pub omega: f64,
    pub kappa_int: f64,
    pub kappa_ex: f64,
}

impl OpticalModeBare {
    pub fn new(omega: f64, kappa_int: f64, kappa_ex: f64) -> Result<Self> {
        let mode = Self { omega, kappa_int, kappa_ex };
        mode.validate()?;
        Ok(mode)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega > 0.0) {
            return Err(Error::InvalidFrequency(self.omega));
        }
        if !(self.kappa_int >= 0.0 && self.kappa_ex >= 0.0) || !(self.kappa() > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "optical linewidths kappa_int = {}, kappa_ex = {}",
                self.kappa_int, self.kappa_ex
            )));
        }
        Ok(())
    }

    /// Total linewidth.
    pub fn kappa(&self) -> f64 {
        self.kappa_int + self.kappa_ex
    }
}

/// One acoustic (HBAR) overtone coupled to the microwave feedline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AcousticMode {
    pub omega_m: f64,
    pub kappa_m: f64,
    pub kappa_ex_m: f64,
    pub m_eff: Option<f64>,
}

impl AcousticMode {
    pub fn new(omega_m: f64, kappa_m: f64, kappa_ex_m: f64) -> Result<Self> {
        let mode = Self { omega_m, kappa_m, kappa_ex_m, m_eff: None };
        mode.validate()?;
        Ok(mode)
    }

    /// Build from a quality factor and microwave extraction ratio.
    pub fn from_quality(omega_m: f64, q_m: f64, eta_m: f64) -> Result<Self> {
        let kappa_m = omega_m / q_m;
        Self::new(omega_m, kappa_m, eta_m * kappa_m)
    }

    pub fn with_mass(mut self, m_eff: f64) -> Self {
        self.m_eff = Some(m_eff);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega_m > 0.0) {
            return Err(Error::InvalidFrequency(self.omega_m));
        }
        if !(self.kappa_m > 0.0) || !(0.0..=self.kappa_m).contains(&self.kappa_ex_m) {
            return Err(Error::InvalidParameter(format!(
                "acoustic linewidths kappa_m = {}, kappa_ex_m = {}",
                self.kappa_m, self.kappa_ex_m
            )));
        }
        if let Some(m) = self.m_eff {
            if !(m > 0.0) {
                return Err(Error::InvalidParameter(format!("effective mass {m} kg")));
            }
        }
        Ok(())
    }

    /// Microwave extraction ratio `kappa_ex_m / kappa_m`.
    pub fn eta(&self) -> f64 {
        self.kappa_ex_m / self.kappa_m
    }

    pub fn quality_factor(&self) -> f64 {
        self.omega_m / self.kappa_m
    }
}

/// Which supermode the pump addresses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PumpConfiguration {
    /// Pump on the lower (symmetric) supermode: beam-splitter interaction.
    AntiStokes,
    /// Pump on the upper (antisymmetric) supermode: two-mode squeezing.
    Stokes,
}

impl PumpConfiguration {
    /// Pump detunings `(Delta_-, Delta_+)` from the two supermodes under triple resonance.
    pub fn detunings(self, omega_m: f64) -> (f64, f64) {
        match self {
            PumpConfiguration::AntiStokes => (0.0, -omega_m),
            PumpConfiguration::Stokes => (omega_m, 0.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PumpConfig {
    pub configuration: PumpConfiguration,
    /// Power in the input fiber (W).
    pub power_in: f64,
}

impl PumpConfig {
    pub fn new(configuration: PumpConfiguration, power_in: f64) -> Result<Self> {
        if !(power_in >= 0.0) {
            return Err(Error::InvalidParameter(format!("pump power {power_in} W")));
        }
        Ok(Self { configuration, power_in })
    }

    pub fn anti_stokes_dbm(p_dbm: f64) -> Self {
        Self { configuration: PumpConfiguration::AntiStokes, power_in: dbm_to_watts(p_dbm) }
    }

    pub fn stokes_dbm(p_dbm: f64) -> Self {
        Self { configuration: PumpConfiguration::Stokes, power_in: dbm_to_watts(p_dbm) }
    }

    pub fn with_power(self, power_in: f64) -> Self {
        Self { power_in, ..self }
    }

    /// Pump angular frequency: the resonance of the addressed supermode.
    pub fn omega_l(&self, modes: &hybridize::Supermodes) -> f64 {
        match self.configuration {
            PumpConfiguration::AntiStokes => modes.omega_minus,
            PumpConfiguration::Stokes => modes.omega_plus,
        }
    }
}

/// Insertion losses of the microwave probes and of one fiber-chip facet.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PortLosses {
    pub eta_probes: f64,
    pub eta_fiber_chip: f64,
}

impl PortLosses {
    pub fn new(eta_probes: f64, eta_fiber_chip: f64) -> Result<Self> {
        let losses = Self { eta_probes, eta_fiber_chip };
        losses.validate()?;
        Ok(losses)
    }

    pub fn lossless() -> Self {
        Self { eta_probes: 1.0, eta_fiber_chip: 1.0 }
    }

    pub fn from_db(probes_db: f64, fiber_chip_db: f64) -> Result<Self> {
        Self::new(db_to_linear(probes_db), db_to_linear(fiber_chip_db))
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("eta_probes", self.eta_probes), ("eta_fiber_chip", self.eta_fiber_chip)] {
            if !(v > 0.0 && v <= 1.0) {
                return Err(Error::InvalidParameter(format!("{name} = {v} not in (0, 1]")));
            }
        }
        Ok(())
    }

    /// Fiber-to-fiber transmission (both facets).
    pub fn eta_fiber_fiber(&self) -> f64 {
        self.eta_fiber_chip * self.eta_fiber_chip
    }
}

/// Complete physical description of a transducer.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeviceParams {
    pub left: OpticalModeBare,
    pub right: OpticalModeBare,
    /// Inter-ring coupling rate.
    pub j: f64,
    /// Acoustic overtones; the first one is the transduction mode.
    pub acoustic_modes: Vec<AcousticMode>,
    /// Vacuum optomechanical coupling rate to the left ring.
    pub g0: f64,
    pub losses: PortLosses,
}

impl DeviceParams {
    pub fn validate(&self) -> Result<()> {
        self.left.validate()?;
        self.right.validate()?;
        if !(self.j >= 0.0) {
            return Err(Error::InvalidParameter(format!("inter-ring coupling J = {}", self.j)));
        }
        if !(self.g0 >= 0.0) {
            return Err(Error::InvalidParameter(format!("g0 = {}", self.g0)));
        }
        if self.acoustic_modes.is_empty() {
            return Err(Error::InvalidParameter("at least one acoustic mode is required".into()));
        }
        for m in &self.acoustic_modes {
            m.validate()?;
        }
        for (i, a) in self.acoustic_modes.iter().enumerate() {
            for b in &self.acoustic_modes[i + 1..] {
                if a.omega_m == b.omega_m {
                    return Err(Error::InvalidParameter(format!(
                        "duplicate acoustic frequency {} rad/s",
                        a.omega_m
                    )));
                }
            }
        }
        self.losses.validate()
    }

    /// The transduction acoustic mode.
    pub fn acoustic(&self) -> &AcousticMode {
        &self.acoustic_modes[0]
    }
}

/// Intracavity pump photons of the addressed supermode for a resonant pump.
pub fn intracavity_photons(params: &DeviceParams, pump: &PumpConfig) -> Result<f64> {
    let modes = hybridize::supermodes(&params.left, &params.right, params.j)?;
    let (kappa_ex, kappa) = match pump.configuration {
        PumpConfiguration::AntiStokes => (modes.kappa_ex_minus, modes.kappa_minus),
        PumpConfiguration::Stokes => (modes.kappa_ex_plus, modes.kappa_plus),
    };
    let p_wg = params.losses.eta_fiber_chip * pump.power_in;
    intracavity_photons_resonant(kappa_ex, kappa, p_wg, pump.omega_l(&modes))
}
