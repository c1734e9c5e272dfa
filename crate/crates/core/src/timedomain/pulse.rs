//! Pulsed pumping and the photothermal response model.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{integrate, lockin_demodulate, Demodulated, Drives, Envelope, LockInConfig, Model, StateVector, Tone};
use crate::response::OperatingPoint;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum PulseShape {
    Rect,
    /// Raised-cosine rise and fall, each lasting `edge` seconds.
    RaisedCosine { edge: f64 },
}

/// Periodic gate: on for `tau_on` at the start of every period `1 / f_rep`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PulseSequence {
    pub tau_on: f64,
    pub f_rep: f64,
    pub shape: PulseShape,
}

impl PulseSequence {
    pub fn new(tau_on: f64, f_rep: f64, shape: PulseShape) -> Result<Self> {
        let p = Self { tau_on, f_rep, shape };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tau_on > 0.0 && self.f_rep > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "pulse tau_on = {} s, f_rep = {} Hz",
                self.tau_on, self.f_rep
            )));
        }
        if self.tau_on * self.f_rep > 1.0 {
            return Err(Error::InvalidParameter(format!(
                "duty cycle {} exceeds 1",
                self.tau_on * self.f_rep
            )));
        }
        if let PulseShape::RaisedCosine { edge } = self.shape {
            if !(edge > 0.0 && 2.0 * edge <= self.tau_on) {
                return Err(Error::InvalidParameter(format!("edge time {edge} s")));
            }
        }
        Ok(())
    }

    pub fn duty_cycle(&self) -> f64 {
        self.tau_on * self.f_rep
    }

    /// Gate value in `[0, 1]`; zero for `t < 0`.
    pub fn envelope(&self, t: f64) -> f64 {
        if t < 0.0 {
            return 0.0;
        }
        let s = t % (1.0 / self.f_rep);
        if s >= self.tau_on {
            return 0.0;
        }
        match self.shape {
            PulseShape::Rect => 1.0,
            PulseShape::RaisedCosine { edge } => {
                let ramp = |x: f64| 0.5 * (1.0 - (std::f64::consts::PI * x / edge).cos());
                if s < edge {
                    ramp(s)
                } else if s > self.tau_on - edge {
                    ramp(self.tau_on - s)
                } else {
                    1.0
                }
            }
        }
    }
}

/// Settings of one pulsed down-conversion run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PulsedRun {
    pub pulse: PulseSequence,
    /// Optical input amplitude (sqrt(photons/s)) at the signal resonance.
    pub optical_amplitude: Complex64,
    pub lockin: LockInConfig,
    pub t_end: f64,
    pub noise: Option<DetectionNoise>,
}

/// White Gaussian noise added to the detected microwave signal before demodulation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DetectionNoise {
    /// Standard deviation per sample, in output amplitude units.
    pub rms: f64,
    pub seed: u64,
}

/// Gated pump, CW optical input, microwave output synthesized on its carrier and
/// demodulated by the lock-in.
pub fn pulsed_downconversion(op: &OperatingPoint, run: &PulsedRun) -> Result<Demodulated> {
    run.pulse.validate()?;
    let model = Model::signal_only(*op);
    let drives = Drives {
        optical: Some(Tone::cw(run.optical_amplitude, 0.0)),
        microwave: None,
        pump: Envelope::Pulsed(run.pulse),
    };
    let dt = model.max_step(&drives).min(1.0 / (1.25 * run.lockin.required_sample_rate()));
    let traj = integrate(&model, &drives, StateVector::default(), run.t_end, dt)?;
    let carrier = op.omega_m;
    let mut signal: Vec<f64> = traj
        .t
        .iter()
        .zip(&traj.c_out)
        .map(|(&t, c)| (c * Complex64::from_polar(1.0, -carrier * t)).re)
        .collect();
    if let Some(n) = run.noise {
        for (s, e) in signal.iter_mut().zip(crate::calibrate::gaussian_noise(n.seed, traj.t.len(), n.rms)) {
            *s += e;
        }
    }
    lockin_demodulate(&signal, 1.0 / dt, 0.0, &run.lockin)
}

/// Three-plateau photothermal transfer function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhotothermalModel {
    pub a_kerr: f64,
    pub a_local: f64,
    pub f_local: f64,
    pub a_global: f64,
    pub f_global: f64,
}

impl PhotothermalModel {
    pub fn new(a_kerr: f64, a_local: f64, f_local: f64, a_global: f64, f_global: f64) -> Result<Self> {
        if !(f_local > 0.0 && f_global > 0.0 && f_global < f_local) {
            return Err(Error::InvalidParameter(format!(
                "corner frequencies f_global = {f_global}, f_local = {f_local}"
            )));
        }
        Ok(Self { a_kerr, a_local, f_local, a_global, f_global })
    }
}

/// `H(f) = a_kerr + a_local / (1 + i f/f_local) + a_global / (1 + i f/f_global)`.
pub fn photothermal_response(f: f64, m: &PhotothermalModel) -> Complex64 {
    let pole = |a: f64, fc: f64| a / Complex64::new(1.0, f / fc);
    m.a_kerr + pole(m.a_local, m.f_local) + pole(m.a_global, m.f_global)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pulse_validation_and_shape() {
        assert!(PulseSequence::new(2e-6, 1e6, PulseShape::Rect).is_err());
        let p = PulseSequence::new(1e-6, 100e3, PulseShape::Rect).unwrap();
        assert_eq!(p.envelope(0.5e-6), 1.0);
        assert_eq!(p.envelope(2e-6), 0.0);
        assert_eq!(p.envelope(10.5e-6), 1.0);
        let r = PulseSequence::new(1e-6, 100e3, PulseShape::RaisedCosine { edge: 100e-9 }).unwrap();
        assert!((r.envelope(50e-9) - 0.5).abs() < 1e-12);
        assert!((r.envelope(950e-9) - 0.5).abs() < 1e-9);
    }

    #[test]
    fn photothermal_plateaus() {
        let m = PhotothermalModel::new(0.1, 1.0, 100e3, 3.0, 1e3).unwrap();
        assert!((photothermal_response(1e9, &m).norm() - 0.1).abs() < 1e-3);
        assert!((photothermal_response(1e-3, &m).norm() - 4.1).abs() < 1e-3);
        assert!(PhotothermalModel::new(0.1, 1.0, 1e3, 3.0, 1e5).is_err());
    }
}
