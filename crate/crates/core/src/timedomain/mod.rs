//! Mean-field time-domain integration of the linearized transducer equations.
//!
//! Each mode evolves as a slowly varying envelope in its own rotating frame:
//! `a_minus` at `omega_-`, `a_plus` at `omega_+`, `b` at `omega_m`. Drive offsets
//! follow the spectrum conventions of [`crate::response`]. The mode that does not
//! carry the optical signal sees its drive shifted by `omega_m`, which sets the
//! step size whenever it is simulated.

mod lockin;
mod pulse;

use std::path::Path;

use num_complex::Complex64;
use serde::Serialize;

use crate::model::PumpConfiguration;
use crate::response::{OperatingPoint, Port};
use crate::{Error, Result};

pub use lockin::{lockin_demodulate, Demodulated, LockInConfig};
pub use pulse::{
    photothermal_response, pulsed_downconversion, DetectionNoise, PhotothermalModel, PulseShape,
    PulseSequence, PulsedRun,
};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Steps per inverse of the fastest rate.
pub const STEPS_PER_RATE: f64 = 50.0;

/// Growth factor over the reference scale that counts as divergence.
const BLOWUP: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct StateVector {
    pub a_minus: Complex64,
    pub a_plus: Complex64,
    pub b: Complex64,
    /// Intracavity pump amplitude relative to its continuous-wave value.
    pub pump: f64,
}

impl StateVector {
    pub fn quanta(&self) -> f64 {
        self.a_minus.norm_sqr() + self.a_plus.norm_sqr() + self.b.norm_sqr()
    }

    fn is_finite(&self) -> bool {
        [self.a_minus, self.a_plus, self.b].iter().all(|z| z.re.is_finite() && z.im.is_finite())
            && self.pump.is_finite()
    }

    fn axpy(&self, h: f64, d: &StateVector) -> StateVector {
        StateVector {
            a_minus: self.a_minus + h * d.a_minus,
            a_plus: self.a_plus + h * d.a_plus,
            b: self.b + h * d.b,
            pump: self.pump + h * d.pump,
        }
    }
}

/// Time dependence of a drive or of the pump.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Envelope {
    Continuous,
    /// Off before `t_on`, on afterwards.
    Step { t_on: f64 },
    Pulsed(PulseSequence),
}

impl Envelope {
    pub fn at(&self, t: f64) -> f64 {
        match self {
            Envelope::Continuous => 1.0,
            Envelope::Step { t_on } => {
                if t >= *t_on {
                    1.0
                } else {
                    0.0
                }
            }
            Envelope::Pulsed(p) => p.envelope(t),
        }
    }
}

/// Coherent input `amplitude * envelope(t)` at offset `omega` (rad/s).
///
/// Optical tones sit at the signal supermode plus `omega`. Microwave tones sit at
/// `omega_m + omega` (anti-Stokes) or `omega_m - omega` (Stokes), so that `omega`
/// is always the spectrum offset.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tone {
    pub amplitude: Complex64,
    pub omega: f64,
    pub envelope: Envelope,
}

impl Tone {
    pub fn cw(amplitude: Complex64, omega: f64) -> Self {
        Self { amplitude, omega, envelope: Envelope::Continuous }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Drives {
    pub optical: Option<Tone>,
    pub microwave: Option<Tone>,
    /// Pump gating; anything but `Continuous` starts with an empty pump cavity.
    pub pump: Envelope,
}

impl Default for Drives {
    fn default() -> Self {
        Self { optical: None, microwave: None, pump: Envelope::Continuous }
    }
}

/// Rates and switches of one simulation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Model {
    pub op: OperatingPoint,
    /// Simulate the supermode that does not carry the signal.
    pub include_off_resonant: bool,
    /// Keep every n-th step in the trajectory (the final step is always kept).
    pub record_every: usize,
}

impl Model {
    pub fn new(op: OperatingPoint) -> Self {
        Self { op, include_off_resonant: true, record_every: 1 }
    }

    pub fn signal_only(op: OperatingPoint) -> Self {
        Self { op, include_off_resonant: false, record_every: 1 }
    }

    pub fn recording_every(self, n: usize) -> Self {
        Self { record_every: n.max(1), ..self }
    }

    fn pump_kappa(&self) -> f64 {
        self.op.pump_mode().0
    }

    /// Largest rate (rad/s) the integrator must resolve under `drives`.
    pub fn fastest_rate(&self, drives: &Drives) -> f64 {
        let op = &self.op;
        let mut rate = op.kappa_m.max(2.0 * op.g.norm()).max(op.signal_mode().0);
        let tones = [drives.optical, drives.microwave];
        for t in tones.iter().flatten() {
            rate = rate.max(t.omega.abs());
        }
        if self.include_off_resonant {
            rate = rate.max(op.pump_mode().0);
            if let Some(t) = drives.optical {
                rate = rate.max((t.omega.abs() + op.omega_m).abs());
            }
            rate = rate.max(op.omega_m);
        }
        if drives.pump != Envelope::Continuous {
            rate = rate.max(self.pump_kappa());
        }
        rate
    }

    /// Largest admissible step under `drives`.
    pub fn max_step(&self, drives: &Drives) -> f64 {
        1.0 / (STEPS_PER_RATE * self.fastest_rate(drives))
    }

    fn optical_inputs(&self, drives: &Drives, t: f64) -> (Complex64, Complex64) {
        let Some(tone) = drives.optical else {
            return (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
        };
        let a = tone.amplitude * tone.envelope.at(t);
        let shift = match self.op.configuration {
            PumpConfiguration::AntiStokes => tone.omega + self.op.omega_m,
            PumpConfiguration::Stokes => tone.omega - self.op.omega_m,
        };
        (a * (-I * tone.omega * t).exp(), a * (-I * shift * t).exp())
    }

    fn microwave_input(&self, drives: &Drives, t: f64) -> Complex64 {
        let Some(tone) = drives.microwave else {
            return Complex64::new(0.0, 0.0);
        };
        let a = tone.amplitude * tone.envelope.at(t);
        match self.op.configuration {
            PumpConfiguration::AntiStokes => a * (-I * tone.omega * t).exp(),
            PumpConfiguration::Stokes => a * (I * tone.omega * t).exp(),
        }
    }

    fn derivative(&self, drives: &Drives, t: f64, s: &StateVector) -> StateVector {
        let op = &self.op;
        let g = op.g * s.pump;
        let (u_sig, u_off) = self.optical_inputs(drives, t);
        let c_in = self.microwave_input(drives, t);
        let pump = match drives.pump {
            Envelope::Continuous => 0.0,
            env => 0.5 * self.pump_kappa() * (env.at(t) - s.pump),
        };
        let zero = Complex64::new(0.0, 0.0);
        match op.configuration {
            PumpConfiguration::AntiStokes => StateVector {
                a_plus: -0.5 * op.kappa_plus * s.a_plus + I * g * s.b + op.kappa_ex_plus.sqrt() * u_sig,
                b: -0.5 * op.kappa_m * s.b + I * g.conj() * s.a_plus + op.kappa_ex_m.sqrt() * c_in,
                a_minus: if self.include_off_resonant {
                    -0.5 * op.kappa_minus * s.a_minus + op.kappa_ex_minus.sqrt() * u_off
                } else {
                    zero
                },
                pump,
            },
            PumpConfiguration::Stokes => StateVector {
                a_minus: -0.5 * op.kappa_minus * s.a_minus
                    + I * g * s.b.conj()
                    + op.kappa_ex_minus.sqrt() * u_sig,
                b: -0.5 * op.kappa_m * s.b + I * g * s.a_minus.conj() + op.kappa_ex_m.sqrt() * c_in,
                a_plus: if self.include_off_resonant {
                    -0.5 * op.kappa_plus * s.a_plus + op.kappa_ex_plus.sqrt() * u_off
                } else {
                    zero
                },
                pump,
            },
        }
    }

    /// Output fields `(a_out, c_out)`: optical in the signal frame, microwave in the
    /// acoustic frame.
    pub fn outputs(&self, drives: &Drives, t: f64, s: &StateVector) -> (Complex64, Complex64) {
        let op = &self.op;
        let (u_sig, _) = self.optical_inputs(drives, t);
        let c_in = self.microwave_input(drives, t);
        let a_out = match op.configuration {
            PumpConfiguration::AntiStokes => {
                u_sig
                    - op.kappa_ex_plus.sqrt() * s.a_plus
                    - op.kappa_ex_minus.sqrt() * s.a_minus * (I * op.omega_m * t).exp()
            }
            PumpConfiguration::Stokes => {
                u_sig
                    - op.kappa_ex_minus.sqrt() * s.a_minus
                    - op.kappa_ex_plus.sqrt() * s.a_plus * (-I * op.omega_m * t).exp()
            }
        };
        (a_out, -c_in + op.kappa_ex_m.sqrt() * s.b)
    }

    fn rk4(&self, drives: &Drives, t: f64, s: &StateVector, dt: f64) -> StateVector {
        let k1 = self.derivative(drives, t, s);
        let k2 = self.derivative(drives, t + 0.5 * dt, &s.axpy(0.5 * dt, &k1));
        let k3 = self.derivative(drives, t + 0.5 * dt, &s.axpy(0.5 * dt, &k2));
        let k4 = self.derivative(drives, t + dt, &s.axpy(dt, &k3));
        StateVector {
            a_minus: s.a_minus + dt / 6.0 * (k1.a_minus + 2.0 * k2.a_minus + 2.0 * k3.a_minus + k4.a_minus),
            a_plus: s.a_plus + dt / 6.0 * (k1.a_plus + 2.0 * k2.a_plus + 2.0 * k3.a_plus + k4.a_plus),
            b: s.b + dt / 6.0 * (k1.b + 2.0 * k2.b + 2.0 * k3.b + k4.b),
            pump: s.pump + dt / 6.0 * (k1.pump + 2.0 * k2.pump + 2.0 * k3.pump + k4.pump),
        }
    }
}

/// Recorded samples of a trajectory.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub t: Vec<f64>,
    pub states: Vec<StateVector>,
    pub a_out: Vec<Complex64>,
    pub c_out: Vec<Complex64>,
}

impl Trajectory {
    pub fn last(&self) -> Option<(f64, &StateVector)> {
        self.t.last().copied().zip(self.states.last())
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record([
            "t_seconds", "a_minus_re", "a_minus_im", "a_plus_re", "a_plus_im", "b_re", "b_im", "pump",
            "a_out_re", "a_out_im", "c_out_re", "c_out_im",
        ])?;
        for k in 0..self.t.len() {
            let s = &self.states[k];
            let row = [
                self.t[k],
                s.a_minus.re,
                s.a_minus.im,
                s.a_plus.re,
                s.a_plus.im,
                s.b.re,
                s.b.im,
                s.pump,
                self.a_out[k].re,
                self.a_out[k].im,
                self.c_out[k].re,
                self.c_out[k].im,
            ];
            w.write_record(row.iter().map(|x| format!("{x:.12e}")))?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Fixed-step RK4 from `t = 0` to `t_end`. A continuous pump holds the pump
/// amplitude at 1 regardless of `initial.pump`.
///
/// Fails if `dt` exceeds [`Model::max_step`] or the state blows up.
pub fn integrate(model: &Model, drives: &Drives, initial: StateVector, t_end: f64, dt: f64) -> Result<Trajectory> {
    model.op.validate()?;
    let max = model.max_step(drives);
    if !(dt > 0.0) || dt > max * (1.0 + 1e-12) {
        return Err(Error::StepTooLarge { dt, max });
    }
    if !(t_end > 0.0 && t_end.is_finite()) {
        return Err(Error::InvalidParameter(format!("t_end = {t_end}")));
    }
    let mut s = initial;
    if drives.pump == Envelope::Continuous {
        s.pump = 1.0;
    }
    let scale = reference_scale(model, drives, &s);
    let steps = (t_end / dt).ceil() as usize;
    let every = model.record_every.max(1);
    let cap = steps / every + 2;
    let mut out = Trajectory {
        t: Vec::with_capacity(cap),
        states: Vec::with_capacity(cap),
        a_out: Vec::with_capacity(cap),
        c_out: Vec::with_capacity(cap),
    };
    let record = |t: f64, s: &StateVector, out: &mut Trajectory| {
        let (a, c) = model.outputs(drives, t, s);
        out.t.push(t);
        out.states.push(*s);
        out.a_out.push(a);
        out.c_out.push(c);
    };
    record(0.0, &s, &mut out);
    for n in 0..steps {
        let t = n as f64 * dt;
        s = model.rk4(drives, t, &s, dt);
        let t_next = (n + 1) as f64 * dt;
        if !s.is_finite() || s.quanta().sqrt() > BLOWUP * scale {
            return Err(Error::Diverged(t_next));
        }
        if (n + 1) % every == 0 || n + 1 == steps {
            record(t_next, &s, &mut out);
        }
    }
    Ok(out)
}

fn reference_scale(model: &Model, drives: &Drives, initial: &StateVector) -> f64 {
    let op = &model.op;
    let slowest = op.kappa_m.min(op.kappa_minus).min(op.kappa_plus);
    let mut scale = initial.quanta().sqrt();
    for t in [drives.optical, drives.microwave].iter().flatten() {
        scale += 2.0 * t.amplitude.norm() / slowest.sqrt();
    }
    scale.max(f64::MIN_POSITIVE)
}

/// Slowest decay rate of the coupled signal/acoustic pair; negative above threshold.
pub fn slowest_decay(op: &OperatingPoint) -> f64 {
    let a = 0.5 * op.signal_mode().0;
    let b = 0.5 * op.kappa_m;
    let g2 = op.g.norm_sqr();
    let mean = 0.5 * (a + b);
    let half = 0.5 * (a - b);
    match op.configuration {
        PumpConfiguration::AntiStokes => {
            let disc = half * half - g2;
            if disc >= 0.0 {
                mean - disc.sqrt()
            } else {
                mean
            }
        }
        PumpConfiguration::Stokes => mean - (half * half + g2).sqrt(),
    }
}

/// Steady-state response to a unit tone at offset `omega`, read off after the
/// transient has decayed. The time-domain counterpart of [`crate::response::transfer`].
pub fn harmonic_response(op: &OperatingPoint, from: Port, to: Port, omega: f64) -> Result<Complex64> {
    let decay = slowest_decay(op);
    if decay <= 0.0 {
        return Err(Error::ParametricInstability(op.cooperativity()));
    }
    let include = from == Port::Optical && to == Port::Optical;
    let model = Model { op: *op, include_off_resonant: include, record_every: usize::MAX };
    let unit = Some(Tone::cw(Complex64::new(1.0, 0.0), omega));
    let drives = match from {
        Port::Optical => Drives { optical: unit, ..Drives::default() },
        Port::Microwave => Drives { microwave: unit, ..Drives::default() },
    };
    let mut slowest = decay;
    if include {
        slowest = slowest.min(0.5 * op.pump_mode().0);
    }
    let dt = model.max_step(&drives) * 0.8;
    let t_end = 18.0 / slowest;
    let traj = integrate(&model, &drives, StateVector::default(), t_end, dt)?;
    let k = traj.t.len() - 1;
    let t = traj.t[k];
    let out = match (to, op.configuration) {
        (Port::Optical, _) => traj.a_out[k],
        (Port::Microwave, PumpConfiguration::AntiStokes) => traj.c_out[k],
        (Port::Microwave, PumpConfiguration::Stokes) => traj.c_out[k].conj(),
    };
    // A Stokes microwave input is specified through its conjugate sideband.
    Ok(out * (I * omega * t).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::hz;
    use crate::response::transfer;

    fn op(configuration: PumpConfiguration, c: f64) -> OperatingPoint {
        let (ko, km) = (hz(170e6), hz(13e6));
        OperatingPoint {
            configuration,
            kappa_minus: hz(150e6),
            kappa_plus: ko,
            kappa_ex_minus: hz(60e6),
            kappa_ex_plus: hz(70e6),
            omega_m: hz(3.48e9),
            kappa_m: km,
            kappa_ex_m: 0.3 * km,
            g: Complex64::from_polar((c * ko * km / 4.0).sqrt(), 0.3),
            n_bar: 1.0,
            omega_pump: 0.0,
        }
    }

    #[test]
    fn bare_decay() {
        let p = op(PumpConfiguration::AntiStokes, 0.0).with_coupling(Complex64::new(0.0, 0.0));
        let model = Model::signal_only(p);
        let drives = Drives::default();
        let initial = StateVector { b: Complex64::new(1.0, 0.0), ..Default::default() };
        let t_end = 5.0 / p.kappa_m;
        let dt = model.max_step(&drives);
        let traj = integrate(&model, &drives, initial, t_end, dt).unwrap();
        let (t, s) = traj.last().unwrap();
        let expected = (-0.5 * p.kappa_m * t).exp();
        assert!((s.b.norm() / expected - 1.0).abs() < 1e-6);
    }

    #[test]
    fn step_limit_enforced() {
        let p = op(PumpConfiguration::AntiStokes, 0.1);
        let model = Model::new(p);
        let drives = Drives::default();
        let dt = 2.0 * model.max_step(&drives);
        assert!(matches!(
            integrate(&model, &drives, StateVector::default(), 1e-9, dt),
            Err(Error::StepTooLarge { .. })
        ));
    }

    #[test]
    fn stokes_above_threshold_diverges() {
        let p = op(PumpConfiguration::Stokes, 1.2);
        let model = Model::signal_only(p).recording_every(1000);
        let drives = Drives::default();
        let initial = StateVector { b: Complex64::new(1.0, 0.0), ..Default::default() };
        let growth = -slowest_decay(&p);
        assert!(growth > 0.0);
        let r = integrate(&model, &drives, initial, 40.0 / growth, model.max_step(&drives));
        assert!(matches!(r, Err(Error::Diverged(_))));
    }

    #[test]
    fn harmonic_response_matches_closed_form() {
        for cfg in [PumpConfiguration::AntiStokes, PumpConfiguration::Stokes] {
            let p = op(cfg, 0.4);
            let w = hz(5e6);
            let td = harmonic_response(&p, Port::Microwave, Port::Optical, w).unwrap();
            let fd = transfer(&p, Port::Microwave, Port::Optical, w).unwrap();
            assert!((td - fd).norm() < 1e-3 * fd.norm(), "{cfg:?}: {td} vs {fd}");
        }
    }
}
