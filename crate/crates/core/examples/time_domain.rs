//! Ring-up of the converted field under a CW microwave tone, compared with the steady-state spectrum.

use num_complex::Complex64;
use transducer::model::hz;
use transducer::response::{transfer, OperatingPoint, Port};
use transducer::timedomain::{harmonic_response, integrate, Drives, Model, StateVector, Tone};
use transducer::PumpConfiguration;

fn main() -> transducer::Result<()> {
    let (kp, km, kmw) = (hz(170e6), hz(150e6), hz(13e6));
    let c: f64 = 0.3;
    let op = OperatingPoint {
        configuration: PumpConfiguration::AntiStokes,
        kappa_minus: km,
        kappa_plus: kp,
        kappa_ex_minus: hz(50e6),
        kappa_ex_plus: hz(60e6),
        omega_m: hz(3.48e9),
        kappa_m: kmw,
        kappa_ex_m: 0.11 * kmw,
        g: Complex64::new((c * kp * kmw / 4.0).sqrt(), 0.0),
        n_bar: 1.0,
        omega_pump: 0.0,
    };

    let w = 0.5 * kmw;
    let model = Model::signal_only(op).recording_every(50);
    let drives = Drives { microwave: Some(Tone::cw(Complex64::new(1.0, 0.0), w)), ..Drives::default() };
    let dt = model.max_step(&drives);
    let traj = integrate(&model, &drives, StateVector::default(), 20.0 / kmw, dt)?;
    let expected = transfer(&op, Port::Microwave, Port::Optical, w)?;
    for k in (0..traj.t.len()).step_by(traj.t.len() / 10) {
        let a = traj.a_out[k] * Complex64::from_polar(1.0, w * traj.t[k]);
        println!("t = {:7.2} ns  |a_out| = {:.5}", traj.t[k] * 1e9, a.norm());
    }
    println!("steady state |S_ac| = {:.5}", expected.norm());

    let fitted = harmonic_response(&op, Port::Microwave, Port::Optical, w)?;
    println!("harmonic response {:.6}, closed form {:.6}", fitted, expected);
    Ok(())
}
