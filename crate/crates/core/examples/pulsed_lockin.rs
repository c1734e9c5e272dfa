//! Pulsed down-conversion seen through a lock-in, the RC rise fitted from the trace,
//! and the three-plateau photothermal response.

use std::path::Path;

use num_complex::Complex64;
use transducer::calibrate::fit_rc_step;
use transducer::cli::LoadedConfig;
use transducer::model::{dbm_to_watts, HBAR};
use transducer::response::OperatingPoint;
use transducer::timedomain::{
    photothermal_response, pulsed_downconversion, LockInConfig, PhotothermalModel, PulseSequence, PulseShape,
    PulsedRun,
};

fn main() -> transducer::Result<()> {
    let cfg = LoadedConfig::from_path(Path::new(concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs/fast_pulse.toml")))?;
    let params = cfg.config.device()?;
    let op = OperatingPoint::new(&params, &cfg.config.pump()?)?;

    let tau_rc = 30e-9;
    let run = PulsedRun {
        pulse: PulseSequence::new(300e-9, 1e6, PulseShape::Rect)?,
        optical_amplitude: Complex64::new((dbm_to_watts(0.0) / (HBAR * op.omega_pump)).sqrt(), 0.0),
        lockin: LockInConfig::new(op.omega_m, tau_rc)?,
        t_end: 300e-9,
        noise: None,
    };
    let d = pulsed_downconversion(&op, &run)?;
    let amp = d.amplitude();
    let fit = fit_rc_step(&d.t, &amp)?;
    println!("lock-in tau {:.1} ns, fitted rise {:.2} ns", tau_rc * 1e9, fit.value("tau_rc") * 1e9);

    let m = PhotothermalModel::new(1.0, 5.0, 1e6, 20.0, 1e3)?;
    for f in [1e1, 1e2, 1e4, 1e5, 1e7, 1e8] {
        println!("f = {f:8.0e} Hz  |H| = {:.3}", photothermal_response(f, &m).norm());
    }
    Ok(())
}
