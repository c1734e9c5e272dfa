//! Back out the single-photon cooperativity and vacuum coupling from efficiency versus pump power.

use transducer::calibrate::{fit_efficiency_power, PowerFitInputs, PowerPoint};
use transducer::model::{db_to_linear, dbm_to_watts, hz, to_hz, wavelength_to_omega};

fn main() -> transducer::Result<()> {
    let inputs = PowerFitInputs {
        eta_probes: db_to_linear(-3.0),
        eta_fiber_fiber: db_to_linear(-8.0),
        eta_m: 0.11,
        eta_o: 0.35,
        kappa_o: hz(170e6),
        kappa_m: hz(13e6),
        omega_l: wavelength_to_omega(1550e-9),
    };

    // A single measured point: -60 dB at 10 dBm.
    let single = [PowerPoint { power_in: dbm_to_watts(10.0), eta_tot: db_to_linear(-60.0) }];
    let r = fit_efficiency_power(&single, &inputs)?;
    println!("one point: C0 = {:.3e}, g0/2pi = {:.2} Hz", r.value("C0"), to_hz(r.value("g0")));

    let sweep: Vec<PowerPoint> = (0..12)
        .map(|k| {
            let p = dbm_to_watts(10.0 + k as f64);
            PowerPoint { power_in: p, eta_tot: inputs.eta_tot(8e-13, p) * (1.0 + 0.02 * ((k % 3) as f64 - 1.0)) }
        })
        .collect();
    let r = fit_efficiency_power(&sweep, &inputs)?;
    println!(
        "sweep:     C0 = {:.3e} +/- {:.1e}, g0/2pi = {:.2} +/- {:.2} Hz",
        r.value("C0"),
        r.std_err("C0"),
        to_hz(r.value("g0")),
        to_hz(r.std_err("g0"))
    );
    Ok(())
}
