//! Fit the acoustic resonance in a microwave reflection sweep, complex and magnitude-only.

use num_complex::Complex64;
use transducer::calibrate::{fit_s11, gaussian_noise, S11Mode, S11Model};
use transducer::model::{hz, to_hz};
use transducer::response::{linspace, Values};
use transducer::Spectrum;

fn main() -> transducer::Result<()> {
    let truth = S11Model { omega_m: hz(3.48e9), q_m: 284.0, eta_m: 0.11 };
    let w = linspace(hz(3.3e9), hz(3.66e9), 801)?;
    let noise = gaussian_noise(2, 2 * w.len(), 0.005);
    let z: Vec<Complex64> = w.iter().enumerate().map(|(k, &x)| truth.reflection(x) + Complex64::new(noise[2 * k], noise[2 * k + 1])).collect();

    let mut s = Spectrum::new(w.clone())?;
    s.push("s11", Values::Complex(z.clone()))?;
    let complex = fit_s11(&s, S11Mode::Complex)?;
    let mag = Spectrum::new(w)?.with_real("s11_mag", z.iter().map(|z| z.norm()).collect())?;
    let magnitude = fit_s11(&mag, S11Mode::MagnitudeOnly)?;

    for (label, r) in [("complex", &complex), ("magnitude", &magnitude)] {
        println!(
            "{label:<10} f_m = {:.5} GHz, Q = {:.1} +/- {:.1}, eta_m = {:.4} +/- {:.4}",
            to_hz(r.value("omega_m")) / 1e9,
            r.value("Q_m"),
            r.std_err("Q_m"),
            r.value("eta_m"),
            r.std_err("eta_m"),
        );
    }
    Ok(())
}
