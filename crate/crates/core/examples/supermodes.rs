//! Anticrossing of two coupled rings as the right ring is tuned through the left one.

use transducer::hybridize::{detuning_for_splitting, supermodes};
use transducer::model::{hz, to_hz};
use transducer::OpticalModeBare;

fn main() -> transducer::Result<()> {
    let w0 = hz(193.4e12);
    let j = hz(1.74e9);
    let left = OpticalModeBare::new(w0, hz(130e6), hz(60e6))?;

    println!("{:>10} {:>12} {:>12} {:>10} {:>10} {:>8}", "delta/GHz", "split/GHz", "dkappa/MHz", "k-/MHz", "k+/MHz", "|a-|^2");
    for k in -8..=8 {
        let delta = hz(0.5e9 * k as f64);
        let right = OpticalModeBare::new(w0 - delta, hz(94e6), hz(60e6))?;
        let m = supermodes(&left, &right, j)?;
        println!(
            "{:>10.2} {:>12.4} {:>12.3} {:>10.2} {:>10.2} {:>8.3}",
            to_hz(delta) / 1e9,
            to_hz(m.delta_omega) / 1e9,
            to_hz(m.delta_kappa) / 1e6,
            to_hz(m.kappa_minus) / 1e6,
            to_hz(m.kappa_plus) / 1e6,
            m.alpha_minus.norm_sqr(),
        );
    }

    // Ring detuning that puts the splitting on a 3.48 GHz acoustic mode.
    let right = OpticalModeBare::new(w0, hz(94e6), hz(60e6))?;
    let delta = detuning_for_splitting(&left, &right, j, hz(3.48e9))?;
    println!("\ndetuning for a 3.48 GHz splitting: {:.1} MHz", to_hz(delta) / 1e6);
    Ok(())
}
