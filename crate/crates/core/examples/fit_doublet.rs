//! Recover ring linewidths, coupling and detuning from a noisy doublet transmission scan.

use transducer::calibrate::{fit_doublet, gaussian_noise, DoubletModel};
use transducer::model::{hz, to_hz};
use transducer::response::linspace;
use transducer::Spectrum;

fn main() -> transducer::Result<()> {
    let truth = DoubletModel { kappa_l: hz(190e6), kappa_r: hz(154e6), kappa_ex: hz(60e6), j: hz(300e6), delta: hz(500e6), center: 0.0 };
    let w = linspace(hz(-2e9), hz(2e9), 4001)?;
    let t: Vec<f64> = truth.transmission(&w)?.iter().zip(gaussian_noise(1, w.len(), 0.01)).map(|(a, e)| a + e).collect();
    let report = fit_doublet(&Spectrum::new(w)?.with_real("transmission", t)?)?;

    let truths = [truth.kappa_l, truth.kappa_r, truth.kappa_ex, truth.j, truth.delta, truth.center];
    for (p, x) in report.parameters.iter().zip(truths) {
        println!("{:<9} {:>10.3} +/- {:.3} MHz (true {:.3})", p.name, to_hz(p.value) / 1e6, to_hz(p.std_err) / 1e6, to_hz(x) / 1e6);
    }
    println!("converged: {}, flags: {:?}", report.converged, report.flags);
    Ok(())
}
