//! On-chip conversion spectrum of the bundled device around its two acoustic overtones.

use std::path::Path;

use transducer::cli::LoadedConfig;
use transducer::model::{hz, to_hz};
use transducer::response::{fwhm, linspace, lorentzian_product_fwhm, multimode_spectrum, onchip_efficiency_spectrum, OperatingPoint};

fn main() -> transducer::Result<()> {
    let cfg = LoadedConfig::from_path(Path::new(concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs/reference_device.toml")))?;
    let params = cfg.config.device()?;
    let pump = cfg.config.pump()?;
    let op = OperatingPoint::new(&params, &pump)?;
    println!("C = {:.3e}, kappa_o/2pi = {:.1} MHz", op.cooperativity(), to_hz(op.signal_mode().0) / 1e6);

    let grid = linspace(-hz(60e6), hz(60e6), 2401)?;
    let s = onchip_efficiency_spectrum(&op, &grid)?;
    let width = fwhm(&s)?;
    let (ko, _) = op.signal_mode();
    println!(
        "FWHM {:.2} MHz (two-Lorentzian root {:.2} MHz)",
        to_hz(width) / 1e6,
        to_hz(lorentzian_product_fwhm(ko, op.kappa_m)) / 1e6
    );

    let abs = linspace(hz(3.0e9), hz(3.7e9), 701)?;
    let mm = multimode_spectrum(&params, &pump, cfg.config.pump_detuning(), &abs)?;
    for w in &mm.warnings {
        println!("warning: {w}");
    }
    let total = mm.spectrum.real("total").expect("total channel");
    let mut peaks: Vec<(f64, f64)> = (1..total.len() - 1)
        .filter(|&k| total[k] > total[k - 1] && total[k] >= total[k + 1])
        .map(|k| (to_hz(abs[k]) / 1e9, total[k]))
        .collect();
    peaks.sort_by(|a, b| b.1.total_cmp(&a.1));
    for (f, eta) in peaks.iter().take(2) {
        println!("peak at {f:.3} GHz: eta = {eta:.3e}");
    }
    Ok(())
}
