//! Added noise, pair rate, cross-correlation and thermal decoherence for both pump configurations.

use std::path::Path;

use transducer::cli::LoadedConfig;
use transducer::quantumstats::{added_noise, decoherence_rate, g2_cross, pair_rate, ThermalEnvironment};
use transducer::response::OperatingPoint;
use transducer::{PumpConfig, PumpConfiguration};

fn main() -> transducer::Result<()> {
    let cfg = LoadedConfig::from_path(Path::new(concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs/reference_device.toml")))?;
    let params = cfg.config.device()?;
    let acoustic = params.acoustic();

    for t in [0.8, 0.01] {
        let env = ThermalEnvironment::new(t)?;
        let n_th = env.occupancy(acoustic.omega_m)?;
        println!("T = {t} K: n_th = {n_th:.4e}, decoherence {:.4e} Hz", decoherence_rate(acoustic.kappa_m, n_th));
    }

    let env = ThermalEnvironment::new(0.01)?;
    for configuration in [PumpConfiguration::AntiStokes, PumpConfiguration::Stokes] {
        let pump = PumpConfig::new(configuration, cfg.config.pump()?.power_in)?;
        let op = OperatingPoint::new(&params, &pump)?;
        let noise = added_noise(&op, 0.0, &env, 0.0)?;
        println!("\n{configuration:?}: C = {:.3e}", op.cooperativity());
        println!("  added noise up {:.4}, down {:.4}", noise.n_added_up, noise.n_added_down);
        if configuration == PumpConfiguration::Stokes {
            let r = pair_rate(&op)?;
            println!("  pair rate {:.4e} /s (per rad), {:.4e} /s (per Hz)", r.numeric_per_rad, r.numeric_per_hz);
            for n_th in [0.0, 0.01, 0.1] {
                let g = g2_cross(&op, 0.0, n_th)?;
                println!("  n_th = {n_th}: g2 = {:.4e}, beats Cauchy-Schwarz: {}", g.g2, g.violates_cauchy_schwarz);
            }
        }
    }
    Ok(())
}
