//! Loss ledger versus pump power, and the optical coupling that maximizes the total efficiency.

use std::path::Path;

use transducer::cli::LoadedConfig;
use transducer::model::dbm_to_watts;
use transducer::response::{offchip_efficiency, optimal_coupling};

fn main() -> transducer::Result<()> {
    let cfg = LoadedConfig::from_path(Path::new(concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs/reference_device.toml")))?;
    let params = cfg.config.device()?;
    let pump = cfg.config.pump()?;

    println!("{:>6} {:>10} {:>10} {:>10} {:>10}", "dBm", "C", "eta_int", "eta_oc", "eta_tot/dB");
    for dbm in [0.0, 10.0, 15.0, 21.0] {
        let b = offchip_efficiency(&params, &pump.with_power(dbm_to_watts(dbm)))?;
        println!("{dbm:>6.1} {:>10.3e} {:>10.3e} {:>10.3e} {:>10.2}", b.cooperativity, b.eta_int, b.eta_oc, b.eta_tot_db());
    }

    let b = offchip_efficiency(&params, &pump)?;
    println!();
    for stage in &b.ledger {
        println!("{:<22} {:>8.2} dB", stage.stage, stage.db);
    }

    let opt = optimal_coupling(1.0)?;
    println!("\noptimal kappa_ex/kappa_int = {}, peak = F/{}", opt.r_opt, 1.0 / opt.eta_peak);
    Ok(())
}
