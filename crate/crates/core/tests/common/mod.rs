#![allow(dead_code)]

use std::path::PathBuf;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use transducer::cli::LoadedConfig;
use transducer::model::hz;
use transducer::sfg::{FlowGraph, FlowGraphBuilder, NodeRole};
use transducer::{OperatingPoint, PumpConfiguration};

pub fn config_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

pub fn load_config(name: &str) -> LoadedConfig {
    LoadedConfig::from_path(&config_path(name)).expect("bundled config loads")
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Rates close to the bundled device, with the coupling set for cooperativity `c`.
pub fn operating_point(configuration: PumpConfiguration, c: f64, phase: f64) -> OperatingPoint {
    let (kp, km, kmw) = (hz(170e6), hz(150e6), hz(13e6));
    let ko = match configuration {
        PumpConfiguration::AntiStokes => kp,
        PumpConfiguration::Stokes => km,
    };
    let g = (c * ko * kmw / 4.0).sqrt();
    OperatingPoint {
        configuration,
        kappa_minus: km,
        kappa_plus: kp,
        kappa_ex_minus: hz(50e6),
        kappa_ex_plus: hz(60e6),
        omega_m: hz(3.48e9),
        kappa_m: kmw,
        kappa_ex_m: 0.11 * kmw,
        g: Complex64::from_polar(g, phase),
        n_bar: 1.0,
        omega_pump: 0.0,
    }
}

/// Random operating point with cooperativity below `c_max`.
pub fn random_operating_point(r: &mut ChaCha8Rng, configuration: PumpConfiguration, c_max: f64, lossless: bool) -> OperatingPoint {
    let km = hz(r.random_range(50e6..500e6));
    let kp = hz(r.random_range(50e6..500e6));
    let kmw = hz(r.random_range(1e6..50e6));
    let frac = |r: &mut ChaCha8Rng| if lossless { 1.0 } else { r.random_range(0.05..1.0) };
    let ko = match configuration {
        PumpConfiguration::AntiStokes => kp,
        PumpConfiguration::Stokes => km,
    };
    let c = r.random_range(0.0..c_max);
    let g = (c * ko * kmw / 4.0).sqrt();
    OperatingPoint {
        configuration,
        kappa_minus: km,
        kappa_plus: kp,
        kappa_ex_minus: frac(r) * km,
        kappa_ex_plus: frac(r) * kp,
        omega_m: hz(r.random_range(2e9..5e9)),
        kappa_m: kmw,
        kappa_ex_m: frac(r) * kmw,
        g: Complex64::from_polar(g, r.random_range(-3.1..3.1)),
        n_bar: 1.0,
        omega_pump: 0.0,
    }
}

fn random_gain(r: &mut ChaCha8Rng, max: f64) -> Complex64 {
    Complex64::from_polar(r.random_range(0.05..max), r.random_range(-3.1..3.1))
}

/// Random graph on `n` nodes named `n0..`, with a forward chain from `n0` to the last
/// node and extra edges (self loops included) drawn with probability `density`.
/// Some edges are single-pole low-pass sections so the gains depend on frequency.
pub fn random_graph(r: &mut ChaCha8Rng, n: usize, density: f64) -> FlowGraph {
    random_graph_builder(r, n, density).build()
}

pub fn random_graph_builder(r: &mut ChaCha8Rng, n: usize, density: f64) -> FlowGraphBuilder {
    let mut b = FlowGraph::builder();
    for k in 0..n {
        let role = match k {
            0 => NodeRole::Source,
            k if k == n - 1 => NodeRole::Sink,
            _ => NodeRole::Internal,
        };
        b.node(&format!("n{k}"), role).unwrap();
    }
    let mut add = |r: &mut ChaCha8Rng, from: usize, to: usize, max: f64| {
        let g = random_gain(r, max);
        let (f, t) = (format!("n{from}"), format!("n{to}"));
        if r.random_bool(0.3) {
            let corner = r.random_range(0.5..5.0);
            b.edge(&f, &t, "lp", move |w| g / Complex64::new(1.0, w / corner)).unwrap();
        } else {
            b.constant(&f, &t, g).unwrap();
        }
    };
    for k in 0..n.saturating_sub(1) {
        add(r, k, k + 1, 1.0);
    }
    for from in 0..n {
        for to in 0..n {
            if r.random_bool(density) {
                add(r, from, to, 0.6);
            }
        }
    }
    b
}
