//! Mason's rule on a small feedback network and on the transducer's own graph.

use std::path::Path;

use num_complex::Complex64;
use transducer::cli::LoadedConfig;
use transducer::model::hz;
use transducer::response::{transfer, OperatingPoint, Port};
use transducer::sfg::{mason_gain, port_nodes, solve_gain, transducer_graph, FlowGraph, NodeRole};
use transducer::Result;

fn main() -> Result<()> {
    // Two nested loops around a low-pass stage.
    let mut b = FlowGraph::builder();
    b.node("in", NodeRole::Source)?;
    b.node("x", NodeRole::Internal)?;
    b.node("y", NodeRole::Internal)?;
    b.node("out", NodeRole::Sink)?;
    b.constant("in", "x", Complex64::new(1.0, 0.0))?;
    b.edge("x", "y", "lp", |w| Complex64::new(2.0, 0.0) / Complex64::new(1.0, w))?;
    b.constant("y", "x", Complex64::new(-0.5, 0.0))?;
    b.constant("y", "y", Complex64::new(0.2, 0.1))?;
    b.constant("y", "out", Complex64::new(1.0, 0.0))?;
    let g = b.build();
    for w in [0.0, 0.5, 2.0] {
        let m = mason_gain(&g, "in", "out", w)?;
        let s = solve_gain(&g, "in", "out", w)?;
        println!("w = {w}: mason {:.6} ({} paths, {} loops), solve {:.6}", m.value, m.n_paths, m.n_loops, s);
    }

    let cfg = LoadedConfig::from_path(Path::new(concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs/reference_device.toml")))?;
    let op = OperatingPoint::new(&cfg.config.device()?, &cfg.config.pump()?)?;
    let graph = transducer_graph(&op)?;
    println!("\n{}", graph.to_dot());
    let (src, dst) = port_nodes(op.configuration, Port::Microwave, Port::Optical);
    let w = hz(2e6);
    println!("S_ac via graph {:.6e}", mason_gain(&graph, src, dst, w)?.value);
    println!("S_ac closed    {:.6e}", transfer(&op, Port::Microwave, Port::Optical, w)?);
    Ok(())
}
