//! Flow graphs of the two conversion configurations.
//!
//! Anti-Stokes nodes: `a_in`, `a_out`, `c_in`, `c_out`, `a_minus`, `a_plus`, `b`.
//! Stokes nodes replace the microwave ones by their conjugates `c_in_dag`,
//! `c_out_dag`, `b_dag`; conjugate susceptibilities are written out explicitly
//! using `chi(-w)* = chi(w)`.

use num_complex::Complex64;

use super::{FlowGraph, NodeRole};
use crate::hybridize::{self, EffectiveCouplings};
use crate::model::{DeviceParams, PumpConfiguration};
use crate::response::{chi, OperatingPoint, Port};
use crate::Result;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Source and sink node names of a port pair.
pub fn port_nodes(configuration: PumpConfiguration, from: Port, to: Port) -> (&'static str, &'static str) {
    let (c_in, c_out) = match configuration {
        PumpConfiguration::AntiStokes => ("c_in", "c_out"),
        PumpConfiguration::Stokes => ("c_in_dag", "c_out_dag"),
    };
    let src = match from {
        Port::Optical => "a_in",
        Port::Microwave => c_in,
    };
    let dst = match to {
        Port::Optical => "a_out",
        Port::Microwave => c_out,
    };
    (src, dst)
}

/// Graph of the configuration selected by `op`.
pub fn transducer_graph(op: &OperatingPoint) -> Result<FlowGraph> {
    op.validate()?;
    let o = *op;
    let g = o.g;
    let mut b = FlowGraph::builder();
    let re = |x: f64| Complex64::new(x, 0.0);
    let (sm, sp, smw) = (o.kappa_ex_minus.sqrt(), o.kappa_ex_plus.sqrt(), o.kappa_ex_m.sqrt());
    match o.configuration {
        PumpConfiguration::AntiStokes => {
            b.node("a_in", NodeRole::Source)?;
            b.node("c_in", NodeRole::Source)?;
            b.node("a_minus", NodeRole::Internal)?;
            b.node("a_plus", NodeRole::Internal)?;
            b.node("b", NodeRole::Internal)?;
            b.node("a_out", NodeRole::Sink)?;
            b.node("c_out", NodeRole::Sink)?;
            b.edge("c_in", "b", "sqrt(k_ex_m) chi_m", move |w| smw * chi(o.kappa_m, w))?;
            b.edge("b", "a_plus", "i g chi_+", move |w| I * g * chi(o.kappa_plus, w))?;
            b.edge("a_plus", "b", "i g* chi_m", move |w| I * g.conj() * chi(o.kappa_m, w))?;
            b.edge("a_in", "a_minus", "sqrt(k_ex_-) chi_-(w + w_m)", move |w| {
                sm * chi(o.kappa_minus, w + o.omega_m)
            })?;
            b.edge("a_in", "a_plus", "sqrt(k_ex_+) chi_+", move |w| sp * chi(o.kappa_plus, w))?;
            b.constant("a_minus", "a_out", re(-sm))?;
            b.constant("a_plus", "a_out", re(-sp))?;
            b.constant("b", "c_out", re(smw))?;
            b.constant("a_in", "a_out", re(1.0))?;
            b.constant("c_in", "c_out", re(-1.0))?;
        }
        PumpConfiguration::Stokes => {
            b.node("a_in", NodeRole::Source)?;
            b.node("c_in_dag", NodeRole::Source)?;
            b.node("a_minus", NodeRole::Internal)?;
            b.node("a_plus", NodeRole::Internal)?;
            b.node("b_dag", NodeRole::Internal)?;
            b.node("a_out", NodeRole::Sink)?;
            b.node("c_out_dag", NodeRole::Sink)?;
            b.edge("c_in_dag", "b_dag", "sqrt(k_ex_m) chi_m", move |w| smw * chi(o.kappa_m, w))?;
            b.edge("b_dag", "a_minus", "i g chi_-", move |w| I * g * chi(o.kappa_minus, w))?;
            b.edge("a_minus", "b_dag", "-i g* chi_m", move |w| -I * g.conj() * chi(o.kappa_m, w))?;
            b.edge("a_in", "a_minus", "sqrt(k_ex_-) chi_-", move |w| sm * chi(o.kappa_minus, w))?;
            b.edge("a_in", "a_plus", "sqrt(k_ex_+) chi_+(w - w_m)", move |w| {
                sp * chi(o.kappa_plus, w - o.omega_m)
            })?;
            b.constant("a_minus", "a_out", re(-sm))?;
            b.constant("a_plus", "a_out", re(-sp))?;
            b.constant("b_dag", "c_out_dag", re(smw))?;
            b.constant("a_in", "a_out", re(1.0))?;
            b.constant("c_in_dag", "c_out_dag", re(-1.0))?;
        }
    }
    Ok(b.build())
}

fn graph_for(params: &DeviceParams, couplings: &EffectiveCouplings, configuration: PumpConfiguration) -> Result<FlowGraph> {
    params.validate()?;
    let modes = hybridize::supermodes(&params.left, &params.right, params.j)?;
    let g = hybridize::active_coupling(couplings, configuration);
    let op = OperatingPoint::from_rates(configuration, &modes, params.acoustic(), g)?;
    transducer_graph(&op)
}

pub fn build_antistokes_graph(params: &DeviceParams, couplings: &EffectiveCouplings) -> Result<FlowGraph> {
    graph_for(params, couplings, PumpConfiguration::AntiStokes)
}

pub fn build_stokes_graph(params: &DeviceParams, couplings: &EffectiveCouplings) -> Result<FlowGraph> {
    graph_for(params, couplings, PumpConfiguration::Stokes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::hz;
    use crate::response::transfer;
    use crate::sfg::{mason_gain, solve_gain};

    fn op(configuration: PumpConfiguration, g: Complex64) -> OperatingPoint {
        OperatingPoint {
            configuration,
            kappa_minus: hz(150e6),
            kappa_plus: hz(170e6),
            kappa_ex_minus: hz(50e6),
            kappa_ex_plus: hz(60e6),
            omega_m: hz(3.48e9),
            kappa_m: hz(13e6),
            kappa_ex_m: hz(1.4e6),
            g,
            n_bar: 1.0,
            omega_pump: 0.0,
        }
    }

    #[test]
    fn node_and_edge_counts() {
        for cfg in [PumpConfiguration::AntiStokes, PumpConfiguration::Stokes] {
            let g = transducer_graph(&op(cfg, Complex64::new(hz(1e6), 0.0))).unwrap();
            assert_eq!((g.node_count(), g.edge_count()), (7, 10));
        }
    }

    #[test]
    fn single_loop_determinant() {
        let gc = Complex64::from_polar(hz(3e6), 0.4);
        let p = op(PumpConfiguration::AntiStokes, gc);
        let graph = transducer_graph(&p).unwrap();
        let plan = graph.mason_plan("c_in", "a_out").unwrap();
        assert_eq!(plan.n_loops(), 1);
        let w = hz(2e6);
        let expected = 1.0 + gc.norm_sqr() * chi(p.kappa_plus, w) * chi(p.kappa_m, w);
        assert!((plan.determinant(&graph, w) - expected).norm() < 1e-12);
    }

    #[test]
    fn stokes_threshold_is_singular() {
        let mut p = op(PumpConfiguration::Stokes, Complex64::new(0.0, 0.0));
        p.g = Complex64::new((p.kappa_minus * p.kappa_m / 4.0).sqrt(), 0.0);
        let graph = transducer_graph(&p).unwrap();
        assert!(graph.determinant(0.0).norm() < 1e-12);
        assert!(mason_gain(&graph, "a_in", "a_out", 0.0).is_err());
    }

    #[test]
    fn graphs_match_closed_forms() {
        let gc = Complex64::from_polar(hz(4e6), -1.1);
        for cfg in [PumpConfiguration::AntiStokes, PumpConfiguration::Stokes] {
            let p = op(cfg, gc);
            let graph = transducer_graph(&p).unwrap();
            for from in [Port::Optical, Port::Microwave] {
                for to in [Port::Optical, Port::Microwave] {
                    let (s, d) = port_nodes(cfg, from, to);
                    for w in [-hz(30e6), 0.0, hz(7e6)] {
                        let closed = transfer(&p, from, to, w).unwrap();
                        let m = mason_gain(&graph, s, d, w).unwrap().value;
                        let l = solve_gain(&graph, s, d, w).unwrap();
                        assert!((m - closed).norm() <= 1e-10 * closed.norm(), "{cfg:?} {from:?}->{to:?}");
                        assert!((l - closed).norm() <= 1e-10 * closed.norm());
                    }
                }
            }
        }
    }

    #[test]
    fn decoupled_reflection() {
        let p = op(PumpConfiguration::AntiStokes, Complex64::new(0.0, 0.0));
        let graph = transducer_graph(&p).unwrap();
        let w = hz(5e6);
        let s = mason_gain(&graph, "c_in", "c_out", w).unwrap().value;
        assert!((s - (-1.0 + p.kappa_ex_m * chi(p.kappa_m, w))).norm() < 1e-12);
    }
}
