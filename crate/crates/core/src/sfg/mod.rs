//! Signal-flow graphs with frequency-dependent complex edge gains.
//!
//! Node values obey `x_j = sum_i w_ij(omega) x_i` plus an external injection at the
//! source node. Two independent solvers evaluate the source-to-sink gain:
//! [`mason_gain`] enumerates forward paths and loops, [`solve_gain`] inverts
//! `I - A` directly. They are used to check each other.

mod physics;

use std::collections::HashMap;
use std::fmt::Write as _;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::{Error, Result};

pub use physics::{build_antistokes_graph, build_stokes_graph, port_nodes, transducer_graph};

/// Edge gain as a function of the evaluation frequency (rad/s).
pub type GainFn = Arc<dyn Fn(f64) -> Complex64 + Send + Sync>;

/// Threshold on `|Delta|` below which a graph is treated as singular.
pub const SINGULAR_DET: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeRole {
    Source,
    Sink,
    Internal,
}

#[derive(Debug, Clone)]
pub struct Node {
    pub name: String,
    pub role: NodeRole,
}

#[derive(Clone)]
struct Edge {
    from: usize,
    to: usize,
    label: String,
    gain: GainFn,
}

/// Directed graph, immutable once built. Parallel edges are merged by summing gains.
#[derive(Clone)]
pub struct FlowGraph {
    nodes: Vec<Node>,
    index: HashMap<String, usize>,
    edges: Vec<Edge>,
}

#[derive(Default)]
pub struct FlowGraphBuilder {
    nodes: Vec<Node>,
    index: HashMap<String, usize>,
    edges: Vec<Edge>,
}

impl FlowGraphBuilder {
    pub fn node(&mut self, name: &str, role: NodeRole) -> Result<usize> {
        if self.index.contains_key(name) {
            return Err(Error::InvalidParameter(format!("duplicate node `{name}`")));
        }
        let id = self.nodes.len();
        self.nodes.push(Node { name: name.to_string(), role });
        self.index.insert(name.to_string(), id);
        Ok(id)
    }

    pub fn edge<F>(&mut self, from: &str, to: &str, label: &str, gain: F) -> Result<&mut Self>
    where
        F: Fn(f64) -> Complex64 + Send + Sync + 'static,
    {
        let f = *self.index.get(from).ok_or_else(|| Error::UnknownNode(from.to_string()))?;
        let t = *self.index.get(to).ok_or_else(|| Error::UnknownNode(to.to_string()))?;
        let gain: GainFn = Arc::new(gain);
        if let Some(existing) = self.edges.iter_mut().find(|e| e.from == f && e.to == t) {
            let old = existing.gain.clone();
            existing.gain = Arc::new(move |w| old(w) + gain(w));
            existing.label = format!("{} + {}", existing.label, label);
        } else {
            self.edges.push(Edge { from: f, to: t, label: label.to_string(), gain });
        }
        Ok(self)
    }

    /// Frequency-independent edge.
    pub fn constant(&mut self, from: &str, to: &str, gain: Complex64) -> Result<&mut Self> {
        self.edge(from, to, &format!("{gain}"), move |_| gain)
    }

    pub fn build(self) -> FlowGraph {
        FlowGraph { nodes: self.nodes, index: self.index, edges: self.edges }
    }
}

/// Gain with the size of the Mason expansion that produced it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GainResult {
    pub value: Complex64,
    pub n_paths: usize,
    pub n_loops: usize,
}

type NodeSet = u128;

#[derive(Debug, Clone)]
struct Chain {
    edges: Vec<usize>,
    nodes: NodeSet,
}

/// Forward paths and loops of a graph for one source/sink pair. The structure does
/// not depend on frequency, so one plan serves a whole sweep.
#[derive(Debug, Clone)]
pub struct MasonPlan {
    paths: Vec<Chain>,
    loops: Vec<Chain>,
}

impl FlowGraph {
    pub fn builder() -> FlowGraphBuilder {
        FlowGraphBuilder::default()
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn node_id(&self, name: &str) -> Result<usize> {
        self.index.get(name).copied().ok_or_else(|| Error::UnknownNode(name.to_string()))
    }

    /// Gain of the edge `from -> to` at `omega`, if present.
    pub fn edge_gain(&self, from: &str, to: &str, omega: f64) -> Result<Option<Complex64>> {
        let (f, t) = (self.node_id(from)?, self.node_id(to)?);
        Ok(self.edges.iter().find(|e| e.from == f && e.to == t).map(|e| (e.gain)(omega)))
    }

    /// Matrix `A` with `A[to][from]` the edge gain at `omega`.
    pub fn adjacency(&self, omega: f64) -> DMatrix<Complex64> {
        let n = self.nodes.len();
        let mut a = DMatrix::zeros(n, n);
        for e in &self.edges {
            a[(e.to, e.from)] += (e.gain)(omega);
        }
        a
    }

    /// `det(I - A)` at `omega`.
    pub fn determinant(&self, omega: f64) -> Complex64 {
        let n = self.nodes.len();
        (DMatrix::identity(n, n) - self.adjacency(omega)).determinant()
    }

    /// Enumerate forward paths `src -> dst` and all simple loops.
    pub fn mason_plan(&self, src: &str, dst: &str) -> Result<MasonPlan> {
        let (s, d) = (self.node_id(src)?, self.node_id(dst)?);
        if self.nodes.len() > NodeSet::BITS as usize {
            return Err(Error::InvalidParameter(format!(
                "Mason expansion supports at most {} nodes",
                NodeSet::BITS
            )));
        }
        let out = self.out_edges();
        let mut paths = Vec::new();
        if s == d {
            paths.push(Chain { edges: Vec::new(), nodes: bit(s) });
        } else {
            let mut stack = Vec::new();
            self.walk_paths(&out, s, d, bit(s), &mut stack, &mut paths);
        }
        let mut loops = Vec::new();
        for start in 0..self.nodes.len() {
            let mut stack = Vec::new();
            self.walk_loops(&out, start, start, bit(start), &mut stack, &mut loops);
        }
        Ok(MasonPlan { paths, loops })
    }

    fn out_edges(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.nodes.len()];
        for (k, e) in self.edges.iter().enumerate() {
            out[e.from].push(k);
        }
        out
    }

    fn walk_paths(
        &self,
        out: &[Vec<usize>],
        at: usize,
        dst: usize,
        visited: NodeSet,
        stack: &mut Vec<usize>,
        paths: &mut Vec<Chain>,
    ) {
        for &k in &out[at] {
            let next = self.edges[k].to;
            if visited & bit(next) != 0 {
                continue;
            }
            stack.push(k);
            if next == dst {
                paths.push(Chain { edges: stack.clone(), nodes: visited | bit(next) });
            } else {
                self.walk_paths(out, next, dst, visited | bit(next), stack, paths);
            }
            stack.pop();
        }
    }

    // Each cycle is found once: from its smallest node, visiting only larger ones.
    fn walk_loops(
        &self,
        out: &[Vec<usize>],
        start: usize,
        at: usize,
        visited: NodeSet,
        stack: &mut Vec<usize>,
        loops: &mut Vec<Chain>,
    ) {
        for &k in &out[at] {
            let next = self.edges[k].to;
            if next == start {
                stack.push(k);
                loops.push(Chain { edges: stack.clone(), nodes: visited });
                stack.pop();
            } else if next > start && visited & bit(next) == 0 {
                stack.push(k);
                self.walk_loops(out, start, next, visited | bit(next), stack, loops);
                stack.pop();
            }
        }
    }

    /// Graph in Graphviz DOT form with symbolic edge labels.
    pub fn to_dot(&self) -> String {
        let mut s = String::from("digraph sfg {\n  rankdir=LR;\n");
        for n in &self.nodes {
            let shape = match n.role {
                NodeRole::Source => "invhouse",
                NodeRole::Sink => "house",
                NodeRole::Internal => "circle",
            };
            let _ = writeln!(s, "  \"{}\" [shape={}];", n.name, shape);
        }
        for e in &self.edges {
            let _ = writeln!(
                s,
                "  \"{}\" -> \"{}\" [label=\"{}\"];",
                self.nodes[e.from].name,
                self.nodes[e.to].name,
                e.label.replace('"', "'")
            );
        }
        s.push_str("}\n");
        s
    }

    pub fn write_dot(&self, path: impl AsRef<std::path::Path>) -> Result<()> {
        std::fs::write(path, self.to_dot())?;
        Ok(())
    }
}

fn bit(i: usize) -> NodeSet {
    1 << i
}

impl MasonPlan {
    pub fn n_paths(&self) -> usize {
        self.paths.len()
    }

    pub fn n_loops(&self) -> usize {
        self.loops.len()
    }

    /// Loop gains at `omega`, in enumeration order.
    pub fn loop_gains(&self, graph: &FlowGraph, omega: f64) -> Vec<Complex64> {
        let w: Vec<Complex64> = graph.edges.iter().map(|e| (e.gain)(omega)).collect();
        self.loops.iter().map(|l| chain_gain(&l.edges, &w)).collect()
    }

    /// Mason determinant `1 - sum L + sum L L - ...` over non-touching loop sets.
    pub fn determinant(&self, graph: &FlowGraph, omega: f64) -> Complex64 {
        let gains = self.loop_gains(graph, omega);
        cofactor(&self.loops, &gains, 0, 0)
    }

    pub fn evaluate(&self, graph: &FlowGraph, omega: f64) -> Result<GainResult> {
        let w: Vec<Complex64> = graph.edges.iter().map(|e| (e.gain)(omega)).collect();
        let gains: Vec<Complex64> = self.loops.iter().map(|l| chain_gain(&l.edges, &w)).collect();
        let delta = cofactor(&self.loops, &gains, 0, 0);
        if delta.norm() < SINGULAR_DET {
            return Err(Error::SingularGraph { omega, det: delta.norm() });
        }
        let numerator: Complex64 = self
            .paths
            .iter()
            .map(|p| chain_gain(&p.edges, &w) * cofactor(&self.loops, &gains, 0, p.nodes))
            .sum();
        Ok(GainResult { value: numerator / delta, n_paths: self.paths.len(), n_loops: self.loops.len() })
    }
}

fn chain_gain(edges: &[usize], w: &[Complex64]) -> Complex64 {
    edges.iter().fold(Complex64::new(1.0, 0.0), |acc, &k| acc * w[k])
}

/// Sum over sets of mutually non-touching loops (indices >= `from`, disjoint from
/// `used`) of `prod(-L)`.
fn cofactor(loops: &[Chain], gains: &[Complex64], from: usize, used: NodeSet) -> Complex64 {
    let mut total = Complex64::new(1.0, 0.0);
    for k in from..loops.len() {
        if loops[k].nodes & used == 0 {
            total -= gains[k] * cofactor(loops, gains, k + 1, used | loops[k].nodes);
        }
    }
    total
}

/// Transfer gain `src -> dst` by Mason's gain formula.
pub fn mason_gain(graph: &FlowGraph, src: &str, dst: &str, omega: f64) -> Result<GainResult> {
    graph.mason_plan(src, dst)?.evaluate(graph, omega)
}

/// Transfer gain `src -> dst` from solving `(I - A) x = e_src`.
pub fn solve_gain(graph: &FlowGraph, src: &str, dst: &str, omega: f64) -> Result<Complex64> {
    let (s, d) = (graph.node_id(src)?, graph.node_id(dst)?);
    let n = graph.nodes.len();
    let m = DMatrix::identity(n, n) - graph.adjacency(omega);
    let lu = m.lu();
    let det = lu.determinant();
    if det.norm() < SINGULAR_DET {
        return Err(Error::SingularGraph { omega, det: det.norm() });
    }
    let mut rhs = DVector::zeros(n);
    rhs[s] = Complex64::new(1.0, 0.0);
    let x = lu.solve(&rhs).ok_or(Error::SingularGraph { omega, det: det.norm() })?;
    Ok(x[d])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn single_edge() {
        let mut b = FlowGraph::builder();
        b.node("in", NodeRole::Source).unwrap();
        b.node("out", NodeRole::Sink).unwrap();
        b.constant("in", "out", c(0.3, -0.2)).unwrap();
        let g = b.build();
        let r = mason_gain(&g, "in", "out", 0.0).unwrap();
        assert_eq!(r.value, c(0.3, -0.2));
        assert_eq!((r.n_paths, r.n_loops), (1, 0));
        assert!((solve_gain(&g, "in", "out", 0.0).unwrap() - c(0.3, -0.2)).norm() < 1e-15);
    }

    #[test]
    fn path_through_self_loop() {
        let mut b = FlowGraph::builder();
        b.node("in", NodeRole::Source).unwrap();
        b.node("x", NodeRole::Internal).unwrap();
        b.node("out", NodeRole::Sink).unwrap();
        b.constant("in", "x", c(2.0, 0.0)).unwrap();
        b.constant("x", "out", c(0.0, 1.5)).unwrap();
        b.constant("x", "x", c(0.4, 0.1)).unwrap();
        let g = b.build();
        let expected = c(2.0, 0.0) * c(0.0, 1.5) / (c(1.0, 0.0) - c(0.4, 0.1));
        let r = mason_gain(&g, "in", "out", 0.0).unwrap();
        assert!((r.value - expected).norm() < 1e-14);
        assert_eq!(r.n_loops, 1);
    }

    #[test]
    fn parallel_edges_merge() {
        let mut b = FlowGraph::builder();
        b.node("a", NodeRole::Source).unwrap();
        b.node("b", NodeRole::Sink).unwrap();
        b.constant("a", "b", c(1.0, 0.0)).unwrap();
        b.edge("a", "b", "w", |w| c(w, 0.0)).unwrap();
        let g = b.build();
        assert_eq!(g.edge_count(), 1);
        assert_eq!(mason_gain(&g, "a", "b", 2.0).unwrap().value, c(3.0, 0.0));
    }

    #[test]
    fn self_gain_counts_return_loops() {
        let mut b = FlowGraph::builder();
        b.node("a", NodeRole::Internal).unwrap();
        b.node("b", NodeRole::Internal).unwrap();
        b.constant("a", "b", c(0.5, 0.0)).unwrap();
        b.constant("b", "a", c(0.5, 0.0)).unwrap();
        let g = b.build();
        let m = mason_gain(&g, "a", "a", 0.0).unwrap().value;
        let s = solve_gain(&g, "a", "a", 0.0).unwrap();
        assert!((m - c(1.0 / 0.75, 0.0)).norm() < 1e-14);
        assert!((s - m).norm() < 1e-14);
    }

    #[test]
    fn singular_graph_is_reported() {
        let mut b = FlowGraph::builder();
        b.node("in", NodeRole::Source).unwrap();
        b.node("x", NodeRole::Internal).unwrap();
        b.constant("in", "x", c(1.0, 0.0)).unwrap();
        b.constant("x", "x", c(1.0, 0.0)).unwrap();
        let g = b.build();
        assert!(matches!(mason_gain(&g, "in", "x", 0.0), Err(Error::SingularGraph { .. })));
        assert!(matches!(solve_gain(&g, "in", "x", 0.0), Err(Error::SingularGraph { .. })));
    }

    #[test]
    fn duplicate_and_unknown_nodes() {
        let mut b = FlowGraph::builder();
        b.node("a", NodeRole::Source).unwrap();
        assert!(b.node("a", NodeRole::Sink).is_err());
        assert!(matches!(b.constant("a", "zz", c(1.0, 0.0)), Err(Error::UnknownNode(_))));
    }

    #[test]
    fn dot_output_lists_edges() {
        let mut b = FlowGraph::builder();
        b.node("in", NodeRole::Source).unwrap();
        b.node("out", NodeRole::Sink).unwrap();
        b.edge("in", "out", "chi(w)", |_| c(1.0, 0.0)).unwrap();
        let dot = b.build().to_dot();
        assert!(dot.contains("\"in\" -> \"out\" [label=\"chi(w)\"]"));
    }
}
