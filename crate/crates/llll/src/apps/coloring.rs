//! Non-monochromatic coloring of uniform hypergraphs.
//!
//! Each vertex gets a uniform color; the bad events are "edge e is
//! entirely color c", one per (edge, color) pair. Two such events on a
//! shared vertex are dependent only for *different* colors — two ways
//! of being monochromatic in the same color agree on every shared atom.

use super::{Application, Certificate};
use crate::core::BadEvent;
use crate::engine::{BadEventChecker, Problem};
use crate::spaces::{Atom, SpaceDescriptor, State};
use crate::{Error, Result};

/// A hypergraph with uniform edge size.
#[derive(Debug, Clone)]
pub struct Hypergraph {
    pub n: usize,
    pub edges: Vec<Vec<usize>>,
}

impl Hypergraph {
    pub fn edge_size(&self) -> Result<usize> {
        let k = self.edges.first().map(|e| e.len()).unwrap_or(0);
        for (i, e) in self.edges.iter().enumerate() {
            if e.len() != k {
                return Err(Error::Input(format!(
                    "edge {i} has size {}, expected uniform size {k}",
                    e.len()
                )));
            }
            let mut vs = e.clone();
            vs.sort_unstable();
            vs.dedup();
            if vs.len() != k {
                return Err(Error::Input(format!("edge {i} repeats a vertex")));
            }
            if let Some(&v) = e.iter().find(|&&v| v >= self.n) {
                return Err(Error::Input(format!("edge {i}: vertex {v} out of range")));
            }
        }
        Ok(k)
    }

    /// Max number of edges any single vertex lies in.
    pub fn max_degree(&self) -> usize {
        let mut deg = vec![0usize; self.n];
        for e in &self.edges {
            for &v in e {
                deg[v] += 1;
            }
        }
        deg.into_iter().max().unwrap_or(0)
    }
}

/// Degree cap for c-coloring edges of size k.
pub fn degree_cap(k: usize, c: usize, eps: f64) -> f64 {
    let (kf, cf) = (k as f64, c as f64);
    cf.powi(k as i32) * (1.0 - 1.0 / kf).powi(k as i32 - 1) / (kf * (cf - 1.0) * (1.0 + eps))
}

struct EdgeColorChecker {
    edges: Vec<Vec<usize>>,
    colors: usize,
}

impl BadEventChecker for EdgeColorChecker {
    fn violated(&self, _space: &SpaceDescriptor, _events: &[BadEvent], state: &State) -> Vec<usize> {
        let vals = match state {
            State::Vars(v) => v,
            _ => unreachable!("coloring states are variable vectors"),
        };
        let mut out = Vec::new();
        for (i, e) in self.edges.iter().enumerate() {
            let c = vals[e[0]];
            if e[1..].iter().all(|&v| vals[v] == c) {
                out.push(i * self.colors + c);
            }
        }
        out
    }
}

pub struct HypergraphColoringApp {
    pub hypergraph: Hypergraph,
    pub colors: usize,
    problem: Problem,
    certificate: Certificate,
}

pub fn build_hypergraph_coloring(
    hypergraph: Hypergraph,
    colors: usize,
    eps: f64,
) -> Result<HypergraphColoringApp> {
    let k = hypergraph.edge_size()?;
    if colors < 2 {
        return Err(Error::Input(format!("need at least 2 colors, got {colors}")));
    }
    if k < 2 && !hypergraph.edges.is_empty() {
        return Err(Error::Input("edges must have at least 2 vertices".into()));
    }
    let space = SpaceDescriptor::uniform_variables(hypergraph.n, colors);
    let mut events = Vec::with_capacity(hypergraph.edges.len() * colors);
    for e in &hypergraph.edges {
        for c in 0..colors {
            let atoms = e.iter().map(|&v| Atom::Var { index: v, value: c }).collect();
            events.push(BadEvent::new(events.len(), atoms, &space)?);
        }
    }
    let cap = degree_cap(k.max(2), colors, eps);
    let deg = hypergraph.max_degree();
    let p = (colors as f64).powi(-(k.max(1) as i32));
    let certificate = Certificate {
        satisfied: (deg as f64) <= cap,
        work_bound: std::f64::consts::E * events.len() as f64 * p,
        detail: format!(
            "k={k}, c={colors}: max degree {deg} vs cap {cap:.3}; event probability {p:.3e}"
        ),
    };
    let checker = Box::new(EdgeColorChecker { edges: hypergraph.edges.clone(), colors });
    let problem = Problem::with_checker(space, events, checker)?;
    Ok(HypergraphColoringApp { hypergraph, colors, problem, certificate })
}

impl Application for HypergraphColoringApp {
    fn problem(&self) -> &Problem {
        &self.problem
    }

    fn certificate(&self) -> &Certificate {
        &self.certificate
    }

    fn check_solution(&self, state: &State) -> bool {
        let vals = match state {
            State::Vars(v) => v,
            _ => return false,
        };
        self.hypergraph
            .edges
            .iter()
            .all(|e| e[1..].iter().any(|&v| vals[v] != vals[e[0]]))
    }

    fn render_solution(&self, state: &State) -> String {
        match state {
            State::Vars(v) => {
                v.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(" ")
            }
            _ => String::new(),
        }
    }
}
