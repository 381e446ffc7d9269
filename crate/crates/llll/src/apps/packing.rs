//! Edge-disjoint packing of two uniform hypergraphs into [n].
//!
//! The first hypergraph is placed by the identity; the task is a
//! permutation φ so that φ applied to the second hypergraph's edges
//! avoids every edge of the first. A bad event fixes one edge from each
//! hypergraph and one bijection between them: the s! conjunctions
//! "φ(v_i) = u_{σ(i)}" per edge pair.

use std::collections::BTreeMap;

use super::{Application, Certificate};
use crate::core::BadEvent;
use crate::engine::{BadEventChecker, Problem};
use crate::spaces::{Atom, SpaceDescriptor, State};
use crate::{Error, Result};

#[derive(Debug, Clone)]
pub struct PackingInstance {
    pub n: usize,
    pub h1: Vec<Vec<usize>>,
    pub h2: Vec<Vec<usize>>,
}

impl PackingInstance {
    pub fn edge_size(&self) -> Result<usize> {
        let s = self
            .h1
            .first()
            .or_else(|| self.h2.first())
            .map(|e| e.len())
            .unwrap_or(0);
        for (name, edges) in [("first", &self.h1), ("second", &self.h2)] {
            for (i, e) in edges.iter().enumerate() {
                if e.len() != s {
                    return Err(Error::Input(format!(
                        "{name} hypergraph edge {i} has size {}, expected {s}",
                        e.len()
                    )));
                }
                let mut vs = e.clone();
                vs.sort_unstable();
                vs.dedup();
                if vs.len() != s {
                    return Err(Error::Input(format!("{name} hypergraph edge {i} repeats a vertex")));
                }
                if let Some(&v) = e.iter().find(|&&v| v >= self.n) {
                    return Err(Error::Input(format!(
                        "{name} hypergraph edge {i}: vertex {v} out of range"
                    )));
                }
            }
        }
        Ok(s)
    }

    fn max_degree(edges: &[Vec<usize>], n: usize) -> usize {
        let mut deg = vec![0usize; n];
        for e in edges {
            for &v in e {
                deg[v] += 1;
            }
        }
        deg.into_iter().max().unwrap_or(0)
    }
}

/// All permutations of 0..s in lexicographic order.
fn permutations(s: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn rec(s: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == s {
            out.push(cur.clone());
            return;
        }
        for i in 0..s {
            if !cur.contains(&i) {
                cur.push(i);
                rec(s, cur, out);
                cur.pop();
            }
        }
    }
    rec(s, &mut cur, &mut out);
    out
}

struct ImageChecker {
    h1_index: BTreeMap<Vec<usize>, usize>,
    h1: Vec<Vec<usize>>,
    h2: Vec<Vec<usize>>,
    /// (f1 index, f2 index, σ lex rank) → event id.
    ids: BTreeMap<(usize, usize, usize), usize>,
    sigma_ranks: BTreeMap<Vec<usize>, usize>,
}

impl BadEventChecker for ImageChecker {
    fn violated(&self, _space: &SpaceDescriptor, _events: &[BadEvent], state: &State) -> Vec<usize> {
        let perm = match state {
            State::Perm(p) => p,
            _ => unreachable!("packing states are permutations"),
        };
        let mut out = Vec::new();
        for (j, f2) in self.h2.iter().enumerate() {
            let image: Vec<usize> = f2.iter().map(|&v| perm.fwd[v]).collect();
            let mut sorted = image.clone();
            sorted.sort_unstable();
            let Some(&i) = self.h1_index.get(&sorted) else { continue };
            // Recover the bijection: σ(k) = position of φ(v_k) in f1.
            let f1 = &self.h1[i];
            let sigma: Vec<usize> = image
                .iter()
                .map(|u| f1.iter().position(|x| x == u).unwrap())
                .collect();
            out.push(self.ids[&(i, j, self.sigma_ranks[&sigma])]);
        }
        out.sort_unstable();
        out
    }
}

pub struct PackingApp {
    pub instance: PackingInstance,
    problem: Problem,
    certificate: Certificate,
}

pub fn build_packing(instance: PackingInstance, eps: f64) -> Result<PackingApp> {
    let s = instance.edge_size()?;
    if s < 2 {
        return Err(Error::Input("edges must have at least 2 vertices".into()));
    }
    let n = instance.n;
    let space = SpaceDescriptor::Permutation { n };
    space.validate()?;
    let sigmas = permutations(s);
    let mut events = Vec::with_capacity(instance.h1.len() * instance.h2.len() * sigmas.len());
    let mut ids = BTreeMap::new();
    for (i, f1) in instance.h1.iter().enumerate() {
        for (j, f2) in instance.h2.iter().enumerate() {
            for (r, sigma) in sigmas.iter().enumerate() {
                let atoms = f2
                    .iter()
                    .zip(sigma)
                    .map(|(&v, &k)| Atom::Perm { x: v, y: f1[k] })
                    .collect();
                ids.insert((i, j, r), events.len());
                events.push(BadEvent::new(events.len(), atoms, &space)?);
            }
        }
    }
    let (m1, m2) = (instance.h1.len() as f64, instance.h2.len() as f64);
    let d1 = PackingInstance::max_degree(&instance.h1, n) as f64;
    let d2 = PackingInstance::max_degree(&instance.h2, n) as f64;
    let bound = binom(n, s) / (std::f64::consts::E * (1.0 + eps));
    let lhs = (d1 + 1.0) * m2 + (d2 + 1.0) * m1;
    let p: f64 = (0..s).map(|i| 1.0 / (n - i) as f64).product();
    let certificate = Certificate {
        satisfied: lhs < bound,
        work_bound: std::f64::consts::E * events.len() as f64 * p,
        detail: format!(
            "(d1+1)m2 + (d2+1)m1 = {lhs:.1} vs C({n},{s})/(e(1+ε)) = {bound:.1}; \
             event probability {p:.3e}"
        ),
    };
    let mut h1_index = BTreeMap::new();
    for (i, f1) in instance.h1.iter().enumerate() {
        let mut sorted = f1.clone();
        sorted.sort_unstable();
        if h1_index.insert(sorted, i).is_some() {
            return Err(Error::Input("first hypergraph repeats an edge".into()));
        }
    }
    let sigma_ranks = sigmas.iter().enumerate().map(|(r, s)| (s.clone(), r)).collect();
    let checker = Box::new(ImageChecker {
        h1_index,
        h1: instance.h1.clone(),
        h2: instance.h2.clone(),
        ids,
        sigma_ranks,
    });
    let problem = Problem::with_checker(space, events, checker)?;
    Ok(PackingApp { instance, problem, certificate })
}

fn binom(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    (0..k).map(|i| (n - i) as f64 / (k - i) as f64).product()
}

impl Application for PackingApp {
    fn problem(&self) -> &Problem {
        &self.problem
    }

    fn certificate(&self) -> &Certificate {
        &self.certificate
    }

    fn check_solution(&self, state: &State) -> bool {
        let perm = match state {
            State::Perm(p) => p,
            _ => return false,
        };
        let h1: std::collections::BTreeSet<Vec<usize>> = self
            .instance
            .h1
            .iter()
            .map(|e| {
                let mut e = e.clone();
                e.sort_unstable();
                e
            })
            .collect();
        self.instance.h2.iter().all(|f2| {
            let mut image: Vec<usize> = f2.iter().map(|&v| perm.fwd[v]).collect();
            image.sort_unstable();
            !h1.contains(&image)
        })
    }

    fn render_solution(&self, state: &State) -> String {
        match state {
            State::Perm(p) => p.fwd.iter().map(|j| j.to_string()).collect::<Vec<_>>().join(" "),
            _ => String::new(),
        }
    }
}
