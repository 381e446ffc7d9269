//! Rainbow structures in edge-colored complete (hyper)graphs: perfect
//! matchings of K_n and K_n^(s), and Hamiltonian cycles of K_n.
//!
//! In every case the bad events say "two edges of the same color are
//! both used"; a rainbow structure is exactly a bad-event-free state.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng;

use super::{Application, Certificate};
use crate::core::BadEvent;
use crate::engine::{BadEventChecker, Problem};
use crate::spaces::{Atom, SpaceDescriptor, State};
use crate::{Error, Result};

/// A complete edge coloring of K_n^(s) (s = 2 gives K_n).
#[derive(Debug, Clone)]
pub struct EdgeColoring {
    pub n: usize,
    pub s: usize,
    /// `classes[c]`: the sorted edges of color c, each edge sorted.
    pub classes: Vec<Vec<Vec<usize>>>,
}

impl EdgeColoring {
    /// Builds from (edge, color) assignments; requires every edge of
    /// K_n^(s) to be colored exactly once.
    pub fn new(n: usize, s: usize, assignments: Vec<(Vec<usize>, usize)>) -> Result<EdgeColoring> {
        let num_colors = assignments.iter().map(|&(_, c)| c + 1).max().unwrap_or(0);
        let mut classes = vec![Vec::new(); num_colors];
        let mut seen = std::collections::BTreeSet::new();
        for (mut e, c) in assignments {
            e.sort_unstable();
            if e.len() != s || e.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::Input(format!("edge {e:?} is not a {s}-set")));
            }
            if e.iter().any(|&v| v >= n) {
                return Err(Error::Input(format!("edge {e:?} has a vertex outside 0..{n}")));
            }
            if !seen.insert(e.clone()) {
                return Err(Error::Input(format!("edge {e:?} colored twice")));
            }
            classes[c].push(e);
        }
        let expected = binom(n, s);
        if seen.len() as f64 != expected {
            return Err(Error::Input(format!(
                "coloring covers {} edges, K_{n}^({s}) has {expected}",
                seen.len()
            )));
        }
        for class in &mut classes {
            class.sort();
        }
        Ok(EdgeColoring { n, s, classes })
    }

    pub fn max_multiplicity(&self) -> usize {
        self.classes.iter().map(|c| c.len()).max().unwrap_or(0)
    }

    fn color_map(&self) -> BTreeMap<Vec<usize>, usize> {
        let mut m = BTreeMap::new();
        for (c, class) in self.classes.iter().enumerate() {
            for e in class {
                m.insert(e.clone(), c);
            }
        }
        m
    }
}

fn binom(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    (0..k).map(|i| (n - i) as f64 / (k - i) as f64).product()
}

/// Probability that two fixed disjoint s-edges both lie in a uniform
/// perfect matching of K_n^(s).
pub fn matching_pair_probability(n: usize, s: usize) -> f64 {
    let blocks = (n / s) as f64;
    blocks * (blocks - 1.0) / (binom(n, s) * binom(n - s, s))
}

// ---------------------------------------------------------------------
// Rainbow perfect matchings.
// ---------------------------------------------------------------------

struct MatchingPairChecker {
    classes: Vec<Vec<Vec<usize>>>,
    ids: BTreeMap<(Vec<usize>, Vec<usize>), usize>,
}

impl BadEventChecker for MatchingPairChecker {
    fn violated(&self, _space: &SpaceDescriptor, _events: &[BadEvent], state: &State) -> Vec<usize> {
        let blocks = match state {
            State::Matching(b) => b,
            _ => unreachable!("rainbow matching states are matchings"),
        };
        let in_matching: std::collections::BTreeSet<&Vec<usize>> = blocks.iter().collect();
        let mut out = Vec::new();
        for class in &self.classes {
            let present: Vec<&Vec<usize>> =
                class.iter().filter(|e| in_matching.contains(e)).collect();
            for (i, &e) in present.iter().enumerate() {
                for &f in &present[i + 1..] {
                    out.push(self.ids[&(e.clone(), f.clone())]);
                }
            }
        }
        out
    }
}

pub struct RainbowMatchingApp {
    pub coloring: EdgeColoring,
    problem: Problem,
    certificate: Certificate,
}

/// Rainbow perfect matching of K_n^(s). Commutative (hence
/// parallel-eligible) only for s = 2; larger s runs sequentially.
pub fn build_rainbow_matching_kns(coloring: EdgeColoring, eps: f64) -> Result<RainbowMatchingApp> {
    let (n, s) = (coloring.n, coloring.s);
    let space = SpaceDescriptor::Matching { n, s };
    space.validate()?;
    let mut events = Vec::new();
    let mut ids = BTreeMap::new();
    for class in &coloring.classes {
        for (i, e) in class.iter().enumerate() {
            for f in &class[i + 1..] {
                if e.iter().any(|v| f.contains(v)) {
                    continue; // overlapping edges can never co-occur
                }
                let atoms = vec![Atom::edge(e.clone()), Atom::edge(f.clone())];
                ids.insert((e.clone(), f.clone()), events.len());
                events.push(BadEvent::new(events.len(), atoms, &space)?);
            }
        }
    }
    let delta = coloring.max_multiplicity();
    let p = matching_pair_probability(n, s);
    let certificate = if s == 2 {
        let cap = 0.105 * n as f64;
        Certificate {
            satisfied: (delta as f64) <= cap,
            work_bound: std::f64::consts::E * events.len() as f64 * p,
            detail: format!(
                "n={n}: max color multiplicity {delta} vs cap {cap:.3}; pair probability {p:.3e}"
            ),
        }
    } else {
        cluster_root_certificate(n, s, delta, p, eps, events.len())
    };
    let checker = Box::new(MatchingPairChecker { classes: coloring.classes.clone(), ids });
    let problem = Problem::with_checker(space, events, checker)?;
    Ok(RainbowMatchingApp { coloring, problem, certificate })
}

/// Rainbow perfect matching of K_n (requires n even).
pub fn build_rainbow_matching_kn(coloring: EdgeColoring, eps: f64) -> Result<RainbowMatchingApp> {
    if coloring.s != 2 {
        return Err(Error::Input("K_n matchings take 2-edges".into()));
    }
    if coloring.n % 2 != 0 {
        return Err(Error::Input(format!("n={} is odd, no perfect matching", coloring.n)));
    }
    build_rainbow_matching_kns(coloring, eps)
}

/// Cluster-expansion certificate for s ≥ 3: searches for a root α of
/// α = p(1 + C(n−1,s−1)(Δ−1)α)^{2s} by fixed-point iteration from p.
fn cluster_root_certificate(
    n: usize,
    s: usize,
    delta: usize,
    p: f64,
    eps: f64,
    num_events: usize,
) -> Certificate {
    let d = binom(n - 1, s - 1) * delta.saturating_sub(1) as f64;
    let mut alpha = p * (1.0 + eps);
    let mut converged = false;
    for _ in 0..500 {
        let next = p * (1.0 + eps) * (1.0 + d * alpha).powi(2 * s as i32);
        if !next.is_finite() || next > 1.0 {
            break;
        }
        if (next - alpha).abs() <= 1e-13 * alpha.max(1e-300) {
            alpha = next;
            converged = true;
            break;
        }
        alpha = next;
    }
    Certificate {
        satisfied: converged,
        work_bound: num_events as f64 * alpha,
        detail: format!(
            "n={n}, s={s}, Δ={delta}: pair probability {p:.3e}, neighborhood factor {d:.3e}, \
             root {} at α={alpha:.3e}",
            if converged { "found" } else { "not found" }
        ),
    }
}

impl Application for RainbowMatchingApp {
    fn problem(&self) -> &Problem {
        &self.problem
    }

    fn certificate(&self) -> &Certificate {
        &self.certificate
    }

    fn check_solution(&self, state: &State) -> bool {
        let blocks = match state {
            State::Matching(b) => b,
            _ => return false,
        };
        let colors = self.coloring.color_map();
        let mut used = std::collections::BTreeSet::new();
        blocks.iter().all(|b| colors.get(b).is_some_and(|&c| used.insert(c)))
    }

    fn render_solution(&self, state: &State) -> String {
        match state {
            State::Matching(blocks) => blocks
                .iter()
                .map(|b| b.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("-"))
                .collect::<Vec<_>>()
                .join(" "),
            _ => String::new(),
        }
    }
}

// ---------------------------------------------------------------------
// Rainbow Hamiltonian cycles.
// ---------------------------------------------------------------------

/// The oriented successor-path atoms of one same-color edge pair: every
/// orientation combination that can simultaneously hold in a cycle.
fn pair_orientations(e: &[usize], f: &[usize]) -> Vec<Vec<Atom>> {
    let shared: Vec<usize> = e.iter().copied().filter(|v| f.contains(v)).collect();
    match shared.len() {
        0 => {
            let (a, b, c, d) = (e[0], e[1], f[0], f[1]);
            vec![
                vec![Atom::Path(vec![a, b]), Atom::Path(vec![c, d])],
                vec![Atom::Path(vec![a, b]), Atom::Path(vec![d, c])],
                vec![Atom::Path(vec![b, a]), Atom::Path(vec![c, d])],
                vec![Atom::Path(vec![b, a]), Atom::Path(vec![d, c])],
            ]
        }
        1 => {
            let v = shared[0];
            let mut ends: Vec<usize> = e
                .iter()
                .chain(f.iter())
                .copied()
                .filter(|&u| u != v)
                .collect();
            ends.sort_unstable();
            let (x, y) = (ends[0], ends[1]);
            vec![vec![Atom::Path(vec![x, v, y])], vec![Atom::Path(vec![y, v, x])]]
        }
        _ => Vec::new(), // identical edges cannot be a pair
    }
}

struct CyclePairChecker {
    /// (event id, its defining oriented atoms), in id order.
    oriented: Vec<(usize, Vec<Atom>)>,
}

impl BadEventChecker for CyclePairChecker {
    fn violated(&self, _space: &SpaceDescriptor, _events: &[BadEvent], state: &State) -> Vec<usize> {
        let perm = match state {
            State::Cycle(p) => p,
            _ => unreachable!("rainbow cycle states are successor tables"),
        };
        let path_holds = |atoms: &[Atom]| {
            atoms.iter().all(|a| match a {
                Atom::Path(vs) => vs.windows(2).all(|w| perm.fwd[w[0]] == w[1]),
                _ => unreachable!(),
            })
        };
        self.oriented
            .iter()
            .filter(|(_, atoms)| path_holds(atoms))
            .map(|&(id, _)| id)
            .collect()
    }
}

pub struct RainbowHamCycleApp {
    pub coloring: EdgeColoring,
    problem: Problem,
    certificate: Certificate,
}

pub fn build_rainbow_hamcycle(coloring: EdgeColoring, _eps: f64) -> Result<RainbowHamCycleApp> {
    if coloring.s != 2 {
        return Err(Error::Input("Hamiltonian cycles take 2-edges".into()));
    }
    let n = coloring.n;
    let space = SpaceDescriptor::HamCycle { n };
    space.validate()?;
    let mut events = Vec::new();
    let mut oriented = Vec::new();
    for class in &coloring.classes {
        for (i, e) in class.iter().enumerate() {
            for f in &class[i + 1..] {
                for atoms in pair_orientations(e, f) {
                    oriented.push((events.len(), atoms.clone()));
                    events.push(BadEvent::new(events.len(), atoms, &space)?);
                }
            }
        }
    }
    let delta = coloring.max_multiplicity();
    let cap = 0.026 * n as f64;
    let p = 1.0 / ((n - 1) as f64 * (n - 2) as f64);
    let certificate = Certificate {
        satisfied: (delta as f64) <= cap,
        work_bound: std::f64::consts::E * events.len() as f64 * p,
        detail: format!(
            "n={n}: max color multiplicity {delta} vs cap {cap:.3}; orientation probability {p:.3e}"
        ),
    };
    let checker = Box::new(CyclePairChecker { oriented });
    let problem = Problem::with_checker(space, events, checker)?;
    Ok(RainbowHamCycleApp { coloring, problem, certificate })
}

impl RainbowHamCycleApp {
    /// The undirected edges traversed by the cycle, sorted.
    fn cycle_edges(perm: &crate::spaces::PermTable) -> Vec<Vec<usize>> {
        let mut edges: Vec<Vec<usize>> = perm
            .fwd
            .iter()
            .enumerate()
            .map(|(v, &w)| {
                let mut e = vec![v, w];
                e.sort_unstable();
                e
            })
            .collect();
        edges.sort();
        edges
    }
}

impl Application for RainbowHamCycleApp {
    fn problem(&self) -> &Problem {
        &self.problem
    }

    fn certificate(&self) -> &Certificate {
        &self.certificate
    }

    fn check_solution(&self, state: &State) -> bool {
        let perm = match state {
            State::Cycle(p) => p,
            _ => return false,
        };
        if !perm.is_single_cycle() {
            return false;
        }
        let colors = self.coloring.color_map();
        let mut used = std::collections::BTreeSet::new();
        Self::cycle_edges(perm).iter().all(|e| colors.get(e).is_some_and(|&c| used.insert(c)))
    }

    fn render_solution(&self, state: &State) -> String {
        let perm = match state {
            State::Cycle(p) => p,
            _ => return String::new(),
        };
        let mut tour = vec![0usize];
        while tour.len() < perm.fwd.len() {
            tour.push(perm.fwd[*tour.last().unwrap()]);
        }
        tour.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" ")
    }
}

/// Random complete coloring of K_n^(s) in which every color appears on
/// at most `delta` edges.
pub fn random_edge_coloring(n: usize, s: usize, delta: usize, rng: &mut impl Rng) -> EdgeColoring {
    let mut edges: Vec<Vec<usize>> = Vec::new();
    let mut cur: Vec<usize> = Vec::new();
    fn rec(n: usize, s: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == s {
            out.push(cur.clone());
            return;
        }
        for v in start..n {
            cur.push(v);
            rec(n, s, v + 1, cur, out);
            cur.pop();
        }
    }
    rec(n, s, 0, &mut cur, &mut edges);
    edges.shuffle(rng);
    let mut classes: Vec<Vec<Vec<usize>>> =
        edges.chunks(delta).map(|chunk| chunk.to_vec()).collect();
    for class in &mut classes {
        class.sort();
    }
    EdgeColoring { n, s, classes }
}
