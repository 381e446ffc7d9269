//! Independent transversals of a color matrix.
//!
//! A permutation π selects the cells (i, π(i)) of an n×n color matrix;
//! we want no color selected s times. One bad event per same-color
//! s-tuple of cells with pairwise distinct rows and columns.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng;

use super::{Application, Certificate};
use crate::core::BadEvent;
use crate::engine::{BadEventChecker, Problem};
use crate::spaces::{Atom, SpaceDescriptor, State};
use crate::{Error, Result};

/// At most this many candidate s-tuples are enumerated per instance.
const TUPLE_BUDGET: usize = 2_000_000;

/// An n×n matrix of interned color labels.
#[derive(Debug, Clone)]
pub struct ColorMatrix {
    pub n: usize,
    pub colors: Vec<Vec<usize>>,
}

impl ColorMatrix {
    pub fn validate(&self) -> Result<()> {
        if self.colors.len() != self.n || self.colors.iter().any(|r| r.len() != self.n) {
            return Err(Error::Input(format!("color matrix must be {0}×{0}", self.n)));
        }
        Ok(())
    }

    /// Cells of each color, sorted by (row, col); indexed by color id.
    fn classes(&self) -> Vec<Vec<(usize, usize)>> {
        let num = self.colors.iter().flatten().max().map_or(0, |&c| c + 1);
        let mut classes = vec![Vec::new(); num];
        for (i, row) in self.colors.iter().enumerate() {
            for (j, &c) in row.iter().enumerate() {
                classes[c].push((i, j));
            }
        }
        classes
    }

    pub fn max_multiplicity(&self) -> usize {
        self.classes().into_iter().map(|c| c.len()).max().unwrap_or(0)
    }
}

/// Multiplicity cap on color classes for an s-bounded transversal.
pub fn multiplicity_cap(n: usize, s: usize, eps: f64) -> f64 {
    if s == 2 {
        return 0.105 * n as f64;
    }
    let sf = s as f64;
    let base = fact(s - 1) / (2.0 * std::f64::consts::E * (1.0 + eps) * sf);
    n as f64 * base.powf(1.0 / (sf - 1.0))
}

fn fact(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

/// Lists all s-combinations of `cells` with pairwise distinct rows and
/// columns, in lexicographic order.
fn distinct_tuples(cells: &[(usize, usize)], s: usize, out: &mut Vec<Vec<(usize, usize)>>) {
    fn rec(
        cells: &[(usize, usize)],
        s: usize,
        start: usize,
        cur: &mut Vec<(usize, usize)>,
        out: &mut Vec<Vec<(usize, usize)>>,
    ) {
        if cur.len() == s {
            out.push(cur.clone());
            return;
        }
        for i in start..cells.len() {
            let (r, c) = cells[i];
            if cur.iter().any(|&(r2, c2)| r2 == r || c2 == c) {
                continue;
            }
            cur.push(cells[i]);
            rec(cells, s, i + 1, cur, out);
            cur.pop();
        }
    }
    rec(cells, s, 0, &mut Vec::new(), out);
}

struct TransversalChecker {
    classes: Vec<Vec<(usize, usize)>>,
    arity: usize,
    ids: BTreeMap<Vec<(usize, usize)>, usize>,
}

impl BadEventChecker for TransversalChecker {
    fn violated(&self, _space: &SpaceDescriptor, _events: &[BadEvent], state: &State) -> Vec<usize> {
        let perm = match state {
            State::Perm(p) => p,
            _ => unreachable!("transversal states are permutations"),
        };
        let mut out = Vec::new();
        for class in &self.classes {
            let hits: Vec<(usize, usize)> =
                class.iter().copied().filter(|&(r, c)| perm.fwd[r] == c).collect();
            if hits.len() < self.arity {
                continue;
            }
            // Cells selected by a permutation automatically have
            // distinct rows and columns, so every subset is an event.
            let mut tuples = Vec::new();
            distinct_tuples(&hits, self.arity, &mut tuples);
            for t in tuples {
                out.push(self.ids[&t]);
            }
        }
        out
    }
}

pub struct TransversalApp {
    pub matrix: ColorMatrix,
    pub arity: usize,
    problem: Problem,
    certificate: Certificate,
}

pub fn build_transversal(matrix: ColorMatrix, s: usize, eps: f64) -> Result<TransversalApp> {
    matrix.validate()?;
    if s < 2 || s > matrix.n {
        return Err(Error::Input(format!("tuple size {s} out of range for n={}", matrix.n)));
    }
    let n = matrix.n;
    let classes = matrix.classes();
    let upper: f64 = classes.iter().map(|c| binom(c.len(), s)).sum();
    if upper > TUPLE_BUDGET as f64 {
        return Err(Error::Budget(format!(
            "instance enumerates about {upper:.2e} candidate {s}-tuples, budget {TUPLE_BUDGET}"
        )));
    }
    let space = SpaceDescriptor::Permutation { n };
    let mut events = Vec::new();
    let mut ids = BTreeMap::new();
    for class in &classes {
        let mut tuples = Vec::new();
        distinct_tuples(class, s, &mut tuples);
        for t in tuples {
            let atoms = t.iter().map(|&(r, c)| Atom::Perm { x: r, y: c }).collect();
            ids.insert(t, events.len());
            events.push(BadEvent::new(events.len(), atoms, &space)?);
        }
    }
    let cap = multiplicity_cap(n, s, eps);
    let delta = classes.iter().map(|c| c.len()).max().unwrap_or(0);
    let p: f64 = (0..s).map(|i| 1.0 / (n - i) as f64).product();
    let certificate = Certificate {
        satisfied: (delta as f64) <= cap,
        work_bound: std::f64::consts::E * events.len() as f64 * p,
        detail: format!(
            "n={n}, s={s}: max color multiplicity {delta} vs cap {cap:.3}; {} events of probability {p:.3e}",
            events.len()
        ),
    };
    let checker = Box::new(TransversalChecker { classes, arity: s, ids });
    let problem = Problem::with_checker(space, events, checker)?;
    Ok(TransversalApp { matrix, arity: s, problem, certificate })
}

fn binom(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    (0..k).map(|i| (n - i) as f64 / (k - i) as f64).product()
}

impl Application for TransversalApp {
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
        let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
        for (i, &j) in perm.fwd.iter().enumerate() {
            *counts.entry(self.matrix.colors[i][j]).or_insert(0) += 1;
        }
        counts.values().all(|&c| c < self.arity)
    }

    fn render_solution(&self, state: &State) -> String {
        match state {
            State::Perm(p) => {
                p.fwd.iter().map(|j| j.to_string()).collect::<Vec<_>>().join(" ")
            }
            _ => String::new(),
        }
    }
}

/// Random n×n matrix in which every color appears exactly `delta`
/// times. Requires `delta` to divide n².
pub fn random_color_matrix(n: usize, delta: usize, rng: &mut impl Rng) -> ColorMatrix {
    assert_eq!(n * n % delta, 0, "color multiplicity must divide n²");
    let mut cells: Vec<(usize, usize)> =
        (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).collect();
    cells.shuffle(rng);
    let mut colors = vec![vec![0; n]; n];
    for (idx, chunk) in cells.chunks(delta).enumerate() {
        for &(i, j) in chunk {
            colors[i][j] = idx;
        }
    }
    ColorMatrix { n, colors }
}
