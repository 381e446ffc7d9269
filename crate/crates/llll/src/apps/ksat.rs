//! Uniform k-SAT with bounded variable occurrences.
//!
//! Variables are fair coins; a clause's bad event is the conjunction of
//! its k falsifying literal atoms. Two clauses are dependent only when
//! they share a variable with *opposite* signs — clauses that agree on
//! every shared literal are compatible, which is what buys the
//! occurrence bound its extra factor of two.

use rand::Rng;

use super::{Application, Certificate};
use crate::core::BadEvent;
use crate::engine::{BadEventChecker, Problem};
use crate::spaces::{Atom, SpaceDescriptor, State};
use crate::{Error, Result};

/// A CNF formula with uniform clause width.
#[derive(Debug, Clone)]
pub struct CnfInstance {
    pub num_vars: usize,
    /// Clauses as signed 1-based literals (DIMACS convention).
    pub clauses: Vec<Vec<i64>>,
}

impl CnfInstance {
    pub fn width(&self) -> Result<usize> {
        let k = self.clauses.first().map(|c| c.len()).unwrap_or(0);
        for (i, c) in self.clauses.iter().enumerate() {
            if c.len() != k {
                return Err(Error::Input(format!(
                    "clause {i} has width {}, expected uniform width {k}",
                    c.len()
                )));
            }
            let mut vars: Vec<u64> = c.iter().map(|&l| l.unsigned_abs()).collect();
            vars.sort_unstable();
            vars.dedup();
            if vars.len() != k {
                return Err(Error::Input(format!("clause {i} repeats a variable")));
            }
            for &l in c {
                if l == 0 || l.unsigned_abs() as usize > self.num_vars {
                    return Err(Error::Input(format!("clause {i}: literal {l} out of range")));
                }
            }
        }
        Ok(k)
    }

    /// Max number of clauses any single variable appears in.
    pub fn max_occurrences(&self) -> usize {
        let mut occ = vec![0usize; self.num_vars];
        for c in &self.clauses {
            for &l in c {
                occ[l.unsigned_abs() as usize - 1] += 1;
            }
        }
        occ.into_iter().max().unwrap_or(0)
    }
}

/// Occurrence cap: each variable may appear in at most this many
/// clauses for the convergence guarantee to apply.
pub fn occurrence_cap(k: usize, eps: f64) -> f64 {
    let kf = k as f64;
    2f64.powi(k as i32 + 1) * (1.0 - 1.0 / kf).powi(k as i32) / ((kf - 1.0) * (1.0 + eps))
        - 2.0 / kf
}

/// Per-clause weight used by the cluster-expansion certificate.
pub fn clause_weight(k: usize, eps: f64) -> f64 {
    (1.0 + eps) / (2.0 - 2.0 / k as f64).powi(k as i32)
}

/// The falsifying atom of a literal: positive literal v is false when
/// X_{v-1} = 0, negative when X_{v-1} = 1.
fn falsifying_atom(lit: i64) -> Atom {
    Atom::Var {
        index: lit.unsigned_abs() as usize - 1,
        value: usize::from(lit < 0),
    }
}

struct ClauseChecker {
    clauses: Vec<Vec<i64>>,
}

impl BadEventChecker for ClauseChecker {
    fn violated(&self, _space: &SpaceDescriptor, _events: &[BadEvent], state: &State) -> Vec<usize> {
        let vals = match state {
            State::Vars(v) => v,
            _ => unreachable!("k-SAT states are variable vectors"),
        };
        self.clauses
            .iter()
            .enumerate()
            .filter(|(_, c)| {
                c.iter().all(|&l| {
                    let v = vals[l.unsigned_abs() as usize - 1];
                    if l > 0 {
                        v == 0
                    } else {
                        v == 1
                    }
                })
            })
            .map(|(i, _)| i)
            .collect()
    }
}

pub struct KsatApp {
    pub instance: CnfInstance,
    pub width: usize,
    problem: Problem,
    certificate: Certificate,
}

pub fn build_ksat(instance: CnfInstance, eps: f64) -> Result<KsatApp> {
    let k = instance.width()?;
    if k < 2 {
        return Err(Error::Input(format!("clause width must be at least 2, got {k}")));
    }
    let space = SpaceDescriptor::uniform_variables(instance.num_vars, 2);
    let events = instance
        .clauses
        .iter()
        .enumerate()
        .map(|(i, c)| BadEvent::new(i, c.iter().map(|&l| falsifying_atom(l)).collect(), &space))
        .collect::<Result<Vec<_>>>()?;
    let cap = occurrence_cap(k, eps);
    let occ = instance.max_occurrences();
    let satisfied = (occ as f64) <= cap;
    let mu = clause_weight(k, eps);
    let certificate = Certificate {
        satisfied,
        work_bound: events.len() as f64 * mu,
        detail: format!(
            "k={k}: max occurrences {occ} vs cap {cap:.3}; clause weight {mu:.6}"
        ),
    };
    let checker = Box::new(ClauseChecker { clauses: instance.clauses.clone() });
    let problem = Problem::with_checker(space, events, checker)?;
    Ok(KsatApp { instance, width: k, problem, certificate })
}

impl Application for KsatApp {
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
        self.instance.clauses.iter().all(|c| {
            c.iter().any(|&l| {
                let v = vals[l.unsigned_abs() as usize - 1];
                if l > 0 {
                    v == 1
                } else {
                    v == 0
                }
            })
        })
    }

    fn render_solution(&self, state: &State) -> String {
        let vals = match state {
            State::Vars(v) => v,
            _ => return String::new(),
        };
        vals.iter()
            .enumerate()
            .map(|(i, &v)| if v == 1 { format!("{}", i + 1) } else { format!("-{}", i + 1) })
            .collect::<Vec<_>>()
            .join(" ")
    }
}

/// Random k-SAT instance in which every variable appears in at most
/// `max_occ` clauses; clause count is as large as the cap permits.
pub fn random_bounded_ksat(
    num_vars: usize,
    k: usize,
    max_occ: usize,
    rng: &mut impl Rng,
) -> CnfInstance {
    let target = num_vars * max_occ / k;
    let mut remaining: Vec<usize> = vec![max_occ; num_vars];
    let mut clauses = Vec::with_capacity(target);
    for _ in 0..target {
        let candidates: Vec<usize> =
            (0..num_vars).filter(|&v| remaining[v] > 0).collect();
        if candidates.len() < k {
            break;
        }
        let picks = rand::seq::index::sample(rng, candidates.len(), k);
        let mut clause: Vec<i64> = picks
            .iter()
            .map(|i| candidates[i])
            .map(|v| {
                remaining[v] -= 1;
                let lit = (v + 1) as i64;
                if rng.gen_bool(0.5) {
                    lit
                } else {
                    -lit
                }
            })
            .collect();
        clause.sort_by_key(|l| l.unsigned_abs());
        clauses.push(clause);
    }
    CnfInstance { num_vars, clauses }
}
