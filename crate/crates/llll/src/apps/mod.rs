//! Application encoders.
//!
//! Each submodule turns a combinatorial instance into a [`Problem`]: a
//! probability space, a list of bad events, a criterion certificate, a
//! fast bad-event checker, and a semantic solution verifier. The
//! certificates are advisory — an unsatisfied certificate does not
//! prevent solving, it only predicts that the convergence guarantee may
//! not apply.

pub mod coloring;
pub mod ksat;
pub mod packing;
pub mod rainbow;
pub mod strong;
pub mod transversal;

use std::collections::HashMap;

use crate::engine::{BadEventChecker, FullScan, Problem};
use crate::spaces::State;

/// Outcome of evaluating an application's convergence criterion.
#[derive(Debug, Clone)]
pub struct Certificate {
    /// Whether the instance parameters satisfy the criterion.
    pub satisfied: bool,
    /// The expected-work bound implied by the criterion (meaningful
    /// only when `satisfied`).
    pub work_bound: f64,
    /// Human-readable account of the numbers that went into the check.
    pub detail: String,
}

/// Common surface the CLI drives: the built problem, its certificate,
/// and an application-level semantic check of a candidate solution.
pub trait Application: Send + Sync {
    fn problem(&self) -> &Problem;
    fn certificate(&self) -> &Certificate;
    /// Semantic check beyond "no bad event holds" (satisfying
    /// assignment, proper coloring, rainbow, transversal, disjointness).
    fn check_solution(&self, state: &State) -> bool;
    /// Renders the solution for display.
    fn render_solution(&self, state: &State) -> String;
}

/// Full verification: no bad event holds (by brute-force scan,
/// independent of the app's own checker) and the semantic check passes.
pub fn verify_solution(app: &dyn Application, state: &State) -> bool {
    let p = app.problem();
    FullScan.violated(&p.space, &p.events, state).is_empty() && app.check_solution(state)
}

/// Interns arbitrary labels to dense integers in first-appearance order.
#[derive(Default)]
pub struct Interner {
    map: HashMap<String, usize>,
}

impl Interner {
    pub fn new() -> Interner {
        Interner::default()
    }

    pub fn intern(&mut self, label: &str) -> usize {
        let next = self.map.len();
        *self.map.entry(label.to_string()).or_insert(next)
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }
}
