//! LLL criterion checkers.
//!
//! Each checker decides whether an instance (event probabilities, a
//! symmetric dependency adjacency, and a slack ε) satisfies a sufficient
//! convergence condition, and reports the associated work factor W that
//! bounds the expected number of resamplings.

use crate::{Error, Result};

/// An instance for the criterion checkers. `neighbors[b]` lists the
/// events dependent with `b`, excluding `b` itself; the inclusive
/// neighborhood N(b) is `neighbors[b] ∪ {b}`.
#[derive(Clone, Debug)]
pub struct CriterionInput {
    pub probs: Vec<f64>,
    pub neighbors: Vec<Vec<usize>>,
    pub eps: f64,
}

impl CriterionInput {
    pub fn validate(&self) -> Result<()> {
        let m = self.probs.len();
        if self.neighbors.len() != m {
            return Err(Error::Input("probs and neighbors length mismatch".into()));
        }
        if self.eps < 0.0 {
            return Err(Error::Input("negative epsilon".into()));
        }
        for (b, p) in self.probs.iter().enumerate() {
            if !(0.0..1.0).contains(p) {
                return Err(Error::Input(format!("probability of event {b} outside [0,1)")));
            }
        }
        for (b, ns) in self.neighbors.iter().enumerate() {
            for &n in ns {
                if n >= m || n == b {
                    return Err(Error::Input(format!("bad neighbor {n} of event {b}")));
                }
                if !self.neighbors[n].contains(&b) {
                    return Err(Error::Input(format!("adjacency not symmetric at ({b},{n})")));
                }
            }
        }
        Ok(())
    }
}

/// Symmetric criterion: satisfied iff e·p·d·(1+ε) ≤ 1, where `p` bounds
/// every event's probability and `d` bounds every inclusive neighborhood
/// size. The work factor is e·m·p.
pub fn check_symmetric(p: f64, d: usize, m: usize, eps: f64) -> (bool, f64) {
    let e = std::f64::consts::E;
    let satisfied = m == 0 || e * p * d as f64 * (1.0 + eps) <= 1.0;
    (satisfied, e * m as f64 * p)
}

/// Asymmetric criterion: satisfied iff for every event
/// P(B)(1+ε) ≤ x(B)·∏_{B'∼B} (1−x(B')). The work factor is Σ x/(1−x).
pub fn check_asymmetric(input: &CriterionInput, x: &[f64]) -> (bool, f64) {
    assert_eq!(x.len(), input.probs.len());
    assert!(x.iter().all(|v| (0.0..1.0).contains(v)));
    let mut satisfied = true;
    for (b, &p) in input.probs.iter().enumerate() {
        let mut rhs = x[b];
        for &n in &input.neighbors[b] {
            rhs *= 1.0 - x[n];
        }
        if p * (1.0 + input.eps) > rhs {
            satisfied = false;
        }
    }
    let w: f64 = x.iter().map(|&v| v / (1.0 - v)).sum();
    (satisfied, w)
}

const SUBSET_BUDGET: usize = 1 << 20;

/// Sum over independent subsets I of `verts` (under `adjacent`) of
/// ∏_{v∈I} μ(v), including the empty subset. Counts enumeration nodes
/// against a budget.
fn independent_subset_sum(
    verts: &[usize],
    mu: &[f64],
    adjacent: &dyn Fn(usize, usize) -> bool,
    budget: &mut usize,
) -> Result<f64> {
    if *budget == 0 {
        return Err(Error::Budget(format!(
            "independent-subset enumeration exceeds {SUBSET_BUDGET} nodes"
        )));
    }
    *budget -= 1;
    let Some((&v, rest)) = verts.split_first() else {
        return Ok(1.0);
    };
    // Either v is excluded, or included together with an independent
    // subset of its non-neighbors.
    let without = independent_subset_sum(rest, mu, adjacent, budget)?;
    let non_neighbors: Vec<usize> = rest.iter().copied().filter(|&u| !adjacent(u, v)).collect();
    let with = mu[v] * independent_subset_sum(&non_neighbors, mu, adjacent, budget)?;
    Ok(without + with)
}

/// Cluster-expansion criterion: satisfied iff for every event B,
/// μ(B) ≥ P(B)(1+ε)·Σ_{I ⊆ N(B), I independent} ∏_{B'∈I} μ(B').
/// The work factor is Σ μ(B). Refuses instances whose neighborhood
/// enumeration would exceed 2^20 nodes.
pub fn check_cluster_expansion(input: &CriterionInput, mu: &[f64]) -> Result<(bool, f64)> {
    assert_eq!(mu.len(), input.probs.len());
    assert!(mu.iter().all(|v| *v >= 0.0));
    let adjacent = |u: usize, v: usize| input.neighbors[u].contains(&v);
    let mut satisfied = true;
    for (b, &p) in input.probs.iter().enumerate() {
        let mut budget = SUBSET_BUDGET;
        // Subsets containing b itself contribute exactly μ(b) (all other
        // members of N(b) are adjacent to b), so enumerate over the
        // exclusive neighborhood and add it.
        let sum = mu[b]
            + independent_subset_sum(&input.neighbors[b], mu, &adjacent, &mut budget)?;
        if mu[b] < p * (1.0 + input.eps) * sum {
            satisfied = false;
        }
    }
    Ok((satisfied, mu.iter().sum()))
}

const NODE_BUDGET: usize = 10_000_000;

/// Truncated work factor: enumerates every singleton stable-set sequence
/// of length at most `size_cap` and returns
/// Σ (1+ε/3)^{|S|} w(S) over those sequences, together with a flag that
/// is true when the final layer contributed less than 1e−9 of the total.
pub fn work_factor_truncated(
    input: &CriterionInput,
    size_cap: usize,
) -> Result<(f64, bool)> {
    assert!(size_cap >= 1);
    let m = input.probs.len();
    if m.saturating_mul(size_cap) > NODE_BUDGET {
        return Err(Error::Budget(format!(
            "work-factor enumeration needs {} nodes, budget {NODE_BUDGET}",
            m * size_cap
        )));
    }
    let q: Vec<f64> = input.probs.iter().map(|p| p * (1.0 + input.eps / 3.0)).collect();
    // layer[b] = sum of weights of length-k sequences ending at b.
    let mut layer = q.clone();
    let mut total: f64 = layer.iter().sum();
    let mut last: f64 = total;
    for _ in 1..size_cap {
        let mut next = vec![0.0; m];
        for b in 0..m {
            if layer[b] == 0.0 {
                continue;
            }
            // The next singleton must lie in the inclusive neighborhood.
            next[b] += layer[b] * q[b];
            for &n in &input.neighbors[b] {
                next[n] += layer[b] * q[n];
            }
        }
        last = next.iter().sum();
        total += last;
        layer = next;
        if last == 0.0 {
            break;
        }
    }
    let converged = last < 1e-9 * total.max(f64::MIN_POSITIVE);
    Ok((total, converged))
}
