//! Lexicographically-first maximal independent sets of digraphs.
//!
//! Given a digraph and a priority order on its vertices, the LFMIS is the
//! set produced by scanning vertices in priority order and adding each
//! vertex not yet killed, where an added vertex kills all of its
//! out-neighbors. The parallel variant peels, in each round, every vertex
//! with no surviving higher-priority in-neighbor; it produces the same
//! set and finishes in O(log^2 n) rounds with high probability when the
//! priority order is uniformly random.

use rand::Rng;
use rayon::prelude::*;

use crate::rng;

/// A digraph on vertices `0..n` in out-adjacency form.
#[derive(Clone, Debug)]
pub struct Digraph {
    pub n: usize,
    pub out: Vec<Vec<usize>>,
}

impl Digraph {
    pub fn new(n: usize) -> Digraph {
        Digraph { n, out: vec![vec![]; n] }
    }

    pub fn add_edge(&mut self, u: usize, v: usize) {
        debug_assert!(u != v && u < self.n && v < self.n);
        self.out[u].push(v);
    }

    fn in_adjacency(&self) -> Vec<Vec<usize>> {
        let mut inc = vec![vec![]; self.n];
        for (u, vs) in self.out.iter().enumerate() {
            for &v in vs {
                inc[v].push(u);
            }
        }
        inc
    }
}

/// Sequential scan. `order[i]` is the vertex with priority `i`. Returns
/// the LFMIS sorted by vertex id.
pub fn lfmis_sequential(g: &Digraph, order: &[usize]) -> Vec<usize> {
    assert_eq!(order.len(), g.n);
    let mut killed = vec![false; g.n];
    let mut set = Vec::new();
    for &v in order {
        if killed[v] {
            continue;
        }
        set.push(v);
        for &w in &g.out[v] {
            killed[w] = true;
        }
    }
    set.sort_unstable();
    set
}

/// Parallel peeling. Returns the LFMIS sorted by vertex id together with
/// the number of peeling rounds used.
pub fn lfmis_parallel(g: &Digraph, order: &[usize]) -> (Vec<usize>, usize) {
    assert_eq!(order.len(), g.n);
    let mut rank = vec![0; g.n];
    for (i, &v) in order.iter().enumerate() {
        rank[v] = i;
    }
    let inc = g.in_adjacency();
    let mut alive = vec![true; g.n];
    let mut remaining: Vec<usize> = order.to_vec();
    let mut set = Vec::new();
    let mut rounds = 0;
    while !remaining.is_empty() {
        rounds += 1;
        let sources: Vec<usize> = remaining
            .par_iter()
            .copied()
            .filter(|&v| inc[v].iter().all(|&u| !alive[u] || rank[u] > rank[v]))
            .collect();
        debug_assert!(!sources.is_empty());
        set.extend_from_slice(&sources);
        for &v in &sources {
            alive[v] = false;
            for &w in &g.out[v] {
                // Only forward edges kill: a smaller-rank out-neighbor was
                // already decided in the sequential order being simulated.
                if rank[w] > rank[v] {
                    alive[w] = false;
                }
            }
        }
        remaining.retain(|&v| alive[v]);
    }
    set.sort_unstable();
    (set, rounds)
}

/// Samples an Erdős–Rényi digraph where each ordered pair `(u, v)` with
/// `u != v` is an edge independently with probability `p`, using
/// geometric skipping so sparse graphs cost O(edges).
pub fn random_digraph(n: usize, p: f64, rng: &mut impl Rng) -> Digraph {
    let mut g = Digraph::new(n);
    if p <= 0.0 || n < 2 {
        return g;
    }
    if p >= 1.0 {
        for u in 0..n {
            for v in 0..n {
                if u != v {
                    g.add_edge(u, v);
                }
            }
        }
        return g;
    }
    let total = n * (n - 1);
    let log1p = (1.0 - p).ln();
    let mut idx: i64 = -1;
    loop {
        let u: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
        idx += 1 + (u.ln() / log1p).floor() as i64;
        if idx as usize >= total {
            break;
        }
        let i = idx as usize;
        let u = i / (n - 1);
        let mut v = i % (n - 1);
        if v >= u {
            v += 1;
        }
        g.add_edge(u, v);
    }
    g
}

/// Fisher–Yates shuffle of `0..n`.
pub fn random_order(n: usize, rng: &mut impl Rng) -> Vec<usize> {
    let mut v: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = rng.gen_range(0..=i);
        v.swap(i, j);
    }
    v
}

/// Runs the parallel LFMIS on `trials` random digraphs with fresh random
/// orders and returns the per-trial round counts.
pub fn lfmis_round_stats(n: usize, edge_prob: f64, trials: usize, master: u64) -> Vec<usize> {
    (0..trials)
        .map(|t| {
            let mut r = rng::stream(master, rng::TAG_MISC, 1, t as u64);
            let g = random_digraph(n, edge_prob, &mut r);
            let order = random_order(n, &mut r);
            lfmis_parallel(&g, &order).1
        })
        .collect()
}
