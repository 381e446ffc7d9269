//! Strong coloring: given a graph whose vertices are partitioned into
//! blocks of uniform size b, color with b colors so that every block
//! uses all b colors and no edge is monochromatic.
//!
//! Encoding: one permutation of the b colors per block (position →
//! color), so the within-block rainbow condition holds by construction
//! and the bad events are "cross-block edge monochromatic in color c",
//! with one atom in each endpoint's component.

use super::{Application, Certificate};
use crate::core::BadEvent;
use crate::engine::{BadEventChecker, Problem};
use crate::spaces::{Atom, SpaceDescriptor, State};
use crate::{Error, Result};

/// A graph with a partition of its vertices into equal-size blocks.
#[derive(Debug, Clone)]
pub struct BlockPartition {
    /// `blocks[i]`: the vertices of block i; uniform size b; together
    /// they must partition 0..(b·#blocks).
    pub blocks: Vec<Vec<usize>>,
    pub edges: Vec<(usize, usize)>,
}

impl BlockPartition {
    pub fn block_size(&self) -> Result<usize> {
        let b = self.blocks.first().map(|bl| bl.len()).unwrap_or(0);
        if b < 2 {
            return Err(Error::Input("blocks must have at least 2 vertices".into()));
        }
        let n = b * self.blocks.len();
        let mut seen = vec![false; n];
        for bl in &self.blocks {
            if bl.len() != b {
                return Err(Error::Input("blocks must have uniform size".into()));
            }
            for &v in bl {
                if v >= n || seen[v] {
                    return Err(Error::Input(format!(
                        "blocks must partition 0..{n}; vertex {v} repeated or out of range"
                    )));
                }
                seen[v] = true;
            }
        }
        for &(u, v) in &self.edges {
            if u >= n || v >= n {
                return Err(Error::Input(format!("edge ({u},{v}) out of range")));
            }
            if u == v {
                return Err(Error::Input(format!("self-loop at {u}")));
            }
        }
        Ok(b)
    }

    pub fn max_degree(&self) -> usize {
        let n = self.blocks.iter().map(|b| b.len()).sum();
        let mut deg = vec![0usize; n];
        for &(u, v) in &self.edges {
            deg[u] += 1;
            deg[v] += 1;
        }
        deg.into_iter().max().unwrap_or(0)
    }

    /// vertex → (block index, position within block).
    fn locate(&self) -> Vec<(usize, usize)> {
        let n = self.blocks.iter().map(|b| b.len()).sum();
        let mut loc = vec![(0, 0); n];
        for (bi, bl) in self.blocks.iter().enumerate() {
            for (pi, &v) in bl.iter().enumerate() {
                loc[v] = (bi, pi);
            }
        }
        loc
    }
}

/// Minimum block size for the convergence guarantee at max degree Δ.
pub fn block_size_floor(delta: usize, eps: f64) -> f64 {
    256.0 / 27.0 * (1.0 + eps) * delta as f64
}

struct CrossEdgeChecker {
    /// Cross-block edges as ((block, pos), (block, pos)).
    cross: Vec<((usize, usize), (usize, usize))>,
    colors: usize,
}

impl BadEventChecker for CrossEdgeChecker {
    fn violated(&self, _space: &SpaceDescriptor, _events: &[BadEvent], state: &State) -> Vec<usize> {
        let comps = match state {
            State::Product(c) => c,
            _ => unreachable!("strong coloring states are permutation products"),
        };
        let color = |bi: usize, pi: usize| match &comps[bi] {
            State::Perm(p) => p.fwd[pi],
            _ => unreachable!(),
        };
        self.cross
            .iter()
            .enumerate()
            .filter_map(|(i, &((b1, p1), (b2, p2)))| {
                let c = color(b1, p1);
                (c == color(b2, p2)).then_some(i * self.colors + c)
            })
            .collect()
    }
}

pub struct StrongColoringApp {
    pub partition: BlockPartition,
    pub block_size: usize,
    problem: Problem,
    certificate: Certificate,
}

pub fn build_strong_coloring(partition: BlockPartition, eps: f64) -> Result<StrongColoringApp> {
    let b = partition.block_size()?;
    let loc = partition.locate();
    let space = SpaceDescriptor::Product {
        components: vec![SpaceDescriptor::Permutation { n: b }; partition.blocks.len()],
    };
    // Same-block edges can never be monochromatic (each block's
    // coloring is a bijection onto the colors), so only cross-block
    // edges generate events.
    let cross: Vec<((usize, usize), (usize, usize))> = partition
        .edges
        .iter()
        .map(|&(u, v)| (loc[u], loc[v]))
        .filter(|&((b1, _), (b2, _))| b1 != b2)
        .collect();
    let mut events = Vec::with_capacity(cross.len() * b);
    for &((b1, p1), (b2, p2)) in &cross {
        for c in 0..b {
            let atoms = vec![
                Atom::prod(b1, Atom::Perm { x: p1, y: c }),
                Atom::prod(b2, Atom::Perm { x: p2, y: c }),
            ];
            events.push(BadEvent::new(events.len(), atoms, &space)?);
        }
    }
    let delta = partition.max_degree();
    let floor = block_size_floor(delta, eps);
    let p = 1.0 / (b * b) as f64;
    let certificate = Certificate {
        satisfied: b as f64 >= floor,
        work_bound: std::f64::consts::E * events.len() as f64 * p,
        detail: format!(
            "b={b} vs floor {floor:.3} at max degree {delta}; event probability {p:.3e}"
        ),
    };
    let checker = Box::new(CrossEdgeChecker { cross, colors: b });
    let problem = Problem::with_checker(space, events, checker)?;
    Ok(StrongColoringApp { partition, block_size: b, problem, certificate })
}

impl StrongColoringApp {
    /// Colors per vertex in vertex-id order.
    pub fn vertex_colors(&self, state: &State) -> Vec<usize> {
        let comps = match state {
            State::Product(c) => c,
            _ => return Vec::new(),
        };
        let loc = self.partition.locate();
        loc.iter()
            .map(|&(bi, pi)| match &comps[bi] {
                State::Perm(p) => p.fwd[pi],
                _ => unreachable!(),
            })
            .collect()
    }
}

impl Application for StrongColoringApp {
    fn problem(&self) -> &Problem {
        &self.problem
    }

    fn certificate(&self) -> &Certificate {
        &self.certificate
    }

    fn check_solution(&self, state: &State) -> bool {
        let colors = self.vertex_colors(state);
        if colors.is_empty() {
            return false;
        }
        // Every block rainbow and no edge monochromatic.
        let rainbow = self.partition.blocks.iter().all(|bl| {
            let mut seen = vec![false; self.block_size];
            bl.iter().all(|&v| !std::mem::replace(&mut seen[colors[v]], true))
        });
        rainbow && self.partition.edges.iter().all(|&(u, v)| colors[u] != colors[v])
    }

    fn render_solution(&self, state: &State) -> String {
        self.vertex_colors(state)
            .iter()
            .map(|c| c.to_string())
            .collect::<Vec<_>>()
            .join(" ")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::apps::verify_solution;
    use crate::engine::{run_parallel, run_round_sequential, FullScan};
    use crate::rng::{stream, TAG_MISC};
    use crate::spaces::sample_state;

    fn two_blocks_matching() -> BlockPartition {
        // Blocks {0..10} and {11..21} joined by a cross matching, so
        // Δ = 1 and b = 11 clears the 256/27·(1+ε) floor.
        BlockPartition {
            blocks: vec![(0..11).collect(), (11..22).collect()],
            edges: vec![(0, 11), (1, 12), (2, 13), (3, 14)],
        }
    }

    #[test]
    fn block_size_floor_value() {
        let f = block_size_floor(1, 0.0);
        assert!((f - 256.0 / 27.0).abs() < 1e-12);
        assert!(10.0 >= f, "b=10 beats the Δ=1 floor {f:.3}");
    }

    #[test]
    fn edgeless_graph_succeeds_immediately() {
        let part = BlockPartition { blocks: vec![vec![0, 1], vec![2, 3]], edges: vec![] };
        let app = build_strong_coloring(part, 0.1).unwrap();
        let r = run_round_sequential(app.problem(), 1, 10);
        assert!(r.success && r.rounds.is_empty());
        assert!(verify_solution(&app, &r.state));
    }

    #[test]
    fn path_across_blocks_solves_and_verifies() {
        let app = build_strong_coloring(two_blocks_matching(), 0.1).unwrap();
        assert!(app.certificate().satisfied, "{}", app.certificate().detail);
        let r = run_parallel(app.problem(), 5, 1000).unwrap();
        assert!(r.success);
        assert!(verify_solution(&app, &r.state));
        let colors = app.vertex_colors(&r.state);
        assert_ne!(colors[0], colors[11]);
        assert_ne!(colors[1], colors[12]);
    }

    #[test]
    fn same_block_edges_generate_no_events() {
        let part = BlockPartition {
            blocks: vec![vec![0, 1], vec![2, 3]],
            edges: vec![(0, 1), (0, 2)],
        };
        let app = build_strong_coloring(part, 0.1).unwrap();
        // Only the cross edge (0,2) makes events, one per color.
        assert_eq!(app.problem().events.len(), 2);
    }

    #[test]
    fn checker_matches_full_scan() {
        let app = build_strong_coloring(two_blocks_matching(), 0.1).unwrap();
        let p = app.problem();
        for i in 0..100 {
            let mut r = stream(51, TAG_MISC, i, 0);
            let state = sample_state(&p.space, &mut r);
            assert_eq!(p.violated(&state), FullScan.violated(&p.space, &p.events, &state));
        }
    }

    #[test]
    fn rejects_bad_partitions() {
        let ragged =
            BlockPartition { blocks: vec![vec![0, 1, 2], vec![3, 4]], edges: vec![] };
        assert!(build_strong_coloring(ragged, 0.1).is_err());
        let overlap = BlockPartition { blocks: vec![vec![0, 1], vec![1, 2]], edges: vec![] };
        assert!(build_strong_coloring(overlap, 0.1).is_err());
    }
}
