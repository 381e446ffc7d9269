//! The resampling drivers.
//!
//! Three ways to drive a problem to a good state: a fully sequential
//! loop that always resamples the lowest-id violated event, a
//! round-structured sequential driver, and a round-parallel driver that
//! batches an LFMIS of compatible events per round. The round drivers
//! share their randomness streams, which couples them exactly: with the
//! same master seed they resample the same events in the same order in
//! every round.

use rand::Rng;
use rayon::prelude::*;

use crate::core::{
    apply_event_seed, event_holds, event_seed_stays, events_dependent, sample_event_seed, BadEvent,
    EventSeed,
};
use crate::lfmis::{lfmis_parallel, Digraph};
use crate::rng;
use crate::spaces::{sample_state, SpaceDescriptor, State};
use crate::{Error, Result};

/// Finds the violated events of a state. Implementations must return
/// sorted event ids and must agree with a full scan of `event_holds`.
pub trait BadEventChecker: Send + Sync {
    fn violated(&self, space: &SpaceDescriptor, events: &[BadEvent], state: &State) -> Vec<usize>;
}

/// Checks every event directly.
pub struct FullScan;

impl BadEventChecker for FullScan {
    fn violated(&self, _space: &SpaceDescriptor, events: &[BadEvent], state: &State) -> Vec<usize> {
        let mut v: Vec<usize> = events
            .par_iter()
            .filter(|e| event_holds(state, e))
            .map(|e| e.id)
            .collect();
        v.sort_unstable();
        v
    }
}

/// A problem instance: a space and a dense list of bad events.
/// Dependency queries are answered on demand from the events' atoms, so
/// large sparse instances never materialize their dependency graph.
pub struct Problem {
    pub space: SpaceDescriptor,
    pub events: Vec<BadEvent>,
    checker: Box<dyn BadEventChecker>,
}

impl Problem {
    pub fn new(space: SpaceDescriptor, events: Vec<BadEvent>) -> Result<Problem> {
        Problem::with_checker(space, events, Box::new(FullScan))
    }

    pub fn with_checker(
        space: SpaceDescriptor,
        events: Vec<BadEvent>,
        checker: Box<dyn BadEventChecker>,
    ) -> Result<Problem> {
        space.validate()?;
        for (i, e) in events.iter().enumerate() {
            if e.id != i {
                return Err(Error::InvalidEvent(format!(
                    "event ids must be dense 0..m-1, found id {} at position {i}",
                    e.id
                )));
            }
        }
        Ok(Problem { space, events, checker })
    }

    /// The engine's dependence relation treats an event as dependent
    /// with itself even when its atoms are not self-dependent.
    pub fn dependent(&self, a: usize, b: usize) -> bool {
        a == b || events_dependent(&self.events[a], &self.events[b])
    }

    /// Exclusive dependency adjacency, materialized by a full pairwise
    /// scan. Quadratic in the number of events; intended for criterion
    /// checks on moderate instances.
    pub fn adjacency_exhaustive(&self) -> Vec<Vec<usize>> {
        let m = self.events.len();
        (0..m)
            .into_par_iter()
            .map(|a| {
                (0..m)
                    .filter(|&b| b != a && events_dependent(&self.events[a], &self.events[b]))
                    .collect()
            })
            .collect()
    }

    /// Size of the underlying ground set (number of variables, or
    /// vertices, summed over product components).
    pub fn ground_size(&self) -> usize {
        fn size(space: &SpaceDescriptor) -> usize {
            match space {
                SpaceDescriptor::Variables { weights } => weights.len(),
                SpaceDescriptor::Permutation { n }
                | SpaceDescriptor::Matching { n, .. }
                | SpaceDescriptor::HamCycle { n } => *n,
                SpaceDescriptor::Product { components } => components.iter().map(size).sum(),
            }
        }
        size(&self.space)
    }

    pub fn violated(&self, state: &State) -> Vec<usize> {
        self.checker.violated(&self.space, &self.events, state)
    }
}

/// One round of a round-structured driver.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RoundRecord {
    pub t: usize,
    pub violated: usize,
    /// Event ids in the order they were resampled.
    pub resampled: Vec<usize>,
    /// Internal peeling rounds of the LFMIS (parallel driver only).
    pub lfmis_rounds: usize,
}

#[derive(Debug)]
pub struct RunResult {
    pub state: State,
    pub success: bool,
    pub resamples: usize,
    pub rounds: Vec<RoundRecord>,
    pub master: u64,
}

/// Default round cap for the round drivers: 64⌈log₂(n+m+2)⌉/ε, with ε
/// clamped away from zero.
pub fn default_round_cap(n: usize, m: usize, eps: f64) -> usize {
    let e = eps.max(0.1);
    (64.0 * ((n + m + 2) as f64).log2().ceil() / e).ceil() as usize
}

/// Default resample cap for the sequential driver: 100·m·⌈log₂(n+2)⌉.
pub fn default_resample_cap(n: usize, m: usize) -> usize {
    100 * m.max(1) * (((n + 2) as f64).log2().ceil() as usize).max(1)
}

/// Sequential driver: resample the lowest-id violated event until none
/// remains or the cap is hit.
pub fn run_sequential(problem: &Problem, master: u64, max_resamples: usize) -> RunResult {
    let mut state = sample_state(&problem.space, &mut rng::stream(master, rng::TAG_INIT, 0, 0));
    let mut resamples = 0;
    let mut rounds = Vec::new();
    loop {
        let v = problem.violated(&state);
        if v.is_empty() {
            return RunResult { state, success: true, resamples, rounds, master };
        }
        if resamples >= max_resamples {
            return RunResult { state, success: false, resamples, rounds, master };
        }
        let b = v[0];
        let seed = sample_event_seed(
            &problem.space,
            &problem.events[b],
            &mut rng::stream(master, rng::TAG_SEQ_STEP, resamples as u64, 0),
        );
        apply_event_seed(&mut state, &problem.events[b], &seed);
        rounds.push(RoundRecord { t: resamples, violated: v.len(), resampled: vec![b], lfmis_rounds: 0 });
        resamples += 1;
    }
}

/// Draws the round-`t` composite seeds for the violated set, each from
/// its own keyed stream.
fn round_seeds(problem: &Problem, master: u64, t: usize, v: &[usize]) -> Vec<EventSeed> {
    v.par_iter()
        .map(|&b| {
            sample_event_seed(
                &problem.space,
                &problem.events[b],
                &mut rng::stream(master, rng::TAG_ROUND_SEED, t as u64, b as u64),
            )
        })
        .collect()
}

/// Draws the round-`t` priority order as a permutation of `0..k`.
fn round_order(master: u64, t: usize, k: usize) -> Vec<usize> {
    let mut r = rng::stream(master, rng::TAG_ROUND_ORDER, t as u64, 0);
    let mut v: Vec<usize> = (0..k).collect();
    for i in (1..k).rev() {
        let j = r.gen_range(0..=i);
        v.swap(i, j);
    }
    v
}

/// Round-structured sequential driver: per round, snapshot the violated
/// set, draw all seeds up front, scan the set in a random order, and
/// resample each event still alive, killing events that became false or
/// are dependent on the resampled one.
pub fn run_round_sequential(problem: &Problem, master: u64, max_rounds: usize) -> RunResult {
    let mut state = sample_state(&problem.space, &mut rng::stream(master, rng::TAG_INIT, 0, 0));
    let mut resamples = 0;
    let mut rounds = Vec::new();
    for t in 0..max_rounds {
        let v = problem.violated(&state);
        if v.is_empty() {
            return RunResult { state, success: true, resamples, rounds, master };
        }
        let seeds = round_seeds(problem, master, t, &v);
        let order = round_order(master, t, v.len());
        let mut alive = vec![true; v.len()];
        let mut resampled = Vec::new();
        for &i in &order {
            if !alive[i] {
                continue;
            }
            let b = v[i];
            debug_assert!(event_holds(&state, &problem.events[b]));
            apply_event_seed(&mut state, &problem.events[b], &seeds[i]);
            resampled.push(b);
            resamples += 1;
            for (j, &b2) in v.iter().enumerate() {
                if alive[j]
                    && (problem.dependent(b, b2) || !event_holds(&state, &problem.events[b2]))
                {
                    alive[j] = false;
                }
            }
        }
        rounds.push(RoundRecord { t, violated: v.len(), resampled, lfmis_rounds: 0 });
    }
    let success = problem.violated(&state).is_empty();
    RunResult { state, success, resamples, rounds, master }
}

/// Round-parallel driver: per round, draw seeds for all violated events,
/// build the digraph with an edge (B, B') whenever B and B' are
/// dependent or B's seed is not guaranteed to preserve B', take the
/// LFMIS under a random priority order, and apply its seeds as one batch
/// in priority order. Requires a commutative oracle.
pub fn run_parallel(problem: &Problem, master: u64, max_rounds: usize) -> Result<RunResult> {
    if !problem.space.is_commutative() {
        return Err(Error::NonCommutative(format!("{:?}", problem.space)));
    }
    let mut state = sample_state(&problem.space, &mut rng::stream(master, rng::TAG_INIT, 0, 0));
    let mut resamples = 0;
    let mut rounds = Vec::new();
    for t in 0..max_rounds {
        let v = problem.violated(&state);
        if v.is_empty() {
            return Ok(RunResult { state, success: true, resamples, rounds, master });
        }
        let seeds = round_seeds(problem, master, t, &v);
        let order = round_order(master, t, v.len());
        let k = v.len();
        let out: Vec<Vec<usize>> = (0..k)
            .into_par_iter()
            .map(|i| {
                (0..k)
                    .filter(|&j| {
                        j != i
                            && (problem.dependent(v[i], v[j])
                                || !event_seed_stays(
                                    &problem.events[v[i]],
                                    &seeds[i],
                                    &problem.events[v[j]],
                                ))
                    })
                    .collect()
            })
            .collect();
        let g = Digraph { n: k, out };
        let (set, lfmis_rounds) = lfmis_parallel(&g, &order);
        // Apply in priority order.
        let mut rank = vec![0; k];
        for (pos, &i) in order.iter().enumerate() {
            rank[i] = pos;
        }
        let mut chosen = set;
        chosen.sort_by_key(|&i| rank[i]);
        let mut resampled = Vec::with_capacity(chosen.len());
        for &i in &chosen {
            let b = v[i];
            assert!(
                event_holds(&state, &problem.events[b]),
                "batched resampling must keep every chosen event true until its seed applies"
            );
            apply_event_seed(&mut state, &problem.events[b], &seeds[i]);
            resampled.push(b);
            resamples += 1;
        }
        rounds.push(RoundRecord { t, violated: v.len(), resampled, lfmis_rounds });
    }
    let success = problem.violated(&state).is_empty();
    Ok(RunResult { state, success, resamples, rounds, master })
}

/// Runs the parallel and round-sequential drivers from identical
/// randomness and reports whether they resampled the same events in the
/// same order in every round and reached the same final state.
pub fn couple_check(problem: &Problem, master: u64, max_rounds: usize) -> Result<bool> {
    let par = run_parallel(problem, master, max_rounds)?;
    let seq = run_round_sequential(problem, master, max_rounds);
    if par.rounds.len() != seq.rounds.len() {
        return Ok(false);
    }
    for (a, b) in par.rounds.iter().zip(&seq.rounds) {
        if a.resampled != b.resampled || a.violated != b.violated {
            return Ok(false);
        }
    }
    Ok(par.state == seq.state && par.success == seq.success)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaces::Atom;

    fn var_event(id: usize, space: &SpaceDescriptor, atoms: Vec<(usize, usize)>) -> BadEvent {
        let atoms = atoms
            .into_iter()
            .map(|(i, v)| Atom::Var { index: i, value: v })
            .collect();
        BadEvent::new(id, atoms, space).unwrap()
    }

    #[test]
    fn no_events_is_immediate_success() {
        let space = SpaceDescriptor::uniform_variables(3, 2);
        let p = Problem::new(space, vec![]).unwrap();
        let r = run_sequential(&p, 1, 100);
        assert!(r.success);
        assert_eq!(r.resamples, 0);
        let r = run_round_sequential(&p, 1, 100);
        assert!(r.success && r.rounds.is_empty());
        let r = run_parallel(&p, 1, 100).unwrap();
        assert!(r.success && r.rounds.is_empty());
    }

    #[test]
    fn cap_zero_with_true_event_fails() {
        // An event on a 1-value domain is always true.
        let space = SpaceDescriptor::uniform_variables(1, 1);
        let e = var_event(0, &space, vec![(0, 0)]);
        let p = Problem::new(space, vec![e]).unwrap();
        let r = run_sequential(&p, 3, 0);
        assert!(!r.success);
    }

    #[test]
    fn single_half_probability_event_conditional_mean() {
        // For an event of probability 1/2, runs whose initial state hits
        // the event take geometrically many resamples, mean 2.
        let space = SpaceDescriptor::uniform_variables(1, 2);
        let e = var_event(0, &space, vec![(0, 0)]);
        let p = Problem::new(space, vec![e]).unwrap();
        let mut hit = 0usize;
        let mut total = 0usize;
        for master in 0..10_000u64 {
            let r = run_sequential(&p, master, 10_000);
            assert!(r.success);
            if r.resamples > 0 {
                hit += 1;
                total += r.resamples;
            }
        }
        assert!(hit > 4000 && hit < 6000, "hit {hit}");
        let mean = total as f64 / hit as f64;
        assert!((1.9..=2.1).contains(&mean), "mean {mean}");
    }

    #[test]
    fn disjoint_events_resampled_in_one_round() {
        let space = SpaceDescriptor::uniform_variables(2, 2);
        let e0 = var_event(0, &space, vec![(0, 0)]);
        let e1 = var_event(1, &space, vec![(1, 0)]);
        let p = Problem::new(space, vec![e0, e1]).unwrap();
        assert!(!p.dependent(0, 1));
        for master in 0..200u64 {
            let r = run_round_sequential(&p, master, 1000);
            assert!(r.success);
            if let Some(first) = r.rounds.first() {
                if first.violated == 2 {
                    assert_eq!(first.resampled.len(), 2, "independent events don't kill each other");
                    return;
                }
            }
        }
        panic!("no master seed produced a doubly-violated start");
    }

    #[test]
    fn fixing_event_kills_the_other_in_round() {
        // B = (X0=0 ∧ X1=0) and B' = (X1=0) share the atom X1=0 but are
        // not dependent (equal atoms are compatible). When both are
        // violated, resampling either one redraws X1; the other survives
        // the round exactly when the redraw keeps X1 = 0, otherwise the
        // kill rule removes it. So rounds resample one or two events, and
        // the parallel driver agrees exactly.
        let space = SpaceDescriptor::uniform_variables(2, 4);
        let b = var_event(0, &space, vec![(0, 0), (1, 0)]);
        let b2 = var_event(1, &space, vec![(1, 0)]);
        let p = Problem::new(space, vec![b, b2]).unwrap();
        assert!(!events_dependent(&p.events[0], &p.events[1]));
        assert!(!p.dependent(0, 1));
        let mut saw_kill = false;
        let mut saw_both = false;
        for master in 0..100u64 {
            let r = run_round_sequential(&p, master, 1000);
            assert!(r.success);
            for rec in &r.rounds {
                if rec.violated == 2 {
                    match rec.resampled.len() {
                        1 => saw_kill = true,
                        2 => saw_both = true,
                        _ => panic!("at most two resamples per round"),
                    }
                }
            }
            assert!(couple_check(&p, master, 1000).unwrap());
        }
        assert!(saw_kill && saw_both);
    }

    #[test]
    fn parallel_rejects_noncommutative_space() {
        let space = SpaceDescriptor::Matching { n: 6, s: 3 };
        let e = BadEvent::new(0, vec![Atom::Edge(vec![0, 1, 2])], &space).unwrap();
        let p = Problem::new(space, vec![e]).unwrap();
        assert!(matches!(run_parallel(&p, 1, 10), Err(Error::NonCommutative(_))));
        // The sequential drivers still work.
        assert!(run_sequential(&p, 1, 1000).success);
        assert!(run_round_sequential(&p, 1, 1000).success);
    }

    #[test]
    fn determinism_across_reruns() {
        let space = SpaceDescriptor::Permutation { n: 8 };
        let events: Vec<BadEvent> = (0..4)
            .map(|i| {
                BadEvent::new(i, vec![Atom::Perm { x: i, y: i }], &space).unwrap()
            })
            .collect();
        let p = Problem::new(space, events).unwrap();
        for master in [3u64, 17, 99] {
            let a = run_parallel(&p, master, 1000).unwrap();
            let b = run_parallel(&p, master, 1000).unwrap();
            assert_eq!(a.state, b.state);
            assert_eq!(a.rounds, b.rounds);
            assert_eq!(a.resamples, b.resamples);
        }
    }

    #[test]
    fn coupling_on_small_instances() {
        // Variables.
        let space = SpaceDescriptor::uniform_variables(6, 2);
        let events: Vec<BadEvent> = (0..5)
            .map(|i| var_event(i, &space, vec![(i, 0), (i + 1, 0)]))
            .collect();
        let p = Problem::new(space, events).unwrap();
        for master in 0..30u64 {
            assert!(couple_check(&p, master, 10_000).unwrap());
        }
        // Permutations.
        let space = SpaceDescriptor::Permutation { n: 7 };
        let events: Vec<BadEvent> = (0..7)
            .map(|i| BadEvent::new(i, vec![Atom::Perm { x: i, y: i }], &space).unwrap())
            .collect();
        let p = Problem::new(space, events).unwrap();
        for master in 0..30u64 {
            assert!(couple_check(&p, master, 10_000).unwrap());
        }
    }

    #[test]
    fn success_state_avoids_all_events() {
        let space = SpaceDescriptor::Matching { n: 12, s: 2 };
        let events: Vec<BadEvent> = (0..6)
            .map(|i| BadEvent::new(i, vec![Atom::Edge(vec![2 * i, 2 * i + 1])], &space).unwrap())
            .collect();
        let p = Problem::new(space, events).unwrap();
        for master in 0..20u64 {
            let r = run_parallel(&p, master, 10_000).unwrap();
            assert!(r.success);
            for e in &p.events {
                assert!(!event_holds(&r.state, e));
            }
        }
    }

    #[test]
    fn adjacency_matches_pairwise_dependence() {
        let space = SpaceDescriptor::Product {
            components: vec![
                SpaceDescriptor::Permutation { n: 5 },
                SpaceDescriptor::uniform_variables(3, 2),
            ],
        };
        let events = vec![
            BadEvent::new(0, vec![Atom::prod(0, Atom::Perm { x: 0, y: 1 })], &space).unwrap(),
            BadEvent::new(1, vec![Atom::prod(0, Atom::Perm { x: 0, y: 2 })], &space).unwrap(),
            BadEvent::new(2, vec![Atom::prod(1, Atom::Var { index: 0, value: 0 })], &space).unwrap(),
            BadEvent::new(
                3,
                vec![
                    Atom::prod(0, Atom::Perm { x: 3, y: 1 }),
                    Atom::prod(1, Atom::Var { index: 0, value: 1 }),
                ],
                &space,
            )
            .unwrap(),
        ];
        let p = Problem::new(space, events).unwrap();
        let adj = p.adjacency_exhaustive();
        for a in 0..4 {
            for b in 0..4 {
                if a == b {
                    assert!(p.dependent(a, b), "self-dependence for the engine");
                    continue;
                }
                let dep = events_dependent(&p.events[a], &p.events[b]);
                assert_eq!(adj[a].contains(&b), dep, "pair ({a},{b})");
                assert_eq!(p.dependent(a, b), dep, "pair ({a},{b})");
            }
        }
    }
}
