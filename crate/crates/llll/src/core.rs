//! Bad events as ordered conjunctions of atoms, and the lifted
//! resampling oracle they induce.
//!
//! A bad event's oracle is built from the atomic ones: the composite seed
//! draws one seed per atom, each conditioned on preserving the atoms that
//! come after it, and acts by applying the atom seeds first to last. This
//! keeps all of the atomic contract's guarantees at the event level.

use num::rational::BigRational;
use num::ToPrimitive;
use rand_chacha::ChaCha8Rng;

use crate::spaces::{
    apply_atom_seed, atom_holds, atom_seed_support, atom_seed_stays, atoms_dependent,
    event_probability_exact, sample_atom_seed, Atom, AtomSeed, SpaceDescriptor, State,
};
use crate::{Error, Result};

/// A bad event: the conjunction of a set of pairwise non-dependent atoms.
/// Atoms are kept sorted in a canonical order so that identical events
/// compare equal and seed composition is reproducible.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BadEvent {
    pub id: usize,
    atoms: Vec<Atom>,
}

impl BadEvent {
    pub fn new(id: usize, mut atoms: Vec<Atom>, space: &SpaceDescriptor) -> Result<BadEvent> {
        for a in &atoms {
            a.validate(space)?;
        }
        atoms.sort();
        atoms.dedup();
        for i in 0..atoms.len() {
            for j in i + 1..atoms.len() {
                if atoms_dependent(&atoms[i], &atoms[j]) {
                    return Err(Error::InvalidEvent(format!(
                        "event {id}: atoms {:?} and {:?} are dependent",
                        atoms[i], atoms[j]
                    )));
                }
            }
        }
        Ok(BadEvent { id, atoms })
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    /// Exact probability that the event holds in a fresh state.
    pub fn probability_exact(&self, space: &SpaceDescriptor) -> BigRational {
        event_probability_exact(space, &self.atoms)
    }

    pub fn probability(&self, space: &SpaceDescriptor) -> f64 {
        self.probability_exact(space).to_f64().unwrap()
    }
}

/// A composite seed: one atom seed per atom of the event, in event order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EventSeed(pub Vec<AtomSeed>);

/// The lopsided dependence relation lifted to events: two events are
/// dependent when some atom of one is dependent with some atom of the
/// other. Sharing an identical atom does not by itself create
/// dependence (the lopsided part of the lemma), except in spaces whose
/// atoms are self-dependent (cycle path atoms).
pub fn events_dependent(a: &BadEvent, b: &BadEvent) -> bool {
    a.atoms
        .iter()
        .any(|x| b.atoms.iter().any(|y| atoms_dependent(x, y)))
}

pub fn event_holds(state: &State, event: &BadEvent) -> bool {
    event.atoms.iter().all(|a| atom_holds(state, a))
}

/// Draws a composite seed for the event: atom `i`'s seed is conditioned
/// on preserving atoms `i+1..`, so that applying the seeds in order never
/// destroys an atom before its own seed has acted.
pub fn sample_event_seed(
    space: &SpaceDescriptor,
    event: &BadEvent,
    rng: &mut ChaCha8Rng,
) -> EventSeed {
    let seeds = (0..event.atoms.len())
        .map(|i| sample_atom_seed(space, &event.atoms[i], &event.atoms[i + 1..], rng))
        .collect();
    EventSeed(seeds)
}

/// Acts on the state with a composite seed, first atom's seed first. The
/// event is assumed to hold in the state.
pub fn apply_event_seed(state: &mut State, event: &BadEvent, seed: &EventSeed) {
    assert_eq!(seed.0.len(), event.atoms.len());
    for (atom, s) in event.atoms.iter().zip(&seed.0) {
        apply_atom_seed(state, atom, s);
    }
}

/// Whether a composite seed for `a` is guaranteed to preserve `b`
/// (assuming `b` held beforehand). Meaningful when the events are not
/// dependent.
pub fn event_seed_stays(a: &BadEvent, seed: &EventSeed, b: &BadEvent) -> bool {
    a.atoms
        .iter()
        .zip(&seed.0)
        .all(|(atom, s)| b.atoms.iter().all(|other| atom_seed_stays(atom, s, other)))
}

/// Enumerates the composite seed distribution with exact probabilities.
pub fn event_seed_support(
    space: &SpaceDescriptor,
    event: &BadEvent,
) -> Vec<(EventSeed, BigRational)> {
    let mut out: Vec<(Vec<AtomSeed>, BigRational)> =
        vec![(vec![], BigRational::from_integer(1.into()))];
    for i in 0..event.atoms.len() {
        let support = atom_seed_support(space, &event.atoms[i], &event.atoms[i + 1..]);
        let mut next = Vec::with_capacity(out.len() * support.len());
        for (prefix, p) in &out {
            for (s, ps) in &support {
                let mut prefix = prefix.clone();
                prefix.push(s.clone());
                next.push((prefix, p * ps));
            }
        }
        out = next;
    }
    out.into_iter().map(|(seeds, p)| (EventSeed(seeds), p)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use num::{One, Zero};

    #[test]
    fn construction_sorts_and_rejects_dependent_atoms() {
        let space = SpaceDescriptor::Permutation { n: 4 };
        let e = BadEvent::new(
            0,
            vec![Atom::Perm { x: 2, y: 3 }, Atom::Perm { x: 0, y: 1 }],
            &space,
        )
        .unwrap();
        assert_eq!(e.atoms()[0], Atom::Perm { x: 0, y: 1 });

        let bad = BadEvent::new(
            1,
            vec![Atom::Perm { x: 0, y: 1 }, Atom::Perm { x: 0, y: 2 }],
            &space,
        );
        assert!(bad.is_err());
    }

    #[test]
    fn event_dependence() {
        let space = SpaceDescriptor::Permutation { n: 5 };
        let a = BadEvent::new(0, vec![Atom::Perm { x: 0, y: 1 }, Atom::Perm { x: 2, y: 3 }], &space)
            .unwrap();
        let b = BadEvent::new(1, vec![Atom::Perm { x: 2, y: 4 }], &space).unwrap();
        let c = BadEvent::new(2, vec![Atom::Perm { x: 4, y: 0 }], &space).unwrap();
        assert!(events_dependent(&a, &b));
        assert!(!events_dependent(&a, &c));
        // A shared identical atom does not create dependence...
        let d = BadEvent::new(3, vec![Atom::Perm { x: 0, y: 1 }, Atom::Perm { x: 4, y: 2 }], &space)
            .unwrap();
        assert!(!events_dependent(&a, &d));
        assert!(!events_dependent(&a, &a));
        // ...except for self-dependent path atoms.
        let ham = SpaceDescriptor::HamCycle { n: 6 };
        let q = BadEvent::new(0, vec![Atom::Path(vec![0, 1])], &ham).unwrap();
        assert!(events_dependent(&q, &q));
    }

    #[test]
    fn composite_seed_keeps_later_atoms_alive() {
        let space = SpaceDescriptor::Permutation { n: 6 };
        let event = BadEvent::new(
            0,
            vec![Atom::Perm { x: 0, y: 1 }, Atom::Perm { x: 2, y: 3 }, Atom::Perm { x: 4, y: 5 }],
            &space,
        )
        .unwrap();
        for (seed, _) in event_seed_support(&space, &event) {
            // Seed i must preserve every later atom.
            for i in 0..3 {
                for j in i + 1..3 {
                    assert!(atom_seed_stays(&event.atoms()[i], &seed.0[i], &event.atoms()[j]));
                }
            }
        }
    }

    #[test]
    fn composite_seed_stays_iff_every_atom_stays() {
        let space = SpaceDescriptor::Permutation { n: 8 };
        let a = BadEvent::new(0, vec![Atom::Perm { x: 0, y: 1 }, Atom::Perm { x: 2, y: 3 }], &space)
            .unwrap();
        let b = BadEvent::new(1, vec![Atom::Perm { x: 4, y: 5 }, Atom::Perm { x: 6, y: 7 }], &space)
            .unwrap();
        let mut saw_stay = false;
        let mut saw_leave = false;
        for (seed, _) in event_seed_support(&space, &a) {
            let stays = event_seed_stays(&a, &seed, &b);
            let expect = seed.0.iter().zip(a.atoms()).all(|(s, atom)| {
                b.atoms().iter().all(|o| atom_seed_stays(atom, s, o))
            });
            assert_eq!(stays, expect);
            if stays {
                saw_stay = true;
            } else {
                saw_leave = true;
            }
        }
        assert!(saw_stay && saw_leave);
    }

    #[test]
    fn seed_support_is_a_distribution() {
        let space = SpaceDescriptor::Matching { n: 6, s: 2 };
        let event = BadEvent::new(0, vec![Atom::Edge(vec![0, 1]), Atom::Edge(vec![2, 3])], &space)
            .unwrap();
        let total: BigRational = event_seed_support(&space, &event)
            .into_iter()
            .map(|(_, p)| p)
            .sum();
        assert_eq!(total, BigRational::one());
    }

    #[test]
    fn empty_event_always_holds() {
        let space = SpaceDescriptor::Permutation { n: 3 };
        let e = BadEvent::new(0, vec![], &space).unwrap();
        let mut r = rng::stream(1, rng::TAG_MISC, 0, 0);
        let st = crate::spaces::sample_state(&space, &mut r);
        assert!(event_holds(&st, &e));
        assert!(e.probability_exact(&space).is_one());
        assert!(!BigRational::zero().is_one());
    }

    #[test]
    fn applying_composite_seed_resamples_event() {
        // On S_4, resampling a held 2-atom event and conditioning on
        // nothing should land in a state distributed as a fresh uniform
        // permutation conditioned on nothing in particular; here we just
        // check the mechanics: all atoms held before, state stays a
        // permutation after, and the identity seed is a no-op.
        let space = SpaceDescriptor::Permutation { n: 4 };
        let event = BadEvent::new(0, vec![Atom::Perm { x: 0, y: 1 }, Atom::Perm { x: 2, y: 3 }], &space)
            .unwrap();
        let mut st = State::Perm(crate::spaces::PermTable::from_fwd(vec![1, 0, 3, 2]));
        assert!(event_holds(&st, &event));
        let ident = EventSeed(vec![
            AtomSeed::Transposition { y: 1, z: 1 },
            AtomSeed::Transposition { y: 3, z: 3 },
        ]);
        let before = st.clone();
        apply_event_seed(&mut st, &event, &ident);
        assert_eq!(st, before);

        let mut r = rng::stream(2, rng::TAG_MISC, 0, 0);
        let seed = sample_event_seed(&space, &event, &mut r);
        apply_event_seed(&mut st, &event, &seed);
        let State::Perm(p) = &st else { unreachable!() };
        let mut sorted = p.fwd.clone();
        sorted.sort_unstable();
        assert_eq!(sorted, vec![0, 1, 2, 3]);
    }
}
