//! Probability spaces, atomic events, and their resampling oracles.
//!
//! Each space supports the same atomic contract:
//! * sample a state from the space's distribution,
//! * test whether an atom holds in a state,
//! * draw a resampling seed for an atom (obliviously — the draw never
//!   looks at the state), optionally conditioned on preserving a set of
//!   non-dependent atoms,
//! * act on the state with a seed,
//! * decide whether a given seed is guaranteed to preserve another atom.
//!
//! Vertices and variable indices are 0-based throughout.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, ToPrimitive, Zero};
use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::{Error, Result};

/// Description of a probability space.
#[derive(Clone, Debug, PartialEq)]
pub enum SpaceDescriptor {
    /// Independent discrete variables; `weights[i][v]` is the unnormalized
    /// weight of value `v` for variable `i`.
    Variables { weights: Vec<Vec<BigRational>> },
    /// Uniform permutation of `[n]`.
    Permutation { n: usize },
    /// Uniform perfect matching of the complete s-uniform hypergraph on
    /// `[n]` (a partition of `[n]` into n/s blocks of size s).
    Matching { n: usize, s: usize },
    /// Uniform hamiltonian cycle on `[n]`, stored as its successor map.
    HamCycle { n: usize },
    /// Independent product of component spaces.
    Product { components: Vec<SpaceDescriptor> },
}

impl SpaceDescriptor {
    /// Independent variables with uniform marginals over `domain` values.
    pub fn uniform_variables(count: usize, domain: usize) -> SpaceDescriptor {
        let w = vec![vec![BigRational::one(); domain]; count];
        SpaceDescriptor::Variables { weights: w }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            SpaceDescriptor::Variables { weights } => {
                if weights.is_empty() {
                    return Err(Error::InvalidSpace("no variables".into()));
                }
                for (i, w) in weights.iter().enumerate() {
                    if w.is_empty() {
                        return Err(Error::InvalidSpace(format!("variable {i}: empty domain")));
                    }
                    if w.iter().any(|x| x < &BigRational::zero()) {
                        return Err(Error::InvalidSpace(format!("variable {i}: negative weight")));
                    }
                    if w.iter().all(|x| x.is_zero()) {
                        return Err(Error::InvalidSpace(format!("variable {i}: zero total weight")));
                    }
                }
                Ok(())
            }
            SpaceDescriptor::Permutation { n } => {
                if *n == 0 {
                    return Err(Error::InvalidSpace("permutation on empty ground set".into()));
                }
                Ok(())
            }
            SpaceDescriptor::Matching { n, s } => {
                if *s < 2 {
                    return Err(Error::InvalidSpace("matching block size must be >= 2".into()));
                }
                if *n == 0 || *n % *s != 0 {
                    return Err(Error::InvalidSpace(format!(
                        "matching ground set size {n} not a positive multiple of {s}"
                    )));
                }
                Ok(())
            }
            SpaceDescriptor::HamCycle { n } => {
                if *n < 3 {
                    return Err(Error::InvalidSpace("hamiltonian cycle needs n >= 3".into()));
                }
                Ok(())
            }
            SpaceDescriptor::Product { components } => {
                if components.is_empty() {
                    return Err(Error::InvalidSpace("empty product".into()));
                }
                for c in components {
                    if matches!(c, SpaceDescriptor::Product { .. }) {
                        return Err(Error::InvalidSpace("nested products are not supported".into()));
                    }
                    c.validate()?;
                }
                Ok(())
            }
        }
    }

    /// Whether the oracle's seed actions commute in the sense required by
    /// the parallel driver. Matchings commute only for block size 2.
    pub fn is_commutative(&self) -> bool {
        match self {
            SpaceDescriptor::Variables { .. } => true,
            SpaceDescriptor::Permutation { .. } => true,
            SpaceDescriptor::Matching { s, .. } => *s == 2,
            SpaceDescriptor::HamCycle { .. } => true,
            SpaceDescriptor::Product { components } => {
                components.iter().all(|c| c.is_commutative())
            }
        }
    }
}

/// An atomic event.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Atom {
    /// Variable `index` takes value `value`.
    Var { index: usize, value: usize },
    /// The permutation maps `x` to `y`.
    Perm { x: usize, y: usize },
    /// The matching contains this block (vertices sorted ascending).
    Edge(Vec<usize>),
    /// The cycle traverses these vertices consecutively in order
    /// (`vs[i+1]` is the successor of `vs[i]`); at least two vertices.
    Path(Vec<usize>),
    /// An atom of one component of a product space.
    Prod { component: usize, inner: Box<Atom> },
}

impl Atom {
    pub fn edge(mut vs: Vec<usize>) -> Atom {
        vs.sort_unstable();
        Atom::Edge(vs)
    }

    pub fn prod(component: usize, inner: Atom) -> Atom {
        Atom::Prod { component, inner: Box::new(inner) }
    }

    /// Checks the atom is well formed for the given space.
    pub fn validate(&self, space: &SpaceDescriptor) -> Result<()> {
        match (self, space) {
            (Atom::Var { index, value }, SpaceDescriptor::Variables { weights }) => {
                if *index >= weights.len() || *value >= weights[*index].len() {
                    return Err(Error::InvalidEvent(format!(
                        "variable atom ({index},{value}) out of range"
                    )));
                }
                Ok(())
            }
            (Atom::Perm { x, y }, SpaceDescriptor::Permutation { n }) => {
                if *x >= *n || *y >= *n {
                    return Err(Error::InvalidEvent(format!("permutation atom ({x},{y}) out of range")));
                }
                Ok(())
            }
            (Atom::Edge(vs), SpaceDescriptor::Matching { n, s }) => {
                if vs.len() != *s {
                    return Err(Error::InvalidEvent(format!("edge has {} vertices, want {s}", vs.len())));
                }
                if vs.windows(2).any(|w| w[0] >= w[1]) || vs.iter().any(|v| *v >= *n) {
                    return Err(Error::InvalidEvent("edge vertices must be sorted, distinct, in range".into()));
                }
                Ok(())
            }
            (Atom::Path(vs), SpaceDescriptor::HamCycle { n }) => {
                if vs.len() < 2 || vs.len() > *n {
                    return Err(Error::InvalidEvent("path atom needs 2..=n vertices".into()));
                }
                let mut seen = vec![false; *n];
                for v in vs {
                    if *v >= *n || seen[*v] {
                        return Err(Error::InvalidEvent("path vertices must be distinct, in range".into()));
                    }
                    seen[*v] = true;
                }
                Ok(())
            }
            (Atom::Prod { component, inner }, SpaceDescriptor::Product { components }) => {
                if *component >= components.len() {
                    return Err(Error::InvalidEvent(format!("product component {component} out of range")));
                }
                inner.validate(&components[*component])
            }
            _ => Err(Error::InvalidEvent("atom kind does not match space".into())),
        }
    }
}

/// A permutation of `[n]` with its inverse kept alongside.
#[derive(Clone, Debug)]
pub struct PermTable {
    pub fwd: Vec<usize>,
    pub inv: Vec<usize>,
}

impl PermTable {
    pub fn identity(n: usize) -> PermTable {
        PermTable { fwd: (0..n).collect(), inv: (0..n).collect() }
    }

    pub fn from_fwd(fwd: Vec<usize>) -> PermTable {
        let mut inv = vec![0; fwd.len()];
        for (i, &v) in fwd.iter().enumerate() {
            inv[v] = i;
        }
        PermTable { fwd, inv }
    }

    pub fn len(&self) -> usize {
        self.fwd.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fwd.is_empty()
    }

    /// Left-multiplies by the transposition `(a b)`: the two images `a`
    /// and `b` swap places.
    pub fn swap_images(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        let pa = self.inv[a];
        let pb = self.inv[b];
        self.fwd[pa] = b;
        self.fwd[pb] = a;
        self.inv[a] = pb;
        self.inv[b] = pa;
    }

    /// True when the permutation is a single n-cycle.
    pub fn is_single_cycle(&self) -> bool {
        let n = self.len();
        let mut v = 0;
        for _ in 0..n {
            v = self.fwd[v];
        }
        if v != 0 {
            return false;
        }
        let mut count = 1;
        let mut v = self.fwd[0];
        while v != 0 {
            v = self.fwd[v];
            count += 1;
        }
        count == n
    }
}

impl PartialEq for PermTable {
    fn eq(&self, other: &Self) -> bool {
        self.fwd == other.fwd
    }
}
impl Eq for PermTable {}

/// A sampled outcome of a space.
#[derive(Clone, Debug, PartialEq)]
pub enum State {
    Vars(Vec<usize>),
    Perm(PermTable),
    /// Blocks sorted internally and by first vertex.
    Matching(Vec<Vec<usize>>),
    /// Successor map of a single n-cycle.
    Cycle(PermTable),
    Product(Vec<State>),
}

/// A resampling seed for a single atom.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum AtomSeed {
    /// New value for the atom's variable.
    Value(usize),
    /// Transposition `(y z)` left-multiplied onto the permutation.
    Transposition { y: usize, z: usize },
    /// Sequence of transpositions `(x_i z_i)`. For an edge atom
    /// `{x_1<..<x_s}` the pairs run over `x_2..x_s` and the composite is
    /// applied to the matching's vertices, last pair first. For a path
    /// atom `(x_1..x_k)` the pairs run over `x_1..x_{k-1}` and the
    /// composite is left-multiplied onto the relinked successor map,
    /// first pair first.
    Swaps(Vec<(usize, usize)>),
    Prod { component: usize, inner: Box<AtomSeed> },
}

impl AtomSeed {
    pub fn prod(component: usize, inner: AtomSeed) -> AtomSeed {
        AtomSeed::Prod { component, inner: Box::new(inner) }
    }
}

/// Whether two atoms are dependent under the space's lopsided relation.
///
/// Variables: same variable, different value. Permutations: same source
/// with different target or same target with different source. Matchings:
/// distinct blocks sharing a vertex. Cycles: paths sharing a vertex
/// (a path atom is dependent with itself). Products: only within the
/// same component.
pub fn atoms_dependent(a: &Atom, b: &Atom) -> bool {
    match (a, b) {
        (Atom::Var { index: i, value: v }, Atom::Var { index: j, value: w }) => i == j && v != w,
        (Atom::Perm { x, y }, Atom::Perm { x: x2, y: y2 }) => {
            (x == x2 && y != y2) || (y == y2 && x != x2)
        }
        (Atom::Edge(e), Atom::Edge(f)) => e != f && e.iter().any(|v| f.contains(v)),
        (Atom::Path(p), Atom::Path(q)) => p.iter().any(|v| q.contains(v)),
        (Atom::Prod { component: c, inner: a }, Atom::Prod { component: d, inner: b }) => {
            c == d && atoms_dependent(a, b)
        }
        _ => false,
    }
}

/// Whether the atom holds in the state.
pub fn atom_holds(state: &State, atom: &Atom) -> bool {
    match (state, atom) {
        (State::Vars(xs), Atom::Var { index, value }) => xs[*index] == *value,
        (State::Perm(p), Atom::Perm { x, y }) => p.fwd[*x] == *y,
        (State::Matching(m), Atom::Edge(e)) => m.iter().any(|b| b == e),
        (State::Cycle(p), Atom::Path(vs)) => vs.windows(2).all(|w| p.fwd[w[0]] == w[1]),
        (State::Product(states), Atom::Prod { component, inner }) => {
            atom_holds(&states[*component], inner)
        }
        _ => panic!("atom kind does not match state"),
    }
}

fn normalize_matching(m: &mut [Vec<usize>]) {
    for b in m.iter_mut() {
        b.sort_unstable();
    }
    m.sort_unstable();
}

/// Acts on the state with a seed for the given atom. The atom is assumed
/// to hold in the state.
pub fn apply_atom_seed(state: &mut State, atom: &Atom, seed: &AtomSeed) {
    debug_assert!(atom_holds(state, atom), "resampled atom must hold");
    match (state, atom, seed) {
        (State::Vars(xs), Atom::Var { index, .. }, AtomSeed::Value(v)) => {
            xs[*index] = *v;
        }
        (State::Perm(p), Atom::Perm { y, .. }, AtomSeed::Transposition { y: sy, z }) => {
            assert_eq!(y, sy, "seed transposition must start at the atom's target");
            p.swap_images(*sy, *z);
        }
        (State::Matching(m), Atom::Edge(e), AtomSeed::Swaps(pairs)) => {
            assert_eq!(pairs.len(), e.len() - 1);
            for (i, (x, _)) in pairs.iter().enumerate() {
                assert_eq!(*x, e[i + 1], "swap sources must be the edge's tail vertices");
            }
            // Composite permutation, last pair applied first.
            let sigma = |mut v: usize| {
                for (x, z) in pairs.iter().rev() {
                    if v == *x {
                        v = *z;
                    } else if v == *z {
                        v = *x;
                    }
                }
                v
            };
            for b in m.iter_mut() {
                for v in b.iter_mut() {
                    *v = sigma(*v);
                }
            }
            normalize_matching(m);
        }
        (State::Cycle(p), Atom::Path(vs), AtomSeed::Swaps(pairs)) => {
            let n = p.len();
            let k = vs.len();
            assert_eq!(pairs.len(), k - 1);
            for (i, (x, _)) in pairs.iter().enumerate() {
                assert_eq!(*x, vs[i], "swap sources must be the path's vertices in order");
            }
            // g = sigma ∘ lambda, built left to right: lambda relinks the
            // path's vertices backwards, then each (x_i z_i) reinserts x_i
            // just before z_i.
            let mut g: Vec<usize> = (0..n).collect();
            g[vs[0]] = vs[k - 1];
            for i in 1..k {
                g[vs[i]] = vs[i - 1];
            }
            for (x, z) in pairs {
                if x != z {
                    let (mut px, mut pz) = (usize::MAX, usize::MAX);
                    for (u, &gu) in g.iter().enumerate() {
                        if gu == *x {
                            px = u;
                        } else if gu == *z {
                            pz = u;
                        }
                    }
                    g[px] = *z;
                    g[pz] = *x;
                }
            }
            let fwd: Vec<usize> = p.fwd.iter().map(|&v| g[v]).collect();
            *p = PermTable::from_fwd(fwd);
            debug_assert!(p.is_single_cycle(), "cycle oracle must preserve hamiltonicity");
        }
        (State::Product(states), Atom::Prod { component, inner }, AtomSeed::Prod { component: sc, inner: si }) => {
            assert_eq!(component, sc);
            apply_atom_seed(&mut states[*component], inner, si);
        }
        _ => panic!("seed kind does not match atom"),
    }
}

/// Whether `seed` for `atom` is guaranteed to preserve `other` (assuming
/// `other` held before the resampling and is not dependent with `atom`,
/// except that `other` may be `atom` itself for variables, permutations
/// and matchings).
pub fn atom_seed_stays(atom: &Atom, seed: &AtomSeed, other: &Atom) -> bool {
    match (atom, seed, other) {
        (Atom::Var { index: i, .. }, AtomSeed::Value(v), Atom::Var { index: j, value: w }) => {
            i != j || v == w
        }
        (Atom::Perm { x, y }, AtomSeed::Transposition { z, .. }, Atom::Perm { x: x2, y: y2 }) => {
            if x == x2 && y == y2 {
                z == y
            } else {
                z != y2
            }
        }
        (Atom::Edge(e), AtomSeed::Swaps(pairs), Atom::Edge(f)) => {
            if e == f {
                pairs.iter().all(|(_, z)| e.contains(z))
            } else if e.iter().any(|v| f.contains(v)) {
                false
            } else {
                pairs.iter().all(|(_, z)| !f.contains(z))
            }
        }
        (Atom::Path(p), AtomSeed::Swaps(pairs), Atom::Path(q)) => {
            if p.iter().any(|v| q.contains(v)) {
                false
            } else {
                pairs.iter().all(|(_, z)| !q[1..].contains(z))
            }
        }
        (Atom::Prod { component: c, inner: a }, AtomSeed::Prod { inner: s, .. }, Atom::Prod { component: d, inner: b }) => {
            c != d || atom_seed_stays(a, s, b)
        }
        _ => panic!("mismatched atom/seed/atom kinds"),
    }
}

fn rational_weighted_index(weights: &[BigRational]) -> WeightedIndex<f64> {
    let w: Vec<f64> = weights.iter().map(|x| x.to_f64().unwrap()).collect();
    WeightedIndex::new(w).expect("validated weights")
}

/// Samples a state from the space's distribution.
pub fn sample_state(space: &SpaceDescriptor, rng: &mut ChaCha8Rng) -> State {
    match space {
        SpaceDescriptor::Variables { weights } => {
            let xs = weights
                .iter()
                .map(|w| rational_weighted_index(w).sample(rng))
                .collect();
            State::Vars(xs)
        }
        SpaceDescriptor::Permutation { n } => State::Perm(PermTable::from_fwd(random_perm(*n, rng))),
        SpaceDescriptor::Matching { n, s } => {
            let order = random_perm(*n, rng);
            let mut m: Vec<Vec<usize>> = order.chunks(*s).map(|c| c.to_vec()).collect();
            normalize_matching(&mut m);
            State::Matching(m)
        }
        SpaceDescriptor::HamCycle { n } => {
            let order = random_perm(*n, rng);
            let mut fwd = vec![0; *n];
            for i in 0..*n {
                fwd[order[i]] = order[(i + 1) % *n];
            }
            State::Cycle(PermTable::from_fwd(fwd))
        }
        SpaceDescriptor::Product { components } => {
            State::Product(components.iter().map(|c| sample_state(c, rng)).collect())
        }
    }
}

fn random_perm(n: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut v: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = rng.gen_range(0..=i);
        v.swap(i, j);
    }
    v
}

/// Samples a seed for `atom`, conditioned on preserving every atom in
/// `cond`. Every conditioning atom must be non-dependent with `atom` (or
/// equal to it, for variables, permutations and matchings). The sampling
/// never looks at the current state.
pub fn sample_atom_seed(
    space: &SpaceDescriptor,
    atom: &Atom,
    cond: &[Atom],
    rng: &mut ChaCha8Rng,
) -> AtomSeed {
    match (space, atom) {
        (SpaceDescriptor::Variables { weights }, Atom::Var { index, .. }) => {
            for c in cond {
                if let Atom::Var { index: j, value: w } = c {
                    if j == index {
                        return AtomSeed::Value(*w);
                    }
                }
            }
            AtomSeed::Value(rational_weighted_index(&weights[*index]).sample(rng))
        }
        (SpaceDescriptor::Permutation { n }, Atom::Perm { y, .. }) => {
            if cond.contains(atom) {
                return AtomSeed::Transposition { y: *y, z: *y };
            }
            let mut blocked = vec![false; *n];
            for c in cond {
                if let Atom::Perm { y: y2, .. } = c {
                    blocked[*y2] = true;
                }
            }
            let choices: Vec<usize> = (0..*n).filter(|&z| !blocked[z]).collect();
            AtomSeed::Transposition { y: *y, z: choices[rng.gen_range(0..choices.len())] }
        }
        (SpaceDescriptor::Matching { n, .. }, Atom::Edge(e)) => {
            let h: Vec<usize> = if cond.contains(atom) {
                e.clone()
            } else {
                let mut blocked = vec![false; *n];
                for c in cond {
                    if let Atom::Edge(f) = c {
                        for v in f {
                            blocked[*v] = true;
                        }
                    }
                }
                (0..*n).filter(|&v| !blocked[v]).collect()
            };
            let mut pairs = Vec::with_capacity(e.len() - 1);
            let mut used: Vec<usize> = vec![e[0]];
            for &x in &e[1..] {
                let choices: Vec<usize> = h.iter().copied().filter(|z| !used.contains(z)).collect();
                let z = choices[rng.gen_range(0..choices.len())];
                pairs.push((x, z));
                used.push(x);
            }
            AtomSeed::Swaps(pairs)
        }
        (SpaceDescriptor::HamCycle { n }, Atom::Path(vs)) => {
            let mut blocked = vec![false; *n];
            for c in cond {
                if let Atom::Path(q) = c {
                    for v in &q[1..] {
                        blocked[*v] = true;
                    }
                }
            }
            let k = vs.len();
            let mut pairs = Vec::with_capacity(k - 1);
            for i in 0..k - 1 {
                let choices: Vec<usize> = (0..*n)
                    .filter(|&z| !blocked[z] && !vs[i..k - 1].contains(&z))
                    .collect();
                pairs.push((vs[i], choices[rng.gen_range(0..choices.len())]));
            }
            AtomSeed::Swaps(pairs)
        }
        (SpaceDescriptor::Product { components }, Atom::Prod { component, inner }) => {
            let sub: Vec<Atom> = cond
                .iter()
                .filter_map(|c| match c {
                    Atom::Prod { component: d, inner: b } if d == component => {
                        Some((**b).clone())
                    }
                    _ => None,
                })
                .collect();
            AtomSeed::prod(
                *component,
                sample_atom_seed(&components[*component], inner, &sub, rng),
            )
        }
        _ => panic!("atom kind does not match space"),
    }
}

/// Enumerates the support of the conditioned seed distribution for `atom`
/// together with exact probabilities. Mirrors [`sample_atom_seed`].
pub fn atom_seed_support(
    space: &SpaceDescriptor,
    atom: &Atom,
    cond: &[Atom],
) -> Vec<(AtomSeed, BigRational)> {
    match (space, atom) {
        (SpaceDescriptor::Variables { weights }, Atom::Var { index, .. }) => {
            for c in cond {
                if let Atom::Var { index: j, value: w } = c {
                    if j == index {
                        return vec![(AtomSeed::Value(*w), BigRational::one())];
                    }
                }
            }
            let total: BigRational = weights[*index].iter().cloned().sum();
            weights[*index]
                .iter()
                .enumerate()
                .filter(|(_, w)| !w.is_zero())
                .map(|(v, w)| (AtomSeed::Value(v), w / &total))
                .collect()
        }
        (SpaceDescriptor::Permutation { n }, Atom::Perm { y, .. }) => {
            if cond.contains(atom) {
                return vec![(AtomSeed::Transposition { y: *y, z: *y }, BigRational::one())];
            }
            let mut blocked = vec![false; *n];
            for c in cond {
                if let Atom::Perm { y: y2, .. } = c {
                    blocked[*y2] = true;
                }
            }
            let choices: Vec<usize> = (0..*n).filter(|&z| !blocked[z]).collect();
            let p = BigRational::new(BigInt::one(), BigInt::from(choices.len()));
            choices
                .into_iter()
                .map(|z| (AtomSeed::Transposition { y: *y, z }, p.clone()))
                .collect()
        }
        (SpaceDescriptor::Matching { n, .. }, Atom::Edge(e)) => {
            let h: Vec<usize> = if cond.contains(atom) {
                e.clone()
            } else {
                let mut blocked = vec![false; *n];
                for c in cond {
                    if let Atom::Edge(f) = c {
                        for v in f {
                            blocked[*v] = true;
                        }
                    }
                }
                (0..*n).filter(|&v| !blocked[v]).collect()
            };
            let mut out: Vec<Vec<(usize, usize)>> = vec![vec![]];
            for (i, &x) in e[1..].iter().enumerate() {
                let used = &e[..i + 1];
                let choices: Vec<usize> = h.iter().copied().filter(|z| !used.contains(z)).collect();
                let mut next = Vec::with_capacity(out.len() * choices.len());
                for prefix in &out {
                    for &z in &choices {
                        let mut p = prefix.clone();
                        p.push((x, z));
                        next.push(p);
                    }
                }
                out = next;
            }
            let p = BigRational::new(BigInt::one(), BigInt::from(out.len()));
            out.into_iter().map(|pairs| (AtomSeed::Swaps(pairs), p.clone())).collect()
        }
        (SpaceDescriptor::HamCycle { n }, Atom::Path(vs)) => {
            let mut blocked = vec![false; *n];
            for c in cond {
                if let Atom::Path(q) = c {
                    for v in &q[1..] {
                        blocked[*v] = true;
                    }
                }
            }
            let k = vs.len();
            let mut out: Vec<Vec<(usize, usize)>> = vec![vec![]];
            for i in 0..k - 1 {
                let choices: Vec<usize> = (0..*n)
                    .filter(|&z| !blocked[z] && !vs[i..k - 1].contains(&z))
                    .collect();
                let mut next = Vec::with_capacity(out.len() * choices.len());
                for prefix in &out {
                    for &z in &choices {
                        let mut p = prefix.clone();
                        p.push((vs[i], z));
                        next.push(p);
                    }
                }
                out = next;
            }
            let p = BigRational::new(BigInt::one(), BigInt::from(out.len()));
            out.into_iter().map(|pairs| (AtomSeed::Swaps(pairs), p.clone())).collect()
        }
        (SpaceDescriptor::Product { components }, Atom::Prod { component, inner }) => {
            let sub: Vec<Atom> = cond
                .iter()
                .filter_map(|c| match c {
                    Atom::Prod { component: d, inner: b } if d == component => Some((**b).clone()),
                    _ => None,
                })
                .collect();
            atom_seed_support(&components[*component], inner, &sub)
                .into_iter()
                .map(|(s, p)| (AtomSeed::prod(*component, s), p))
                .collect()
        }
        _ => panic!("atom kind does not match space"),
    }
}

fn factorial(n: usize) -> BigInt {
    let mut f = BigInt::one();
    for i in 2..=n {
        f *= BigInt::from(i);
    }
    f
}

/// Number of perfect matchings of the complete s-uniform hypergraph on
/// `[n]`: n! / ((s!)^(n/s) (n/s)!).
fn matching_count(n: usize, s: usize) -> BigInt {
    let blocks = n / s;
    let mut denom = factorial(blocks);
    for _ in 0..blocks {
        denom *= factorial(s);
    }
    factorial(n) / denom
}

/// Exact probability that all atoms hold simultaneously. The atoms must
/// be pairwise non-dependent and distinct.
pub fn event_probability_exact(space: &SpaceDescriptor, atoms: &[Atom]) -> BigRational {
    match space {
        SpaceDescriptor::Variables { weights } => {
            let mut p = BigRational::one();
            for a in atoms {
                let Atom::Var { index, value } = a else { panic!("atom kind mismatch") };
                let total: BigRational = weights[*index].iter().cloned().sum();
                p *= &weights[*index][*value] / total;
            }
            p
        }
        SpaceDescriptor::Permutation { n } => {
            let k = atoms.len();
            assert!(k <= *n);
            BigRational::new(factorial(n - k), factorial(*n))
        }
        SpaceDescriptor::Matching { n, s } => {
            let k = atoms.len();
            assert!(k * s <= *n);
            BigRational::new(matching_count(n - k * s, *s), matching_count(*n, *s))
        }
        SpaceDescriptor::HamCycle { n } => {
            let t: usize = atoms
                .iter()
                .map(|a| {
                    let Atom::Path(vs) = a else { panic!("atom kind mismatch") };
                    vs.len() - 1
                })
                .sum();
            assert!(t + 1 <= *n);
            BigRational::new(factorial(n - t - 1), factorial(n - 1))
        }
        SpaceDescriptor::Product { components } => {
            let mut p = BigRational::one();
            for (i, c) in components.iter().enumerate() {
                let sub: Vec<Atom> = atoms
                    .iter()
                    .filter_map(|a| match a {
                        Atom::Prod { component, inner } if *component == i => {
                            Some((**inner).clone())
                        }
                        _ => None,
                    })
                    .collect();
                if !sub.is_empty() {
                    p *= event_probability_exact(c, &sub);
                }
            }
            p
        }
    }
}

/// Enumerates every state of a small space with its exact probability.
pub fn enumerate_states(space: &SpaceDescriptor) -> Vec<(State, BigRational)> {
    match space {
        SpaceDescriptor::Variables { weights } => {
            let mut out: Vec<(Vec<usize>, BigRational)> = vec![(vec![], BigRational::one())];
            for w in weights {
                let total: BigRational = w.iter().cloned().sum();
                let mut next = Vec::new();
                for (xs, p) in &out {
                    for (v, wv) in w.iter().enumerate() {
                        if wv.is_zero() {
                            continue;
                        }
                        let mut xs = xs.clone();
                        xs.push(v);
                        next.push((xs, p * (wv / &total)));
                    }
                }
                out = next;
            }
            out.into_iter().map(|(xs, p)| (State::Vars(xs), p)).collect()
        }
        SpaceDescriptor::Permutation { n } => {
            let perms = all_perms(*n);
            let p = BigRational::new(BigInt::one(), factorial(*n));
            perms
                .into_iter()
                .map(|f| (State::Perm(PermTable::from_fwd(f)), p.clone()))
                .collect()
        }
        SpaceDescriptor::Matching { n, s } => {
            let mut out = Vec::new();
            let mut free: Vec<usize> = (0..*n).collect();
            let mut current = Vec::new();
            enumerate_matchings(&mut free, *s, &mut current, &mut out);
            let p = BigRational::new(BigInt::one(), BigInt::from(out.len()));
            out.into_iter()
                .map(|mut m| {
                    normalize_matching(&mut m);
                    (State::Matching(m), p.clone())
                })
                .collect()
        }
        SpaceDescriptor::HamCycle { n } => {
            let rest = all_perms(*n - 1);
            let p = BigRational::new(BigInt::one(), factorial(*n - 1));
            rest.into_iter()
                .map(|tail| {
                    let mut order = vec![0];
                    order.extend(tail.into_iter().map(|v| v + 1));
                    let mut fwd = vec![0; *n];
                    for i in 0..*n {
                        fwd[order[i]] = order[(i + 1) % *n];
                    }
                    (State::Cycle(PermTable::from_fwd(fwd)), p.clone())
                })
                .collect()
        }
        SpaceDescriptor::Product { components } => {
            let mut out: Vec<(Vec<State>, BigRational)> = vec![(vec![], BigRational::one())];
            for c in components {
                let states = enumerate_states(c);
                let mut next = Vec::with_capacity(out.len() * states.len());
                for (xs, p) in &out {
                    for (s, ps) in &states {
                        let mut xs = xs.clone();
                        xs.push(s.clone());
                        next.push((xs, p * ps));
                    }
                }
                out = next;
            }
            out.into_iter().map(|(xs, p)| (State::Product(xs), p)).collect()
        }
    }
}

fn all_perms(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut v: Vec<usize> = (0..n).collect();
    permute(&mut v, 0, &mut out);
    out
}

fn permute(v: &mut Vec<usize>, i: usize, out: &mut Vec<Vec<usize>>) {
    if i == v.len() {
        out.push(v.clone());
        return;
    }
    for j in i..v.len() {
        v.swap(i, j);
        permute(v, i + 1, out);
        v.swap(i, j);
    }
}

fn enumerate_matchings(
    free: &mut Vec<usize>,
    s: usize,
    current: &mut Vec<Vec<usize>>,
    out: &mut Vec<Vec<Vec<usize>>>,
) {
    if free.is_empty() {
        out.push(current.clone());
        return;
    }
    let first = free[0];
    let rest: Vec<usize> = free[1..].to_vec();
    for combo in combinations(&rest, s - 1) {
        let mut block = vec![first];
        block.extend(combo.iter().copied());
        let mut remaining: Vec<usize> = rest.iter().copied().filter(|v| !combo.contains(v)).collect();
        current.push(block);
        enumerate_matchings(&mut remaining, s, current, out);
        current.pop();
    }
}

fn combinations(items: &[usize], k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    if items.len() < k {
        return vec![];
    }
    let mut out = Vec::new();
    for rest in combinations(&items[1..], k - 1) {
        let mut c = vec![items[0]];
        c.extend(rest);
        out.push(c);
    }
    out.extend(combinations(&items[1..], k));
    out
}
