//! A constructive engine for the Lopsided Lovász Local Lemma built on
//! oblivious resampling oracles.
//!
//! The crate is organized around a small oracle contract (`core`): a bad
//! event is an ordered conjunction of atomic events, and resampling an
//! event means drawing a composite seed and acting on the state with it.
//! Five probability spaces implement the atomic contract (`spaces`):
//! independent variables, uniform permutations, perfect matchings of the
//! complete s-uniform hypergraph, hamiltonian cycles of the complete
//! graph, and cartesian products of these.
//!
//! On top of the contract sit three resampling drivers (`engine`), a
//! directed-graph lexicographically-first MIS (`lfmis`), LLL criterion
//! checkers (`criteria`), an exhaustive exact axiom verifier
//! (`axiomtest`), and application encoders (`apps`).

pub mod apps;
pub mod axiomtest;
pub mod cli;
pub mod core;
pub mod criteria;
pub mod engine;
pub mod lfmis;
pub mod rng;
pub mod spaces;

pub use crate::core::{BadEvent, EventSeed};
pub use crate::engine::{Problem, RunResult};
pub use crate::spaces::{Atom, AtomSeed, SpaceDescriptor, State};

use thiserror::Error;

/// Library-level error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid space descriptor: {0}")]
    InvalidSpace(String),
    #[error("invalid event: {0}")]
    InvalidEvent(String),
    #[error("contract violation: {0}")]
    Contract(String),
    #[error("enumeration budget exceeded: {0}")]
    Budget(String),
    #[error("parallel mode requires a commutative oracle ({0})")]
    NonCommutative(String),
    #[error("input error: {0}")]
    Input(String),
}

pub type Result<T> = std::result::Result<T, Error>;
