//! Simulation and exact analysis of a decentralized chunk-sharing swarm.
//!
//! A file is split into `k` chunks. Peers arrive empty at Poisson rate λ, sample
//! other members of the swarm at unit rate, download at most one chunk per
//! sampling event according to a local [`Rule`], and leave as soon as they hold
//! every chunk. A single permanent seed holds the full file.
//!
//! The crate is organised as:
//!
//! - [`chunks`] and [`state`]: chunk profiles, the swarm state and its aggregate counts.
//! - [`rules`]: the chunk-selection rules as pure functions of a sample.
//! - [`analysis`]: exact download intensities, generator rows, Lyapunov functions,
//!   drifts, lemma checks and drift sweeps.
//! - [`sim`]: exact event-driven simulation, Monte-Carlo drift estimation and
//!   run artifacts.

pub mod analysis;
pub mod chunks;
mod error;
pub mod rules;
pub mod scalar;
pub mod sim;
pub mod state;

pub use chunks::{ChunkSet, MAX_CHUNKS};
pub use error::{Error, Result};
pub use rules::{Decision, Rule};
pub use scalar::Scalar;
pub use state::{Aggregates, StateSnapshot, SwarmState, Transition, TransitionKind};
