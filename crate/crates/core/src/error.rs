use thiserror::Error;

use crate::chunks::ChunkSet;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("chunk count must be in 2..={max}, got {k}")]
    InvalidChunkCount { k: usize, max: usize },

    #[error("chunk {chunk} out of range for k = {k}")]
    ChunkOutOfRange { chunk: usize, k: usize },

    #[error("profile {0} holds every chunk; completed peers are never stored")]
    FullProfile(ChunkSet),

    #[error("profile {0} has a zero peer count")]
    ZeroCount(ChunkSet),

    #[error("profile {0} listed more than once")]
    DuplicateProfile(ChunkSet),

    #[error("profile {0} is not present in the state")]
    ProfileAbsent(ChunkSet),

    #[error("invalid transition: {0}")]
    InvalidTransition(String),

    #[error("invalid rule: {0}")]
    InvalidRule(String),

    #[error("sample has {got} draws but the rule requires {expected}")]
    SampleSizeMismatch { expected: usize, got: usize },

    #[error(
        "exact enumeration refused: {classes} profile classes and {draws} draws exceed the bound \
         (at most {max_draws} draws and {max_outcomes} outcomes)"
    )]
    EnumerationBound {
        classes: usize,
        draws: usize,
        max_draws: usize,
        max_outcomes: u64,
    },

    #[error("exact arithmetic overflowed for a population of {0}")]
    ArithmeticOverflow(u64),

    #[error("Lyapunov function {spec} is not defined for k = {k}")]
    SpecChunkMismatch { spec: String, k: usize },

    #[error("Lyapunov function {0} cannot be evaluated in exact arithmetic")]
    InexactSpec(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("invalid simulation config: {0}")]
    InvalidConfig(String),
}
