use thiserror::Error;

/// Errors raised by the lattice, decomposition, exploration and model code.
///
/// The variants fall into three groups that callers treat differently:
/// malformed input (a caller bug or a bad file), violated preconditions of an
/// algorithm, and internal invariant violations, which indicate a defect in
/// this library rather than in the input.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("points {0:?} and {1:?} are not lattice neighbors")]
    NotNeighbors((i32, i32), (i32, i32)),
    #[error("malformed loop: {0}")]
    MalformedLoop(String),
    #[error("configurations live on different supports")]
    SupportMismatch,
    #[error("subgraph is not contained in the support: {0}")]
    NotSubgraph(String),
    #[error("configuration has {0} source vertices; a sourceless configuration is required")]
    HasSources(usize),
    #[error("not a discrete disc: {0}")]
    NotADisc(String),
    #[error("loop class violation: {0}")]
    LoopClass(String),
    #[error("concatenation failed: {0}")]
    Concatenation(String),
    #[error("state space too large: {0}")]
    TooLarge(String),
    #[error("malformed serialized data: {0}")]
    Decode(String),
    #[error("internal invariant violated: {0}")]
    Invariant(String),
}

impl Error {
    /// True for errors that signal a defect in the algorithms rather than bad
    /// input.
    pub fn is_invariant_violation(&self) -> bool {
        matches!(self, Error::Invariant(_) | Error::Concatenation(_))
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
