use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum Error {
    /// Malformed net or marking (dimension mismatch, dangling arc, duplicate id).
    #[error("structural error: {0}")]
    Structural(String),

    /// A request that does not fit the net (unknown id, unreachable target, bad parameters).
    #[error("invalid input: {0}")]
    Input(String),

    #[error("reachability graph exceeds the node budget of {budget} markings")]
    Boundedness { budget: usize },

    /// The target marking lies outside the uncertainty's reachability set.
    #[error("target {0} is not reachable")]
    UnreachableTarget(String),

    #[error("net is not a state machine: {0}")]
    NotStateMachine(String),

    #[error("net violates the determinism condition: {0}")]
    Nondeterministic(String),

    /// More (or fewer) than one ergodic component; no synchronizing sequence can exist.
    #[error("net has {ergodic} ergodic components, a synchronizing sequence requires exactly one")]
    Obstruction { ergodic: usize },

    /// A computed sequence failed its verification replay. Always a bug.
    #[error("internal consistency error: {0}")]
    Consistency(String),

    /// The structural side conditions of a sufficient method do not hold.
    #[error("method not applicable: {0}")]
    NotApplicable(String),

    #[error("arithmetic overflow: {0}")]
    Arithmetic(String),

    #[error("generation failed after {retries} retries: {reason}")]
    Generation { retries: usize, reason: String },

    #[error("time limit exceeded")]
    Timeout,

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
}
