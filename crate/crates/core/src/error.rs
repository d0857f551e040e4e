use std::fmt;

use thiserror::Error;

use crate::model::{Action, StateId};

/// A positioned parser diagnostic (1-based line and column).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.line, self.column, self.message)
    }
}

fn join_diagnostics(diags: &[Diagnostic]) -> String {
    diags
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}

fn join_states(states: &[StateId]) -> String {
    states
        .iter()
        .map(StateId::as_str)
        .collect::<Vec<_>>()
        .join(", ")
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("unknown state `{0}`")]
    UnknownState(StateId),

    #[error("transition ({source_state}, {label}, ..) uses a label outside the alphabet")]
    LabelOutsideAlphabet { source_state: StateId, label: String },

    #[error("symbol `{0}` is declared both as input and output")]
    OverlappingAlphabets(String),

    #[error("`delta` is reserved for quiescence and cannot be declared")]
    ReservedSymbol,

    #[error("nondeterministic transitions from `{state}` on `{label}`: `{first}` and `{second}`")]
    Nondeterministic {
        state: StateId,
        label: Action,
        first: StateId,
        second: StateId,
    },

    #[error("alphabets of the two machines differ")]
    AlphabetMismatch,

    #[error("machine is already closed under quiescence")]
    AlreadyClosed,

    #[error("machine must be closed under quiescence first")]
    NotClosed,

    #[error("state `{0}` is not a sink")]
    NotSink(StateId),

    #[error("state `{0}` is not an input state")]
    NotInputState(StateId),

    #[error("input `{input}` is not enabled at `{state}`")]
    InputNotEnabled { state: StateId, input: String },

    #[error("not a submachine: {0}")]
    NotSubmachine(String),

    #[error("input state `{0}` is not certainly reachable")]
    NotCReachable(StateId),

    #[error("input states not certainly reachable: {}", join_states(.0))]
    NotCReachableMany(Vec<StateId>),

    #[error("states `{0}` and `{1}` are compatible")]
    Compatible(StateId, StateId),

    #[error("initial state `{0}` is not stable")]
    InitialNotStable(StateId),

    #[error("machine is not a valid specification: {0}")]
    InvalidMachine(String),

    #[error("state `{0}` enables both inputs and outputs (uncontrollable)")]
    Uncontrollable(StateId),

    #[error("no separator for `{0}` and `{1}`: outputs can always avoid the disagreement")]
    NoSeparator(StateId, StateId),

    #[error("machine is not acyclic")]
    Cyclic,

    #[error("state `{0}` enables more than one input")]
    NotSingleInput(StateId),

    #[error("invalid distinguisher: {0}")]
    InvalidDistinguisher(String),

    #[error("input queue overflow: at most one pending input is supported")]
    QueueOverflow,

    #[error("homeomorphism search limited to {limit} input states, got {actual}")]
    TooManyInputStates { limit: usize, actual: usize },

    #[error("parse errors: {}", join_diagnostics(.0))]
    Parse(Vec<Diagnostic>),

    #[error("{0}")]
    Precondition(String),
}

pub type Result<T> = std::result::Result<T, Error>;
