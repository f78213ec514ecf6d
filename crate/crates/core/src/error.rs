use alloc::string::String;
use alloc::vec::Vec;

use thiserror::Error;

use crate::attack::Violation;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("unknown event `{0}`")]
    UnknownEvent(String),
    #[error("event id {0} is outside the alphabet")]
    UnknownEventId(u32),
    #[error("unknown state id {0}")]
    UnknownState(u32),
    #[error("unknown state `{0}`")]
    UnknownStateName(String),
    #[error("duplicate event `{0}`")]
    DuplicateEvent(String),
    #[error("duplicate state `{0}`")]
    DuplicateState(String),
    #[error("invalid event name `{0}`")]
    InvalidName(String),
    #[error("event name `{0}` uses a reserved decoration suffix")]
    ReservedName(String),
    #[error("compromised event `{0}` must be observable")]
    UnobservableCompromised(String),
    #[error("event `{0}` is not observable")]
    NotObservable(String),
    #[error("duplicate transition {state} --{event}-->")]
    DuplicateTransition { state: String, event: String },
    #[error("nondeterministic transitions {state} --{event}--> {first} and {second}")]
    Nondeterministic { state: String, event: String, first: String, second: String },
    #[error("control decision does not enable uncontrollable event `{0}`")]
    Inadmissible(String),
    #[error("alphabet mismatch: {0}")]
    AlphabetMismatch(String),
    #[error("invalid attack model: {} violation(s)", .0.len())]
    InvalidAttack(Vec<Violation>),
    #[error("specification is not a sublanguage of the plant (witness `{0}`)")]
    NotSublanguage(String),
    #[error("controllable events must be observable")]
    ControllableUnobservable,
    #[error("the automaton is empty")]
    EmptyAutomaton,
    #[error("no robust supervisor exists")]
    NoRobustSupervisor,
    #[error("string is not observable-feasible in the attacked closed loop")]
    InfeasibleString,
    #[error("state budget of {0} exceeded")]
    BudgetExceeded(usize),
    #[error("{0}")]
    Invalid(String),
}
