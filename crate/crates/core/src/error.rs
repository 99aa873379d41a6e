use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// Malformed automaton, vector or certificate text.
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },

    /// Two transitions leave the same state on the same letter.
    #[error("nondeterministic: state {state} has several transitions on {letter}")]
    Nondeterministic { state: String, letter: String },

    #[error("the automaton recognizes the empty language")]
    EmptyLanguage,

    #[error("alphabets differ")]
    AlphabetMismatch,

    #[error("unknown letter {0}")]
    UnknownLetter(String),

    /// A transition that is not a step of the shuffle automaton.
    #[error("not a transition of the shuffle automaton: {0}")]
    NotSubsetOfShuffle(String),

    #[error("initial segment is not compatible with the automaton")]
    NotCompatible,

    #[error("frontier cap of {0} exceeded")]
    FrontierCapExceeded(usize),

    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),

    #[error("invalid structured word: {0}")]
    InvalidStructuredWord(String),

    #[error("not a computation: {0}")]
    NotAComputation(String),

    #[error("language is not prefix closed")]
    NotPrefixClosed,

    #[error("index set is not a subset")]
    NotASubset,

    /// A closure check was asked to run without an established cover.
    #[error("coverage of the transition alphabet was not established")]
    PreconditionUnverified,

    #[error("invalid query: {0}")]
    InvalidQuery(String),

    #[error("malformed certificate: {0}")]
    MalformedCertificate(String),

    #[error("not an initial segment: {0}")]
    InvalidSegment(String),
}

pub type Result<T> = std::result::Result<T, Error>;
