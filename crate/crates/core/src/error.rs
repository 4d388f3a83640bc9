//! Library-wide error type.

use thiserror::Error;

use crate::automaton::Violation;

#[derive(Debug, Error)]
pub enum Error {
    /// The two automata do not share identical alphabets.
    #[error("alphabet mismatch on tape {tape}: {detail}")]
    AlphabetMismatch { tape: usize, detail: String },

    /// An operation required a structurally valid automaton.
    #[error("invalid automaton ({side}): {}", format_violations(.violations))]
    InvalidAutomaton {
        side: &'static str,
        violations: Vec<Violation>,
    },

    /// A tuple did not have one word per tape.
    #[error("tuple has {got} components but the automaton has {expected} tapes")]
    TupleArity { expected: usize, got: usize },

    /// A tuple word used a letter outside the tape alphabet.
    #[error("tape {tape}: letter {letter:?} is not in the alphabet")]
    UnknownLetter { tape: usize, letter: String },

    /// An alphabet family broke its structural rules.
    #[error("tape {tape}: {message}")]
    BadAlphabet { tape: usize, message: String },

    /// Tape index handed to a per-tape operation was out of range.
    #[error("tape index {tape} out of range (automaton has {tapes} tapes)")]
    TapeOutOfRange { tape: usize, tapes: usize },

    #[error("cannot invert zero")]
    ZeroInverse,

    /// The field modulus is too small for the requested check.
    #[error("prime {prime} is too small: the check needs p > {needed}")]
    PrimeTooSmall { prime: u64, needed: u64 },

    /// A weight assignment missed a variable or left the allowed range.
    #[error("weight assignment invalid: {0}")]
    BadWeights(String),

    /// A set of variables does not describe a single monomial.
    #[error("not a valid monomial: {0}")]
    NotAMonomial(String),

    /// Witness extraction gave up after the configured number of attempts.
    #[error(
        "witness extraction exhausted {attempts} attempts; inequivalence was \
         established at level {level} but no tuple could be verified"
    )]
    WitnessAttemptsExhausted { level: usize, attempts: usize },

    /// Witness extraction never saw a non-zero level, so the automata look equivalent.
    #[error("no distinguishing level found; the automata appear to be equivalent")]
    NoDistinguishingLevel,

    /// Exhaustive enumeration would exceed the configured budget.
    #[error(
        "brute-force enumeration needs {required} tuples, over the budget of {budget}; \
         use the randomized checker instead"
    )]
    EnumerationBudget { required: String, budget: u64 },

    /// A formula variable occurs too often for the requested encoding bound.
    #[error("variable {variable} occurs {occurrences} times, not below the bound {bound}")]
    OccurrenceBound {
        variable: usize,
        occurrences: usize,
        bound: usize,
    },

    #[error("formula is not encodable: {0}")]
    BadFormula(String),

    /// An internal table or index space would overflow.
    #[error("instance too large: {0}")]
    TooLarge(String),
}

fn format_violations(violations: &[Violation]) -> String {
    violations
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

pub type Result<T> = std::result::Result<T, Error>;
