//! Multiplicity equivalence of k-tape finite automata.
//!
//! Two nondeterministic multitape automata are multiplicity equivalent when
//! every input tuple has the same number of accepting runs in both; for
//! deterministic automata this coincides with language equivalence. This
//! crate decides the question with a randomized polynomial-identity check:
//! the pair is folded into a block-diagonal difference system whose level-l
//! weight enumerates all length-l differences, letters become superdiagonal
//! matrices with fresh random entries, and the system is iterated for
//! levels 0 .. n-1 (n the total state count). Equivalent pairs always pass;
//! inequivalent pairs escape a round with probability at most (n-1)/p.
//!
//! When the automata differ, a distinguishing tuple of total length at most
//! n - 1 is recovered by weight isolation and verified against exact run
//! counts before being reported, so witnesses are unconditionally correct.
//!
//! Entry points:
//! - [`check_equivalence`] decides equivalence with quantified error.
//! - [`extract_counterexample`] produces a verified witness tuple.
//! - [`brute_force_equivalence`] is the exact oracle for desk-scale inputs.
//! - [`document`] reads and writes the on-disk formats used by the CLI.

pub mod automaton;
pub mod document;
pub mod equivalence;
pub mod error;
pub mod field;
pub mod grid;
pub mod oracle;
pub mod poly;
pub mod system;
pub mod witness;

pub use automaton::{
    letter_name, random_automaton, Alphabets, Edge, MultitapeAutomaton, Multiplicity, TapeTuple,
    Violation,
};
pub use equivalence::{
    check_equivalence, false_equivalence_bound, planned_primes, CheckConfig, PrimePolicy, Verdict,
};
pub use error::{Error, Result};
pub use field::{choose_prime, Fp, PrimeField, DEFAULT_PRIME};
pub use grid::{GridDims, GridVector, Mode, Projected};
pub use oracle::{
    brute_force_equivalence, count_tuples, encode_sharp_sat, enumerate_tuples, BruteForceVerdict,
    CnfFormula, DEFAULT_ENUMERATION_BUDGET,
};
pub use poly::{PolyRing, UniPoly};
pub use system::{
    build_difference_system, decode_monomial, sample_valuation, symbolic_valuation,
    DifferenceSystem, Valuation, VariableId, WeightAssignment,
};
pub use witness::{extract_counterexample, IsolationContext, WitnessResult};
