//! k-tape finite automata: the data model, structural validation, the
//! determinism test, exact run counting, and a seeded random generator.
//!
//! An automaton reads k input tapes; every edge consumes one letter from one
//! tape. The multiplicity of a tuple is the number of accepting runs whose
//! label equals it, with distinct interleavings of tape reads counted
//! separately. Counting is exact over big integers because it serves as
//! ground truth for the randomized checker.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::BigUint;
use num_traits::Zero;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;

use crate::error::{Error, Result};

/// Number of accepting runs on a tuple; arbitrary precision.
pub type Multiplicity = BigUint;

/// Per-tape alphabets. A tape alphabet may be empty, in which case that
/// component of every accepted tuple is the empty word.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Alphabets {
    letters: Vec<Vec<String>>,
}

impl Alphabets {
    /// Requires at least one tape, non-empty letter symbols, and pairwise
    /// distinct letters within each tape.
    pub fn new(letters: Vec<Vec<String>>) -> Result<Alphabets> {
        if letters.is_empty() {
            return Err(Error::BadAlphabet {
                tape: 0,
                message: "an automaton needs at least one tape".into(),
            });
        }
        for (tape, tape_letters) in letters.iter().enumerate() {
            let mut seen = BTreeSet::new();
            for letter in tape_letters {
                if letter.is_empty() {
                    return Err(Error::BadAlphabet {
                        tape,
                        message: "letters must be non-empty strings".into(),
                    });
                }
                if !seen.insert(letter) {
                    return Err(Error::BadAlphabet {
                        tape,
                        message: format!("duplicate letter {letter:?}"),
                    });
                }
            }
        }
        Ok(Alphabets { letters })
    }

    pub fn tapes(&self) -> usize {
        self.letters.len()
    }

    pub fn letters(&self, tape: usize) -> &[String] {
        &self.letters[tape]
    }

    pub fn letter_index(&self, tape: usize, letter: &str) -> Option<usize> {
        self.letters
            .get(tape)
            .and_then(|ls| ls.iter().position(|l| l == letter))
    }

    /// Sum of the per-tape alphabet sizes.
    pub fn total_letters(&self) -> usize {
        self.letters.iter().map(|l| l.len()).sum()
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.letters.iter().map(|l| l.len()).collect()
    }

    /// True when every letter on every tape is a single character, which is
    /// when concatenated word syntax is unambiguous.
    pub fn single_char_only(&self) -> bool {
        self.letters
            .iter()
            .all(|ls| ls.iter().all(|l| l.chars().count() == 1))
    }
}

/// One element of the product monoid: a word per tape.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TapeTuple {
    words: Vec<Vec<String>>,
}

impl TapeTuple {
    pub fn new(words: Vec<Vec<String>>) -> TapeTuple {
        TapeTuple { words }
    }

    /// The all-empty tuple over k tapes.
    pub fn empty(tapes: usize) -> TapeTuple {
        TapeTuple {
            words: vec![Vec::new(); tapes],
        }
    }

    pub fn words(&self) -> &[Vec<String>] {
        &self.words
    }

    pub fn tapes(&self) -> usize {
        self.words.len()
    }

    /// Total length across all tapes.
    pub fn total_len(&self) -> usize {
        self.words.iter().map(|w| w.len()).sum()
    }

    pub fn per_tape_lengths(&self) -> Vec<usize> {
        self.words.iter().map(|w| w.len()).collect()
    }

    /// Checks arity and letter membership against an alphabet family.
    pub fn validate_against(&self, alphabets: &Alphabets) -> Result<()> {
        if self.words.len() != alphabets.tapes() {
            return Err(Error::TupleArity {
                expected: alphabets.tapes(),
                got: self.words.len(),
            });
        }
        for (tape, word) in self.words.iter().enumerate() {
            for letter in word {
                if alphabets.letter_index(tape, letter).is_none() {
                    return Err(Error::UnknownLetter {
                        tape,
                        letter: letter.clone(),
                    });
                }
            }
        }
        Ok(())
    }
}

/// A single transition: consume `letter` from `tape`, move src -> dst.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Edge {
    pub src: usize,
    pub tape: usize,
    pub letter: String,
    pub dst: usize,
}

impl Edge {
    pub fn new(src: usize, tape: usize, letter: impl Into<String>, dst: usize) -> Edge {
        Edge {
            src,
            tape,
            letter: letter.into(),
            dst,
        }
    }
}

/// One invariant violation found by [`MultitapeAutomaton::validate`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    /// Which part of the automaton is at fault, e.g. `edges[3]`.
    pub location: String,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.location, self.message)
    }
}

/// Nondeterministic k-tape automaton over dense state indices
/// 0..state_count. States are immutable after construction; all operations
/// are read-only.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MultitapeAutomaton {
    pub alphabets: Alphabets,
    pub state_count: usize,
    pub edges: Vec<Edge>,
    pub initial: BTreeSet<usize>,
    pub final_states: BTreeSet<usize>,
}

impl MultitapeAutomaton {
    pub fn new(
        alphabets: Alphabets,
        state_count: usize,
        edges: Vec<Edge>,
        initial: BTreeSet<usize>,
        final_states: BTreeSet<usize>,
    ) -> MultitapeAutomaton {
        MultitapeAutomaton {
            alphabets,
            state_count,
            edges,
            initial,
            final_states,
        }
    }

    /// Returns every invariant violation; an empty list means the automaton
    /// is well formed.
    pub fn validate(&self) -> Vec<Violation> {
        let mut violations = Vec::new();
        let tapes = self.alphabets.tapes();
        let mut seen = BTreeMap::new();
        for (i, e) in self.edges.iter().enumerate() {
            let loc = format!("edges[{i}]");
            if e.src >= self.state_count {
                violations.push(Violation {
                    location: loc.clone(),
                    message: format!("src {} out of range ({} states)", e.src, self.state_count),
                });
            }
            if e.dst >= self.state_count {
                violations.push(Violation {
                    location: loc.clone(),
                    message: format!("dst {} out of range ({} states)", e.dst, self.state_count),
                });
            }
            if e.tape >= tapes {
                violations.push(Violation {
                    location: loc.clone(),
                    message: format!("tape index {} out of range ({} tapes)", e.tape, tapes),
                });
            } else if self.alphabets.letter_index(e.tape, &e.letter).is_none() {
                violations.push(Violation {
                    location: loc.clone(),
                    message: format!("unknown letter {:?} on tape {}", e.letter, e.tape),
                });
            }
            if let Some(first) = seen.insert((e.src, e.tape, e.letter.clone(), e.dst), i) {
                violations.push(Violation {
                    location: loc,
                    message: format!("duplicate of edges[{first}]"),
                });
            }
        }
        for (name, set) in [("initial", &self.initial), ("final", &self.final_states)] {
            for &q in set.iter() {
                if q >= self.state_count {
                    violations.push(Violation {
                        location: name.to_string(),
                        message: format!("state {} out of range ({} states)", q, self.state_count),
                    });
                }
            }
        }
        violations
    }

    pub fn is_valid(&self) -> bool {
        self.validate().is_empty()
    }

    pub(crate) fn require_valid(&self, side: &'static str) -> Result<()> {
        let violations = self.validate();
        if violations.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidAutomaton { side, violations })
        }
    }

    /// Deterministic in the partial sense: at most one initial state, every
    /// state reads from a single tape, and at most one edge per state and
    /// letter. Missing transitions are allowed; such an automaton has at
    /// most one run on any input.
    pub fn is_deterministic(&self) -> bool {
        if self.initial.len() > 1 {
            return false;
        }
        let mut state_tape: BTreeMap<usize, usize> = BTreeMap::new();
        let mut seen_letter = BTreeSet::new();
        for e in &self.edges {
            match state_tape.get(&e.src) {
                Some(&t) if t != e.tape => return false,
                Some(_) => {}
                None => {
                    state_tape.insert(e.src, e.tape);
                }
            }
            if !seen_letter.insert((e.src, e.letter.clone())) {
                return false;
            }
        }
        true
    }

    /// Exact number of accepting runs labeled by `s`.
    ///
    /// Dynamic program over configurations (state, per-tape consumed prefix
    /// lengths), kept sparse: every edge extends exactly one prefix by one
    /// letter, so the flat configuration index strictly increases along
    /// transitions and popping configurations in ascending order visits each
    /// one exactly once, after all of its mass has arrived.
    pub fn count_runs(&self, s: &TapeTuple) -> Result<Multiplicity> {
        s.validate_against(&self.alphabets)?;
        let tapes = self.alphabets.tapes();
        // letter ids per tape position
        let word_ids: Vec<Vec<usize>> = s
            .words()
            .iter()
            .enumerate()
            .map(|(tape, word)| {
                word.iter()
                    .map(|l| self.alphabets.letter_index(tape, l).expect("validated"))
                    .collect()
            })
            .collect();
        let lens: Vec<usize> = word_ids.iter().map(|w| w.len()).collect();

        if self.state_count == 0 {
            return Ok(Multiplicity::zero());
        }
        let mut cells: u64 = 1;
        let mut strides = vec![0u64; tapes]; // stride of tape i in the prefix index
        for tape in (0..tapes).rev() {
            strides[tape] = cells;
            cells = cells
                .checked_mul(lens[tape] as u64 + 1)
                .ok_or_else(|| Error::TooLarge("run-count configuration space".into()))?;
        }
        cells
            .checked_mul(self.state_count as u64)
            .ok_or_else(|| Error::TooLarge("run-count configuration space".into()))?;

        // edges grouped by source, letters interned
        let mut edges_from: Vec<Vec<(usize, usize, usize)>> = vec![Vec::new(); self.state_count];
        for e in &self.edges {
            let letter = self.alphabets.letter_index(e.tape, &e.letter).expect("validated");
            edges_from[e.src].push((e.tape, letter, e.dst));
        }

        let states = self.state_count as u64;
        let full_prefix: u64 = (0..tapes).map(|t| lens[t] as u64 * strides[t]).sum();
        let mut frontier: BTreeMap<u64, Multiplicity> = BTreeMap::new();
        for &q in &self.initial {
            *frontier.entry(q as u64).or_default() += 1u32;
        }
        let mut total = Multiplicity::zero();
        let mut visited: u64 = 0;
        while let Some((flat, count)) = frontier.pop_first() {
            visited += 1;
            if visited > Self::RUN_COUNT_CONFIG_CAP {
                return Err(Error::TooLarge(
                    "run-count configuration space exceeds the built-in cap".into(),
                ));
            }
            let q = (flat % states) as usize;
            let prefix = flat / states;
            if prefix == full_prefix && self.final_states.contains(&q) {
                total += &count;
            }
            for &(tape, letter, dst) in &edges_from[q] {
                let consumed = (prefix / strides[tape]) % (lens[tape] as u64 + 1);
                if (consumed as usize) < lens[tape] && word_ids[tape][consumed as usize] == letter {
                    let target = (prefix + strides[tape]) * states + dst as u64;
                    *frontier.entry(target).or_default() += &count;
                }
            }
        }
        Ok(total)
    }

    /// Upper bound on reachable (state, prefix) configurations one
    /// [`count_runs`] call will visit before refusing.
    const RUN_COUNT_CONFIG_CAP: u64 = 1 << 26;
}

/// Letter names used by the generator: a..z, then l26, l27, ...
pub fn letter_name(index: usize) -> String {
    if index < 26 {
        ((b'a' + index as u8) as char).to_string()
    } else {
        format!("l{index}")
    }
}

/// Seeded pseudo-random automaton. Each possible edge is included
/// independently with probability `density`; initial and final sets are
/// sampled per state and forced non-empty when there are states at all.
pub fn random_automaton(
    tapes: usize,
    state_count: usize,
    alphabet_sizes: &[usize],
    density: f64,
    seed: u64,
) -> MultitapeAutomaton {
    assert!(tapes >= 1, "need at least one tape");
    assert_eq!(alphabet_sizes.len(), tapes, "one size per tape");
    assert!((0.0..=1.0).contains(&density), "density must be in [0, 1]");
    let alphabets = Alphabets::new(
        alphabet_sizes
            .iter()
            .map(|&n| (0..n).map(letter_name).collect())
            .collect(),
    )
    .expect("generated alphabets are well formed");

    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for src in 0..state_count {
        for (tape, &size) in alphabet_sizes.iter().enumerate() {
            for letter in 0..size {
                for dst in 0..state_count {
                    if rng.gen::<f64>() < density {
                        edges.push(Edge::new(src, tape, letter_name(letter), dst));
                    }
                }
            }
        }
    }
    let sample_states = |rng: &mut ChaCha12Rng| -> BTreeSet<usize> {
        let mut set: BTreeSet<usize> = (0..state_count).filter(|_| rng.gen::<bool>()).collect();
        if set.is_empty() && state_count > 0 {
            set.insert(rng.gen_range(0..state_count));
        }
        set
    };
    let initial = sample_states(&mut rng);
    let final_states = sample_states(&mut rng);
    MultitapeAutomaton::new(alphabets, state_count, edges, initial, final_states)
}


#[cfg(test)]
mod tests {
    use super::testutil::*;
    use super::*;

    #[test]
    fn alphabet_construction_rejects_bad_shapes() {
        assert!(matches!(
            Alphabets::new(vec![]),
            Err(Error::BadAlphabet { .. })
        ));
        assert!(matches!(
            Alphabets::new(vec![vec!["a".into(), "a".into()]]),
            Err(Error::BadAlphabet { tape: 0, .. })
        ));
        assert!(matches!(
            Alphabets::new(vec![vec!["a".into()], vec![String::new()]]),
            Err(Error::BadAlphabet { tape: 1, .. })
        ));
        // an explicitly empty tape alphabet is allowed
        assert!(Alphabets::new(vec![vec!["a".into()], vec![]]).is_ok());
    }

    #[test]
    fn vacuous_automaton_is_valid() {
        let a = MultitapeAutomaton::new(
            alphabets(&[&["a"]]),
            0,
            vec![],
            BTreeSet::new(),
            BTreeSet::new(),
        );
        assert!(a.validate().is_empty());
    }

    #[test]
    fn out_of_range_dst_is_reported() {
        let a = MultitapeAutomaton::new(
            alphabets(&[&["a"]]),
            2,
            vec![Edge::new(0, 0, "a", 5)],
            BTreeSet::from([0]),
            BTreeSet::new(),
        );
        let violations = a.validate();
        assert_eq!(violations.len(), 1);
        assert_eq!(violations[0].location, "edges[0]");
        assert!(violations[0].message.contains("dst 5 out of range"));
    }

    #[test]
    fn unknown_letter_is_reported() {
        let a = MultitapeAutomaton::new(
            alphabets(&[&["a", "b"]]),
            1,
            vec![Edge::new(0, 0, "c", 0)],
            BTreeSet::from([0]),
            BTreeSet::from([0]),
        );
        let violations = a.validate();
        assert_eq!(violations.len(), 1);
        assert!(violations[0].message.contains("unknown letter \"c\""));
    }

    #[test]
    fn duplicate_edges_are_reported_with_both_locations() {
        let a = MultitapeAutomaton::new(
            alphabets(&[&["a"]]),
            1,
            vec![Edge::new(0, 0, "a", 0), Edge::new(0, 0, "a", 0)],
            BTreeSet::from([0]),
            BTreeSet::from([0]),
        );
        let violations = a.validate();
        assert_eq!(violations.len(), 1);
        assert_eq!(violations[0].location, "edges[1]");
        assert!(violations[0].message.contains("edges[0]"));
    }

    #[test]
    fn deterministic_examples() {
        let one_tape_two_letters = MultitapeAutomaton::new(
            alphabets(&[&["a", "b"]]),
            1,
            vec![Edge::new(0, 0, "a", 0), Edge::new(0, 0, "b", 0)],
            BTreeSet::from([0]),
            BTreeSet::from([0]),
        );
        assert!(one_tape_two_letters.is_deterministic());

        let two_tapes_one_state = MultitapeAutomaton::new(
            alphabets(&[&["a"], &["x"]]),
            1,
            vec![Edge::new(0, 0, "a", 0), Edge::new(0, 1, "x", 0)],
            BTreeSet::from([0]),
            BTreeSet::from([0]),
        );
        assert!(!two_tapes_one_state.is_deterministic());

        let two_initial = MultitapeAutomaton::new(
            alphabets(&[&["a"]]),
            2,
            vec![],
            BTreeSet::from([0, 1]),
            BTreeSet::new(),
        );
        assert!(!two_initial.is_deterministic());
    }

    #[test]
    fn duplicate_letter_from_state_is_nondeterministic() {
        let a = MultitapeAutomaton::new(
            alphabets(&[&["a"]]),
            2,
            vec![Edge::new(0, 0, "a", 0), Edge::new(0, 0, "a", 1)],
            BTreeSet::from([0]),
            BTreeSet::from([1]),
        );
        assert!(!a.is_deterministic());
    }

    #[test]
    fn no_final_states_means_zero_runs() {
        let mut a = diamond();
        a.final_states.clear();
        let s = tuple(&[&["a"], &["b"]]);
        assert_eq!(a.count_runs(&s).unwrap(), Multiplicity::zero());
    }

    #[test]
    fn diamond_has_two_runs() {
        let a = diamond();
        let s = tuple(&[&["a"], &["b"]]);
        assert_eq!(count_runs_by_enumeration(&a, &s), Multiplicity::from(2u32));
        assert_eq!(a.count_runs(&s).unwrap(), Multiplicity::from(2u32));
    }

    #[test]
    fn unary_loop_has_one_run_per_length() {
        let a = unary_loop();
        let s = tuple(&[&["a", "a", "a"]]);
        assert_eq!(a.count_runs(&s).unwrap(), Multiplicity::from(1u32));
        assert_eq!(a.count_runs(&tuple(&[&[]])).unwrap(), Multiplicity::from(1u32));
    }

    #[test]
    fn run_counts_exceed_machine_words() {
        // 128 two-path layers, each reading "aa": 2^128 accepting runs
        let layers = 128usize;
        let mut edges = Vec::new();
        for layer in 0..layers {
            let entry = 3 * layer;
            let exit = 3 * layer + 3;
            edges.push(Edge::new(entry, 0, "a", entry + 1)); // upper midpoint
            edges.push(Edge::new(entry + 1, 0, "a", exit));
            edges.push(Edge::new(entry, 0, "a", entry + 2)); // lower midpoint
            edges.push(Edge::new(entry + 2, 0, "a", exit));
        }
        let a = MultitapeAutomaton::new(
            alphabets(&[&["a"]]),
            3 * layers + 1,
            edges,
            BTreeSet::from([0]),
            BTreeSet::from([3 * layers]),
        );
        assert!(!a.is_deterministic());
        let s = TapeTuple::new(vec![vec!["a".to_string(); 2 * layers]]);
        assert_eq!(a.count_runs(&s).unwrap(), Multiplicity::from(1u32) << 128usize);
    }

    #[test]
    fn count_runs_rejects_foreign_letters() {
        let a = unary_loop();
        let err = a.count_runs(&tuple(&[&["z"]])).unwrap_err();
        assert!(matches!(err, Error::UnknownLetter { tape: 0, .. }));
        let err = a.count_runs(&tuple(&[&["a"], &["a"]])).unwrap_err();
        assert!(matches!(err, Error::TupleArity { expected: 1, got: 2 }));
    }

    #[test]
    fn density_one_forces_every_edge() {
        let a = random_automaton(1, 1, &[1], 1.0, 7);
        assert_eq!(a.edges, vec![Edge::new(0, 0, "a", 0)]);
        assert_eq!(a.initial, BTreeSet::from([0]));
        assert_eq!(a.final_states, BTreeSet::from([0]));
    }

    #[test]
    fn generator_is_reproducible() {
        let a = random_automaton(2, 3, &[2, 2], 0.5, 1);
        let b = random_automaton(2, 3, &[2, 2], 0.5, 1);
        assert_eq!(a, b);
        assert!(a.validate().is_empty());
    }

    #[test]
    fn generated_automata_validate_across_seeds() {
        for seed in 0..25 {
            let a = random_automaton(3, 4, &[2, 1, 2], 0.4, seed);
            assert!(a.validate().is_empty(), "seed {seed}");
            assert!(!a.initial.is_empty());
            assert!(!a.final_states.is_empty());
        }
    }

    #[test]
    fn count_runs_matches_enumeration_on_random_instances() {
        let mut rng = ChaCha12Rng::seed_from_u64(99);
        for seed in 0..60u64 {
            let tapes = 1 + (seed % 3) as usize;
            let sizes = vec![2usize; tapes];
            let a = random_automaton(tapes, 3, &sizes, 0.45, seed);
            // random tuple with total length <= 6
            let mut words = vec![Vec::new(); tapes];
            for _ in 0..rng.gen_range(0..=6) {
                let tape = rng.gen_range(0..tapes);
                let letter = letter_name(rng.gen_range(0..2));
                words[tape].push(letter);
            }
            let s = TapeTuple::new(words);
            assert_eq!(
                a.count_runs(&s).unwrap(),
                count_runs_by_enumeration(&a, &s),
                "seed {seed}, tuple {s:?}"
            );
        }
    }

    #[test]
    fn count_runs_is_invariant_under_state_permutation() {
        for seed in 0..20u64 {
            let a = random_automaton(2, 4, &[2, 2], 0.5, seed);
            // rotate states by one
            let perm: Vec<usize> = (0..4).map(|q| (q + 1) % 4).collect();
            let b = permute_states(&a, &perm);
            for s in [
                tuple(&[&["a"], &[]]),
                tuple(&[&["a", "b"], &["a"]]),
                tuple(&[&[], &["b", "b"]]),
            ] {
                assert_eq!(a.count_runs(&s).unwrap(), b.count_runs(&s).unwrap());
            }
        }
    }

    #[test]
    fn deterministic_automata_count_at_most_one_run() {
        // build a partial deterministic automaton by pruning a random one
        for seed in 0..20u64 {
            let mut a = random_automaton(2, 4, &[2, 2], 0.6, seed);
            let mut tape_of = BTreeMap::new();
            let mut kept = Vec::new();
            let mut seen = BTreeSet::new();
            for e in a.edges.drain(..) {
                let tape = *tape_of.entry(e.src).or_insert(e.tape);
                if e.tape == tape && seen.insert((e.src, e.letter.clone())) {
                    kept.push(e);
                }
            }
            a.edges = kept;
            let first_initial = a.initial.iter().next().copied();
            a.initial = first_initial.into_iter().collect();
            assert!(a.is_deterministic());
            for s in [
                tuple(&[&["a"], &["b"]]),
                tuple(&[&["a", "a"], &[]]),
                tuple(&[&["b"], &["a", "b"]]),
            ] {
                let count = a.count_runs(&s).unwrap();
                assert!(count <= Multiplicity::from(1u32), "seed {seed}");
            }
        }
    }

    #[test]
    fn disjoint_union_adds_multiplicities() {
        for seed in 0..10u64 {
            let a = random_automaton(2, 3, &[2, 2], 0.5, seed);
            let b = random_automaton(2, 3, &[2, 2], 0.5, seed + 1000);
            let u = disjoint_union(&a, &b);
            for s in [
                tuple(&[&[], &[]]),
                tuple(&[&["a"], &["b"]]),
                tuple(&[&["b", "a"], &["a"]]),
            ] {
                assert_eq!(
                    u.count_runs(&s).unwrap(),
                    a.count_runs(&s).unwrap() + b.count_runs(&s).unwrap()
                );
            }
        }
    }
}
