//! Ground truth at desk scale: exhaustive short-witness search and a #SAT
//! encoding used as a correctness fixture.
//!
//! Inequivalent automata are guaranteed to differ on a tuple of total
//! length at most n - 1, n the total state count (Harju and Karhumaki), so
//! enumerating every tuple up to that length decides equivalence exactly.
//! The search refuses to start when the tuple count exceeds a budget.

use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_traits::{One, Zero};

use crate::automaton::{Alphabets, MultitapeAutomaton, Multiplicity, TapeTuple};
use crate::error::{Error, Result};
use crate::system::build_difference_system;

/// Default cap on the number of tuples the exhaustive search will visit.
pub const DEFAULT_ENUMERATION_BUDGET: u64 = 1_000_000;

/// Exact verdict from exhaustive enumeration.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BruteForceVerdict {
    Equivalent,
    Inequivalent {
        /// First differing tuple in length-then-lexicographic order, which
        /// makes it a minimum-length witness.
        witness: TapeTuple,
        a_count: Multiplicity,
        b_count: Multiplicity,
    },
}

impl BruteForceVerdict {
    pub fn is_equivalent(&self) -> bool {
        matches!(self, BruteForceVerdict::Equivalent)
    }
}

/// Number of tuples of total length at most `max_len`.
pub fn count_tuples(alphabets: &Alphabets, max_len: usize) -> BigUint {
    // per-tape convolution over total length
    let mut ways = vec![BigUint::zero(); max_len + 1];
    ways[0] = BigUint::one();
    for tape in 0..alphabets.tapes() {
        let size = BigUint::from(alphabets.letters(tape).len());
        let mut next = vec![BigUint::zero(); max_len + 1];
        for l in 0..=max_len {
            let mut power = BigUint::one();
            for j in 0..=l {
                if !ways[l - j].is_zero() {
                    next[l] += &ways[l - j] * &power;
                }
                power *= &size;
            }
        }
        ways = next;
    }
    ways.into_iter().sum()
}

/// Streams every tuple of total length at most `max_len` exactly once,
/// ordered by total length, then by the per-tape length vector with earlier
/// tapes longest first, then letter by letter in alphabet order.
pub fn enumerate_tuples(alphabets: &Alphabets, max_len: usize) -> TupleEnumerator {
    let letters: Vec<Vec<String>> = (0..alphabets.tapes())
        .map(|t| alphabets.letters(t).to_vec())
        .collect();
    let mut enumerator = TupleEnumerator {
        letters,
        max_len,
        state: None,
    };
    enumerator.start_level(0);
    enumerator
}

pub struct TupleEnumerator {
    letters: Vec<Vec<String>>,
    max_len: usize,
    // (level, per-tape lengths, per-tape letter indices)
    state: Option<(usize, Vec<usize>, Vec<Vec<usize>>)>,
}

impl TupleEnumerator {
    fn comp_is_realizable(&self, comp: &[usize]) -> bool {
        comp.iter()
            .enumerate()
            .all(|(tape, &l)| l == 0 || !self.letters[tape].is_empty())
    }

    /// Successor of a composition in descending lexicographic order.
    fn next_comp(comp: &mut [usize]) -> bool {
        let k = comp.len();
        let tail = comp[k - 1];
        let Some(j) = (0..k - 1).rev().find(|&j| comp[j] > 0) else {
            return false;
        };
        comp[j] -= 1;
        comp[j + 1] = tail + 1;
        for slot in comp.iter_mut().skip(j + 2) {
            *slot = 0;
        }
        true
    }

    fn start_level(&mut self, level: usize) {
        let k = self.letters.len();
        let mut current = level;
        while current <= self.max_len {
            let mut comp = vec![0usize; k];
            comp[0] = current;
            loop {
                if self.comp_is_realizable(&comp) {
                    let digits = comp.iter().map(|&l| vec![0usize; l]).collect();
                    self.state = Some((current, comp, digits));
                    return;
                }
                if !Self::next_comp(&mut comp) {
                    break;
                }
            }
            current += 1;
        }
        self.state = None;
    }

    fn advance(&mut self) {
        let Some((level, mut comp, mut digits)) = self.state.take() else {
            return;
        };
        // odometer over letter indices, rightmost position of rightmost tape
        for tape in (0..digits.len()).rev() {
            for pos in (0..digits[tape].len()).rev() {
                if digits[tape][pos] + 1 < self.letters[tape].len() {
                    digits[tape][pos] += 1;
                    for d in digits[tape][pos + 1..].iter_mut() {
                        *d = 0;
                    }
                    for word in digits.iter_mut().skip(tape + 1) {
                        for d in word.iter_mut() {
                            *d = 0;
                        }
                    }
                    self.state = Some((level, comp, digits));
                    return;
                }
            }
        }
        // next realizable composition at this level, else next level
        loop {
            if !Self::next_comp(&mut comp) {
                self.start_level(level + 1);
                return;
            }
            if self.comp_is_realizable(&comp) {
                let digits = comp.iter().map(|&l| vec![0usize; l]).collect();
                self.state = Some((level, comp, digits));
                return;
            }
        }
    }
}

impl Iterator for TupleEnumerator {
    type Item = TapeTuple;

    fn next(&mut self) -> Option<TapeTuple> {
        let (_, _, digits) = self.state.as_ref()?;
        let words = digits
            .iter()
            .enumerate()
            .map(|(tape, ds)| {
                ds.iter()
                    .map(|&d| self.letters[tape][d].clone())
                    .collect()
            })
            .collect();
        self.advance();
        Some(TapeTuple::new(words))
    }
}

/// Decides equivalence exactly by comparing multiplicities on every tuple
/// of total length at most n - 1, in enumeration order, and reports the
/// first difference. Refuses when the tuple count exceeds `budget`.
///
/// Rather than re-counting runs per tuple, one breadth-first sweep carries,
/// for each reachable tuple label, the vector of run counts per state of
/// the combined system; a level is compared before the next one is built.
pub fn brute_force_equivalence(
    a: &MultitapeAutomaton,
    b: &MultitapeAutomaton,
    budget: u64,
) -> Result<BruteForceVerdict> {
    let sys = build_difference_system(a, b)?;
    let n = sys.total_states();
    let max_len = n.saturating_sub(1);
    let required = count_tuples(sys.alphabets(), max_len);
    if required > BigUint::from(budget) {
        return Err(Error::EnumerationBudget {
            required: required.to_string(),
            budget,
        });
    }

    let alphabets = sys.alphabets();
    let tapes = alphabets.tapes();
    type Label = Vec<Vec<usize>>; // letter ids per tape
    let mut frontier: BTreeMap<Label, Vec<BigUint>> = BTreeMap::new();
    let init: Vec<BigUint> = sys
        .initial_indicator()
        .iter()
        .map(|&on| if on { BigUint::one() } else { BigUint::zero() })
        .collect();
    frontier.insert(vec![Vec::new(); tapes], init);

    for level in 0..=max_len {
        // enumeration order: per-tape lengths, earlier tapes longest first,
        // then letters in alphabet order
        let mut ordered: Vec<(&Label, &Vec<BigUint>)> = frontier.iter().collect();
        ordered.sort_by(|(s, _), (t, _)| {
            let s_lens: Vec<usize> = s.iter().map(|w| w.len()).collect();
            let t_lens: Vec<usize> = t.iter().map(|w| w.len()).collect();
            t_lens.cmp(&s_lens).then_with(|| s.cmp(t))
        });
        for (label, counts) in ordered {
            let mut a_count = BigUint::zero();
            let mut b_count = BigUint::zero();
            for (q, count) in counts.iter().enumerate() {
                match sys.final_sign()[q] {
                    1 => a_count += count,
                    -1 => b_count += count,
                    _ => {}
                }
            }
            if a_count != b_count {
                let words = label
                    .iter()
                    .enumerate()
                    .map(|(tape, ids)| {
                        ids.iter()
                            .map(|&id| alphabets.letters(tape)[id].clone())
                            .collect()
                    })
                    .collect();
                return Ok(BruteForceVerdict::Inequivalent {
                    witness: TapeTuple::new(words),
                    a_count,
                    b_count,
                });
            }
        }
        if level == max_len {
            break;
        }
        let mut next: BTreeMap<Label, Vec<BigUint>> = BTreeMap::new();
        for (label, counts) in &frontier {
            for (q, count) in counts.iter().enumerate() {
                if count.is_zero() {
                    continue;
                }
                for &(tape, letter, dst) in sys.edges_from(q) {
                    let mut extended = label.clone();
                    extended[tape].push(letter);
                    let slot = next
                        .entry(extended)
                        .or_insert_with(|| vec![BigUint::zero(); n]);
                    slot[dst] += count;
                }
            }
        }
        frontier = next;
    }
    Ok(BruteForceVerdict::Equivalent)
}

/// A CNF formula over variables 1..=variables; a literal is +v or -v.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CnfFormula {
    pub variables: usize,
    pub clauses: Vec<Vec<i32>>,
}

impl CnfFormula {
    pub fn new(variables: usize, clauses: Vec<Vec<i32>>) -> Result<CnfFormula> {
        let f = CnfFormula { variables, clauses };
        f.validate()?;
        Ok(f)
    }

    pub fn validate(&self) -> Result<()> {
        for (i, clause) in self.clauses.iter().enumerate() {
            if clause.is_empty() {
                return Err(Error::BadFormula(format!("clause {i} is empty")));
            }
            for &lit in clause {
                if lit == 0 || lit.unsigned_abs() as usize > self.variables {
                    return Err(Error::BadFormula(format!(
                        "clause {i} has out-of-range literal {lit}"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn satisfied_by(&self, assignment: &[bool]) -> bool {
        self.clauses.iter().all(|clause| {
            clause.iter().any(|&lit| {
                let value = assignment[lit.unsigned_abs() as usize - 1];
                if lit > 0 {
                    value
                } else {
                    !value
                }
            })
        })
    }

    /// Number of satisfying assignments by direct enumeration; refuses
    /// beyond 24 variables.
    pub fn count_satisfying(&self) -> Result<BigUint> {
        if self.variables > 24 {
            return Err(Error::TooLarge(format!(
                "#SAT enumeration over {} variables",
                self.variables
            )));
        }
        let mut count = 0u64;
        let mut assignment = vec![false; self.variables];
        for bits in 0u64..(1 << self.variables) {
            for (v, slot) in assignment.iter_mut().enumerate() {
                *slot = bits >> v & 1 == 1;
            }
            if self.satisfied_by(&assignment) {
                count += 1;
            }
        }
        Ok(BigUint::from(count))
    }

    /// Occurrence count per variable over all clause literal positions.
    pub fn occurrences(&self) -> Vec<usize> {
        let mut occ = vec![0usize; self.variables];
        for clause in &self.clauses {
            for &lit in clause {
                occ[lit.unsigned_abs() as usize - 1] += 1;
            }
        }
        occ
    }

    /// DIMACS cnf parser; ignores comment lines and the problem line's
    /// clause count.
    pub fn parse_dimacs(text: &str) -> Result<CnfFormula> {
        let mut variables = None;
        let mut clauses = Vec::new();
        let mut current: Vec<i32> = Vec::new();
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('c') || line.starts_with('%') {
                continue;
            }
            if let Some(rest) = line.strip_prefix('p') {
                let fields: Vec<&str> = rest.split_whitespace().collect();
                if fields.len() < 2 || fields[0] != "cnf" {
                    return Err(Error::BadFormula(format!("bad problem line: {line}")));
                }
                variables = Some(fields[1].parse::<usize>().map_err(|_| {
                    Error::BadFormula(format!("bad variable count: {}", fields[1]))
                })?);
                continue;
            }
            for token in line.split_whitespace() {
                let lit: i32 = token
                    .parse()
                    .map_err(|_| Error::BadFormula(format!("bad literal: {token}")))?;
                if lit == 0 {
                    if !current.is_empty() {
                        clauses.push(std::mem::take(&mut current));
                    }
                } else {
                    current.push(lit);
                }
            }
        }
        if !current.is_empty() {
            clauses.push(current);
        }
        let variables = variables.ok_or_else(|| {
            Error::BadFormula("missing problem line (p cnf V C)".to_string())
        })?;
        CnfFormula::new(variables, clauses)
    }
}

/// Encodes a CNF formula as a run-counting instance: a v-tape automaton
/// over {0, 1} and the input tuple ((01)^n, ..., (01)^n) whose multiplicity
/// equals the number of satisfying assignments.
///
/// Schedule: per variable, an opening phase commits a truth value by
/// reading (01)^(n-occ) for true or 0(10)^(n-1-occ) for false; then clauses
/// are evaluated left to right, each literal occurrence reading one block
/// from its variable's tape, 01 for a true guess and 10 for a false one,
/// with a trailing 1 folded into the variable's last scheduled occurrence
/// (single-letter edges leave no room for a separate final subset pass).
/// A block choice inconsistent with the committed value derails the tape
/// label off (01)^n, so exactly the consistent, clause-satisfying guess
/// sequences survive as accepting runs.
pub fn encode_sharp_sat(
    f: &CnfFormula,
    occurrence_bound: Option<usize>,
) -> Result<(MultitapeAutomaton, TapeTuple)> {
    f.validate()?;
    let v = f.variables;
    if v == 0 {
        return Err(Error::BadFormula(
            "the encoding needs at least one variable".to_string(),
        ));
    }
    let occ = f.occurrences();
    let max_occ = occ.iter().copied().max().unwrap_or(0);
    let n = occurrence_bound.unwrap_or(max_occ + 1);
    for (variable, &count) in occ.iter().enumerate() {
        if count >= n {
            return Err(Error::OccurrenceBound {
                variable: variable + 1,
                occurrences: count,
                bound: n,
            });
        }
    }

    let alphabets = Alphabets::new(vec![vec!["0".to_string(), "1".to_string()]; v])
        .expect("binary alphabets are well formed");

    let mut builder = ChainBuilder::default();
    let start = builder.fresh();
    let mut cursor = start;

    // opening phase: commit each variable's truth value
    for (variable, &count) in occ.iter().enumerate() {
        let merge = builder.fresh();
        let mut true_reads = Vec::new();
        for _ in 0..n - count {
            true_reads.push((variable, "0"));
            true_reads.push((variable, "1"));
        }
        let mut false_reads = vec![(variable, "0")];
        for _ in 0..n - 1 - count {
            false_reads.push((variable, "1"));
            false_reads.push((variable, "0"));
        }
        if count == 0 {
            false_reads.push((variable, "1"));
        }
        builder.path(cursor, merge, &true_reads);
        builder.path(cursor, merge, &false_reads);
        cursor = merge;
    }

    // evaluation phase: clauses left to right, occurrences in clause order
    let mut scheduled = vec![0usize; v];
    for clause in &f.clauses {
        let mut unsat = Some(cursor);
        let mut sat: Option<usize> = None;
        for &lit in clause {
            let variable = lit.unsigned_abs() as usize - 1;
            scheduled[variable] += 1;
            let is_last = scheduled[variable] == occ[variable];

            let true_block = [(variable, "0"), (variable, "1")];
            let mut false_block = vec![(variable, "1"), (variable, "0")];
            if is_last {
                false_block.push((variable, "1"));
            }

            let next_unsat = builder.fresh();
            let next_sat = builder.fresh();
            if let Some(from) = unsat {
                // a guess matching the literal satisfies the clause
                let (true_to, false_to) = if lit > 0 {
                    (next_sat, next_unsat)
                } else {
                    (next_unsat, next_sat)
                };
                builder.path(from, true_to, &true_block);
                builder.path(from, false_to, &false_block);
            }
            if let Some(from) = sat {
                builder.path(from, next_sat, &true_block);
                builder.path(from, next_sat, &false_block);
            }
            unsat = Some(next_unsat);
            sat = Some(next_sat);
        }
        // runs that end the clause unsatisfied are dead ends
        cursor = sat.expect("clauses are non-empty");
    }

    let automaton = MultitapeAutomaton::new(
        alphabets,
        builder.states,
        builder.edges,
        [start].into_iter().collect(),
        [cursor].into_iter().collect(),
    );
    debug_assert!(automaton.is_valid());

    let word: Vec<String> = std::iter::repeat_n(["0".to_string(), "1".to_string()], n)
        .flatten()
        .collect();
    let tuple = TapeTuple::new(vec![word; v]);
    Ok((automaton, tuple))
}

#[derive(Default)]
struct ChainBuilder {
    states: usize,
    edges: Vec<crate::automaton::Edge>,
}

impl ChainBuilder {
    fn fresh(&mut self) -> usize {
        self.states += 1;
        self.states - 1
    }

    /// Chain of reads from `from` to `to` through fresh intermediates, so
    /// parallel paths never share states and runs stay distinct.
    fn path(&mut self, from: usize, to: usize, reads: &[(usize, &str)]) {
        assert!(!reads.is_empty(), "edges consume exactly one letter");
        let mut cursor = from;
        for (i, &(tape, letter)) in reads.iter().enumerate() {
            let next = if i + 1 == reads.len() { to } else { self.fresh() };
            self.edges
                .push(crate::automaton::Edge::new(cursor, tape, letter, next));
            cursor = next;
        }
    }
}
