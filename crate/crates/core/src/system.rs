//! The difference system of two automata and the iterated valuation step.
//!
//! Two automata over the same alphabets combine into one weighted system:
//! the block-diagonal union of their edge sets, an initial indicator that is
//! 1 on the initial states of both, and a final sign that is +1 on the first
//! automaton's final states and -1 on the second's. The weight this system
//! assigns to total length l is the formal sum of (A(s) - B(s)) times s over
//! all tuples s of that length, so the automata are multiplicity equivalent
//! exactly when the weight vanishes for l = 0 .. n-1, n the total state
//! count.
//!
//! Each letter occurrence at superdiagonal position j is a separate variable
//! (tape, letter, position). A valuation assigns every variable either a
//! random field element (the randomized zero test) or the monomial y^w (the
//! weight-isolating symbolic run), and the iteration pushes a sparse grid
//! vector through one edge relief per level. Monomials of degree below n
//! land at the column whose coordinates are the per-tape lengths plus one,
//! with the product of their variable values as coefficient, which is what
//! makes a non-zero column decodable back into a concrete tuple.

use std::collections::BTreeMap;
use std::collections::BTreeSet;

use rand::Rng;

use crate::automaton::{Alphabets, MultitapeAutomaton, TapeTuple};
use crate::error::{Error, Result};
use crate::field::{CoeffRing, Fp, PrimeField};
use crate::grid::{GridDims, GridVector, Mode, Projected};
use crate::poly::{PolyRing, UniPoly};

/// One superdiagonal indeterminate: a letter on a tape at a 1-based
/// position in [1, n-1].
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VariableId {
    pub tape: usize,
    pub letter: usize,
    pub position: usize,
}

/// Random weights in [1, 2m] for the m variables of a system; with
/// probability at least 1/2 they isolate a unique minimum-weight monomial
/// in any multilinear polynomial over those variables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightAssignment {
    weights: BTreeMap<VariableId, u64>,
    range_max: u64,
}

impl WeightAssignment {
    /// Uniform weights for every variable of the system, in canonical
    /// variable order so a seeded generator reproduces the assignment.
    pub fn sample<R: Rng + ?Sized>(sys: &DifferenceSystem, rng: &mut R) -> WeightAssignment {
        let m = sys.variable_count() as u64;
        let range_max = (2 * m).max(1);
        let weights = sys
            .variables()
            .map(|v| (v, rng.gen_range(1..=range_max)))
            .collect();
        WeightAssignment { weights, range_max }
    }

    pub fn from_map(weights: BTreeMap<VariableId, u64>, range_max: u64) -> WeightAssignment {
        WeightAssignment { weights, range_max }
    }

    pub fn get(&self, var: VariableId) -> Option<u64> {
        self.weights.get(&var).copied()
    }

    pub fn range_max(&self) -> u64 {
        self.range_max
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

/// Assignment of one coefficient per variable; the value substituted for
/// the superdiagonal entry at (tape, letter, position).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Valuation<C> {
    dim: usize,
    // [tape][letter][position - 1]
    values: Vec<Vec<Vec<C>>>,
}

impl<C: Clone> Valuation<C> {
    pub fn new(dim: usize, values: Vec<Vec<Vec<C>>>) -> Valuation<C> {
        for tape in &values {
            for letter in tape {
                assert_eq!(letter.len() + 1, dim.max(1), "one value per position");
            }
        }
        Valuation { dim, values }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, tape: usize, letter: usize, position: usize) -> &C {
        &self.values[tape][letter][position - 1]
    }

    /// Total number of assigned values: (n-1) * sum of alphabet sizes.
    pub fn assignment_len(&self) -> usize {
        self.values
            .iter()
            .flat_map(|t| t.iter().map(|l| l.len()))
            .sum()
    }

    /// Copy with a single variable replaced, used by the membership probe.
    pub fn with_replaced(&self, var: VariableId, value: C) -> Valuation<C> {
        let mut out = self.clone();
        out.values[var.tape][var.letter][var.position - 1] = value;
        out
    }
}

/// Combined weighted system for a pair of automata over shared alphabets.
#[derive(Clone, Debug)]
pub struct DifferenceSystem {
    alphabets: Alphabets,
    left_states: usize,
    right_states: usize,
    initial_indicator: Vec<bool>,
    final_sign: Vec<i8>,
    // (tape, letter id, dst) grouped by source state
    edges_from: Vec<Vec<(usize, usize, usize)>>,
    edge_count: usize,
}

/// Builds the block-diagonal difference system; the second automaton's
/// states are shifted past the first's. Fails when either automaton is
/// invalid or the alphabets differ, naming the first differing tape.
pub fn build_difference_system(
    a: &MultitapeAutomaton,
    b: &MultitapeAutomaton,
) -> Result<DifferenceSystem> {
    a.require_valid("first automaton")?;
    b.require_valid("second automaton")?;
    let tapes = a.alphabets.tapes().max(b.alphabets.tapes());
    for tape in 0..tapes {
        let left = (tape < a.alphabets.tapes()).then(|| a.alphabets.letters(tape));
        let right = (tape < b.alphabets.tapes()).then(|| b.alphabets.letters(tape));
        if left != right {
            return Err(Error::AlphabetMismatch {
                tape,
                detail: format!("{left:?} vs {right:?}"),
            });
        }
    }

    let n = a.state_count + b.state_count;
    let mut initial_indicator = vec![false; n];
    let mut final_sign = vec![0i8; n];
    for &q in &a.initial {
        initial_indicator[q] = true;
    }
    for &q in &a.final_states {
        final_sign[q] = 1;
    }
    let shift = a.state_count;
    for &q in &b.initial {
        initial_indicator[q + shift] = true;
    }
    for &q in &b.final_states {
        final_sign[q + shift] = -1;
    }

    let mut edges_from: Vec<Vec<(usize, usize, usize)>> = vec![Vec::new(); n];
    let mut edge_count = 0;
    for (auto, offset) in [(a, 0), (b, shift)] {
        for e in &auto.edges {
            let letter = auto
                .alphabets
                .letter_index(e.tape, &e.letter)
                .expect("validated");
            edges_from[e.src + offset].push((e.tape, letter, e.dst + offset));
            edge_count += 1;
        }
    }

    Ok(DifferenceSystem {
        alphabets: a.alphabets.clone(),
        left_states: a.state_count,
        right_states: b.state_count,
        initial_indicator,
        final_sign,
        edges_from,
        edge_count,
    })
}

impl DifferenceSystem {
    pub fn alphabets(&self) -> &Alphabets {
        &self.alphabets
    }

    /// Total state count; also the superdiagonal dimension and the number
    /// of levels checked.
    pub fn total_states(&self) -> usize {
        self.left_states + self.right_states
    }

    pub fn left_states(&self) -> usize {
        self.left_states
    }

    pub fn initial_indicator(&self) -> &[bool] {
        &self.initial_indicator
    }

    pub fn final_sign(&self) -> &[i8] {
        &self.final_sign
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    /// Interned edges leaving a state, as (tape, letter id, destination).
    pub fn edges_from(&self, state: usize) -> &[(usize, usize, usize)] {
        &self.edges_from[state]
    }

    /// Largest out-degree of any state in either block.
    pub fn max_out_degree(&self) -> usize {
        self.edges_from.iter().map(|e| e.len()).max().unwrap_or(0)
    }

    /// Number of superdiagonal variables: (n-1) * sum of alphabet sizes.
    pub fn variable_count(&self) -> usize {
        self.total_states().saturating_sub(1) * self.alphabets.total_letters()
    }

    /// All variables in canonical (tape, letter, position) order.
    pub fn variables(&self) -> impl Iterator<Item = VariableId> + '_ {
        let n = self.total_states();
        (0..self.alphabets.tapes()).flat_map(move |tape| {
            (0..self.alphabets.letters(tape).len()).flat_map(move |letter| {
                (1..n).map(move |position| VariableId {
                    tape,
                    letter,
                    position,
                })
            })
        })
    }

    pub fn grid_dims(&self, mode: Mode) -> Result<GridDims> {
        GridDims::new(
            self.total_states(),
            self.alphabets.tapes(),
            self.total_states(),
            mode,
        )
    }

    /// The vector representing the initial indicator before any step: every
    /// initial state carries a 1 at grid point (1,...,1). In full-matrix
    /// mode the identity matrix is seeded instead: a 1 at every diagonal
    /// (row, row) pair.
    pub fn initial_vector<R: CoeffRing>(
        &self,
        ring: &R,
        mode: Mode,
    ) -> Result<GridVector<R::Elem>> {
        let dims = self.grid_dims(mode)?;
        let mut v = GridVector::zero(dims.clone());
        for (q, &active) in self.initial_indicator.iter().enumerate() {
            if !active {
                continue;
            }
            for row in 0..dims.rows() {
                v.set_raw(dims.encode(q, row, row), ring.one());
            }
        }
        Ok(v)
    }

    /// One multiplication by the substituted transition matrix: every edge
    /// (q, tape, letter, q') moves mass from state q to q' while advancing
    /// the tape's grid coordinate, scaled by the valuation entry for the
    /// position it departed from.
    pub fn step<R: CoeffRing>(
        &self,
        ring: &R,
        v: &GridVector<R::Elem>,
        valuation: &Valuation<R::Elem>,
    ) -> GridVector<R::Elem> {
        let dims = v.dims().clone();
        let mut out = GridVector::zero(dims.clone());
        for (&key, value) in v.iter() {
            let (state, row, col) = dims.decode(key);
            for &(tape, letter, dst) in &self.edges_from[state] {
                if let Some((next_col, position)) = dims.bump_col(col, tape) {
                    let scaled = ring.mul(valuation.get(tape, letter, position), value);
                    out.add_into(ring, dims.encode(dst, row, next_col), scaled);
                }
            }
        }
        out
    }

    /// Contract the state dimension with the final sign vector, leaving a
    /// sparse matrix over (row, column); entries that cancel are dropped.
    pub fn project<R: CoeffRing>(
        &self,
        ring: &R,
        v: &GridVector<R::Elem>,
    ) -> Projected<R::Elem> {
        let dims = v.dims().clone();
        let mut entries: BTreeMap<u64, R::Elem> = BTreeMap::new();
        for (&key, value) in v.iter() {
            let (state, row, col) = dims.decode(key);
            let signed = match self.final_sign[state] {
                0 => continue,
                1 => value.clone(),
                _ => ring.neg(value),
            };
            let slot = row * dims.cols() + col;
            match entries.entry(slot) {
                std::collections::btree_map::Entry::Vacant(e) => {
                    e.insert(signed);
                }
                std::collections::btree_map::Entry::Occupied(mut e) => {
                    ring.add_assign(e.get_mut(), &signed);
                    if ring.is_zero(e.get()) {
                        e.remove();
                    }
                }
            }
        }
        Projected::new(dims, entries)
    }

    /// Runs levels 0 .. n-1 in order and returns the first level whose
    /// projection is non-zero, with that projection; None when every level
    /// projects to zero.
    pub fn first_nonzero_level<R: CoeffRing>(
        &self,
        ring: &R,
        valuation: &Valuation<R::Elem>,
        mode: Mode,
    ) -> Result<Option<(usize, Projected<R::Elem>)>> {
        let n = self.total_states();
        let mut v = self.initial_vector(ring, mode)?;
        for level in 0..n {
            let projected = self.project(ring, &v);
            if !projected.is_zero() {
                return Ok(Some((level, projected)));
            }
            if level + 1 < n {
                v = self.step(ring, &v, valuation);
            }
        }
        Ok(None)
    }

    /// Projection after exactly `level` steps, zero or not.
    pub fn project_at_level<R: CoeffRing>(
        &self,
        ring: &R,
        valuation: &Valuation<R::Elem>,
        mode: Mode,
        level: usize,
    ) -> Result<Projected<R::Elem>> {
        let mut v = self.initial_vector(ring, mode)?;
        for _ in 0..level {
            v = self.step(ring, &v, valuation);
        }
        Ok(self.project(ring, &v))
    }
}

/// Fresh uniform field values for every variable; reproducible from the
/// generator's seed because variables are visited in canonical order.
pub fn sample_valuation<R: Rng + ?Sized>(
    sys: &DifferenceSystem,
    field: &PrimeField,
    rng: &mut R,
) -> Valuation<Fp> {
    let n = sys.total_states();
    let values = (0..sys.alphabets().tapes())
        .map(|tape| {
            (0..sys.alphabets().letters(tape).len())
                .map(|_| (1..n).map(|_| field.random(rng)).collect())
                .collect()
        })
        .collect();
    Valuation::new(n, values)
}

/// The symbolic valuation: variable v becomes the monomial y^w(v). Requires
/// a total weight assignment within [1, 2m] and a degree cap of at least
/// (n-1) * 2m, which no reachable monomial exceeds.
pub fn symbolic_valuation(
    sys: &DifferenceSystem,
    weights: &WeightAssignment,
    ring: &PolyRing,
) -> Result<Valuation<UniPoly>> {
    let n = sys.total_states();
    let m = sys.variable_count() as u64;
    let needed_cap = n.saturating_sub(1) * 2 * m as usize;
    if ring.cap < needed_cap {
        return Err(Error::BadWeights(format!(
            "degree cap {} below required {}",
            ring.cap, needed_cap
        )));
    }
    let mut values: Vec<Vec<Vec<UniPoly>>> = Vec::new();
    for tape in 0..sys.alphabets().tapes() {
        let mut per_letter = Vec::new();
        for letter in 0..sys.alphabets().letters(tape).len() {
            let mut per_position = Vec::new();
            for position in 1..n {
                let var = VariableId {
                    tape,
                    letter,
                    position,
                };
                let w = weights.get(var).ok_or_else(|| {
                    Error::BadWeights(format!("missing weight for {var:?}"))
                })?;
                if w == 0 || w > 2 * m.max(1) {
                    return Err(Error::BadWeights(format!(
                        "weight {w} for {var:?} outside [1, {}]",
                        2 * m.max(1)
                    )));
                }
                per_position.push(ring.monomial(Fp::ONE, w as usize));
            }
            per_letter.push(per_position);
        }
        values.push(per_letter);
    }
    Ok(Valuation::new(n, values))
}

/// Reads a tuple back off a set of variables: per tape, the positions must
/// form a contiguous run 1..len with exactly one letter each, and the word
/// is those letters in position order. This is the inverse of the column
/// law that sends a tuple with per-tape lengths l_i to column (l_i + 1).
pub fn decode_monomial(
    vars: &BTreeSet<VariableId>,
    alphabets: &Alphabets,
    dim: usize,
) -> Result<TapeTuple> {
    let mut per_tape: Vec<BTreeMap<usize, usize>> = vec![BTreeMap::new(); alphabets.tapes()];
    for var in vars {
        if var.tape >= alphabets.tapes() {
            return Err(Error::NotAMonomial(format!(
                "variable tape {} out of range",
                var.tape
            )));
        }
        if var.position == 0 || var.position >= dim.max(1) {
            return Err(Error::NotAMonomial(format!(
                "position {} outside [1, {}]",
                var.position,
                dim.saturating_sub(1)
            )));
        }
        if per_tape[var.tape].insert(var.position, var.letter).is_some() {
            return Err(Error::NotAMonomial(format!(
                "tape {} has two letters at position {}",
                var.tape, var.position
            )));
        }
    }
    let mut words = Vec::with_capacity(alphabets.tapes());
    for (tape, positions) in per_tape.iter().enumerate() {
        let mut word = Vec::with_capacity(positions.len());
        for (expected, (&position, &letter)) in positions.iter().enumerate() {
            if position != expected + 1 {
                return Err(Error::NotAMonomial(format!(
                    "tape {tape} is missing position {}",
                    expected + 1
                )));
            }
            word.push(alphabets.letters(tape)[letter].clone());
        }
        words.push(word);
    }
    Ok(TapeTuple::new(words))
}
