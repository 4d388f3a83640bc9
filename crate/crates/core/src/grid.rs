//! Sparse vectors over the tensor grid, and the superdiagonal letter action.
//!
//! The checker substitutes every letter with an n x n matrix that is zero
//! except for fresh values along the superdiagonal, one matrix factor per
//! tape. The full substituted transition matrix would have n * n^k rows, so
//! it is never materialized; instead a vector indexed by (state, grid point)
//! is pushed through the Kronecker factor structure by index arithmetic.
//! Grid coordinates are 1-based positions in [1, n]; a letter on tape i
//! moves coordinate i from j to j+1 and annihilates entries at j = n.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::field::CoeffRing;
use crate::system::Valuation;

/// Zero-test scope of the level iteration.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    /// Track only the first row of the substituted matrix. Complete, because
    /// every monomial of degree below n appears in the first row with its
    /// own column and variable signature; work drops by a factor of n^k.
    FirstRow,
    /// Track all n^k rows; cross-validation for small inputs.
    FullMatrix,
}

/// Index layout for vectors over (state, row grid point, column grid point).
/// In first-row mode the row space collapses to the single point (1,...,1).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GridDims {
    dim: usize,
    tapes: usize,
    states: usize,
    rows: u64,
    cols: u64,
    strides: Vec<u64>,
}

impl GridDims {
    pub fn new(dim: usize, tapes: usize, states: usize, mode: Mode) -> Result<GridDims> {
        assert!(dim >= 1 && tapes >= 1);
        let mut cols: u64 = 1;
        let mut strides = vec![0u64; tapes];
        for tape in (0..tapes).rev() {
            strides[tape] = cols;
            cols = cols
                .checked_mul(dim as u64)
                .ok_or_else(|| Error::TooLarge("grid index space".into()))?;
        }
        let rows = match mode {
            Mode::FirstRow => 1,
            Mode::FullMatrix => cols,
        };
        rows.checked_mul(cols)
            .and_then(|rc| rc.checked_mul(states.max(1) as u64))
            .ok_or_else(|| Error::TooLarge("grid index space".into()))?;
        Ok(GridDims {
            dim,
            tapes,
            states,
            rows,
            cols,
            strides,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn tapes(&self) -> usize {
        self.tapes
    }

    pub fn states(&self) -> usize {
        self.states
    }

    pub fn rows(&self) -> u64 {
        self.rows
    }

    pub fn cols(&self) -> u64 {
        self.cols
    }

    #[inline]
    pub(crate) fn encode(&self, state: usize, row: u64, col: u64) -> u64 {
        (state as u64 * self.rows + row) * self.cols + col
    }

    #[inline]
    pub(crate) fn decode(&self, key: u64) -> (usize, u64, u64) {
        let col = key % self.cols;
        let rest = key / self.cols;
        ((rest / self.rows) as usize, rest % self.rows, col)
    }

    /// 1-based coordinates of a flat column index, most significant tape
    /// first; flat order equals lexicographic order on the coordinates.
    pub fn col_digits(&self, col: u64) -> Vec<usize> {
        (0..self.tapes)
            .map(|tape| ((col / self.strides[tape]) % self.dim as u64) as usize + 1)
            .collect()
    }

    pub fn col_from_digits(&self, digits: &[usize]) -> u64 {
        assert_eq!(digits.len(), self.tapes);
        digits
            .iter()
            .zip(&self.strides)
            .map(|(&j, &s)| {
                assert!((1..=self.dim).contains(&j));
                (j as u64 - 1) * s
            })
            .sum()
    }

    /// Advance coordinate `tape` by one. Returns the new flat index and the
    /// 1-based position the step departed from, or None at the boundary
    /// j = dim where the superdiagonal action annihilates.
    #[inline]
    pub(crate) fn bump_col(&self, col: u64, tape: usize) -> Option<(u64, usize)> {
        let j = ((col / self.strides[tape]) % self.dim as u64) as usize + 1;
        if j == self.dim {
            None
        } else {
            Some((col + self.strides[tape], j))
        }
    }
}

/// Sparse vector mapping (state, row, column) to a coefficient. Absent
/// entries are zero; operations drop entries that cancel to zero.
#[derive(Clone, Debug)]
pub struct GridVector<C> {
    dims: GridDims,
    entries: BTreeMap<u64, C>,
}

impl<C: Clone + PartialEq> GridVector<C> {
    pub fn zero(dims: GridDims) -> GridVector<C> {
        GridVector {
            dims,
            entries: BTreeMap::new(),
        }
    }

    pub fn dims(&self) -> &GridDims {
        &self.dims
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entry_count(&self) -> usize {
        self.entries.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&u64, &C)> {
        self.entries.iter()
    }

    /// Coefficient at (state, row, column digits); None means zero.
    pub fn get(&self, state: usize, row: u64, col_digits: &[usize]) -> Option<&C> {
        let col = self.dims.col_from_digits(col_digits);
        self.entries.get(&self.dims.encode(state, row, col))
    }

    pub(crate) fn set_raw(&mut self, key: u64, value: C) {
        self.entries.insert(key, value);
    }

    /// Overwrite the coefficient at (state, row, column digits).
    pub fn set(&mut self, state: usize, row: u64, col_digits: &[usize], value: C) {
        let col = self.dims.col_from_digits(col_digits);
        self.entries.insert(self.dims.encode(state, row, col), value);
    }

    pub(crate) fn add_into<R: CoeffRing<Elem = C>>(&mut self, ring: &R, key: u64, value: C) {
        if ring.is_zero(&value) {
            return;
        }
        match self.entries.entry(key) {
            std::collections::btree_map::Entry::Vacant(slot) => {
                slot.insert(value);
            }
            std::collections::btree_map::Entry::Occupied(mut slot) => {
                ring.add_assign(slot.get_mut(), &value);
                if ring.is_zero(slot.get()) {
                    slot.remove();
                }
            }
        }
    }

    /// Pointwise sum.
    pub fn add<R: CoeffRing<Elem = C>>(&self, ring: &R, other: &GridVector<C>) -> GridVector<C> {
        assert_eq!(self.dims, other.dims);
        let mut out = self.clone();
        for (&key, value) in &other.entries {
            out.add_into(ring, key, value.clone());
        }
        out
    }

    /// Pointwise scalar multiple.
    pub fn scale<R: CoeffRing<Elem = C>>(&self, ring: &R, factor: &C) -> GridVector<C> {
        let mut out = GridVector::zero(self.dims.clone());
        for (&key, value) in &self.entries {
            out.add_into(ring, key, ring.mul(factor, value));
        }
        out
    }

    /// Right action of the single-letter superdiagonal matrix on tape
    /// `tape`: every entry with column coordinate j < n on that tape moves
    /// to j+1, scaled by the valuation entry for (tape, letter, j); entries
    /// at j = n vanish. States and rows are untouched; edge routing between
    /// states is the caller's job.
    pub fn apply_letter<R: CoeffRing<Elem = C>>(
        &self,
        ring: &R,
        valuation: &Valuation<C>,
        tape: usize,
        letter: usize,
    ) -> Result<GridVector<C>> {
        if tape >= self.dims.tapes {
            return Err(Error::TapeOutOfRange {
                tape,
                tapes: self.dims.tapes,
            });
        }
        let mut out = GridVector::zero(self.dims.clone());
        for (&key, value) in &self.entries {
            let (state, row, col) = self.dims.decode(key);
            if let Some((next_col, position)) = self.dims.bump_col(col, tape) {
                let scaled = ring.mul(valuation.get(tape, letter, position), value);
                out.add_into(ring, self.dims.encode(state, row, next_col), scaled);
            }
        }
        Ok(out)
    }
}

/// Result of contracting the state dimension away: a sparse (row, column)
/// matrix, a plain column vector in first-row mode.
#[derive(Clone, Debug)]
pub struct Projected<C> {
    dims: GridDims,
    entries: BTreeMap<u64, C>,
}

impl<C: Clone + PartialEq> Projected<C> {
    pub(crate) fn new(dims: GridDims, entries: BTreeMap<u64, C>) -> Projected<C> {
        Projected { dims, entries }
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entry_count(&self) -> usize {
        self.entries.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&u64, &C)> {
        self.entries.iter()
    }

    /// Entry with the smallest (row, column) key, which in first-row mode is
    /// the lexicographically smallest non-zero column.
    pub fn min_nonzero(&self) -> Option<(u64, &C)> {
        self.entries.iter().next().map(|(&k, v)| (k, v))
    }

    /// 1-based column coordinates for a key returned by [`min_nonzero`].
    pub fn col_digits(&self, key: u64) -> Vec<usize> {
        self.dims.col_digits(key % self.dims.cols())
    }

    pub fn get_col(&self, col_digits: &[usize]) -> Option<&C> {
        self.entries.get(&self.dims.col_from_digits(col_digits))
    }

    pub fn get(&self, row: u64, col_digits: &[usize]) -> Option<&C> {
        let col = self.dims.col_from_digits(col_digits);
        self.entries.get(&(row * self.dims.cols() + col))
    }
}
