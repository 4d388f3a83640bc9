//! Counterexample extraction via weight isolation.
//!
//! Once automata are known (or suspected) to be inequivalent, a concrete
//! distinguishing tuple is recovered with the Mulmuley-Vazirani-Vazirani
//! isolation trick. Each of the m superdiagonal variables gets a uniform
//! weight in [1, 2m] and the level iteration runs symbolically with
//! variable v replaced by the monomial y^w(v). Grid entries are then
//! truncated univariate polynomials, and the lowest-degree term of the
//! first non-zero projection corresponds to a minimum-weight monomial,
//! unique with probability at least 1/2.
//!
//! Membership of a variable in that monomial is probed by re-running the
//! same iteration with the variable zeroed out: the target coefficient
//! vanishes exactly when the variable occurs in the (unique) minimum-weight
//! monomial. The decoded tuple is then verified with exact run counts; any
//! failure, from a non-unique minimum or a coefficient collapsing mod p,
//! resamples weights and retries. Randomness only ever affects running
//! time, never the validity of a returned witness.

use std::collections::BTreeSet;

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;

use crate::automaton::{MultitapeAutomaton, Multiplicity, TapeTuple};
use crate::equivalence::{base_prime, coefficient_bound, mix_seed, prime_bits, CheckConfig};
use crate::error::{Error, Result};
use crate::field::{choose_prime, Fp, PrimeField};
use crate::grid::Mode;
use crate::poly::{PolyRing, UniPoly};
use crate::system::{
    build_difference_system, decode_monomial, symbolic_valuation, DifferenceSystem, Valuation,
    VariableId, WeightAssignment,
};

/// A verified distinguishing tuple: exact run counts differ, and the total
/// length is at most n - 1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WitnessResult {
    pub tuple: TapeTuple,
    pub a_count: Multiplicity,
    pub b_count: Multiplicity,
    /// Weight samplings consumed, including the successful one.
    pub attempts: usize,
}

/// A located non-zero entry of a symbolic run: the smallest level, the
/// lexicographically smallest non-zero column there, and the minimum
/// y-degree of its polynomial. Membership probes run against this target.
pub struct IsolationContext<'a> {
    sys: &'a DifferenceSystem,
    ring: PolyRing,
    valuation: Valuation<UniPoly>,
    pub level: usize,
    /// 1-based column coordinates; tape i contributes positions below
    /// column[i].
    pub column: Vec<usize>,
    pub target_degree: usize,
}

impl<'a> IsolationContext<'a> {
    /// Runs the symbolic iteration for one weight sampling and locates the
    /// first non-zero projection; None when every level projects to zero
    /// (equivalent inputs, or an unlucky weight collision).
    pub fn find(
        sys: &'a DifferenceSystem,
        weights: &WeightAssignment,
        ring: PolyRing,
    ) -> Result<Option<IsolationContext<'a>>> {
        let valuation = symbolic_valuation(sys, weights, &ring)?;
        let Some((level, projected)) = sys.first_nonzero_level(&ring, &valuation, Mode::FirstRow)?
        else {
            return Ok(None);
        };
        let (key, poly) = projected.min_nonzero().expect("projection is non-zero");
        let column = projected.col_digits(key);
        let target_degree = poly.min_degree_nonzero().expect("entry is non-zero");
        Ok(Some(IsolationContext {
            sys,
            ring,
            valuation,
            level,
            column,
            target_degree,
        }))
    }

    /// Variables that can occur in monomials at this column: tape i only
    /// contributes positions 1 .. column[i] - 1.
    pub fn is_candidate(&self, var: VariableId) -> bool {
        var.tape < self.column.len() && var.position < self.column[var.tape]
    }

    /// True when zeroing the variable kills the target coefficient, which
    /// identifies the variables of the minimum-weight monomial whenever that
    /// monomial is unique. A wrong composition from a non-unique minimum is
    /// caught downstream by decode and exact verification.
    pub fn membership_test(&self, var: VariableId) -> Result<bool> {
        if !self.is_candidate(var) {
            return Ok(false);
        }
        let zeroed = self.valuation.with_replaced(var, UniPoly::zero());
        let projected =
            self.sys
                .project_at_level(&self.ring, &zeroed, Mode::FirstRow, self.level)?;
        let coefficient = projected
            .get_col(&self.column)
            .map(|g| g.coeff(self.target_degree))
            .unwrap_or(Fp::ZERO);
        Ok(coefficient.is_zero())
    }

    /// All variables passing the membership test, in canonical order.
    pub fn monomial_variables(&self) -> Result<BTreeSet<VariableId>> {
        let mut vars = BTreeSet::new();
        for var in self.sys.variables() {
            if self.membership_test(var)? {
                vars.insert(var);
            }
        }
        Ok(vars)
    }
}

const WITNESS_STREAM_BASE: u64 = 0x1000;
const WITNESS_PRIME_SALT: u64 = 0x2000;

/// Recovers a verified distinguishing tuple for an inequivalent pair.
///
/// Attempts are repeated up to `cfg.witness_attempts` times; each samples
/// fresh weights (and a fresh prime when integer coefficients could reach
/// the base modulus), isolates a monomial, decodes it, and verifies the
/// resulting tuple with exact run counts. Equivalent inputs land in
/// [`Error::NoDistinguishingLevel`].
pub fn extract_counterexample(
    a: &MultitapeAutomaton,
    b: &MultitapeAutomaton,
    cfg: &CheckConfig,
) -> Result<WitnessResult> {
    let sys = build_difference_system(a, b)?;
    let n = sys.total_states();
    if n == 0 {
        return Err(Error::NoDistinguishingLevel);
    }
    let base = base_prime(cfg, n)?;
    let bound = coefficient_bound(a, b, &sys);
    let fixed_prime_is_safe = bound < num_bigint::BigUint::from(base);
    let m = sys.variable_count();
    let degree_cap = n.saturating_sub(1) * 2 * m;
    let needed = 2 * n.saturating_sub(1) as u64;

    let attempts_cap = cfg.witness_attempts.max(1);
    let mut found_level: Option<usize> = None;
    for attempt in 1..=attempts_cap {
        let p = if fixed_prime_is_safe {
            base
        } else {
            let p = choose_prime(
                prime_bits(cfg),
                Some(mix_seed(cfg.seed, WITNESS_PRIME_SALT + attempt as u64)),
            );
            if p <= needed {
                return Err(Error::PrimeTooSmall { prime: p, needed });
            }
            p
        };
        let ring = PolyRing::new(PrimeField::new(p), degree_cap);
        let mut rng = ChaCha12Rng::seed_from_u64(cfg.seed);
        rng.set_stream(WITNESS_STREAM_BASE + attempt as u64);
        let weights = WeightAssignment::sample(&sys, &mut rng);

        let Some(ctx) = IsolationContext::find(&sys, &weights, ring)? else {
            continue;
        };
        found_level = Some(found_level.map_or(ctx.level, |best| best.min(ctx.level)));

        let vars = ctx.monomial_variables()?;
        let Ok(tuple) = decode_monomial(&vars, sys.alphabets(), n) else {
            continue; // non-unique minimum this round, resample
        };
        // the column coordinates are the per-tape lengths plus one
        let expected_lengths: Vec<usize> = ctx.column.iter().map(|&c| c - 1).collect();
        if tuple.per_tape_lengths() != expected_lengths {
            continue;
        }
        debug_assert_eq!(tuple.total_len(), ctx.level);

        let a_count = a.count_runs(&tuple)?;
        let b_count = b.count_runs(&tuple)?;
        if a_count != b_count {
            return Ok(WitnessResult {
                tuple,
                a_count,
                b_count,
                attempts: attempt,
            });
        }
    }

    Err(match found_level {
        Some(level) => Error::WitnessAttemptsExhausted {
            level,
            attempts: attempts_cap,
        },
        None => Error::NoDistinguishingLevel,
    })
}
