//! The randomized multiplicity-equivalence decision procedure.
//!
//! Per round, every superdiagonal variable receives a uniform random field
//! element and the difference system is iterated through levels 0 .. n-1.
//! A non-zero projection at any level proves inequivalence outright, so the
//! answer has one-sided error: equivalent inputs can never be reported
//! inequivalent, while an inequivalent pair slips through one round with
//! probability at most (n-1)/p, the Schwartz-Zippel bound for the degree of
//! the polynomials being evaluated.
//!
//! One caveat needs care over a finite field: the difference polynomial has
//! integer coefficients A(s) - B(s), and a coefficient divisible by p
//! vanishes mod p. Deterministic inputs keep coefficients in {-1, 0, 1}
//! where no prime divides them. For nondeterministic inputs the run
//! multiplicities are bounded by (max out-degree * n)^(n-1); when that bound
//! reaches the modulus, extra rounds with fresh distinct random primes are
//! scheduled until their product exceeds the bound, which no single integer
//! coefficient can survive.

use num_bigint::BigUint;
use num_traits::One;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;

use crate::automaton::MultitapeAutomaton;
use crate::error::{Error, Result};
use crate::field::{choose_prime, PrimeField, DEFAULT_PRIME};
use crate::grid::Mode;
use crate::system::{build_difference_system, sample_valuation, DifferenceSystem};
use crate::witness::WitnessResult;

/// How the checker picks its field modulus.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PrimePolicy {
    /// The fixed 61-bit Mersenne prime.
    Fixed,
    /// A random verified prime of at least `bits` bits, derived from the
    /// run seed.
    Random { bits: u32 },
}

/// Knobs for [`check_equivalence`] and witness extraction. The verdict is a
/// pure function of the two automata and this configuration.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CheckConfig {
    /// Independent valuation rounds with the base prime; at least 1.
    pub rounds: usize,
    pub prime: PrimePolicy,
    pub seed: u64,
    pub mode: Mode,
    /// Attempt cap for witness extraction.
    pub witness_attempts: usize,
}

impl Default for CheckConfig {
    fn default() -> CheckConfig {
        CheckConfig {
            rounds: 2,
            prime: PrimePolicy::Fixed,
            seed: 0,
            mode: Mode::FirstRow,
            witness_attempts: 20,
        }
    }
}

impl CheckConfig {
    pub fn with_seed(seed: u64) -> CheckConfig {
        CheckConfig {
            seed,
            ..CheckConfig::default()
        }
    }
}

/// Outcome of an equivalence check.
#[derive(Clone, Debug, PartialEq)]
pub enum Verdict {
    Equivalent {
        /// Valuation rounds actually run, extra prime rounds included.
        rounds: usize,
        /// Probability that a single round misses an inequivalent pair.
        per_round_bound: f64,
    },
    Inequivalent {
        /// Smallest total length at which a projection came out non-zero.
        level: usize,
        /// Filled in by witness extraction, not by the checker.
        witness: Option<WitnessResult>,
    },
}

impl Verdict {
    pub fn is_equivalent(&self) -> bool {
        matches!(self, Verdict::Equivalent { .. })
    }
}

/// Chance that `rounds` independent valuations all miss an inequivalent
/// pair: ((n-1)/p)^rounds. Zero for n <= 1, where the polynomials are
/// constants and evaluation is exact.
pub fn false_equivalence_bound(n: usize, p: u64, rounds: usize) -> f64 {
    if n <= 1 {
        return 0.0;
    }
    ((n - 1) as f64 / p as f64).powi(rounds as i32)
}

/// Splitmix64 step; derives per-purpose seeds from the run seed.
pub(crate) fn mix_seed(seed: u64, salt: u64) -> u64 {
    let mut z = seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

const PRIME_SALT: u64 = 0x70;
const EXTRA_PRIME_SALT: u64 = 0x100;

pub(crate) fn base_prime(cfg: &CheckConfig, n: usize) -> Result<u64> {
    let p = match cfg.prime {
        PrimePolicy::Fixed => DEFAULT_PRIME,
        PrimePolicy::Random { bits } => choose_prime(bits, Some(mix_seed(cfg.seed, PRIME_SALT))),
    };
    let needed = 2 * n.saturating_sub(1) as u64;
    if p <= needed {
        return Err(Error::PrimeTooSmall { prime: p, needed });
    }
    Ok(p)
}

pub(crate) fn prime_bits(cfg: &CheckConfig) -> u32 {
    match cfg.prime {
        PrimePolicy::Fixed => 61,
        PrimePolicy::Random { bits } => bits,
    }
}

/// Upper bound on |A(s) - B(s)| over all tuples the check can see. Both
/// multiplicities are at most n * d^(n-1) runs (d the largest out-degree,
/// floored at 1 so edgeless automata keep the n factor), which
/// (max(d,1) * n)^(n-1) dominates for n >= 2; deterministic pairs have
/// coefficients in {-1, 0, 1}.
pub(crate) fn coefficient_bound(
    a: &MultitapeAutomaton,
    b: &MultitapeAutomaton,
    sys: &DifferenceSystem,
) -> BigUint {
    if a.is_deterministic() && b.is_deterministic() {
        return BigUint::one();
    }
    let n = sys.total_states();
    let d = sys.max_out_degree().max(1);
    BigUint::from((d * n) as u64).pow(n.saturating_sub(1) as u32)
}

/// Full round schedule: `cfg.rounds` rounds at the base prime, plus, when
/// the coefficient bound reaches the base prime, enough distinct fresh
/// primes that their product exceeds the bound.
pub(crate) fn round_primes(
    cfg: &CheckConfig,
    n: usize,
    bound: &BigUint,
) -> Result<Vec<u64>> {
    let base = base_prime(cfg, n)?;
    let mut primes = vec![base; cfg.rounds.max(1)];
    if *bound >= BigUint::from(base) {
        let bits = prime_bits(cfg);
        let needed = 2 * n.saturating_sub(1) as u64;
        let mut extras: Vec<u64> = Vec::new();
        let mut product = BigUint::one();
        let mut salt = 0u64;
        while product <= *bound {
            let p = choose_prime(bits, Some(mix_seed(cfg.seed, EXTRA_PRIME_SALT + salt)));
            salt += 1;
            if p == base || extras.contains(&p) {
                continue;
            }
            if p <= needed {
                return Err(Error::PrimeTooSmall { prime: p, needed });
            }
            product *= BigUint::from(p);
            extras.push(p);
        }
        primes.extend(extras);
    }
    Ok(primes)
}

pub(crate) fn round_rng(seed: u64, round: usize) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(1 + round as u64);
    rng
}

/// The primes [`check_equivalence`] will run rounds with, in order; entries
/// repeat when several rounds share the base prime.
pub fn planned_primes(
    a: &MultitapeAutomaton,
    b: &MultitapeAutomaton,
    cfg: &CheckConfig,
) -> Result<Vec<u64>> {
    let sys = build_difference_system(a, b)?;
    let n = sys.total_states();
    if n == 0 {
        return Ok(Vec::new());
    }
    let bound = coefficient_bound(a, b, &sys);
    round_primes(cfg, n, &bound)
}

/// Decides multiplicity equivalence. Levels are checked in increasing order
/// with an early exit, so the reported level is the smallest one at which
/// the sampled valuation separated the automata; across rounds the minimum
/// is kept.
pub fn check_equivalence(
    a: &MultitapeAutomaton,
    b: &MultitapeAutomaton,
    cfg: &CheckConfig,
) -> Result<Verdict> {
    let sys = build_difference_system(a, b)?;
    let n = sys.total_states();
    if n == 0 {
        // both automata are empty and accept nothing
        return Ok(Verdict::Equivalent {
            rounds: 0,
            per_round_bound: 0.0,
        });
    }
    let bound = coefficient_bound(a, b, &sys);
    let primes = round_primes(cfg, n, &bound)?;
    let per_round_bound = false_equivalence_bound(n, primes[0], 1);

    let mut first_level: Option<usize> = None;
    for (round, &p) in primes.iter().enumerate() {
        let field = PrimeField::new(p);
        let mut rng = round_rng(cfg.seed, round);
        let valuation = sample_valuation(&sys, &field, &mut rng);
        if let Some((level, _)) = sys.first_nonzero_level(&field, &valuation, cfg.mode)? {
            first_level = Some(first_level.map_or(level, |best| best.min(level)));
        }
    }

    Ok(match first_level {
        Some(level) => Verdict::Inequivalent {
            level,
            witness: None,
        },
        None => Verdict::Equivalent {
            rounds: primes.len(),
            per_round_bound,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automaton::testutil::{alphabets, diamond, permute_states, single_path, tuple};
    use crate::automaton::{random_automaton, Edge, MultitapeAutomaton};
    use crate::oracle::{brute_force_equivalence, BruteForceVerdict, DEFAULT_ENUMERATION_BUDGET};
    use std::collections::BTreeSet;

    #[test]
    fn identical_automata_are_equivalent_for_any_seed() {
        let a = diamond();
        for seed in 0..5 {
            let verdict = check_equivalence(&a, &a, &CheckConfig::with_seed(seed)).unwrap();
            assert!(verdict.is_equivalent(), "seed {seed}");
        }
    }

    #[test]
    fn cross_tape_read_orders_are_equivalent() {
        let alpha = alphabets(&[&["a"], &["x"]]);
        let first = MultitapeAutomaton::new(
            alpha.clone(),
            3,
            vec![Edge::new(0, 0, "a", 1), Edge::new(1, 1, "x", 2)],
            BTreeSet::from([0]),
            BTreeSet::from([2]),
        );
        let second = MultitapeAutomaton::new(
            alpha,
            3,
            vec![Edge::new(0, 1, "x", 1), Edge::new(1, 0, "a", 2)],
            BTreeSet::from([0]),
            BTreeSet::from([2]),
        );
        assert!(matches!(
            brute_force_equivalence(&first, &second, DEFAULT_ENUMERATION_BUDGET).unwrap(),
            BruteForceVerdict::Equivalent
        ));
        let verdict = check_equivalence(&first, &second, &CheckConfig::default()).unwrap();
        assert!(verdict.is_equivalent());
    }

    #[test]
    fn diamond_vs_single_path_is_inequivalent() {
        let verdict =
            check_equivalence(&diamond(), &single_path(), &CheckConfig::default()).unwrap();
        match verdict {
            Verdict::Inequivalent { level, witness } => {
                assert!(level <= 3);
                assert_eq!(level, 2, "the length-2 tuple (a, b) separates them");
                assert!(witness.is_none());
            }
            other => panic!("expected inequivalent, got {other:?}"),
        }
    }

    #[test]
    fn epsilon_language_vs_empty_language_differs_at_level_zero() {
        let alpha = alphabets(&[&["a"]]);
        let accepts_epsilon = MultitapeAutomaton::new(
            alpha.clone(),
            1,
            vec![],
            BTreeSet::from([0]),
            BTreeSet::from([0]),
        );
        let accepts_nothing = MultitapeAutomaton::new(
            alpha,
            1,
            vec![],
            BTreeSet::from([0]),
            BTreeSet::new(),
        );
        let verdict =
            check_equivalence(&accepts_epsilon, &accepts_nothing, &CheckConfig::default())
                .unwrap();
        assert_eq!(
            verdict,
            Verdict::Inequivalent {
                level: 0,
                witness: None
            }
        );
    }

    #[test]
    fn bound_formula_instantiations() {
        let b = false_equivalence_bound(10, DEFAULT_PRIME, 1);
        assert!((b - 9.0 / DEFAULT_PRIME as f64).abs() < 1e-30);
        assert!((3.8e-18..4.0e-18).contains(&b));
        let two = false_equivalence_bound(10, DEFAULT_PRIME, 2);
        assert!((two - b * b).abs() < 1e-40);
        assert_eq!(false_equivalence_bound(1, DEFAULT_PRIME, 3), 0.0);
    }

    #[test]
    fn verdict_is_reproducible_from_the_seed() {
        let a = random_automaton(2, 4, &[2, 2], 0.5, 3);
        let b = random_automaton(2, 4, &[2, 2], 0.5, 4);
        let cfg = CheckConfig::with_seed(99);
        assert_eq!(
            check_equivalence(&a, &b, &cfg).unwrap(),
            check_equivalence(&a, &b, &cfg).unwrap()
        );
    }

    #[test]
    fn empty_pair_is_equivalent() {
        let alpha = alphabets(&[&["a"]]);
        let empty = MultitapeAutomaton::new(alpha, 0, vec![], BTreeSet::new(), BTreeSet::new());
        assert!(check_equivalence(&empty, &empty, &CheckConfig::default())
            .unwrap()
            .is_equivalent());
    }

    #[test]
    fn small_random_prime_is_rejected_when_the_system_is_too_wide() {
        let alpha = alphabets(&[&["a"]]);
        let wide = |states| {
            MultitapeAutomaton::new(
                alpha.clone(),
                states,
                vec![],
                BTreeSet::new(),
                BTreeSet::new(),
            )
        };
        let cfg = CheckConfig {
            prime: PrimePolicy::Random { bits: 16 },
            ..CheckConfig::default()
        };
        // n = 80000 needs p > 159998 but 16-bit primes stay below 131072
        let err = check_equivalence(&wide(40_000), &wide(40_000), &cfg).unwrap_err();
        assert!(matches!(err, Error::PrimeTooSmall { .. }));
    }

    #[test]
    fn nondeterministic_pairs_with_large_coefficient_bound_get_extra_prime_rounds() {
        let a = random_automaton(1, 10, &[2], 0.6, 7);
        let b = permute_states(&a, &[3, 1, 4, 0, 9, 2, 6, 8, 5, 7]);
        assert!(!a.is_deterministic(), "dense instance should branch");
        let verdict = check_equivalence(&a, &b, &CheckConfig::default()).unwrap();
        match verdict {
            Verdict::Equivalent { rounds, .. } => {
                assert!(rounds > 2, "expected extra prime rounds, got {rounds}")
            }
            other => panic!("permuted copy must be equivalent, got {other:?}"),
        }
    }

    #[test]
    fn detected_level_never_undershoots_the_true_minimal_witness_length() {
        let mut checked = 0;
        for seed in 0..40u64 {
            let a = random_automaton(2, 3, &[2, 2], 0.4, seed);
            let b = random_automaton(2, 3, &[2, 2], 0.4, seed + 500);
            let brute = brute_force_equivalence(&a, &b, DEFAULT_ENUMERATION_BUDGET).unwrap();
            let verdict = check_equivalence(&a, &b, &CheckConfig::with_seed(seed)).unwrap();
            match (brute, verdict) {
                (
                    BruteForceVerdict::Inequivalent { witness, .. },
                    Verdict::Inequivalent { level, .. },
                ) => {
                    // the minimal witness appears exactly at the first
                    // non-zero level
                    assert_eq!(witness.total_len(), level, "seed {seed}");
                    checked += 1;
                }
                (BruteForceVerdict::Equivalent, v) => {
                    assert!(v.is_equivalent(), "one-sided error violated, seed {seed}")
                }
                (brute, verdict) => {
                    panic!("oracle disagreement at seed {seed}: {brute:?} vs {verdict:?}")
                }
            }
        }
        assert!(checked > 10, "want a healthy share of inequivalent pairs");
    }

    #[test]
    fn one_round_already_detects_every_small_inequivalent_pair() {
        let cfg = CheckConfig {
            rounds: 1,
            ..CheckConfig::default()
        };
        let mut inequivalent = 0;
        for seed in 0..60u64 {
            let a = random_automaton(3, 3, &[2, 2, 2], 0.45, seed);
            let b = random_automaton(3, 3, &[2, 2, 2], 0.45, seed + 7000);
            let brute = brute_force_equivalence(&a, &b, DEFAULT_ENUMERATION_BUDGET).unwrap();
            let verdict = check_equivalence(&a, &b, &CheckConfig { seed, ..cfg }).unwrap();
            assert_eq!(
                brute.is_equivalent(),
                verdict.is_equivalent(),
                "seed {seed}"
            );
            if !brute.is_equivalent() {
                inequivalent += 1;
            }
        }
        assert!(inequivalent > 20);
    }

    #[test]
    fn full_matrix_mode_agrees_with_first_row_mode() {
        for seed in 0..15u64 {
            let a = random_automaton(2, 2, &[2, 2], 0.5, seed);
            let b = random_automaton(2, 2, &[2, 2], 0.5, seed + 77);
            let fast = check_equivalence(&a, &b, &CheckConfig::with_seed(seed)).unwrap();
            let full = check_equivalence(
                &a,
                &b,
                &CheckConfig {
                    mode: Mode::FullMatrix,
                    seed,
                    ..CheckConfig::default()
                },
            )
            .unwrap();
            match (&fast, &full) {
                (
                    Verdict::Inequivalent { level: l1, .. },
                    Verdict::Inequivalent { level: l2, .. },
                ) => assert_eq!(l1, l2, "seed {seed}"),
                (a, b) => assert_eq!(a.is_equivalent(), b.is_equivalent(), "seed {seed}"),
            }
        }
    }

    #[test]
    fn soundness_on_permuted_copies() {
        for seed in 0..50u64 {
            let a = random_automaton(2, 4, &[2, 2], 0.5, seed);
            let perm = [2, 0, 3, 1];
            let b = permute_states(&a, &perm);
            let verdict = check_equivalence(&a, &b, &CheckConfig::with_seed(seed)).unwrap();
            assert!(verdict.is_equivalent(), "seed {seed}");
            // sanity: they really do accept the same multiplicities
            let s = tuple(&[&["a"], &["b"]]);
            assert_eq!(a.count_runs(&s).unwrap(), b.count_runs(&s).unwrap());
        }
    }
}
