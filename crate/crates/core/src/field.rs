//! Prime-field scalars and the coefficient-ring abstraction shared by the
//! scalar and polynomial valuation paths.
//!
//! The default modulus is the Mersenne prime 2^61 - 1, which reduces
//! products with shifts and adds instead of a 128-bit division. Any other
//! word-sized prime works through the generic path; the checker can ask for
//! a fresh random prime when it needs one.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;

use crate::error::{Error, Result};

/// Default modulus: the Mersenne prime 2^61 - 1 = 2305843009213693951.
pub const DEFAULT_PRIME: u64 = (1u64 << 61) - 1;

/// A residue in [0, p). Arithmetic goes through [`PrimeField`], which
/// carries the modulus; mixing residues from different fields is a caller
/// bug that the type system does not police.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Debug)]
pub struct Fp(u64);

impl Fp {
    pub const ZERO: Fp = Fp(0);
    pub const ONE: Fp = Fp(1);

    #[inline]
    pub fn value(self) -> u64 {
        self.0
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

impl std::fmt::Display for Fp {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Arithmetic context for Z/pZ with a prime p < 2^63.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PrimeField {
    p: u64,
}

impl PrimeField {
    /// Panics if `p` is not prime; moduli come from [`choose_prime`] or the
    /// default constant, so a composite here is a programming error.
    pub fn new(p: u64) -> PrimeField {
        assert!(p < (1 << 63), "modulus must fit 63 bits");
        assert!(is_prime_u64(p), "modulus {p} is not prime");
        PrimeField { p }
    }

    pub fn with_default_prime() -> PrimeField {
        PrimeField { p: DEFAULT_PRIME }
    }

    #[inline]
    pub fn modulus(&self) -> u64 {
        self.p
    }

    /// Reduce an arbitrary u64 into the field.
    #[inline]
    pub fn elem(&self, v: u64) -> Fp {
        Fp(v % self.p)
    }

    #[inline]
    pub fn add(&self, a: Fp, b: Fp) -> Fp {
        let s = a.0 + b.0;
        Fp(if s >= self.p { s - self.p } else { s })
    }

    #[inline]
    pub fn sub(&self, a: Fp, b: Fp) -> Fp {
        if a.0 >= b.0 {
            Fp(a.0 - b.0)
        } else {
            Fp(self.p - b.0 + a.0)
        }
    }

    #[inline]
    pub fn neg(&self, a: Fp) -> Fp {
        if a.0 == 0 {
            a
        } else {
            Fp(self.p - a.0)
        }
    }

    #[inline]
    pub fn mul(&self, a: Fp, b: Fp) -> Fp {
        let wide = a.0 as u128 * b.0 as u128;
        if self.p == DEFAULT_PRIME {
            Fp(reduce_m61(wide))
        } else {
            Fp((wide % self.p as u128) as u64)
        }
    }

    pub fn pow(&self, base: Fp, mut exp: u64) -> Fp {
        let mut base = base;
        let mut acc = Fp::ONE;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            exp >>= 1;
        }
        acc
    }

    /// Multiplicative inverse via Fermat: x^(p-2).
    pub fn inv(&self, a: Fp) -> Result<Fp> {
        if a.0 == 0 {
            return Err(Error::ZeroInverse);
        }
        Ok(self.pow(a, self.p - 2))
    }

    /// Uniform element of [0, p).
    pub fn random<R: Rng + ?Sized>(&self, rng: &mut R) -> Fp {
        Fp(rng.gen_range(0..self.p))
    }
}

/// Fold a 128-bit product modulo 2^61 - 1 using 2^61 = 1 (mod p).
#[inline]
fn reduce_m61(x: u128) -> u64 {
    const P: u64 = DEFAULT_PRIME;
    let folded = (x & P as u128) as u64 + ((x >> 61) & P as u128) as u64 + (x >> 122) as u64;
    // folded < 2^63, one more fold brings it under 2^62
    let folded = (folded & P) + (folded >> 61);
    if folded >= P {
        folded - P
    } else {
        folded
    }
}

/// Deterministic Miller-Rabin; the base set below is exact for all u64.
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for &p in &[2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == p {
            return true;
        }
        if n.is_multiple_of(p) {
            return false;
        }
    }
    let mut d = n - 1;
    let mut r = 0u32;
    while d.is_multiple_of(2) {
        d /= 2;
        r += 1;
    }
    'witness: for &a in &[2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = powmod(a % n, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..r {
            x = mulmod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

#[inline]
fn mulmod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn powmod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1u64;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mulmod(acc, base, m);
        }
        base = mulmod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Pick a verified prime with at least `min_bits` bits.
///
/// Without a seed this returns the fixed default 2^61 - 1. With a seed it
/// samples odd candidates in [2^min_bits, 2^(min_bits+1)) until one passes
/// the deterministic primality test, so the result is reproducible.
pub fn choose_prime(min_bits: u32, seed: Option<u64>) -> u64 {
    assert!(
        (16..=62).contains(&min_bits),
        "min_bits must be in 16..=62, got {min_bits}"
    );
    match seed {
        None => {
            assert!(min_bits <= 61, "the default prime has 61 bits");
            DEFAULT_PRIME
        }
        Some(seed) => {
            let mut rng = ChaCha12Rng::seed_from_u64(seed);
            loop {
                let candidate = rng.gen_range((1u64 << min_bits)..(1u64 << (min_bits + 1))) | 1;
                if is_prime_u64(candidate) {
                    return candidate;
                }
            }
        }
    }
}

/// Coefficient ring used by the grid-vector iteration. The checker runs the
/// same step/project code over field scalars (random evaluation) and over
/// truncated univariate polynomials (weight-isolated symbolic run); this
/// trait is the seam between the two.
pub trait CoeffRing {
    type Elem: Clone + PartialEq + std::fmt::Debug;

    fn zero(&self) -> Self::Elem;
    fn one(&self) -> Self::Elem;
    fn is_zero(&self, a: &Self::Elem) -> bool;
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn add_assign(&self, a: &mut Self::Elem, b: &Self::Elem);
    fn neg(&self, a: &Self::Elem) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
}

impl CoeffRing for PrimeField {
    type Elem = Fp;

    fn zero(&self) -> Fp {
        Fp::ZERO
    }

    fn one(&self) -> Fp {
        Fp::ONE
    }

    fn is_zero(&self, a: &Fp) -> bool {
        a.is_zero()
    }

    fn add(&self, a: &Fp, b: &Fp) -> Fp {
        PrimeField::add(self, *a, *b)
    }

    fn add_assign(&self, a: &mut Fp, b: &Fp) {
        *a = PrimeField::add(self, *a, *b);
    }

    fn neg(&self, a: &Fp) -> Fp {
        PrimeField::neg(self, *a)
    }

    fn mul(&self, a: &Fp, b: &Fp) -> Fp {
        PrimeField::mul(self, *a, *b)
    }
}
