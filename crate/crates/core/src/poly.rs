//! Univariate polynomials over a prime field, truncated at a degree cap.
//!
//! The witness extractor substitutes y^w for each edge variable and tracks
//! the resulting polynomials through the grid iteration. Every monomial it
//! can ever produce has degree at most (n-1) * 2m, so arithmetic silently
//! drops terms above the cap without losing information.

use crate::field::{CoeffRing, Fp, PrimeField};

/// Dense coefficient vector, index = degree in y. No trailing zeros.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct UniPoly {
    coeffs: Vec<Fp>,
}

impl UniPoly {
    pub fn zero() -> UniPoly {
        UniPoly { coeffs: Vec::new() }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn coeff(&self, degree: usize) -> Fp {
        self.coeffs.get(degree).copied().unwrap_or(Fp::ZERO)
    }

    /// Least degree with a non-zero coefficient, or None for the zero
    /// polynomial.
    pub fn min_degree_nonzero(&self) -> Option<usize> {
        self.coeffs.iter().position(|c| !c.is_zero())
    }

    /// Horner evaluation at a field point.
    pub fn eval(&self, field: &PrimeField, at: Fp) -> Fp {
        let mut acc = Fp::ZERO;
        for &c in self.coeffs.iter().rev() {
            acc = field.add(field.mul(acc, at), c);
        }
        acc
    }

    fn normalize(&mut self) {
        while self.coeffs.last().is_some_and(|c| c.is_zero()) {
            self.coeffs.pop();
        }
    }
}

/// Ring of polynomials truncated at degree `cap` (terms of higher degree
/// vanish from products).
#[derive(Clone, Copy, Debug)]
pub struct PolyRing {
    pub field: PrimeField,
    pub cap: usize,
}

impl PolyRing {
    pub fn new(field: PrimeField, cap: usize) -> PolyRing {
        PolyRing { field, cap }
    }

    /// c * y^degree, or zero when the degree exceeds the cap.
    pub fn monomial(&self, coeff: Fp, degree: usize) -> UniPoly {
        if coeff.is_zero() || degree > self.cap {
            return UniPoly::zero();
        }
        let mut coeffs = vec![Fp::ZERO; degree + 1];
        coeffs[degree] = coeff;
        UniPoly { coeffs }
    }

    pub fn constant(&self, coeff: Fp) -> UniPoly {
        self.monomial(coeff, 0)
    }
}

impl CoeffRing for PolyRing {
    type Elem = UniPoly;

    fn zero(&self) -> UniPoly {
        UniPoly::zero()
    }

    fn one(&self) -> UniPoly {
        self.constant(Fp::ONE)
    }

    fn is_zero(&self, a: &UniPoly) -> bool {
        a.is_zero()
    }

    fn add(&self, a: &UniPoly, b: &UniPoly) -> UniPoly {
        let mut out = a.clone();
        self.add_assign(&mut out, b);
        out
    }

    fn add_assign(&self, a: &mut UniPoly, b: &UniPoly) {
        if a.coeffs.len() < b.coeffs.len() {
            a.coeffs.resize(b.coeffs.len(), Fp::ZERO);
        }
        for (ac, bc) in a.coeffs.iter_mut().zip(b.coeffs.iter()) {
            *ac = self.field.add(*ac, *bc);
        }
        a.normalize();
    }

    fn neg(&self, a: &UniPoly) -> UniPoly {
        UniPoly {
            coeffs: a.coeffs.iter().map(|&c| self.field.neg(c)).collect(),
        }
    }

    fn mul(&self, a: &UniPoly, b: &UniPoly) -> UniPoly {
        if a.is_zero() || b.is_zero() {
            return UniPoly::zero();
        }
        let len = (a.coeffs.len() - 1 + b.coeffs.len() - 1).min(self.cap) + 1;
        let mut coeffs = vec![Fp::ZERO; len];
        // The valuation side of every product is a single monomial, so
        // skipping zero coefficients makes this a shift, not a convolution.
        for (i, &ac) in a.coeffs.iter().enumerate() {
            if ac.is_zero() {
                continue;
            }
            if i > self.cap {
                break;
            }
            for (j, &bc) in b.coeffs.iter().enumerate() {
                if i + j > self.cap {
                    break;
                }
                if bc.is_zero() {
                    continue;
                }
                coeffs[i + j] = self.field.add(coeffs[i + j], self.field.mul(ac, bc));
            }
        }
        let mut out = UniPoly { coeffs };
        out.normalize();
        out
    }
}
