//! Exact arithmetic in F_{p^d} for odd p.
//!
//! A [`FieldCtx`] owns the prime p, the extension degree d and a monic
//! irreducible modulus of degree d over F_p; elements are little-endian
//! coefficient vectors of length d. The quadratic character, the norm down to
//! the prime subfield, and a deterministic total ordering of elements all
//! live here.

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use smallvec::{smallvec, SmallVec};
use std::cmp::Ordering;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FieldError {
    #[error("inversion of zero")]
    InversionOfZero,
    #[error("element does not belong to this field")]
    ElementFromWrongField,
    #[error("characteristic must be an odd prime, got {0}")]
    BadCharacteristic(u64),
    #[error("extension degree must be at least 1")]
    BadDegree,
    #[error("modulus must be monic of degree d with coefficients in [0, p)")]
    BadModulus,
    #[error("modulus is reducible over F_p")]
    ReducibleModulus,
}

/// An element of F_{p^d}: exactly d coefficients in [0, p), little-endian
/// (`coeffs[k]` multiplies θ^k).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FieldElem {
    coeffs: SmallVec<[u64; 4]>,
}

impl FieldElem {
    pub fn coeffs(&self) -> &[u64] {
        &self.coeffs
    }
}

/// Total order: compare (a_{d-1}, ..., a_1, a_0) lexicographically, the
/// most significant coefficient first.
impl Ord for FieldElem {
    fn cmp(&self, other: &Self) -> Ordering {
        self.coeffs
            .len()
            .cmp(&other.coeffs.len())
            .then_with(|| self.coeffs.iter().rev().cmp(other.coeffs.iter().rev()))
    }
}

impl PartialOrd for FieldElem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Canonical text encoding: coefficients little-endian joined by colons,
/// e.g. `3:0:1` for 3 + θ².
impl fmt::Display for FieldElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for c in &self.coeffs {
            if !first {
                write!(f, ":")?;
            }
            write!(f, "{c}")?;
            first = false;
        }
        Ok(())
    }
}

/// The finite field F_{p^d}, p an odd prime.
///
/// Immutable after construction; all operations are pure functions of their
/// inputs, so a context may be shared freely across threads.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FieldCtx {
    p: u64,
    d: usize,
    modulus: Vec<u64>,
    q: BigUint,
    chi_exp: BigUint,
    norm_exp: BigUint,
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n % 2 == 0 {
        return n == 2;
    }
    let mut k = 3u64;
    while k.checked_mul(k).map_or(false, |kk| kk <= n) {
        if n % k == 0 {
            return false;
        }
        k += 2;
    }
    true
}

impl FieldCtx {
    /// The prime field F_p (degree 1, modulus X).
    pub fn prime(p: u64) -> Result<Self, FieldError> {
        Self::new(p, 1, vec![0, 1])
    }

    /// Build F_{p^d} with an explicit monic modulus (degree-d coefficient
    /// vector, little-endian, leading coefficient 1). The modulus is
    /// verified irreducible over F_p.
    pub fn new(p: u64, d: usize, modulus: Vec<u64>) -> Result<Self, FieldError> {
        if p < 3 || p % 2 == 0 || !is_prime(p) {
            return Err(FieldError::BadCharacteristic(p));
        }
        if d == 0 {
            return Err(FieldError::BadDegree);
        }
        if modulus.len() != d + 1 || modulus[d] != 1 || modulus.iter().any(|&c| c >= p) {
            return Err(FieldError::BadModulus);
        }
        if d > 1 {
            let fp = FieldCtx::prime(p)?;
            let dense = crate::quad::DensePoly::from_coeffs(
                modulus.iter().map(|&c| fp.embed(c)).collect(),
            );
            if !crate::quad::poly_is_irreducible(&fp, &dense) {
                return Err(FieldError::ReducibleModulus);
            }
        }
        let q = BigUint::from(p).pow(d as u32);
        let chi_exp = (&q - 1u32) / 2u32;
        let norm_exp = (&q - 1u32) / (p - 1);
        Ok(FieldCtx {
            p,
            d,
            modulus,
            q,
            chi_exp,
            norm_exp,
        })
    }

    /// F_{p^d} with the deterministic default modulus from [`find_modulus`].
    pub fn with_default_modulus(p: u64, d: usize) -> Result<Self, FieldError> {
        let modulus = find_modulus(p, d)?;
        Self::new(p, d, modulus)
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn modulus(&self) -> &[u64] {
        &self.modulus
    }

    pub fn q(&self) -> &BigUint {
        &self.q
    }

    /// q as a machine word, when it fits.
    pub fn q_u64(&self) -> Option<u64> {
        self.q.to_u64()
    }

    /// Canonical field header, e.g. `p=5 d=1` or `p=3 d=2 modulus=1:0:1`.
    pub fn header(&self) -> String {
        if self.d == 1 {
            format!("p={} d=1", self.p)
        } else {
            let m = self
                .modulus
                .iter()
                .map(|c| c.to_string())
                .collect::<Vec<_>>()
                .join(":");
            format!("p={} d={} modulus={}", self.p, self.d, m)
        }
    }

    pub fn zero(&self) -> FieldElem {
        FieldElem {
            coeffs: smallvec![0; self.d],
        }
    }

    pub fn one(&self) -> FieldElem {
        self.embed(1)
    }

    /// Embed an integer into the prime subfield.
    pub fn embed(&self, n: u64) -> FieldElem {
        let mut coeffs: SmallVec<[u64; 4]> = smallvec![0; self.d];
        coeffs[0] = n % self.p;
        FieldElem { coeffs }
    }

    /// The residue class θ of X (zero when d = 1, since the default degree-1
    /// modulus is X).
    pub fn theta(&self) -> FieldElem {
        let mut coeffs: SmallVec<[u64; 4]> = smallvec![0; self.d];
        if self.d > 1 {
            coeffs[1] = 1;
        }
        FieldElem { coeffs }
    }

    /// Validated element from a coefficient vector.
    pub fn elem(&self, coeffs: &[u64]) -> Result<FieldElem, FieldError> {
        if coeffs.len() != self.d || coeffs.iter().any(|&c| c >= self.p) {
            return Err(FieldError::ElementFromWrongField);
        }
        Ok(FieldElem {
            coeffs: SmallVec::from_slice(coeffs),
        })
    }

    /// Cheap validity check for elements arriving from another context.
    pub fn check(&self, x: &FieldElem) -> Result<(), FieldError> {
        if x.coeffs.len() != self.d || x.coeffs.iter().any(|&c| c >= self.p) {
            return Err(FieldError::ElementFromWrongField);
        }
        Ok(())
    }

    pub fn is_zero(&self, x: &FieldElem) -> bool {
        x.coeffs.iter().all(|&c| c == 0)
    }

    #[inline]
    fn addp(&self, a: u64, b: u64) -> u64 {
        let s = a + b;
        if s >= self.p {
            s - self.p
        } else {
            s
        }
    }

    #[inline]
    fn subp(&self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.p - b
        }
    }

    #[inline]
    fn mulp(&self, a: u64, b: u64) -> u64 {
        ((a as u128 * b as u128) % self.p as u128) as u64
    }

    pub fn add(&self, x: &FieldElem, y: &FieldElem) -> FieldElem {
        debug_assert_eq!(x.coeffs.len(), self.d);
        debug_assert_eq!(y.coeffs.len(), self.d);
        let coeffs = x
            .coeffs
            .iter()
            .zip(&y.coeffs)
            .map(|(&a, &b)| self.addp(a, b))
            .collect();
        FieldElem { coeffs }
    }

    pub fn sub(&self, x: &FieldElem, y: &FieldElem) -> FieldElem {
        debug_assert_eq!(x.coeffs.len(), self.d);
        debug_assert_eq!(y.coeffs.len(), self.d);
        let coeffs = x
            .coeffs
            .iter()
            .zip(&y.coeffs)
            .map(|(&a, &b)| self.subp(a, b))
            .collect();
        FieldElem { coeffs }
    }

    pub fn neg(&self, x: &FieldElem) -> FieldElem {
        let coeffs = x
            .coeffs
            .iter()
            .map(|&a| if a == 0 { 0 } else { self.p - a })
            .collect();
        FieldElem { coeffs }
    }

    pub fn mul(&self, x: &FieldElem, y: &FieldElem) -> FieldElem {
        debug_assert_eq!(x.coeffs.len(), self.d);
        debug_assert_eq!(y.coeffs.len(), self.d);
        let d = self.d;
        if d == 1 {
            return FieldElem {
                coeffs: smallvec![self.mulp(x.coeffs[0], y.coeffs[0])],
            };
        }
        let mut prod: SmallVec<[u64; 8]> = smallvec![0; 2 * d - 1];
        for (i, &a) in x.coeffs.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &b) in y.coeffs.iter().enumerate() {
                prod[i + j] = self.addp(prod[i + j], self.mulp(a, b));
            }
        }
        // reduce via X^d = -(modulus below the leading term)
        for k in (d..2 * d - 1).rev() {
            let t = prod[k];
            if t == 0 {
                continue;
            }
            prod[k] = 0;
            for j in 0..d {
                if self.modulus[j] != 0 {
                    prod[k - d + j] = self.subp(prod[k - d + j], self.mulp(t, self.modulus[j]));
                }
            }
        }
        FieldElem {
            coeffs: SmallVec::from_slice(&prod[..d]),
        }
    }

    /// Square-and-multiply with reduction at every step; the exponent is an
    /// arbitrary-precision non-negative integer.
    pub fn pow(&self, x: &FieldElem, e: &BigUint) -> FieldElem {
        if e.is_zero() {
            return self.one();
        }
        let mut r = self.one();
        for i in (0..e.bits()).rev() {
            r = self.mul(&r, &r);
            if e.bit(i) {
                r = self.mul(&r, x);
            }
        }
        r
    }

    pub fn pow_u64(&self, x: &FieldElem, e: u64) -> FieldElem {
        self.pow(x, &BigUint::from(e))
    }

    pub fn inv(&self, x: &FieldElem) -> Result<FieldElem, FieldError> {
        if self.is_zero(x) {
            return Err(FieldError::InversionOfZero);
        }
        let e = &self.q - 2u32;
        Ok(self.pow(x, &e))
    }

    /// Quadratic character: 0 for x = 0, +1 for nonzero squares, -1 for
    /// non-squares (x^{(q-1)/2} mapped to {0, ±1}).
    pub fn chi(&self, x: &FieldElem) -> i8 {
        if self.is_zero(x) {
            return 0;
        }
        let r = self.pow(x, &self.chi_exp);
        if r == self.one() {
            1
        } else {
            debug_assert_eq!(r, self.neg(&self.one()));
            -1
        }
    }

    /// Norm down to the prime subfield: x^{(q-1)/(p-1)}, returned embedded
    /// in this context (all coefficients above index 0 are zero).
    pub fn norm(&self, x: &FieldElem) -> FieldElem {
        let n = self.pow(x, &self.norm_exp);
        debug_assert!(n.coeffs.iter().skip(1).all(|&c| c == 0) || self.is_zero(x));
        n
    }

    pub fn element_cmp(&self, x: &FieldElem, y: &FieldElem) -> Ordering {
        x.cmp(y)
    }

    /// The element at position `idx` of the canonical (element_cmp) order,
    /// i.e. base-p digits with coeffs[d-1] most significant.
    pub fn elem_from_index(&self, idx: u64) -> FieldElem {
        let mut coeffs: SmallVec<[u64; 4]> = smallvec![0; self.d];
        let mut rest = idx;
        for c in coeffs.iter_mut() {
            *c = rest % self.p;
            rest /= self.p;
        }
        debug_assert_eq!(rest, 0);
        FieldElem { coeffs }
    }

    /// All q elements in increasing element_cmp order. Panics if q does not
    /// fit in a machine word; enumeration is a desk-scale operation.
    pub fn elements(&self) -> impl Iterator<Item = FieldElem> + '_ {
        let q = self
            .q_u64()
            .expect("field too large for exhaustive enumeration");
        (0..q).map(move |i| self.elem_from_index(i))
    }

    /// Parse the canonical colon-separated encoding.
    pub fn parse_elem(&self, s: &str) -> Result<FieldElem, FieldError> {
        let coeffs: Vec<u64> = s
            .split(':')
            .map(|t| t.trim().parse::<u64>())
            .collect::<Result<_, _>>()
            .map_err(|_| FieldError::ElementFromWrongField)?;
        self.elem(&coeffs)
    }
}

/// The lexicographically smallest (most significant coefficient first) monic
/// irreducible polynomial of degree d over F_p, as a little-endian
/// coefficient vector of length d+1. Deterministic across runs.
pub fn find_modulus(p: u64, d: usize) -> Result<Vec<u64>, FieldError> {
    if p < 3 || p % 2 == 0 || !is_prime(p) {
        return Err(FieldError::BadCharacteristic(p));
    }
    if d == 0 {
        return Err(FieldError::BadDegree);
    }
    if d == 1 {
        return Ok(vec![0, 1]);
    }
    let fp = FieldCtx::prime(p)?;
    let total = (p as u128).pow(d as u32);
    for idx in 0..total {
        let mut coeffs = vec![0u64; d + 1];
        let mut rest = idx;
        for c in coeffs.iter_mut().take(d) {
            *c = (rest % p as u128) as u64;
            rest /= p as u128;
        }
        coeffs[d] = 1;
        let dense =
            crate::quad::DensePoly::from_coeffs(coeffs.iter().map(|&c| fp.embed(c)).collect());
        if crate::quad::poly_is_irreducible(&fp, &dense) {
            return Ok(coeffs);
        }
    }
    unreachable!("irreducible polynomials of every degree exist over F_p")
}
