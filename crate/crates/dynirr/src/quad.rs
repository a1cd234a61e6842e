//! Monic quadratics f_{b,c}(X) = (X-b)^2 + c, formal composition, and
//! irreducibility tests for dense polynomials over F_q.

use crate::field::{FieldCtx, FieldElem};
use num_bigint::BigUint;
use num_traits::Zero;
use std::collections::HashSet;
use thiserror::Error;

/// Default cap on composition-chain length (degree 2^12 = 4096).
pub const DEFAULT_CHAIN_CAP: usize = 12;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum QuadError {
    #[error("composition chain of length {0} exceeds the cap {1}")]
    ChainTooLong(usize, usize),
    #[error("composition chain must be non-empty")]
    EmptyChain,
}

/// f_{b,c}(X) = (X - b)^2 + c.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MonicQuad {
    pub b: FieldElem,
    pub c: FieldElem,
}

/// Dense polynomial over F_q: little-endian coefficients, no trailing zeros
/// (the zero polynomial is the empty vector).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DensePoly {
    coeffs: Vec<FieldElem>,
}

impl DensePoly {
    pub fn from_coeffs(mut coeffs: Vec<FieldElem>) -> Self {
        while let Some(last) = coeffs.last() {
            if last.coeffs().iter().all(|&c| c == 0) {
                coeffs.pop();
            } else {
                break;
            }
        }
        DensePoly { coeffs }
    }

    pub fn zero() -> Self {
        DensePoly { coeffs: Vec::new() }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, or None for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn coeffs(&self) -> &[FieldElem] {
        &self.coeffs
    }

    /// The monomial X.
    pub fn x(ctx: &FieldCtx) -> Self {
        DensePoly {
            coeffs: vec![ctx.zero(), ctx.one()],
        }
    }

    pub fn constant(c: FieldElem, ctx: &FieldCtx) -> Self {
        if ctx.is_zero(&c) {
            Self::zero()
        } else {
            DensePoly { coeffs: vec![c] }
        }
    }
}

pub fn quad_eval(ctx: &FieldCtx, f: &MonicQuad, x: &FieldElem) -> FieldElem {
    let t = ctx.sub(x, &f.b);
    ctx.add(&ctx.mul(&t, &t), &f.c)
}

/// (X-b)^2 + c is irreducible over F_q iff -c is a non-square (the
/// discriminant is -4c and 4 is a square).
pub fn quad_is_irreducible(ctx: &FieldCtx, f: &MonicQuad) -> bool {
    ctx.chi(&ctx.neg(&f.c)) == -1
}

/// Expand to X^2 - 2bX + (b^2 + c).
pub fn quad_to_dense(ctx: &FieldCtx, f: &MonicQuad) -> DensePoly {
    let b2c = ctx.add(&ctx.mul(&f.b, &f.b), &f.c);
    let minus_2b = ctx.neg(&ctx.add(&f.b, &f.b));
    DensePoly {
        coeffs: vec![b2c, minus_2b, ctx.one()],
    }
}

pub fn poly_eval(ctx: &FieldCtx, f: &DensePoly, x: &FieldElem) -> FieldElem {
    let mut acc = ctx.zero();
    for c in f.coeffs.iter().rev() {
        acc = ctx.add(&ctx.mul(&acc, x), c);
    }
    acc
}

pub fn poly_add(ctx: &FieldCtx, a: &DensePoly, b: &DensePoly) -> DensePoly {
    let n = a.coeffs.len().max(b.coeffs.len());
    let mut coeffs = Vec::with_capacity(n);
    for i in 0..n {
        let x = a.coeffs.get(i).cloned().unwrap_or_else(|| ctx.zero());
        let y = b.coeffs.get(i).cloned().unwrap_or_else(|| ctx.zero());
        coeffs.push(ctx.add(&x, &y));
    }
    DensePoly::from_coeffs(coeffs)
}

pub fn poly_sub(ctx: &FieldCtx, a: &DensePoly, b: &DensePoly) -> DensePoly {
    let n = a.coeffs.len().max(b.coeffs.len());
    let mut coeffs = Vec::with_capacity(n);
    for i in 0..n {
        let x = a.coeffs.get(i).cloned().unwrap_or_else(|| ctx.zero());
        let y = b.coeffs.get(i).cloned().unwrap_or_else(|| ctx.zero());
        coeffs.push(ctx.sub(&x, &y));
    }
    DensePoly::from_coeffs(coeffs)
}

pub fn poly_mul(ctx: &FieldCtx, a: &DensePoly, b: &DensePoly) -> DensePoly {
    if a.is_zero() || b.is_zero() {
        return DensePoly::zero();
    }
    let mut coeffs = vec![ctx.zero(); a.coeffs.len() + b.coeffs.len() - 1];
    for (i, x) in a.coeffs.iter().enumerate() {
        if ctx.is_zero(x) {
            continue;
        }
        for (j, y) in b.coeffs.iter().enumerate() {
            coeffs[i + j] = ctx.add(&coeffs[i + j], &ctx.mul(x, y));
        }
    }
    DensePoly::from_coeffs(coeffs)
}

/// Remainder of a modulo m (m nonzero; the leading coefficient of m is
/// inverted, so m need not be monic).
pub fn poly_rem(ctx: &FieldCtx, a: &DensePoly, m: &DensePoly) -> DensePoly {
    let dm = m.degree().expect("division by zero polynomial");
    let lead_inv = ctx.inv(m.coeffs.last().unwrap()).unwrap();
    let mut r = a.coeffs.clone();
    while r.len() > dm {
        let k = r.len() - 1;
        let factor = ctx.mul(&r[k], &lead_inv);
        if !ctx.is_zero(&factor) {
            for j in 0..=dm {
                let t = ctx.mul(&factor, &m.coeffs[j]);
                r[k - dm + j] = ctx.sub(&r[k - dm + j], &t);
            }
        }
        r.pop();
    }
    DensePoly::from_coeffs(r)
}

/// Monic gcd.
pub fn poly_gcd(ctx: &FieldCtx, a: &DensePoly, b: &DensePoly) -> DensePoly {
    let mut x = a.clone();
    let mut y = b.clone();
    while !y.is_zero() {
        let r = poly_rem(ctx, &x, &y);
        x = y;
        y = r;
    }
    if x.is_zero() {
        return x;
    }
    let lead_inv = ctx.inv(x.coeffs.last().unwrap()).unwrap();
    let coeffs = x.coeffs.iter().map(|c| ctx.mul(c, &lead_inv)).collect();
    DensePoly::from_coeffs(coeffs)
}

fn poly_mulmod(ctx: &FieldCtx, a: &DensePoly, b: &DensePoly, m: &DensePoly) -> DensePoly {
    poly_rem(ctx, &poly_mul(ctx, a, b), m)
}

pub fn poly_powmod(ctx: &FieldCtx, base: &DensePoly, e: &BigUint, m: &DensePoly) -> DensePoly {
    let mut r = poly_rem(ctx, &DensePoly::constant(ctx.one(), ctx), m);
    if e.is_zero() {
        return r;
    }
    let b = poly_rem(ctx, base, m);
    for i in (0..e.bits()).rev() {
        r = poly_mulmod(ctx, &r, &r, m);
        if e.bit(i) {
            r = poly_mulmod(ctx, &r, &b, m);
        }
    }
    r
}

fn prime_factors(mut n: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut k = 2;
    while k * k <= n {
        if n % k == 0 {
            out.push(k);
            while n % k == 0 {
                n /= k;
            }
        }
        k += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Rabin's test: monic F of degree m is irreducible over F_q iff
/// X^{q^m} = X (mod F) and gcd(X^{q^{m/l}} - X mod F, F) = 1 for every
/// prime l dividing m.
pub fn poly_is_irreducible(ctx: &FieldCtx, f: &DensePoly) -> bool {
    let m = match f.degree() {
        Some(0) | None => return false,
        Some(m) => m,
    };
    if m == 1 {
        return true;
    }
    assert_eq!(
        f.coeffs.last().unwrap(),
        &ctx.one(),
        "irreducibility test expects a monic polynomial"
    );
    let checkpoints: HashSet<usize> = prime_factors(m).into_iter().map(|l| m / l).collect();
    let x = DensePoly::x(ctx);
    let mut h = x.clone(); // X^{q^0}
    for k in 1..=m {
        h = poly_powmod(ctx, &h, ctx.q(), f);
        if checkpoints.contains(&k) {
            let g = poly_gcd(ctx, &poly_sub(ctx, &h, &x), f);
            if g.degree() != Some(0) {
                return false;
            }
        }
    }
    h == x
}

/// Compose a chain of quadratics, index 0 outermost: the result is
/// f_{i_1} o f_{i_2} o ... o f_{i_n} as a dense polynomial of degree 2^n.
pub fn compose_chain(
    ctx: &FieldCtx,
    chain: &[MonicQuad],
    cap: usize,
) -> Result<DensePoly, QuadError> {
    if chain.is_empty() {
        return Err(QuadError::EmptyChain);
    }
    if chain.len() > cap {
        return Err(QuadError::ChainTooLong(chain.len(), cap));
    }
    let mut acc = quad_to_dense(ctx, chain.last().unwrap());
    for f in chain[..chain.len() - 1].iter().rev() {
        // f o acc = (acc - b)^2 + c
        let shifted = poly_sub(ctx, &acc, &DensePoly::constant(f.b.clone(), ctx));
        let sq = poly_mul(ctx, &shifted, &shifted);
        acc = poly_add(ctx, &sq, &DensePoly::constant(f.c.clone(), ctx));
    }
    Ok(acc)
}

/// Check that all 2^n length-n compositions of {f1, f2} are pairwise
/// distinct polynomials (the freeness property; expected to always hold).
pub fn chains_distinct(
    ctx: &FieldCtx,
    f1: &MonicQuad,
    f2: &MonicQuad,
    n: usize,
    cap: usize,
) -> Result<bool, QuadError> {
    if n == 0 {
        return Err(QuadError::EmptyChain);
    }
    if n > cap {
        return Err(QuadError::ChainTooLong(n, cap));
    }
    let pair = [f1, f2];
    let mut seen: HashSet<DensePoly> = HashSet::with_capacity(1 << n);
    for mask in 0u64..(1 << n) {
        let chain: Vec<MonicQuad> = (0..n)
            .map(|k| pair[((mask >> k) & 1) as usize].clone())
            .collect();
        let poly = compose_chain(ctx, &chain, cap)?;
        if !seen.insert(poly) {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::FieldCtx;
    use proptest::prelude::*;

    fn quad(ctx: &FieldCtx, b: u64, c: u64) -> MonicQuad {
        MonicQuad {
            b: ctx.embed(b),
            c: ctx.embed(c),
        }
    }

    #[test]
    fn eval_examples() {
        let f3 = FieldCtx::prime(3).unwrap();
        let f = quad(&f3, 0, 1); // X^2 + 1
        assert_eq!(quad_eval(&f3, &f, &f3.embed(1)), f3.embed(2));
        // vertex value
        let f5 = FieldCtx::prime(5).unwrap();
        let g = quad(&f5, 3, 2);
        assert_eq!(quad_eval(&f5, &g, &g.b), g.c);
        // fixed value of the pair construction over F_13
        let f13 = FieldCtx::prime(13).unwrap();
        let h = quad(&f13, 5, 5);
        assert_eq!(quad_eval(&f13, &h, &f13.embed(6)), f13.embed(6));
    }

    #[test]
    fn quad_irreducibility_examples() {
        let f5 = FieldCtx::prime(5).unwrap();
        assert!(quad_is_irreducible(&f5, &quad(&f5, 0, 3)));
        assert!(!quad_is_irreducible(&f5, &quad(&f5, 0, 0)));
        let f13 = FieldCtx::prime(13).unwrap();
        assert!(quad_is_irreducible(&f13, &quad(&f13, 9, 7))); // (X-9)^2 - 6
    }

    #[test]
    fn quad_and_dense_tests_agree_with_root_search() {
        for p in [3u64, 5, 7, 11, 13] {
            let ctx = FieldCtx::prime(p).unwrap();
            for b in 0..p {
                for c in 0..p {
                    let f = quad(&ctx, b, c);
                    let has_root = ctx
                        .elements()
                        .any(|x| ctx.is_zero(&quad_eval(&ctx, &f, &x)));
                    let irr = quad_is_irreducible(&ctx, &f);
                    assert_eq!(irr, !has_root, "p={p} b={b} c={c}");
                    assert_eq!(irr, poly_is_irreducible(&ctx, &quad_to_dense(&ctx, &f)));
                }
            }
        }
        // and on extension fields
        let f9 = FieldCtx::with_default_modulus(3, 2).unwrap();
        for b in f9.elements() {
            for c in f9.elements() {
                let f = MonicQuad {
                    b: b.clone(),
                    c: c.clone(),
                };
                let has_root = f9.elements().any(|x| f9.is_zero(&quad_eval(&f9, &f, &x)));
                assert_eq!(quad_is_irreducible(&f9, &f), !has_root);
            }
        }
    }

    #[test]
    fn single_chain_expands() {
        let f5 = FieldCtx::prime(5).unwrap();
        let f = quad(&f5, 2, 2);
        let dense = compose_chain(&f5, &[f.clone()], DEFAULT_CHAIN_CAP).unwrap();
        // X^2 - 4X + 6 = X^2 + X + 1 over F_5
        assert_eq!(
            dense.coeffs(),
            &[f5.embed(1), f5.embed(1), f5.embed(1)][..]
        );
        assert_eq!(dense, quad_to_dense(&f5, &f));
    }

    #[test]
    fn collision_counterexample_reproduces() {
        // f1 = (X+1)^2, f2 = X^2, f3 = X^2+1: f1 o f2 = f2 o f3 = (X^2+1)^2
        for p in [3u64, 5, 7] {
            let ctx = FieldCtx::prime(p).unwrap();
            let f1 = quad(&ctx, p - 1, 0);
            let f2 = quad(&ctx, 0, 0);
            let f3 = quad(&ctx, 0, 1);
            let lhs = compose_chain(&ctx, &[f1, f2.clone()], DEFAULT_CHAIN_CAP).unwrap();
            let rhs = compose_chain(&ctx, &[f2, f3], DEFAULT_CHAIN_CAP).unwrap();
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn iterated_x2_plus_1_over_f3() {
        let f3 = FieldCtx::prime(3).unwrap();
        let f = quad(&f3, 0, 1);
        let ff = compose_chain(&f3, &[f.clone(), f.clone()], DEFAULT_CHAIN_CAP).unwrap();
        assert_eq!(poly_eval(&f3, &ff, &f3.embed(1)), f3.embed(2));
        // X^4 + 2X^2 + 2 is irreducible over F_3
        assert_eq!(
            ff.coeffs(),
            &[f3.embed(2), f3.embed(0), f3.embed(2), f3.embed(0), f3.embed(1)][..]
        );
        assert!(poly_is_irreducible(&f3, &ff));
    }

    #[test]
    fn x_squared_is_reducible() {
        let f5 = FieldCtx::prime(5).unwrap();
        let sq = quad_to_dense(&f5, &quad(&f5, 0, 0));
        assert!(!poly_is_irreducible(&f5, &sq));
    }

    #[test]
    fn chain_cap_enforced() {
        let f3 = FieldCtx::prime(3).unwrap();
        let chain = vec![quad(&f3, 0, 1); 13];
        assert_eq!(
            compose_chain(&f3, &chain, DEFAULT_CHAIN_CAP),
            Err(QuadError::ChainTooLong(13, 12))
        );
    }

    #[test]
    fn chains_distinct_examples() {
        let f5 = FieldCtx::prime(5).unwrap();
        assert!(
            chains_distinct(&f5, &quad(&f5, 2, 2), &quad(&f5, 3, 2), 3, DEFAULT_CHAIN_CAP)
                .unwrap()
        );
        let f13 = FieldCtx::prime(13).unwrap();
        assert!(chains_distinct(
            &f13,
            &quad(&f13, 1, 11),
            &quad(&f13, 9, 7),
            4,
            DEFAULT_CHAIN_CAP
        )
        .unwrap());
        assert!(
            chains_distinct(&f5, &quad(&f5, 0, 1), &quad(&f5, 1, 1), 1, DEFAULT_CHAIN_CAP)
                .unwrap()
        );
    }

    #[test]
    fn degree_law() {
        let f7 = FieldCtx::prime(7).unwrap();
        let chain = vec![quad(&f7, 1, 3), quad(&f7, 2, 5), quad(&f7, 0, 3)];
        let dense = compose_chain(&f7, &chain, DEFAULT_CHAIN_CAP).unwrap();
        assert_eq!(dense.degree(), Some(8));
        assert_eq!(dense.coeffs().last().unwrap(), &f7.one());
    }

    proptest! {
        // Evaluation homomorphism: the dense composition evaluated at x equals
        // the right-to-left fold of quad_eval.
        #[test]
        fn composition_evaluation_homomorphism(
            seed in 0u64..10_000,
            len in 1usize..5,
            xidx in 0u64..13,
        ) {
            let ctx = FieldCtx::prime(13).unwrap();
            let mut s = seed;
            let mut chain = Vec::new();
            for _ in 0..len {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                let b = (s >> 16) % 13;
                let c = (s >> 40) % 13;
                chain.push(quad(&ctx, b, c));
            }
            let x = ctx.embed(xidx);
            let dense = compose_chain(&ctx, &chain, DEFAULT_CHAIN_CAP).unwrap();
            let mut folded = x.clone();
            for f in chain.iter().rev() {
                folded = quad_eval(&ctx, f, &folded);
            }
            prop_assert_eq!(poly_eval(&ctx, &dense, &x), folded);
        }
    }
}
