//! Explicit dynamically-irreducible families and the character-sum
//! existence search.
//!
//! * [`build_artin_schreier`] / [`theorem1_family`]: the p^2-polynomial
//!   family over F_{p^p} built from a root of X^p - X - h.
//! * [`pair_family`]: the size-2 family (X-a)^2+a, (X-a-1)^2+a for
//!   q = 1 mod 4.
//! * [`single_family`]: the stable polynomial (X-b)^2 + b - 2.
//! * [`charsum_find_alpha`]: exact enumeration of the sum
//!   S = sum_alpha prod_a (1 - chi(a + alpha)).

use crate::closure::{DISetInstance, DynIrrError};
use crate::field::{FieldCtx, FieldElem, FieldError};
use crate::quad::MonicQuad;
use serde_json::json;
use std::collections::HashSet;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ConstructError {
    #[error("h must be nonzero in F_p")]
    HIsZero,
    #[error("h = {0} is a square mod p")]
    HIsSquare(u64),
    #[error("p = {0} is not 1 mod 4 (pass the relax flag to explore anyway)")]
    PNotOneModFour(u64),
    #[error("q must be 1 mod 4 for the pair construction")]
    QNotOneModFour,
    #[error("no admissible a found (unexpected for q = 1 mod 4)")]
    NoAdmissibleA,
    #[error("no admissible b found (unexpected for odd q)")]
    NoAdmissibleB,
    #[error("enumeration guard exceeded: q = {0} > {1}")]
    GuardExceeded(String, u64),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    DynIrr(#[from] DynIrrError),
    #[error("Artin-Schreier invariant failed: {0}")]
    InvariantFailed(String),
}

/// F_{p^p} presented as F_p(xi) with xi^p - xi = h.
#[derive(Clone, Debug)]
pub struct ArtinSchreierCtx {
    pub p: u64,
    pub h: u64,
    pub ctx: FieldCtx,
    pub xi: FieldElem,
    /// True when built with the relax flag and p is not 1 mod 4; the
    /// dynamical-irreducibility guarantee does not apply.
    pub outside_hypotheses: bool,
}

fn chi_p(p: u64, h: u64) -> i8 {
    // Euler's criterion in the prime field.
    let ctx = FieldCtx::prime(p).expect("prime context");
    ctx.chi(&ctx.embed(h))
}

/// Construct F_{p^p} with modulus X^p - X - h, verifying the modulus is
/// irreducible and that the coset F_p + xi consists of non-squares of norm h.
pub fn build_artin_schreier(p: u64, h: u64, relax: bool) -> Result<ArtinSchreierCtx, ConstructError> {
    let h = h % p;
    if h == 0 {
        return Err(ConstructError::HIsZero);
    }
    if chi_p(p, h) != -1 {
        return Err(ConstructError::HIsSquare(h));
    }
    if p % 4 != 1 && !relax {
        return Err(ConstructError::PNotOneModFour(p));
    }
    // X^p - X - h: constant -h, linear -1, leading 1
    let mut modulus = vec![0u64; p as usize + 1];
    modulus[0] = p - h;
    modulus[1] = p - 1;
    modulus[p as usize] = 1;
    let ctx = FieldCtx::new(p, p as usize, modulus)?;
    let xi = ctx.theta();

    // xi^p = xi + h
    let expect = ctx.add(&xi, &ctx.embed(h));
    if ctx.pow_u64(&xi, p) != expect {
        return Err(ConstructError::InvariantFailed("xi^p != xi + h".into()));
    }
    let outside = p % 4 != 1;
    for a in 0..p {
        let x = ctx.add(&ctx.embed(a), &xi);
        if ctx.norm(&x) != ctx.embed(h) {
            return Err(ConstructError::InvariantFailed(format!(
                "norm({a} + xi) != h"
            )));
        }
        if !outside && ctx.chi(&x) != -1 {
            return Err(ConstructError::InvariantFailed(format!(
                "chi({a} + xi) != -1"
            )));
        }
    }
    Ok(ArtinSchreierCtx {
        p,
        h,
        ctx,
        xi,
        outside_hypotheses: outside,
    })
}

/// All p^2 polynomials f_{b,c}(X) = (X - b - xi)^2 + c + xi for
/// (b, c) in F_p x F_p.
pub fn theorem1_family(as_ctx: &ArtinSchreierCtx) -> DISetInstance {
    let ctx = &as_ctx.ctx;
    let mut polys = Vec::with_capacity((as_ctx.p * as_ctx.p) as usize);
    for b in 0..as_ctx.p {
        for c in 0..as_ctx.p {
            polys.push(MonicQuad {
                b: ctx.add(&ctx.embed(b), &as_ctx.xi),
                c: ctx.add(&ctx.embed(c), &as_ctx.xi),
            });
        }
    }
    DISetInstance::new(ctx.clone(), polys).expect("family polynomials are valid and distinct")
}

/// The size-2 family (X-a)^2 + a, (X-a-1)^2 + a where a is the first element
/// (in canonical order) with both a and a+1 non-squares. Requires q = 1 mod 4.
pub fn pair_family(ctx: &FieldCtx) -> Result<DISetInstance, ConstructError> {
    if ctx.q() % 4u32 != 1u32.into() {
        return Err(ConstructError::QNotOneModFour);
    }
    for a in ctx.elements() {
        let a1 = ctx.add(&a, &ctx.one());
        if ctx.chi(&a) == -1 && ctx.chi(&a1) == -1 {
            let polys = vec![
                MonicQuad {
                    b: a.clone(),
                    c: a.clone(),
                },
                MonicQuad {
                    b: a1,
                    c: a.clone(),
                },
            ];
            return Ok(DISetInstance::new(ctx.clone(), polys)?);
        }
    }
    Err(ConstructError::NoAdmissibleA)
}

/// The stable polynomial (X-b)^2 + b - 2 where b is the first element with
/// both 2-b and 2+b non-squares.
pub fn single_family(ctx: &FieldCtx) -> Result<MonicQuad, ConstructError> {
    let two = ctx.embed(2);
    for b in ctx.elements() {
        if ctx.chi(&ctx.sub(&two, &b)) == -1 && ctx.chi(&ctx.add(&two, &b)) == -1 {
            let c = ctx.sub(&b, &two);
            return Ok(MonicQuad { b, c });
        }
    }
    Err(ConstructError::NoAdmissibleB)
}

pub const CHARSUM_GUARD: u64 = 10_000_000;

#[derive(Clone, Debug)]
pub struct CharSumReport {
    pub p: u64,
    pub e: usize,
    pub q: u64,
    /// S = sum over alpha of prod over a in F_p of (1 - chi(a + alpha)),
    /// computed exactly by enumeration.
    pub s: i64,
    /// floor(q - sqrt(q) * p * (2^p - 1)), possibly negative.
    pub weil_floor: i64,
    /// Whether S >= q - sqrt(q) p (2^p - 1) holds (checked exactly).
    pub weil_ok: bool,
    /// The first alpha (canonical order) with chi(a + alpha) = -1 for every
    /// a in F_p, if any.
    pub alpha: Option<FieldElem>,
}

impl CharSumReport {
    pub fn to_json(&self, ctx: &FieldCtx) -> serde_json::Value {
        json!({
            "field": ctx.header(),
            "p": self.p,
            "e": self.e,
            "q": self.q,
            "S": self.s,
            "weil_floor": self.weil_floor,
            "weil_ok": self.weil_ok,
            "alpha": self.alpha.as_ref().map(|a| a.to_string()),
        })
    }
}

fn charsum_range(
    ctx: &FieldCtx,
    squares: &HashSet<FieldElem>,
    prime_elems: &[FieldElem],
    lo: u64,
    hi: u64,
) -> (i64, Option<u64>) {
    let mut s: i64 = 0;
    let mut first_alpha: Option<u64> = None;
    let all_nonsquare = 1i64 << ctx.p();
    for idx in lo..hi {
        let alpha = ctx.elem_from_index(idx);
        let mut prod: i64 = 1;
        for a in prime_elems {
            let v = ctx.add(a, &alpha);
            let chi = if ctx.is_zero(&v) {
                0
            } else if squares.contains(&v) {
                1
            } else {
                -1
            };
            prod *= 1 - chi as i64;
            if prod == 0 {
                break;
            }
        }
        s += prod;
        if prod == all_nonsquare && first_alpha.is_none() {
            first_alpha = Some(idx);
        }
    }
    (s, first_alpha)
}

/// Exact enumeration of S over F_{p^e} (default modulus), with the first
/// qualifying alpha. `jobs` partitions the field across threads; the result
/// is deterministic.
pub fn charsum_find_alpha(
    p: u64,
    e: usize,
    jobs: usize,
) -> Result<(FieldCtx, CharSumReport), ConstructError> {
    let q = (p as u128).pow(e as u32);
    if q > CHARSUM_GUARD as u128 {
        return Err(ConstructError::GuardExceeded(q.to_string(), CHARSUM_GUARD));
    }
    let q = q as u64;
    let ctx = FieldCtx::with_default_modulus(p, e)?;
    // chi via a precomputed square table: one multiplication per element.
    let squares: HashSet<FieldElem> = ctx.elements().map(|x| ctx.mul(&x, &x)).collect();
    let prime_elems: Vec<FieldElem> = (0..p).map(|a| ctx.embed(a)).collect();

    let jobs = jobs.max(1).min(q as usize);
    let (s, alpha_idx) = if jobs == 1 {
        charsum_range(&ctx, &squares, &prime_elems, 0, q)
    } else {
        let chunk = q.div_ceil(jobs as u64);
        let parts: Vec<(i64, Option<u64>)> = std::thread::scope(|scope| {
            let mut handles = Vec::new();
            for w in 0..jobs as u64 {
                let lo = w * chunk;
                let hi = ((w + 1) * chunk).min(q);
                let ctx = &ctx;
                let squares = &squares;
                let prime_elems = &prime_elems;
                handles
                    .push(scope.spawn(move || charsum_range(ctx, squares, prime_elems, lo, hi)));
            }
            handles.into_iter().map(|h| h.join().unwrap()).collect()
        });
        let s = parts.iter().map(|(s, _)| s).sum();
        let alpha_idx = parts.iter().filter_map(|(_, a)| *a).min();
        (s, alpha_idx)
    };

    // S >= q - sqrt(q) p (2^p - 1), checked without rounding:
    // (q - S) <= sqrt(q) * w  <=>  q <= S or (q - S)^2 <= q * w^2
    let w = (p as i128) * ((1i128 << p) - 1);
    let deficit = q as i128 - s as i128;
    let weil_ok = deficit <= 0 || deficit * deficit <= (q as i128) * w * w;
    let weil_floor = ((q as f64) - (q as f64).sqrt() * w as f64).floor() as i64;

    let report = CharSumReport {
        p,
        e,
        q,
        s,
        weil_floor,
        weil_ok,
        alpha: alpha_idx.map(|i| ctx.elem_from_index(i)),
    };
    Ok((ctx, report))
}
