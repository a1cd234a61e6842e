//! Dynamical-irreducibility decision procedures.
//!
//! The main entry point is [`closure_test`]: starting from the critical
//! values c_j it grows the set of iterate values level by level in a balanced
//! ordered map, failing as soon as an iterate is not a strict non-square.
//! The ordered structure is `std::collections::BTreeMap` (a B-tree keyed by
//! the canonical element order); any balanced tree with O(log n)
//! insert/lookup satisfies the contract.

use crate::field::{FieldCtx, FieldElem};
use crate::quad::{
    compose_chain, poly_is_irreducible, quad_eval, quad_is_irreducible, MonicQuad,
    DEFAULT_CHAIN_CAP,
};
use num_traits::ToPrimitive;
use serde_json::json;
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DynIrrError {
    #[error("polynomials do not all belong to the given field")]
    MixedFields,
    #[error("internal bound exceeded: {0}")]
    InternalBoundExceeded(String),
    #[error("brute-force guard exceeded: {0}")]
    GuardExceeded(String),
    #[error("polynomials do not share a common critical value")]
    CommonCViolated,
    #[error("instance must contain at least one polynomial")]
    EmptyInstance,
}

/// A candidate set of monic quadratics over a shared field, deduplicated.
#[derive(Clone, Debug)]
pub struct DISetInstance {
    pub ctx: FieldCtx,
    pub polys: Vec<MonicQuad>,
    /// Duplicates dropped during construction (input positions).
    pub dropped_duplicates: Vec<usize>,
}

impl PartialEq for DISetInstance {
    fn eq(&self, other: &Self) -> bool {
        self.ctx == other.ctx && self.polys == other.polys
    }
}

impl DISetInstance {
    pub fn new(ctx: FieldCtx, polys: Vec<MonicQuad>) -> Result<Self, DynIrrError> {
        if polys.is_empty() {
            return Err(DynIrrError::EmptyInstance);
        }
        for f in &polys {
            if ctx.check(&f.b).is_err() || ctx.check(&f.c).is_err() {
                return Err(DynIrrError::MixedFields);
            }
        }
        let mut seen = Vec::new();
        let mut dropped = Vec::new();
        for (pos, f) in polys.into_iter().enumerate() {
            if seen.contains(&f) {
                dropped.push(pos);
            } else {
                seen.push(f);
            }
        }
        Ok(DISetInstance {
            ctx,
            polys: seen,
            dropped_duplicates: dropped,
        })
    }

    pub fn r(&self) -> usize {
        self.polys.len()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    DynamicallyIrreducible,
    NotDI,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Witness {
    /// Generator at `index` is already reducible as a quadratic.
    ReducibleGenerator { index: usize },
    /// The iterate value (f_{chain[0]} o ... o f_{chain[n-1]})(c_j) is a
    /// square (or zero). Chain indices are outermost-first.
    SquareIterate {
        chain: Vec<usize>,
        start_c_index: usize,
        value: FieldElem,
    },
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ClosureStats {
    pub sq_tests: u64,
    pub insertions: u64,
    pub rounds: u64,
    /// For the r = 1 cycle test only: the O(q^{3/4}) repetition bound of
    /// Ostafe-Shparlinski, reported for reference.
    pub repeat_bound_hint: Option<u64>,
}

#[derive(Clone, Debug)]
pub struct ClosureReport {
    pub verdict: Verdict,
    /// All reached values including the c_j, strictly increasing.
    pub iterate_set: Vec<FieldElem>,
    pub witness: Option<Witness>,
    pub stats: ClosureStats,
}

impl ClosureReport {
    pub fn is_di(&self) -> bool {
        self.verdict == Verdict::DynamicallyIrreducible
    }

    pub fn to_json(&self, ctx: &FieldCtx) -> serde_json::Value {
        let witness = self.witness.as_ref().map(|w| match w {
            Witness::ReducibleGenerator { index } => json!({
                "reason": "ReducibleGenerator",
                "index": index,
            }),
            Witness::SquareIterate {
                chain,
                start_c_index,
                value,
            } => json!({
                "reason": "SquareIterate",
                "chain": chain,
                "j": start_c_index,
                "value": value.to_string(),
            }),
        });
        json!({
            "field": ctx.header(),
            "verdict": match self.verdict {
                Verdict::DynamicallyIrreducible => "DynamicallyIrreducible",
                Verdict::NotDI => "NotDI",
            },
            "iterate_set": self.iterate_set.iter().map(|e| e.to_string()).collect::<Vec<_>>(),
            "witness": witness,
            "stats": {
                "sq_tests": self.stats.sq_tests,
                "insertions": self.stats.insertions,
                "rounds": self.stats.rounds,
                "repeat_bound_hint": self.stats.repeat_bound_hint,
            },
        })
    }
}

/// min(q, floor(4 (ln q)^2 sqrt(q))), natural logarithm. The floor is
/// computed from a two-sided f64 interval; an ambiguous boundary panics
/// rather than silently guessing (never hit at desk scale).
pub fn bound_b(ctx: &FieldCtx) -> u64 {
    let qf = ctx.q().to_f64().expect("q out of float range");
    let v = 4.0 * qf.ln().powi(2) * qf.sqrt();
    let lo = (v * (1.0 - 1e-12)).floor();
    let hi = (v * (1.0 + 1e-12)).floor();
    assert_eq!(
        lo, hi,
        "floor of 4(ln q)^2 sqrt(q) ambiguous at f64 precision for q = {}",
        ctx.q()
    );
    let floor = if lo >= u64::MAX as f64 {
        u64::MAX
    } else {
        lo as u64
    };
    floor.min(ctx.q_u64().unwrap_or(u64::MAX))
}

enum Origin {
    Root { c_index: usize },
    Child { parent: FieldElem, poly: usize },
}

fn rebuild_chain(
    tree: &BTreeMap<FieldElem, Origin>,
    outer_poly: usize,
    mut t: FieldElem,
) -> (Vec<usize>, usize) {
    let mut chain = vec![outer_poly];
    loop {
        match tree.get(&t).expect("parent chain must be in the tree") {
            Origin::Root { c_index } => return (chain, *c_index),
            Origin::Child { parent, poly } => {
                chain.push(*poly);
                t = parent.clone();
            }
        }
    }
}

/// The ordered-set closure algorithm: decide whether the instance is a
/// dynamically-irreducible set, with a replayable witness on failure.
pub fn closure_test(inst: &DISetInstance) -> Result<ClosureReport, DynIrrError> {
    let ctx = &inst.ctx;
    let r = inst.r();
    let mut stats = ClosureStats::default();

    for (i, f) in inst.polys.iter().enumerate() {
        if !quad_is_irreducible(ctx, f) {
            return Ok(ClosureReport {
                verdict: Verdict::NotDI,
                iterate_set: Vec::new(),
                witness: Some(Witness::ReducibleGenerator { index: i }),
                stats,
            });
        }
    }

    let q_cap = ctx.q_u64().unwrap_or(u64::MAX);
    let round_cap = if r >= 2 { bound_b(ctx) + 1 } else { q_cap.saturating_add(1) };

    let mut tree: BTreeMap<FieldElem, Origin> = BTreeMap::new();
    let mut frontier: Vec<FieldElem> = Vec::new();
    for (j, f) in inst.polys.iter().enumerate() {
        if !tree.contains_key(&f.c) {
            tree.insert(f.c.clone(), Origin::Root { c_index: j });
            frontier.push(f.c.clone());
            stats.insertions += 1;
        }
    }
    frontier.sort();

    while !frontier.is_empty() {
        stats.rounds += 1;
        if stats.rounds > round_cap {
            return Err(DynIrrError::InternalBoundExceeded(format!(
                "more than {round_cap} frontier rounds"
            )));
        }
        let mut next: Vec<FieldElem> = Vec::new();
        for i in 0..r {
            for t in &frontier {
                let v = quad_eval(ctx, &inst.polys[i], t);
                stats.sq_tests += 1;
                if ctx.chi(&v) != -1 {
                    let (chain, start_c_index) = rebuild_chain(&tree, i, t.clone());
                    let iterate_set: Vec<FieldElem> = tree.keys().cloned().collect();
                    return Ok(ClosureReport {
                        verdict: Verdict::NotDI,
                        iterate_set,
                        witness: Some(Witness::SquareIterate {
                            chain,
                            start_c_index,
                            value: v,
                        }),
                        stats,
                    });
                }
                if !tree.contains_key(&v) {
                    tree.insert(
                        v.clone(),
                        Origin::Child {
                            parent: t.clone(),
                            poly: i,
                        },
                    );
                    next.push(v);
                    stats.insertions += 1;
                    if stats.insertions > q_cap {
                        return Err(DynIrrError::InternalBoundExceeded(format!(
                            "more than q = {q_cap} insertions"
                        )));
                    }
                }
            }
        }
        next.sort();
        frontier = next;
    }

    Ok(ClosureReport {
        verdict: Verdict::DynamicallyIrreducible,
        iterate_set: tree.keys().cloned().collect(),
        witness: None,
        stats,
    })
}

/// The r = 1 cycle test: iterate t_1 = f(c), t_{k+1} = f(t_k), requiring
/// chi = -1 at every step, until a repeated value closes the cycle.
pub fn single_test(ctx: &FieldCtx, f: &MonicQuad) -> Result<ClosureReport, DynIrrError> {
    if ctx.check(&f.b).is_err() || ctx.check(&f.c).is_err() {
        return Err(DynIrrError::MixedFields);
    }
    let mut stats = ClosureStats::default();
    let qf = ctx.q().to_f64().unwrap_or(f64::INFINITY);
    stats.repeat_bound_hint = Some(qf.powf(0.75).ceil() as u64);

    if !quad_is_irreducible(ctx, f) {
        return Ok(ClosureReport {
            verdict: Verdict::NotDI,
            iterate_set: Vec::new(),
            witness: Some(Witness::ReducibleGenerator { index: 0 }),
            stats,
        });
    }

    let q_cap = ctx.q_u64().unwrap_or(u64::MAX);
    let mut visited: std::collections::BTreeSet<FieldElem> = std::collections::BTreeSet::new();
    visited.insert(f.c.clone());
    stats.insertions = 1;
    let mut t = f.c.clone();
    let mut steps: u64 = 0;
    loop {
        let v = quad_eval(ctx, f, &t);
        steps += 1;
        stats.sq_tests += 1;
        if ctx.chi(&v) != -1 {
            stats.rounds = steps;
            return Ok(ClosureReport {
                verdict: Verdict::NotDI,
                iterate_set: visited.into_iter().collect(),
                witness: Some(Witness::SquareIterate {
                    chain: vec![0; steps as usize],
                    start_c_index: 0,
                    value: v,
                }),
                stats,
            });
        }
        if visited.contains(&v) {
            stats.rounds = steps;
            return Ok(ClosureReport {
                verdict: Verdict::DynamicallyIrreducible,
                iterate_set: visited.into_iter().collect(),
                witness: None,
                stats,
            });
        }
        visited.insert(v.clone());
        stats.insertions += 1;
        if stats.insertions > q_cap {
            return Err(DynIrrError::InternalBoundExceeded(format!(
                "more than q = {q_cap} distinct iterates"
            )));
        }
        t = v;
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BruteForceOutcome {
    AllIrreducibleUpTo(usize),
    /// The first reducible composition chain (shortest, then lexicographically
    /// smallest in index order), outermost-first.
    Reducible(Vec<usize>),
}

/// Direct oracle: enumerate every composition chain of length 1..=max_depth,
/// expand it and run the generic irreducibility test.
pub fn brute_force_check(
    inst: &DISetInstance,
    max_depth: usize,
) -> Result<BruteForceOutcome, DynIrrError> {
    let r = inst.r();
    let chains_at_max = (r as u128).checked_pow(max_depth as u32);
    if chains_at_max.map_or(true, |n| n > 1_000_000) {
        return Err(DynIrrError::GuardExceeded(format!(
            "r^n = {r}^{max_depth} chains"
        )));
    }
    if max_depth > DEFAULT_CHAIN_CAP {
        return Err(DynIrrError::GuardExceeded(format!(
            "degree 2^{max_depth} exceeds 4096"
        )));
    }
    let ctx = &inst.ctx;
    for depth in 1..=max_depth {
        let mut indices = vec![0usize; depth];
        loop {
            let chain: Vec<MonicQuad> =
                indices.iter().map(|&i| inst.polys[i].clone()).collect();
            let dense = compose_chain(ctx, &chain, DEFAULT_CHAIN_CAP)
                .map_err(|e| DynIrrError::GuardExceeded(e.to_string()))?;
            if !poly_is_irreducible(ctx, &dense) {
                return Ok(BruteForceOutcome::Reducible(indices));
            }
            // odometer, indices[0] most significant (lex order)
            let mut k = depth;
            loop {
                if k == 0 {
                    break;
                }
                k -= 1;
                indices[k] += 1;
                if indices[k] < r {
                    break;
                }
                indices[k] = 0;
                if k == 0 {
                    k = usize::MAX;
                    break;
                }
            }
            if k == usize::MAX {
                break;
            }
        }
    }
    Ok(BruteForceOutcome::AllIrreducibleUpTo(max_depth))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GammaReport {
    pub common_c: FieldElem,
    pub max_fiber: usize,
    pub fibers: Vec<(FieldElem, usize)>,
}

/// For a family with a common critical value u, compute the multiset
/// {f_i(u)}. The map f_i -> f_i(u) is at most 2-to-1 for distinct
/// polynomials, so the maximum fiber size must be <= 2.
pub fn gamma_two_to_one(inst: &DISetInstance) -> Result<GammaReport, DynIrrError> {
    let ctx = &inst.ctx;
    let u = inst.polys[0].c.clone();
    if inst.polys.iter().any(|f| f.c != u) {
        return Err(DynIrrError::CommonCViolated);
    }
    let mut fibers: BTreeMap<FieldElem, usize> = BTreeMap::new();
    for f in &inst.polys {
        *fibers.entry(quad_eval(ctx, f, &u)).or_insert(0) += 1;
    }
    let max_fiber = fibers.values().copied().max().unwrap_or(0);
    Ok(GammaReport {
        common_c: u,
        max_fiber,
        fibers: fibers.into_iter().collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::FieldCtx;

    fn quad(ctx: &FieldCtx, b: u64, c: u64) -> MonicQuad {
        MonicQuad {
            b: ctx.embed(b),
            c: ctx.embed(c),
        }
    }

    fn inst(ctx: &FieldCtx, polys: &[(u64, u64)]) -> DISetInstance {
        DISetInstance::new(
            ctx.clone(),
            polys.iter().map(|&(b, c)| quad(ctx, b, c)).collect(),
        )
        .unwrap()
    }

    #[test]
    fn f5_triple_is_di() {
        let ctx = FieldCtx::prime(5).unwrap();
        let report = closure_test(&inst(&ctx, &[(2, 2), (3, 2), (0, 3)])).unwrap();
        assert!(report.is_di());
    }

    #[test]
    fn f13_triple_is_di() {
        let ctx = FieldCtx::prime(13).unwrap();
        // (x-1)^2 - 2, (x-9)^2 - 6, (x-3)^2 - 5
        let report = closure_test(&inst(&ctx, &[(1, 11), (9, 7), (3, 8)])).unwrap();
        assert!(report.is_di());
    }

    #[test]
    fn reducible_generator_detected() {
        let ctx = FieldCtx::prime(7).unwrap();
        let report = closure_test(&inst(&ctx, &[(3, 1), (0, 0)])).unwrap();
        assert_eq!(report.verdict, Verdict::NotDI);
        assert_eq!(
            report.witness,
            Some(Witness::ReducibleGenerator { index: 1 })
        );
    }

    #[test]
    fn single_x2_plus_1_over_f3() {
        let ctx = FieldCtx::prime(3).unwrap();
        let report = single_test(&ctx, &quad(&ctx, 0, 1)).unwrap();
        assert!(report.is_di());
        assert_eq!(report.iterate_set, vec![ctx.embed(1), ctx.embed(2)]);
    }

    #[test]
    fn single_fixed_point_family() {
        // f = (X-b)^2 + b - 2 with 2-b, 2+b non-squares stabilizes at b+2
        let ctx = FieldCtx::prime(3).unwrap();
        let f = quad(&ctx, 0, 1);
        let report = single_test(&ctx, &f).unwrap();
        assert!(report.is_di());
    }

    #[test]
    fn single_reducible_generator() {
        let ctx = FieldCtx::prime(5).unwrap();
        // X^2 + 1: -1 = 4 = 2^2 is a square over F_5
        let report = single_test(&ctx, &quad(&ctx, 0, 1)).unwrap();
        assert_eq!(
            report.witness,
            Some(Witness::ReducibleGenerator { index: 0 })
        );
    }

    #[test]
    fn single_matches_closure_on_singletons() {
        for p in [3u64, 5, 7, 11, 13] {
            let ctx = FieldCtx::prime(p).unwrap();
            for b in 0..p {
                for c in 0..p {
                    let f = quad(&ctx, b, c);
                    let s = single_test(&ctx, &f).unwrap();
                    let cl =
                        closure_test(&DISetInstance::new(ctx.clone(), vec![f]).unwrap()).unwrap();
                    assert_eq!(s.verdict, cl.verdict, "p={p} b={b} c={c}");
                    if s.is_di() {
                        assert_eq!(s.iterate_set, cl.iterate_set);
                    }
                }
            }
        }
        // extension fields, sampled
        for (p, d) in [(3u64, 2usize), (5, 2), (7, 2)] {
            let ctx = FieldCtx::with_default_modulus(p, d).unwrap();
            let q = ctx.q_u64().unwrap();
            for k in 0..100u64 {
                let b = ctx.elem_from_index((k * 48271 + 11) % q);
                let c = ctx.elem_from_index((k * 69621 + 5) % q);
                let f = MonicQuad { b, c };
                let s = single_test(&ctx, &f).unwrap();
                let cl =
                    closure_test(&DISetInstance::new(ctx.clone(), vec![f]).unwrap()).unwrap();
                assert_eq!(s.verdict, cl.verdict);
            }
        }
    }

    #[test]
    fn witness_replays() {
        let ctx = FieldCtx::prime(5).unwrap();
        // {X^2+3, (X-1)^2+3}: whatever the verdict, a SquareIterate witness
        // must replay to its recorded value.
        let instance = inst(&ctx, &[(0, 3), (1, 3)]);
        let report = closure_test(&instance).unwrap();
        if let Some(Witness::SquareIterate {
            chain,
            start_c_index,
            value,
        }) = &report.witness
        {
            let mut t = instance.polys[*start_c_index].c.clone();
            for &i in chain.iter().rev() {
                t = quad_eval(&ctx, &instance.polys[i], &t);
            }
            assert_eq!(&t, value);
            assert_ne!(ctx.chi(value), -1);
        }
    }

    #[test]
    fn order_independence() {
        let ctx = FieldCtx::prime(5).unwrap();
        let base = [(2u64, 2u64), (3, 2), (0, 3)];
        let reference = closure_test(&inst(&ctx, &base)).unwrap();
        let perms: [[usize; 3]; 5] = [
            [0, 2, 1],
            [1, 0, 2],
            [1, 2, 0],
            [2, 0, 1],
            [2, 1, 0],
        ];
        for perm in perms {
            let reordered: Vec<(u64, u64)> = perm.iter().map(|&i| base[i]).collect();
            let report = closure_test(&inst(&ctx, &reordered)).unwrap();
            assert_eq!(report.verdict, reference.verdict);
            assert_eq!(report.iterate_set, reference.iterate_set);
        }
    }

    #[test]
    fn heredity_of_the_golden_triples() {
        for (p, polys) in [
            (5u64, vec![(2u64, 2u64), (3, 2), (0, 3)]),
            (13, vec![(1, 11), (9, 7), (3, 8)]),
        ] {
            let ctx = FieldCtx::prime(p).unwrap();
            for mask in 1u32..8 {
                let subset: Vec<(u64, u64)> = (0..3)
                    .filter(|k| mask >> k & 1 == 1)
                    .map(|k| polys[k])
                    .collect();
                assert!(closure_test(&inst(&ctx, &subset)).unwrap().is_di());
            }
        }
    }

    #[test]
    fn di_iterate_set_within_bound() {
        let ctx = FieldCtx::prime(5).unwrap();
        let report = closure_test(&inst(&ctx, &[(2, 2), (3, 2), (0, 3)])).unwrap();
        assert!(report.iterate_set.len() as u64 <= bound_b(&ctx));
    }

    #[test]
    fn bound_b_examples() {
        assert_eq!(bound_b(&FieldCtx::prime(3).unwrap()), 3);
        assert_eq!(bound_b(&FieldCtx::prime(5).unwrap()), 5);
        assert_eq!(bound_b(&FieldCtx::with_default_modulus(5, 5).unwrap()), 3125);
    }

    #[test]
    fn brute_force_examples() {
        let f5 = FieldCtx::prime(5).unwrap();
        assert_eq!(
            brute_force_check(&inst(&f5, &[(2, 2), (3, 2), (0, 3)]), 4).unwrap(),
            BruteForceOutcome::AllIrreducibleUpTo(4)
        );
        let f3 = FieldCtx::prime(3).unwrap();
        assert_eq!(
            brute_force_check(&inst(&f3, &[(0, 1)]), 6).unwrap(),
            BruteForceOutcome::AllIrreducibleUpTo(6)
        );
        // a set containing a reducible quadratic fails at depth 1
        let bad = inst(&f5, &[(0, 3), (0, 0)]);
        assert_eq!(
            brute_force_check(&bad, 3).unwrap(),
            BruteForceOutcome::Reducible(vec![1])
        );
    }

    #[test]
    fn brute_force_guard() {
        let f5 = FieldCtx::prime(5).unwrap();
        let instance = inst(&f5, &[(2, 2), (3, 2), (0, 3)]);
        assert!(matches!(
            brute_force_check(&instance, 13),
            Err(DynIrrError::GuardExceeded(_))
        ));
    }

    #[test]
    fn gamma_fibers() {
        let ctx = FieldCtx::prime(13).unwrap();
        // symmetric pair about u: b and 2u - b map to the same value
        let u = 5u64;
        let b = 1u64;
        let mirrored = (2 * u + 13 - b) % 13;
        let pair = inst(&ctx, &[(b, u), (mirrored, u)]);
        let g = gamma_two_to_one(&pair).unwrap();
        assert_eq!(g.max_fiber, 2);
        // single polynomial
        let solo = inst(&ctx, &[(4, 5)]);
        assert_eq!(gamma_two_to_one(&solo).unwrap().max_fiber, 1);
        // all b-triples with a common c stay within fiber size 2
        for c in 0..13u64 {
            for b1 in 0..13u64 {
                for b2 in (b1 + 1)..13 {
                    for b3 in (b2 + 1)..13 {
                        let triple = inst(&ctx, &[(b1, c), (b2, c), (b3, c)]);
                        assert!(gamma_two_to_one(&triple).unwrap().max_fiber <= 2);
                    }
                }
            }
        }
        // mixed critical values rejected
        let mixed = inst(&ctx, &[(1, 2), (3, 4)]);
        assert_eq!(gamma_two_to_one(&mixed), Err(DynIrrError::CommonCViolated));
    }

    #[test]
    fn duplicates_dropped() {
        let ctx = FieldCtx::prime(5).unwrap();
        let instance = DISetInstance::new(
            ctx.clone(),
            vec![quad(&ctx, 2, 2), quad(&ctx, 2, 2), quad(&ctx, 3, 2)],
        )
        .unwrap();
        assert_eq!(instance.r(), 2);
        assert_eq!(instance.dropped_duplicates, vec![1]);
    }
}
