//! Exhaustive computation of M(q), the maximum size of a
//! dynamically-irreducible set of monic quadratics over F_q.
//!
//! The search backtracks over the canonical (b, c) order, extending a known
//! DI set only with higher-indexed candidates and pruning as soon as the
//! closure test fails; this is exhaustive because every subset of a DI set
//! is itself DI.

use crate::closure::{bound_b, closure_test, DISetInstance, DynIrrError};
use crate::field::FieldCtx;
use crate::quad::{quad_is_irreducible, MonicQuad};
use num_traits::ToPrimitive;
use serde_json::json;
use std::time::Instant;

/// All monic irreducible quadratics (X-b)^2 + c over F_q (chi(-c) = -1),
/// ordered by (b, c) under the canonical element order. Exactly q(q-1)/2
/// entries.
pub fn enumerate_irreducible_quads(ctx: &FieldCtx) -> Vec<MonicQuad> {
    let mut out = Vec::new();
    for b in ctx.elements() {
        for c in ctx.elements() {
            if ctx.chi(&ctx.neg(&c)) == -1 {
                out.push(MonicQuad {
                    b: b.clone(),
                    c,
                });
            }
        }
    }
    out
}

/// min(2 * bound_b(q)^2, floor(32 (ln q)^4 q)).
pub fn m_upper_bound(ctx: &FieldCtx) -> u64 {
    let b = bound_b(ctx);
    let via_b = b.saturating_mul(b).saturating_mul(2);
    let qf = ctx.q().to_f64().expect("q out of float range");
    let v = 32.0 * qf.ln().powi(4) * qf;
    let lo = (v * (1.0 - 1e-12)).floor();
    let hi = (v * (1.0 + 1e-12)).floor();
    assert_eq!(lo, hi, "floor of 32(ln q)^4 q ambiguous for q = {}", ctx.q());
    let direct = if lo >= u64::MAX as f64 { u64::MAX } else { lo as u64 };
    via_b.min(direct)
}

#[derive(Clone, Copy, Debug)]
pub struct SearchLimits {
    pub max_nodes: u64,
    pub max_secs: f64,
}

impl Default for SearchLimits {
    fn default() -> Self {
        SearchLimits {
            max_nodes: 10_000_000,
            max_secs: 300.0,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SearchReport {
    pub q: u64,
    /// M(q) when `complete`, otherwise a lower bound.
    pub m: usize,
    /// A maximal witness set of size m, lexicographically smallest under the
    /// canonical polynomial order.
    pub witness: Vec<MonicQuad>,
    pub nodes_explored: u64,
    pub upper_bound: u64,
    pub complete: bool,
}

impl SearchReport {
    pub fn to_json(&self, ctx: &FieldCtx) -> serde_json::Value {
        json!({
            "field": ctx.header(),
            "q": self.q,
            "m": self.m,
            "witness": self.witness.iter()
                .map(|f| format!("b={} c={}", f.b, f.c))
                .collect::<Vec<_>>(),
            "nodes_explored": self.nodes_explored,
            "upper_bound": self.upper_bound,
            "complete": self.complete,
        })
    }
}

struct SearchState<'a> {
    ctx: &'a FieldCtx,
    universe: &'a [MonicQuad],
    limits: SearchLimits,
    started: Instant,
    nodes: u64,
    best: Vec<usize>,
    exhausted: bool,
}

impl SearchState<'_> {
    fn budget_left(&self) -> bool {
        self.nodes < self.limits.max_nodes
            && self.started.elapsed().as_secs_f64() < self.limits.max_secs
    }

    fn extend(&mut self, current: &mut Vec<usize>, start: usize) {
        for idx in start..self.universe.len() {
            if !self.budget_left() {
                self.exhausted = true;
                return;
            }
            current.push(idx);
            self.nodes += 1;
            let polys = current.iter().map(|&i| self.universe[i].clone()).collect();
            let inst = DISetInstance::new(self.ctx.clone(), polys)
                .expect("universe polynomials are valid");
            let di = closure_test(&inst)
                .expect("closure test cannot exceed internal bounds")
                .is_di();
            if di {
                if current.len() > self.best.len() {
                    self.best = current.clone();
                }
                self.extend(current, idx + 1);
            }
            current.pop();
            if self.exhausted {
                return;
            }
        }
    }
}

/// Depth-first exhaustive search for M(q). Returns the exact value when the
/// search completes within budget; otherwise `complete = false` and `m` is a
/// lower bound.
pub fn max_di_search(ctx: &FieldCtx, limits: SearchLimits) -> Result<SearchReport, DynIrrError> {
    let universe = enumerate_irreducible_quads(ctx);
    debug_assert!(universe.iter().all(|f| quad_is_irreducible(ctx, f)));
    let mut state = SearchState {
        ctx,
        universe: &universe,
        limits,
        started: Instant::now(),
        nodes: 0,
        best: Vec::new(),
        exhausted: false,
    };
    let mut current = Vec::new();
    state.extend(&mut current, 0);
    Ok(SearchReport {
        q: ctx.q_u64().unwrap_or(u64::MAX),
        m: state.best.len(),
        witness: state.best.iter().map(|&i| universe[i].clone()).collect(),
        nodes_explored: state.nodes,
        upper_bound: m_upper_bound(ctx),
        complete: !state.exhausted,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closure::closure_test;

    #[test]
    fn universe_counts() {
        for (p, expect) in [(3u64, 3usize), (5, 10), (13, 78)] {
            let ctx = FieldCtx::prime(p).unwrap();
            assert_eq!(enumerate_irreducible_quads(&ctx).len(), expect);
        }
    }

    #[test]
    fn f3_universe_is_x2_plus_1_shifts() {
        let ctx = FieldCtx::prime(3).unwrap();
        let polys = enumerate_irreducible_quads(&ctx);
        assert!(polys.iter().all(|f| f.c == ctx.embed(1)));
    }

    #[test]
    fn m3_is_one() {
        let ctx = FieldCtx::prime(3).unwrap();
        let report = max_di_search(&ctx, SearchLimits::default()).unwrap();
        assert!(report.complete);
        assert_eq!(report.m, 1);
        assert!(report.m as u64 <= report.upper_bound);
    }

    #[test]
    fn witness_is_di_and_subsets_pass() {
        let ctx = FieldCtx::prime(5).unwrap();
        let report = max_di_search(&ctx, SearchLimits::default()).unwrap();
        assert!(report.complete);
        assert_eq!(report.m, 3);
        let n = report.witness.len();
        for mask in 1u32..(1 << n) {
            let subset: Vec<MonicQuad> = (0..n)
                .filter(|k| mask >> k & 1 == 1)
                .map(|k| report.witness[k].clone())
                .collect();
            let inst = DISetInstance::new(ctx.clone(), subset).unwrap();
            assert!(closure_test(&inst).unwrap().is_di());
        }
    }

    #[test]
    fn search_is_deterministic() {
        let ctx = FieldCtx::prime(7).unwrap();
        let a = max_di_search(&ctx, SearchLimits::default()).unwrap();
        let b = max_di_search(&ctx, SearchLimits::default()).unwrap();
        assert_eq!(a.m, b.m);
        assert_eq!(a.witness, b.witness);
        assert_eq!(a.nodes_explored, b.nodes_explored);
    }

    #[test]
    fn budget_exhaustion_reports_lower_bound() {
        let ctx = FieldCtx::prime(13).unwrap();
        let report = max_di_search(
            &ctx,
            SearchLimits {
                max_nodes: 5,
                max_secs: 300.0,
            },
        )
        .unwrap();
        assert!(!report.complete);
    }

    #[test]
    fn upper_bound_examples() {
        let f5 = FieldCtx::prime(5).unwrap();
        assert_eq!(m_upper_bound(&f5), 50); // 2 * 5^2 under the cap convention
        let f3 = FieldCtx::prime(3).unwrap();
        assert!(m_upper_bound(&f3) >= 1);
    }
}
