//! Dynamically-irreducible sets of monic quadratics over finite fields.
//!
//! A set of polynomials over F_q is *dynamically-irreducible* when every
//! finite composition of its members (with repetition, in any order) is
//! irreducible over F_q. This crate provides:
//!
//! - [`field`]: exact F_{p^d} arithmetic for odd p, the quadratic character,
//!   norms, and a deterministic element order.
//! - [`quad`]: monic quadratics (X-b)^2 + c, formal composition, and
//!   irreducibility tests.
//! - [`closure`]: the ordered-set closure decision procedure, the r = 1
//!   cycle test, a brute-force oracle, and the iterate-set size bound.
//! - [`constructions`]: explicit large families (the Artin-Schreier family
//!   of p^2 polynomials over F_{p^p}, the size-2 pair family, the stable
//!   single polynomial) and the character-sum existence search.
//! - [`search`]: exhaustive computation of M(q), the maximum size of a
//!   dynamically-irreducible set of monic quadratics over F_q.
//! - [`format`]: the line-based polynomial-set file format used by the CLI.

pub mod closure;
pub mod constructions;
pub mod field;
pub mod format;
pub mod quad;
pub mod search;
