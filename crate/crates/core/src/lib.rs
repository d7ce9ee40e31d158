//! Exact and high-precision evaluation of the gcd-sum averages
//!
//! ```text
//! M_r(x; f) = sum_{k <= x} k^-(r+1) sum_{j=1}^{k} j^r f(gcd(j, k))
//! ```
//!
//! for `f` in `{id, phi, psi}`, their asymptotic main terms, the refined
//! error terms built from the divisor-problem remainders `Delta` and
//! `Delta_{-2m}`, and explicit-formula sums over zeta zeros.
//!
//! Modules, bottom up:
//!
//! - [`arith`]: sieved arithmetic functions and Dirichlet convolution.
//! - [`special`]: Bernoulli numbers, Euler's constant, `zeta` and `zeta'`.
//! - [`exact`]: `M_r(x; f)` in exact rationals, by brute force and by the
//!   Möbius-regrouped identity.
//! - [`error_terms`]: divisor summatory functions, `Delta`, `Delta_{-2m}`,
//!   Möbius partial sums and Möbius-weighted `Delta` sums.
//! - [`expansions`]: main terms, residuals and their refined approximations.
//! - [`zeros`]: zero tables, explicit formulas and `J_{-lambda}(T)`.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::type_complexity, clippy::suspicious_arithmetic_impl, clippy::needless_range_loop)]

pub mod arith;
pub mod error;
pub mod error_terms;
pub mod exact;
pub mod expansions;
pub mod precision;
pub mod regression;
pub mod special;
pub mod zeros;

pub use error::{Error, Result};
pub use precision::{HpComplex, PrecisionContext};
