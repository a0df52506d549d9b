//! Symbol calculus and heat-trace asymptotics for generators of
//! subordinate Brownian motion on Euclidean space.
//!
//! A subordinator with Lévy density `m(t) ~ t^(-1-α) Σ p_k t^k` (rapid decay
//! at infinity, negative shift constant `m̄`) gives rise to a Bernstein
//! function `f` and a shifted generator with classical elliptic symbol
//! `σ̃(ξ) = f(|ξ|²) - m̄`.  This crate computes, exactly at the level of
//! expansion coefficients:
//!
//! * the homogeneous symbol expansion `Σ α_k |ξ|^(2α-2k)` ([`symbolic`]),
//! * the parameter-dependent parametrix of `λ - σ̃` and, by residue
//!   calculus, the heat-operator and complex-power symbol expansions,
//! * the pole table of the regularized zeta function `ζ(z) = TR(Ã^{-z})`
//!   and the short-time heat-trace expansion, including `t^l log t` terms
//!   when the order `2α` is rational ([`spectral`]),
//!
//! and cross-validates every symbolic output against independent numerics:
//!
//! * double-exponential quadrature of the defining integrals ([`quad`],
//!   [`bernstein`]),
//! * direct quadrature of the regularized heat trace, numeric meromorphic
//!   continuation of `ζ`, and asymptotic-coefficient fits ([`oracle`]),
//! * Monte Carlo simulation of the subordinator and of subordinate
//!   Brownian motion ([`montecarlo`]).
//!
//! The crate is a library first: see the `examples/` directory for one
//! runnable example per capability.  A thin `levyheat` binary drives batch
//! runs from a config file (see [`cli`]).

pub mod bernstein;
pub mod cli;
pub mod error;
pub mod montecarlo;
pub mod oracle;
pub mod quad;
pub mod special;
pub mod spectral;
pub mod symbolic;

mod taylor;

pub use error::{Error, Result};

/// Exact rational scalar used for orders, exponents and pole locations.
pub type Rat = num_rational::Ratio<i64>;

/// Convenience constructor for [`Rat`].
pub fn rat(numer: i64, denom: i64) -> Rat {
    Rat::new(numer, denom)
}
