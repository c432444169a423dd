//! Exact finite-difference calculus on finite abelian p-groups and finite
//! rngs of prime exponent.
//!
//! The crate is organised bottom-up:
//!
//! - [`groups`]: shapes `⊕ Z/p^{α_i}` and mixed-radix element indexing.
//! - [`calculus`]: function tables, difference operators, functional degree.
//! - [`binomial`]: binomial-series (Newton) representations, proper lifts,
//!   lift divisibility audits and Wilson sums.
//! - [`rings`]: structure-constant rngs, `F_q`, sparse polynomials.
//! - [`verifier`]: zero counting, the p-adic bound formulas and instance
//!   verification campaigns.

pub mod binomial;
pub mod calculus;
mod error;
pub mod ext;
pub mod groups;
pub mod rings;
pub mod verifier;

pub use error::{Error, Result};
pub use ext::{ord_p, Degree, FunctionalDegree, Valuation};
pub use groups::{GroupElement, PGroupShape};
