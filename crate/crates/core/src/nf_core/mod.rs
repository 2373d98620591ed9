//! Exact finite-dimensional functional calculus.
//!
//! A function-functional `G[nu; u(.)]` is represented by a polynomial in the
//! initial-value variables `nu` and the excitation samples `u_n = u(s_n)`.
//! The Volterra derivative `delta/delta u(s_n)` becomes the partial
//! derivative in `u_n`, and integrals over `s` become weighted sums. With
//! unit weights and covariance entries read as the covariances of the
//! sampled variables, every identity below is an exact algebraic identity,
//! so it can be checked to rounding error against the Wick-pairing oracle.

mod identity;
mod lemma;
mod moments;
mod parse;
mod polynomial;
pub mod random;
mod shift;
pub mod sweep;

pub use identity::{nf_lhs, nf_rhs, NfSplit};
pub use lemma::{lemma_residuals, LemmaReport};
pub use moments::{
    gaussian_expectation, isserlis_moment, GaussianMomentSpec, MomentEngine, DEFAULT_DEGREE_CAP,
};
pub use parse::parse_polynomial;
pub use polynomial::{Monomial, MultiPolynomial, VarLayout, Variable};
pub use shift::{
    apply_averaged_shift, apply_generator, apply_quadratic_shift, averaged_shift_expectation,
    ShiftKind,
};
