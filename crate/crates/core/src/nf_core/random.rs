//! Random polynomial functionals and random valid Gaussian specs for the
//! identity sweeps.

use nalgebra::DMatrix;
use rand::Rng;

use super::moments::GaussianMomentSpec;
use super::polynomial::Monomial;
use super::{MultiPolynomial, VarLayout};
use crate::error::Result;

/// Up to `max_terms` random monomials of total degree `<= max_degree`, with
/// coefficients uniform in `[-1, 1]`.
pub fn random_polynomial<R: Rng + ?Sized>(
    layout: VarLayout,
    max_degree: u32,
    max_terms: usize,
    rng: &mut R,
) -> MultiPolynomial {
    let n = layout.n_vars();
    let mut p = MultiPolynomial::zero(layout);
    let n_terms = rng.random_range(1..=max_terms.max(1));
    for _ in 0..n_terms {
        let degree = rng.random_range(0..=max_degree);
        let mut e = vec![0u16; n];
        for _ in 0..degree {
            e[rng.random_range(0..n)] += 1;
        }
        let c: f64 = rng.random_range(-1.0..1.0);
        p.add_term(Monomial::new(e), c);
    }
    p
}

/// Random mean in `[-1, 1]^n` and covariance `A A^T / n` with `A` uniform
/// in `[-1.5, 1.5]`. One spec in four is rank-deficient.
pub fn random_moment_spec<R: Rng + ?Sized>(
    layout: VarLayout,
    rng: &mut R,
) -> Result<GaussianMomentSpec> {
    let n = layout.n_vars();
    let rank = if rng.random_bool(0.25) && n > 1 {
        rng.random_range(1..n)
    } else {
        n
    };
    let a = DMatrix::from_fn(n, rank, |_, _| rng.random_range(-1.5..1.5));
    let mut cov = &a * a.transpose() / n as f64;
    // Exact symmetry.
    for i in 0..n {
        for j in 0..i {
            cov[(i, j)] = cov[(j, i)];
        }
    }
    let mean = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    GaussianMomentSpec::new(layout, mean, cov)
}
