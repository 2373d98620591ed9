//! Randomised sweeps of the exact identities, one independent RNG stream per
//! trial so the outcome does not depend on the thread count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::random::{random_moment_spec, random_polynomial};
use super::{averaged_shift_expectation, gaussian_expectation, lemma_residuals, nf_lhs, nf_rhs};
use super::{VarLayout, DEFAULT_DEGREE_CAP};
use crate::error::{Error, Result};

/// Relative tolerance of the identity and shift sweeps, scaled by `1 + |lhs|`.
pub const IDENTITY_REL_TOL: f64 = 1e-9;
/// Absolute tolerance on the coefficient residuals of the operator lemmata.
pub const LEMMA_TOL: f64 = 1e-10;

const MAX_TERMS: usize = 6;
const MAX_SCALAR_TIMES: usize = 8;

/// One compared pair. `lhs` and `rhs` are the two routes, `tol` the bound on
/// their absolute difference.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub check: String,
    pub trial: usize,
    pub lhs: f64,
    pub rhs: f64,
    pub tol: f64,
}

impl CheckOutcome {
    pub fn error(&self) -> f64 {
        (self.lhs - self.rhs).abs()
    }

    pub fn passed(&self) -> bool {
        self.error() <= self.tol
    }
}

#[derive(Clone, Copy)]
enum Stream {
    Scalar = 1,
    Vector = 2,
    Shift = 3,
    Lemma = 4,
}

fn trial_rng(seed: u64, stream: Stream, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((stream as u64) << 32) | trial as u64);
    rng
}

fn check_degree(max_degree: u32, headroom: u32) -> Result<()> {
    if max_degree + headroom > DEFAULT_DEGREE_CAP {
        return Err(Error::DegreeCapExceeded {
            degree: max_degree + headroom,
            cap: DEFAULT_DEGREE_CAP,
        });
    }
    Ok(())
}

fn identity_outcome(check: &str, trial: usize, lhs: f64, rhs: f64) -> CheckOutcome {
    CheckOutcome {
        check: check.into(),
        trial,
        lhs,
        rhs,
        tol: IDENTITY_REL_TOL * (1.0 + lhs.abs()),
    }
}

/// `trials` scalar trials (1 to 8 grid times) and `trials` vector trials
/// (two initial values, two components, two times) of the extended
/// correlation split, polynomials of degree `<= max_degree`.
pub fn nf_sweep(trials: usize, max_degree: u32, seed: u64) -> Result<Vec<CheckOutcome>> {
    check_degree(max_degree, 1)?;
    let run = |stream: Stream, trial: usize| -> Result<CheckOutcome> {
        let mut rng = trial_rng(seed, stream, trial);
        let (layout, name) = match stream {
            Stream::Vector => (VarLayout::vector(2, 2, 2), "nf_identity_vector"),
            _ => (
                VarLayout::scalar(rng.random_range(1..=MAX_SCALAR_TIMES)),
                "nf_identity",
            ),
        };
        let spec = random_moment_spec(layout, &mut rng)?;
        let f = random_polynomial(layout, max_degree, MAX_TERMS, &mut rng);
        let target = layout.excitation(
            rng.random_range(0..layout.n_components),
            rng.random_range(0..layout.n_times),
        );
        let lhs = nf_lhs(target, &f, &spec)?;
        let rhs = nf_rhs(target, &f, &spec)?.total();
        Ok(identity_outcome(name, trial, lhs, rhs))
    };
    [Stream::Scalar, Stream::Vector]
        .into_iter()
        .flat_map(|s| (0..trials).map(move |t| (s, t)))
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|(s, t)| run(s, t))
        .collect()
}

/// Averaged shift expectation against the Wick-pairing oracle.
pub fn shift_sweep(trials: usize, max_degree: u32, seed: u64) -> Result<Vec<CheckOutcome>> {
    check_degree(max_degree, 0)?;
    (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = trial_rng(seed, Stream::Shift, trial);
            let layout = VarLayout::scalar(rng.random_range(1..=MAX_SCALAR_TIMES));
            let spec = random_moment_spec(layout, &mut rng)?;
            let p = random_polynomial(layout, max_degree, MAX_TERMS, &mut rng);
            let lhs = gaussian_expectation(&p, &spec)?;
            let rhs = averaged_shift_expectation(&p, &spec)?;
            Ok(identity_outcome("averaged_shift", trial, lhs, rhs))
        })
        .collect()
}

/// Every operator lemma residual of every trial, reported as `lhs` against a
/// right-hand side of zero.
pub fn lemma_sweep(trials: usize, max_degree: u32, seed: u64) -> Result<Vec<CheckOutcome>> {
    check_degree(max_degree, 1)?;
    let per_trial: Vec<Vec<CheckOutcome>> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = trial_rng(seed, Stream::Lemma, trial);
            let layout = VarLayout::scalar(rng.random_range(1..=4));
            let spec = random_moment_spec(layout, &mut rng)?;
            let p = random_polynomial(layout, max_degree, MAX_TERMS, &mut rng);
            let report = lemma_residuals(&p, &spec)?;
            Ok(report
                .entries()
                .into_iter()
                .map(|(name, r)| CheckOutcome {
                    check: format!("lemma.{name}"),
                    trial,
                    lhs: r,
                    rhs: 0.0,
                    tol: LEMMA_TOL,
                })
                .collect())
        })
        .collect::<Result<_>>()?;
    Ok(per_trial.into_iter().flatten().collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sweeps_pass_and_are_reproducible() {
        let a = nf_sweep(20, 4, 3).unwrap();
        assert_eq!(a.len(), 40);
        assert!(a.iter().all(CheckOutcome::passed));
        assert_eq!(a, nf_sweep(20, 4, 3).unwrap());
        assert!(shift_sweep(20, 6, 3)
            .unwrap()
            .iter()
            .all(CheckOutcome::passed));
        let l = lemma_sweep(5, 4, 3).unwrap();
        assert_eq!(l.len(), 40);
        assert!(l.iter().all(CheckOutcome::passed));
    }

    #[test]
    fn degree_beyond_cap_is_rejected() {
        assert!(nf_sweep(1, 12, 0).is_err());
        assert!(shift_sweep(1, 13, 0).is_err());
    }
}
