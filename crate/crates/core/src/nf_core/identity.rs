use super::moments::{GaussianMomentSpec, MomentEngine};
use super::{MultiPolynomial, Variable};
use crate::error::{Error, Result};

/// The three pieces of the extended Novikov-Furutsu right-hand side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NfSplit {
    /// `m_Xi(t) E[F]`
    pub mean_term: f64,
    /// `sum_n C_{X0_n Xi}(t) E[dF/dnu_n]`
    pub initial_term: f64,
    /// `sum_j w_j C_{Xi Xi}(t, s_j) E[dF/du_j]` (all components)
    pub excitation_term: f64,
}

impl NfSplit {
    pub fn total(&self) -> f64 {
        self.mean_term + self.initial_term + self.excitation_term
    }
}

fn check_target(target: usize, f: &MultiPolynomial, spec: &GaussianMomentSpec) -> Result<()> {
    if f.layout() != spec.layout() {
        return Err(Error::DimensionMismatch {
            expected: spec.layout().n_vars(),
            found: f.n_vars(),
        });
    }
    if target >= spec.layout().n_vars() {
        return Err(Error::DimensionMismatch {
            expected: spec.layout().n_vars(),
            found: target + 1,
        });
    }
    match spec.layout().variable(target) {
        Variable::Excitation { .. } => Ok(()),
        Variable::Initial(_) => Err(Error::invalid(
            "nf target",
            format!("variable {target} is an initial value, not an excitation sample"),
        )),
    }
}

/// `E[Xi(t) F]`, computed directly by Wick pairing.
pub fn nf_lhs(target: usize, f: &MultiPolynomial, spec: &GaussianMomentSpec) -> Result<f64> {
    check_target(target, f, spec)?;
    let u_t = MultiPolynomial::variable(f.layout(), target)?;
    MomentEngine::new(spec).expectation(&u_t.checked_mul(f)?)
}

/// Mean term, initial-value term and excitation term of the extended
/// correlation split of `E[Xi(t) F]`. Terms whose covariance (or mean) is
/// exactly zero are skipped, so they come out as exact zeros.
pub fn nf_rhs(target: usize, f: &MultiPolynomial, spec: &GaussianMomentSpec) -> Result<NfSplit> {
    check_target(target, f, spec)?;
    spec.check_degree(f.degree() + 1)?;
    let layout = spec.layout();
    let mut engine = MomentEngine::new(spec);

    let m_t = spec.mean()[target];
    let mean_term = if m_t == 0.0 {
        0.0
    } else {
        m_t * engine.expectation(f)?
    };

    let mut initial_term = 0.0;
    for a in layout.initial_vars() {
        let c = spec.cov(target, a);
        if c != 0.0 {
            initial_term += c * engine.expectation(&f.partial(a)?)?;
        }
    }

    let mut excitation_term = 0.0;
    for j in layout.excitation_vars() {
        let c = spec.weight(j) * spec.cov(target, j);
        if c != 0.0 {
            excitation_term += c * engine.expectation(&f.partial(j)?)?;
        }
    }

    Ok(NfSplit {
        mean_term,
        initial_term,
        excitation_term,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nf_core::VarLayout;
    use nalgebra::DMatrix;

    #[test]
    fn constant_functional_gives_mean() {
        let s = GaussianMomentSpec::new(
            VarLayout::scalar(1),
            vec![0.0, 0.8],
            DMatrix::identity(2, 2),
        )
        .unwrap();
        let one = MultiPolynomial::constant(s.layout(), 1.0);
        assert!((nf_lhs(1, &one, &s).unwrap() - 0.8).abs() < 1e-15);
        let split = nf_rhs(1, &one, &s).unwrap();
        assert_eq!(split.total(), 0.8);
        assert_eq!(split.initial_term, 0.0);
        assert_eq!(split.excitation_term, 0.0);
    }

    #[test]
    fn worked_split() {
        // m_X0 = 1, m_Xi = 0, C_X0Xi(t) = 0.5, C_XiXi(t, s1) = 0.3 with t = s2.
        let cov = DMatrix::from_row_slice(3, 3, &[1.0, 0.2, 0.5, 0.2, 1.0, 0.3, 0.5, 0.3, 1.0]);
        let s = GaussianMomentSpec::new(VarLayout::scalar(2), vec![1.0, 0.0, 0.0], cov).unwrap();
        let f = MultiPolynomial::monomial(s.layout(), vec![1, 1, 0], 1.0).unwrap();
        let split = nf_rhs(2, &f, &s).unwrap();
        assert_eq!(split.mean_term, 0.0);
        assert!((split.initial_term - 0.0).abs() < 1e-15);
        assert!((split.excitation_term - 0.3).abs() < 1e-15);
        assert!((nf_lhs(2, &f, &s).unwrap() - 0.3).abs() < 1e-15);
    }

    #[test]
    fn initial_target_is_rejected() {
        let s =
            GaussianMomentSpec::new(VarLayout::scalar(1), vec![0.0; 2], DMatrix::identity(2, 2))
                .unwrap();
        let one = MultiPolynomial::constant(s.layout(), 1.0);
        assert!(nf_lhs(0, &one, &s).is_err());
    }
}
