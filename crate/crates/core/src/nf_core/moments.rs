use std::collections::HashMap;

use nalgebra::DMatrix;

use super::{MultiPolynomial, VarLayout};
use crate::error::{Error, Result};
use crate::gaussian_model::{semidefinite_cholesky, JointCovariance};

/// Default cap on the total degree of a Gaussian moment. Degree 12 has
/// 10395 pair partitions.
pub const DEFAULT_DEGREE_CAP: u32 = 12;

/// Mean and covariance of the Gaussian variables behind a [`VarLayout`],
/// plus the quadrature weights that stand in for `ds` in the excitation
/// operators (unit weights give the exact finite-dimensional identities).
#[derive(Debug, Clone)]
pub struct GaussianMomentSpec {
    layout: VarLayout,
    mean: Vec<f64>,
    cov: DMatrix<f64>,
    time_weights: Vec<f64>,
    degree_cap: u32,
}

impl GaussianMomentSpec {
    pub fn new(layout: VarLayout, mean: Vec<f64>, cov: DMatrix<f64>) -> Result<Self> {
        let n = layout.n_vars();
        if mean.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: mean.len(),
            });
        }
        if cov.nrows() != n || cov.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: cov.nrows(),
            });
        }
        let scale = cov.abs().max().max(1.0);
        if (&cov - cov.transpose()).abs().max() > 1e-12 * scale {
            return Err(Error::invalid("moment spec", "covariance is not symmetric"));
        }
        semidefinite_cholesky(&cov)?;
        Ok(GaussianMomentSpec {
            layout,
            mean,
            cov,
            time_weights: vec![1.0; layout.n_times],
            degree_cap: DEFAULT_DEGREE_CAP,
        })
    }

    /// Scalar layout over the joint covariance's grid, unit weights.
    pub fn from_joint(joint: &JointCovariance) -> Result<Self> {
        Self::new(
            VarLayout::scalar(joint.grid.len()),
            joint.mean.as_slice().to_vec(),
            joint.matrix.clone(),
        )
    }

    /// Uses per-time quadrature weights in the excitation operators.
    pub fn with_time_weights(mut self, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != self.layout.n_times {
            return Err(Error::DimensionMismatch {
                expected: self.layout.n_times,
                found: weights.len(),
            });
        }
        self.time_weights = weights;
        Ok(self)
    }

    pub fn with_degree_cap(mut self, cap: u32) -> Self {
        self.degree_cap = cap;
        self
    }

    pub fn layout(&self) -> VarLayout {
        self.layout
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn cov(&self, a: usize, b: usize) -> f64 {
        self.cov[(a, b)]
    }

    pub fn covariance(&self) -> &DMatrix<f64> {
        &self.cov
    }

    pub fn degree_cap(&self) -> u32 {
        self.degree_cap
    }

    /// Quadrature weight attached to variable `index`; 1 for initial values.
    pub fn weight(&self, index: usize) -> f64 {
        match self.layout.variable(index) {
            super::Variable::Initial(_) => 1.0,
            super::Variable::Excitation { time, .. } => self.time_weights[time],
        }
    }

    pub(crate) fn check_degree(&self, degree: u32) -> Result<()> {
        if degree > self.degree_cap {
            Err(Error::DegreeCapExceeded {
                degree,
                cap: self.degree_cap,
            })
        } else {
            Ok(())
        }
    }
}

/// Memoised Gaussian moments for one spec.
pub struct MomentEngine<'a> {
    spec: &'a GaussianMomentSpec,
    central: HashMap<Vec<u16>, f64>,
}

impl<'a> MomentEngine<'a> {
    pub fn new(spec: &'a GaussianMomentSpec) -> Self {
        MomentEngine {
            spec,
            central: HashMap::new(),
        }
    }

    /// `E[prod (X_i - m_i)^{k_i}]` by Wick pairing: pair the first variable
    /// with every remaining factor.
    fn central_moment(&mut self, k: &[u16]) -> f64 {
        let degree: u32 = k.iter().map(|&e| e as u32).sum();
        if degree == 0 {
            return 1.0;
        }
        if degree % 2 == 1 {
            return 0.0;
        }
        if let Some(&v) = self.central.get(k) {
            return v;
        }
        let first = k.iter().position(|&e| e > 0).unwrap();
        let mut rest = k.to_vec();
        rest[first] -= 1;
        let mut total = 0.0;
        for j in 0..rest.len() {
            if rest[j] == 0 {
                continue;
            }
            let c = self.spec.cov[(first, j)];
            if c == 0.0 {
                continue;
            }
            let mult = rest[j] as f64;
            rest[j] -= 1;
            total += mult * c * self.central_moment(&rest);
            rest[j] += 1;
        }
        self.central.insert(k.to_vec(), total);
        total
    }

    /// `E[prod X_i^{e_i}]`, expanding each factor around its mean.
    pub fn raw_moment(&mut self, exponents: &[u16]) -> Result<f64> {
        let n = self.spec.layout.n_vars();
        if exponents.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: exponents.len(),
            });
        }
        self.spec
            .check_degree(exponents.iter().map(|&e| e as u32).sum())?;
        let mean = &self.spec.mean;
        let mut k = vec![0u16; n];
        let mut total = 0.0;
        loop {
            let central_degree: u32 = k.iter().map(|&e| e as u32).sum();
            if central_degree.is_multiple_of(2) {
                let mut coeff = 1.0;
                for i in 0..n {
                    let free = exponents[i] - k[i];
                    if free > 0 {
                        coeff *= binomial(exponents[i], k[i]) * mean[i].powi(free as i32);
                    }
                }
                if coeff != 0.0 {
                    total += coeff * self.central_moment(&k);
                }
            }
            // Odometer over 0 <= k <= exponents.
            let mut i = 0;
            loop {
                if i == n {
                    return Ok(total);
                }
                if k[i] < exponents[i] {
                    k[i] += 1;
                    break;
                }
                k[i] = 0;
                i += 1;
            }
        }
    }

    pub fn expectation(&mut self, p: &MultiPolynomial) -> Result<f64> {
        if p.layout() != self.spec.layout {
            return Err(Error::DimensionMismatch {
                expected: self.spec.layout.n_vars(),
                found: p.n_vars(),
            });
        }
        let mut total = 0.0;
        for (m, c) in p.terms() {
            total += c * self.raw_moment(m.exponents())?;
        }
        Ok(total)
    }
}

fn binomial(n: u16, k: u16) -> f64 {
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Exact Gaussian mixed moment `E[prod X_i^{e_i}]` (Isserlis/Wick).
pub fn isserlis_moment(exponents: &[u16], spec: &GaussianMomentSpec) -> Result<f64> {
    MomentEngine::new(spec).raw_moment(exponents)
}

/// `E[p(X)]` for jointly Gaussian `X`, summed term by term.
pub fn gaussian_expectation(p: &MultiPolynomial, spec: &GaussianMomentSpec) -> Result<f64> {
    MomentEngine::new(spec).expectation(p)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single(var: f64, mean: f64) -> GaussianMomentSpec {
        GaussianMomentSpec::new(
            VarLayout::scalar(0),
            vec![mean],
            DMatrix::from_element(1, 1, var),
        )
        .unwrap()
    }

    #[test]
    fn low_order_moments() {
        let s = single(1.0, 0.0);
        assert_eq!(isserlis_moment(&[2], &s).unwrap(), 1.0);
        let s = single(2.5, 0.0);
        assert!((isserlis_moment(&[4], &s).unwrap() - 3.0 * 6.25).abs() < 1e-12);
        assert_eq!(isserlis_moment(&[5], &s).unwrap(), 0.0);
    }

    #[test]
    fn noncentral_moments() {
        // E[X^3] = m^3 + 3 m s^2
        let s = single(2.0, 1.5);
        let expect = 1.5f64.powi(3) + 3.0 * 1.5 * 2.0;
        assert!((isserlis_moment(&[3], &s).unwrap() - expect).abs() < 1e-12);
    }

    #[test]
    fn single_pairing() {
        let rho = 0.37;
        let cov = DMatrix::from_row_slice(2, 2, &[1.0, rho, rho, 1.0]);
        let s = GaussianMomentSpec::new(VarLayout::scalar(1), vec![0.0, 0.0], cov).unwrap();
        let p = MultiPolynomial::monomial(VarLayout::scalar(1), vec![1, 1], 1.0).unwrap();
        assert!((gaussian_expectation(&p, &s).unwrap() - rho).abs() < 1e-15);
        let c = MultiPolynomial::constant(VarLayout::scalar(1), 4.5);
        assert_eq!(gaussian_expectation(&c, &s).unwrap(), 4.5);
    }

    #[test]
    fn degree_cap() {
        let s = single(1.0, 0.0).with_degree_cap(4);
        assert!(matches!(
            isserlis_moment(&[6], &s),
            Err(Error::DegreeCapExceeded { degree: 6, cap: 4 })
        ));
        assert!(isserlis_moment(&[12], &single(1.0, 0.0)).is_ok());
        assert!(isserlis_moment(&[13], &single(1.0, 0.0)).is_err());
    }

    #[test]
    fn rejects_invalid_specs() {
        let asym = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.4, 1.0]);
        assert!(GaussianMomentSpec::new(VarLayout::scalar(1), vec![0.0; 2], asym).is_err());
        let indef = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(GaussianMomentSpec::new(VarLayout::scalar(1), vec![0.0; 2], indef).is_err());
    }
}
