use serde::{Deserialize, Serialize};

use crate::error::Violation;

/// A basis function `g_k` of the drift expansion `h(x) = sum_k eta_k g_k(x)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BasisFunction {
    /// `x^exponent`
    Power {
        exponent: u32,
    },
    Sin,
    Cos,
    Tanh,
}

impl BasisFunction {
    pub fn value(&self, x: f64) -> f64 {
        match *self {
            BasisFunction::Power { exponent } => x.powi(exponent as i32),
            BasisFunction::Sin => x.sin(),
            BasisFunction::Cos => x.cos(),
            BasisFunction::Tanh => x.tanh(),
        }
    }

    pub fn derivative(&self, x: f64) -> f64 {
        match *self {
            BasisFunction::Power { exponent: 0 } => 0.0,
            BasisFunction::Power { exponent } => exponent as f64 * x.powi(exponent as i32 - 1),
            BasisFunction::Sin => x.cos(),
            BasisFunction::Cos => -x.sin(),
            BasisFunction::Tanh => {
                let c = x.cosh();
                1.0 / (c * c)
            }
        }
    }

    /// `Some(c)` when `g'(x) = c` for every `x`.
    pub fn constant_derivative(&self) -> Option<f64> {
        match *self {
            BasisFunction::Power { exponent: 0 } => Some(0.0),
            BasisFunction::Power { exponent: 1 } => Some(1.0),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriftTerm {
    pub coefficient: f64,
    pub basis: BasisFunction,
}

/// `h(x) = sum_k eta_k g_k(x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DriftSpec {
    pub terms: Vec<DriftTerm>,
}

impl DriftSpec {
    pub fn new(terms: Vec<DriftTerm>) -> Self {
        DriftSpec { terms }
    }

    /// `h(x) = eta x`.
    pub fn linear(eta: f64) -> Self {
        DriftSpec::new(vec![DriftTerm {
            coefficient: eta,
            basis: BasisFunction::Power { exponent: 1 },
        }])
    }

    /// Polynomial drift `sum_p c_p x^p` from `(exponent, coefficient)` pairs.
    pub fn polynomial(terms: &[(u32, f64)]) -> Self {
        DriftSpec::new(
            terms
                .iter()
                .map(|&(exponent, coefficient)| DriftTerm {
                    coefficient,
                    basis: BasisFunction::Power { exponent },
                })
                .collect(),
        )
    }

    pub fn h(&self, x: f64) -> f64 {
        self.terms
            .iter()
            .map(|t| t.coefficient * t.basis.value(x))
            .sum()
    }

    pub fn h_prime(&self, x: f64) -> f64 {
        self.terms
            .iter()
            .map(|t| t.coefficient * t.basis.derivative(x))
            .sum()
    }

    /// `eta` when the drift is exactly `eta x` (terms `x^1` only).
    pub fn linear_rate(&self) -> Option<f64> {
        self.terms
            .iter()
            .all(|t| t.basis == BasisFunction::Power { exponent: 1 })
            .then(|| self.terms.iter().map(|t| t.coefficient).sum())
    }

    /// Sum of the coefficients of `x^1` terms: the rate of the linear part.
    pub fn linear_part(&self) -> f64 {
        self.terms
            .iter()
            .filter(|t| t.basis == BasisFunction::Power { exponent: 1 })
            .map(|t| t.coefficient)
            .sum()
    }

    /// Indices of the terms whose derivative is not constant; these carry the
    /// closure multi-index.
    pub fn nonlinear_terms(&self) -> Vec<usize> {
        (0..self.terms.len())
            .filter(|&k| self.terms[k].basis.constant_derivative().is_none())
            .collect()
    }

    pub fn violations(&self, field: &str) -> Vec<Violation> {
        let mut out = Vec::new();
        if self.terms.is_empty() {
            out.push(Violation::new(field, "needs at least one basis term"));
        }
        for (k, t) in self.terms.iter().enumerate() {
            if !t.coefficient.is_finite() {
                out.push(Violation::new(
                    format!("{field}[{k}].coefficient"),
                    "must be finite",
                ));
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derivatives_match_finite_differences() {
        let fs = [
            BasisFunction::Power { exponent: 0 },
            BasisFunction::Power { exponent: 1 },
            BasisFunction::Power { exponent: 3 },
            BasisFunction::Sin,
            BasisFunction::Cos,
            BasisFunction::Tanh,
        ];
        for f in fs {
            for x in [-1.3, 0.0, 0.4, 2.1] {
                let h = 1e-6;
                let fd = (f.value(x + h) - f.value(x - h)) / (2.0 * h);
                assert!((fd - f.derivative(x)).abs() < 1e-8, "{f:?} at {x}");
            }
        }
    }

    #[test]
    fn linear_detection() {
        assert_eq!(DriftSpec::linear(-2.0).linear_rate(), Some(-2.0));
        let cubic = DriftSpec::polynomial(&[(1, -1.0), (3, -0.5)]);
        assert_eq!(cubic.linear_rate(), None);
        assert_eq!(cubic.linear_part(), -1.0);
        assert_eq!(cubic.nonlinear_terms(), vec![1]);
        assert_eq!(cubic.h(2.0), -2.0 - 4.0);
        assert_eq!(cubic.h_prime(2.0), -1.0 - 6.0);
    }
}
