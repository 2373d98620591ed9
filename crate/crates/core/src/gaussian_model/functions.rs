use serde::{Deserialize, Serialize};

use crate::error::Violation;

/// A deterministic scalar function of time: excitation means and
/// cross-covariances are given in one of these closed forms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TimeFunction {
    Constant {
        value: f64,
    },
    /// `amplitude * exp(rate * (s - origin))`
    Exponential {
        amplitude: f64,
        rate: f64,
        #[serde(default)]
        origin: f64,
    },
    /// `offset + amplitude * sin(angular_frequency * s + phase)`
    Sinusoid {
        #[serde(default)]
        offset: f64,
        amplitude: f64,
        angular_frequency: f64,
        #[serde(default)]
        phase: f64,
    },
    /// `sum_k coefficients[k] * s^k`
    Polynomial {
        coefficients: Vec<f64>,
    },
}

impl Default for TimeFunction {
    fn default() -> Self {
        TimeFunction::zero()
    }
}

impl TimeFunction {
    pub fn zero() -> Self {
        TimeFunction::Constant { value: 0.0 }
    }

    pub fn constant(value: f64) -> Self {
        TimeFunction::Constant { value }
    }

    pub fn eval(&self, s: f64) -> f64 {
        match self {
            TimeFunction::Constant { value } => *value,
            TimeFunction::Exponential {
                amplitude,
                rate,
                origin,
            } => amplitude * (rate * (s - origin)).exp(),
            TimeFunction::Sinusoid {
                offset,
                amplitude,
                angular_frequency,
                phase,
            } => offset + amplitude * (angular_frequency * s + phase).sin(),
            TimeFunction::Polynomial { coefficients } => {
                coefficients.iter().rev().fold(0.0, |acc, c| acc * s + c)
            }
        }
    }

    pub fn is_identically_zero(&self) -> bool {
        match self {
            TimeFunction::Constant { value } => *value == 0.0,
            TimeFunction::Exponential { amplitude, .. } => *amplitude == 0.0,
            TimeFunction::Sinusoid {
                offset, amplitude, ..
            } => *offset == 0.0 && *amplitude == 0.0,
            TimeFunction::Polynomial { coefficients } => coefficients.iter().all(|c| *c == 0.0),
        }
    }

    pub(crate) fn violations(&self, field: &str) -> Vec<Violation> {
        let params: Vec<f64> = match self {
            TimeFunction::Constant { value } => vec![*value],
            TimeFunction::Exponential {
                amplitude,
                rate,
                origin,
            } => vec![*amplitude, *rate, *origin],
            TimeFunction::Sinusoid {
                offset,
                amplitude,
                angular_frequency,
                phase,
            } => vec![*offset, *amplitude, *angular_frequency, *phase],
            TimeFunction::Polynomial { coefficients } => coefficients.clone(),
        };
        if params.iter().all(|p| p.is_finite()) {
            Vec::new()
        } else {
            vec![Violation::new(field, "parameters must be finite")]
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn evaluations() {
        let e = TimeFunction::Exponential {
            amplitude: 0.5,
            rate: -1.0,
            origin: 0.0,
        };
        assert!((e.eval(1.0) - 0.5 * (-1.0f64).exp()).abs() < 1e-15);
        let p = TimeFunction::Polynomial {
            coefficients: vec![1.0, 0.0, 2.0],
        };
        assert_eq!(p.eval(3.0), 19.0);
        let s = TimeFunction::Sinusoid {
            offset: 0.2,
            amplitude: 1.0,
            angular_frequency: 2.0,
            phase: 0.0,
        };
        assert!((s.eval(0.25) - (0.2 + 0.5f64.sin())).abs() < 1e-15);
        assert!(TimeFunction::zero().is_identically_zero());
    }
}
