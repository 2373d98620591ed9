//! The jointly Gaussian pair (initial value `X0`, excitation `Xi(.)`):
//! mean functions, autocovariance kernel and cross-covariance, their joint
//! covariance on a time grid, and exact joint sampling.

mod functions;
mod grid;
mod joint;
mod kernel;

use serde::{Deserialize, Serialize};

pub use functions::TimeFunction;
pub use grid::TimeGrid;
pub use joint::{
    assemble_joint, sample_joint, semidefinite_cholesky, CholeskyFactor, JointCovariance,
    JointSampler,
};
pub use kernel::{kernel_eval, KernelSpec, KernelTable};

use crate::error::Violation;

/// Moments of `(X0, Xi(.))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianInputModel {
    /// Mean of the initial value.
    pub m_x0: f64,
    /// Variance of the initial value.
    pub c_x0x0: f64,
    /// Mean function of the excitation.
    #[serde(default)]
    pub m_xi: TimeFunction,
    /// Autocovariance kernel of the excitation.
    pub kernel: KernelSpec,
    /// Cross-covariance `Cov(X0, Xi(s))`.
    #[serde(default)]
    pub cross: TimeFunction,
}

impl GaussianInputModel {
    /// Unit-free model with no excitation at all.
    pub fn deterministic_excitation(m_x0: f64, c_x0x0: f64) -> Self {
        GaussianInputModel {
            m_x0,
            c_x0x0,
            m_xi: TimeFunction::zero(),
            kernel: KernelSpec::Exponential {
                variance: 0.0,
                tau: 1.0,
            },
            cross: TimeFunction::zero(),
        }
    }

    /// Pointwise invariants; joint positive semidefiniteness needs a grid and is
    /// checked by [`assemble_joint`].
    pub fn violations(&self, prefix: &str) -> Vec<Violation> {
        let mut out = Vec::new();
        if !self.m_x0.is_finite() {
            out.push(Violation::new(format!("{prefix}.m_x0"), "must be finite"));
        }
        if !(self.c_x0x0.is_finite() && self.c_x0x0 >= 0.0) {
            out.push(Violation::new(
                format!("{prefix}.c_x0x0"),
                "initial variance must be finite and nonnegative",
            ));
        }
        out.extend(self.kernel.violations(&format!("{prefix}.kernel")));
        out.extend(self.m_xi.violations(&format!("{prefix}.m_xi")));
        out.extend(self.cross.violations(&format!("{prefix}.cross")));
        out
    }

    pub fn kernel(&self, s1: f64, s2: f64) -> crate::Result<f64> {
        kernel_eval(&self.kernel, s1, s2)
    }

    /// True when the excitation has no randomness and no coupling to `X0`.
    pub fn is_noise_free(&self) -> bool {
        self.kernel.is_identically_zero() && self.cross.is_identically_zero()
    }
}
