//! Response-pdf evolution equations solved by the method of lines on a
//! truncated uniform state grid: the exact equation for a linear drift and
//! the closure family of order `M` for a drift `h(x) = sum_k eta_k g_k(x)`,
//!
//! `f_t = -d/dx[(h + kappa m_Xi) f] + d^2/dx^2[(D_0 + sum_{m=1}^M D_m sum_{|alpha|=m} Phi^alpha / alpha!) f]`,
//!
//! with `phi_k(x) = eta_k (g'_k(x) - E[g'_k(X(t))])` over the terms whose
//! derivative is not constant.

mod drift;
mod operator;
mod pdf;
mod solver;

pub use drift::{BasisFunction, DriftSpec, DriftTerm};
pub use operator::{
    multi_indices, response_moments, rhs_genfpk, rhs_linear, GenFpkCoefficients, GenFpkRhs,
    ResponseMoments,
};
pub use pdf::{PdfGrid, PdfSnapshot, PdfTrajectory, SolveMetadata, StepRecord};
pub use solver::{
    initial_snapshot, solve_genfpk, solve_linear, solver_grid, step, StepReport,
    DEFAULT_STEP_MASS_DRIFT,
};
