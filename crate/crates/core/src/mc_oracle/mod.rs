//! Monte Carlo ground truth: response paths driven by exact joint draws of
//! `(X0, Xi)`, density estimates, and finite-difference probes of the
//! response derivatives.

mod density;
mod simulate;
mod variational;

use serde::{Deserialize, Serialize};

pub use density::{estimate_pdf, estimate_pdf_from_samples, l1_distance, silverman_bandwidth};
pub use simulate::{integrate_path, simulate, simulate_recording, PathEnsemble};
pub use variational::{
    nf_empirical_check, variational_check, NfEmpiricalReport, ProbeResult, VariationalReport,
};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DensityEstimator {
    /// Cell counts, one cell of width `dx` centred on each grid node.
    Histogram,
    /// Gaussian kernels with Silverman's bandwidth.
    #[default]
    GaussianKde,
}
