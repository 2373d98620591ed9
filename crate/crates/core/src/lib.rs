//! Gaussian correlation splitting and response-pdf evolution for random
//! differential equations driven by coloured Gaussian noise that is
//! correlated with a Gaussian initial value.
//!
//! The crate is organised bottom-up:
//!
//! * [`gaussian_model`] assembles and samples the joint law of the initial
//!   value `X0` and the excitation `Xi(s)` on a time grid.
//! * [`nf_core`] is an exact finite-dimensional calculus: sparse polynomials
//!   standing in for function-functionals, the quadratic averaged shift
//!   operators, Gaussian expectation by differentiation and both sides of the
//!   extended Novikov-Furutsu identity.
//! * [`effective_noise`] computes effective noise intensities by quadrature.
//! * [`linear_exact`] holds closed forms for the linear equation.
//! * [`genfpk`] solves the response-pdf evolution equations by the method of
//!   lines.
//! * [`mc_oracle`] is the Monte Carlo ground truth.
//! * [`scenario`] is the run configuration shared by the solver, the oracle
//!   and the command line front end.

pub mod effective_noise;
pub mod error;
pub mod gaussian_model;
pub mod genfpk;
pub mod linear_exact;
pub mod mc_oracle;
pub mod nf_core;
pub mod quadrature;
pub mod scenario;

pub use error::{Error, Result, Violation};
pub use gaussian_model::{
    assemble_joint, kernel_eval, sample_joint, GaussianInputModel, JointCovariance, JointSampler,
    KernelSpec, KernelTable, TimeFunction, TimeGrid,
};
pub use genfpk::{
    BasisFunction, DriftSpec, DriftTerm, PdfGrid, PdfSnapshot, PdfTrajectory, SolveMetadata,
};
pub use linear_exact::{GaussianMomentTrajectory, LinearScenario};
pub use mc_oracle::{DensityEstimator, PathEnsemble};
pub use nf_core::{GaussianMomentSpec, MultiPolynomial, ShiftKind, VarLayout};
pub use scenario::ScenarioConfig;

/// Library version recorded in run metadata.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Name of the random number generator behind every seeded draw. Recorded in
/// run metadata.
pub const RNG_ALGORITHM: &str = "ChaCha8Rng (rand_chacha 0.9), seed_from_u64 + one stream per draw";
