//! Shared fixtures for the criterion benchmarks.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use nfpdf_core::nf_core::random::{random_moment_spec, random_polynomial};
use nfpdf_core::{GaussianMomentSpec, MultiPolynomial, ScenarioConfig, VarLayout};

pub const LINEAR: &str = include_str!("../../../scenarios/linear.toml");
pub const NONLINEAR: &str = include_str!("../../../scenarios/nonlinear.toml");

pub fn scenario(text: &str) -> ScenarioConfig {
    ScenarioConfig::from_toml_str(text, None).expect("shipped scenario is valid")
}

/// A fixed random polynomial of degree `<= degree` over `n_times` excitation
/// samples, with a matching random Gaussian spec.
pub fn polynomial_case(
    n_times: usize,
    degree: u32,
    seed: u64,
) -> (MultiPolynomial, GaussianMomentSpec) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let layout = VarLayout::scalar(n_times);
    let spec = random_moment_spec(layout, &mut rng).expect("random spec is valid");
    (random_polynomial(layout, degree, 6, &mut rng), spec)
}
