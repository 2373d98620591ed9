use nalgebra::{dmatrix, DMatrix};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use nfpdf_core::nf_core::random::{random_moment_spec, random_polynomial};
use nfpdf_core::nf_core::{
    averaged_shift_expectation, gaussian_expectation, isserlis_moment, lemma_residuals, nf_lhs,
    nf_rhs, parse_polynomial, GaussianMomentSpec, VarLayout,
};
use nfpdf_core::{assemble_joint, GaussianInputModel, KernelSpec, TimeFunction, TimeGrid};

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / (1.0 + a.abs())
}

#[test]
fn split_matches_hand_computed_moments() {
    // Variables (nu, u1): nu ~ N(m, c), u1 ~ N(mu, s), Cov(nu, u1) = r.
    let (m, c, mu, s, r) = (0.7, 1.3, -0.4, 0.9, 0.5);
    let layout = VarLayout::scalar(1);
    let spec = GaussianMomentSpec::new(layout, vec![m, mu], dmatrix![c, r; r, s]).unwrap();
    let f = parse_polynomial("nu^2", layout).unwrap();
    let target = layout.excitation(0, 0);
    let expected = mu * (m * m + c) + 2.0 * m * r;
    let lhs = nf_lhs(target, &f, &spec).unwrap();
    let split = nf_rhs(target, &f, &spec).unwrap();
    assert!((lhs - expected).abs() < 1e-14);
    assert!((split.mean_term - mu * (m * m + c)).abs() < 1e-14);
    assert!((split.initial_term - 2.0 * m * r).abs() < 1e-14);
    assert_eq!(split.excitation_term, 0.0);

    // E[u1 * u1^3] = E[u^4] for u ~ N(mu, s).
    let f = parse_polynomial("u1^3", layout).unwrap();
    let fourth = mu.powi(4) + 6.0 * mu * mu * s + 3.0 * s * s;
    assert!((nf_lhs(target, &f, &spec).unwrap() - fourth).abs() < 1e-13);
    assert!((nf_rhs(target, &f, &spec).unwrap().total() - fourth).abs() < 1e-13);
}

#[test]
fn isserlis_matches_standard_normal_moments() {
    let spec =
        GaussianMomentSpec::new(VarLayout::scalar(0), vec![0.0], DMatrix::identity(1, 1)).unwrap();
    let double_factorial = [1.0, 1.0, 3.0, 15.0, 105.0, 945.0, 10395.0];
    for (k, df) in double_factorial.iter().enumerate() {
        assert_eq!(isserlis_moment(&[2 * k as u16], &spec).unwrap(), *df);
        if k < 6 {
            assert_eq!(isserlis_moment(&[2 * k as u16 + 1], &spec).unwrap(), 0.0);
        }
    }
}

#[test]
fn degree_cap_is_enforced() {
    let layout = VarLayout::scalar(1);
    let spec = GaussianMomentSpec::new(layout, vec![0.0, 0.0], DMatrix::identity(2, 2)).unwrap();
    let f = parse_polynomial("nu^7 * u1^6", layout).unwrap();
    assert!(gaussian_expectation(&f, &spec).is_err());
    assert!(nf_rhs(layout.excitation(0, 0), &f, &spec).is_err());
}

#[test]
fn identity_on_assembled_joint_covariance() {
    let model = GaussianInputModel {
        m_x0: 0.3,
        c_x0x0: 0.8,
        m_xi: TimeFunction::constant(0.1),
        kernel: KernelSpec::SquaredExponential {
            variance: 1.0,
            tau: 0.5,
        },
        cross: TimeFunction::constant(0.2),
    };
    let grid = TimeGrid::uniform(0.0, 1.0, 5).unwrap();
    let spec = GaussianMomentSpec::from_joint(&assemble_joint(&model, &grid).unwrap()).unwrap();
    let layout = spec.layout();
    let f = parse_polynomial("nu * u2 * u5^2 + 0.5 * u3^3 - nu^2", layout).unwrap();
    for t in 0..5 {
        let target = layout.excitation(0, t);
        let lhs = nf_lhs(target, &f, &spec).unwrap();
        let rhs = nf_rhs(target, &f, &spec).unwrap().total();
        assert!(rel(lhs, rhs) < 1e-12, "t={t}: {lhs} vs {rhs}");
    }
}

#[test]
fn initial_value_target_is_rejected() {
    let layout = VarLayout::scalar(2);
    let spec = GaussianMomentSpec::new(layout, vec![0.0; 3], DMatrix::identity(3, 3)).unwrap();
    let f = parse_polynomial("nu", layout).unwrap();
    assert!(nf_lhs(0, &f, &spec).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn split_holds_for_random_functionals(seed in any::<u64>(), n_times in 1usize..6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let layout = VarLayout::scalar(n_times);
        let spec = random_moment_spec(layout, &mut rng).unwrap();
        let f = random_polynomial(layout, 5, 5, &mut rng);
        for t in 0..n_times {
            let target = layout.excitation(0, t);
            let lhs = nf_lhs(target, &f, &spec).unwrap();
            let rhs = nf_rhs(target, &f, &spec).unwrap().total();
            prop_assert!(rel(lhs, rhs) < 1e-9, "{} vs {}", lhs, rhs);
        }
    }

    #[test]
    fn split_holds_for_vector_layouts(seed in any::<u64>(), n_init in 1usize..3, n_comp in 1usize..3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let layout = VarLayout::vector(n_init, n_comp, 2);
        let spec = random_moment_spec(layout, &mut rng).unwrap();
        let f = random_polynomial(layout, 4, 4, &mut rng);
        let target = layout.excitation(n_comp - 1, 1);
        let lhs = nf_lhs(target, &f, &spec).unwrap();
        let rhs = nf_rhs(target, &f, &spec).unwrap().total();
        prop_assert!(rel(lhs, rhs) < 1e-9);
    }

    #[test]
    fn averaged_shift_reproduces_expectation(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let layout = VarLayout::scalar(3);
        let spec = random_moment_spec(layout, &mut rng).unwrap();
        let p = random_polynomial(layout, 6, 4, &mut rng);
        let a = gaussian_expectation(&p, &spec).unwrap();
        let b = averaged_shift_expectation(&p, &spec).unwrap();
        prop_assert!(rel(a, b) < 1e-9);
    }

    #[test]
    fn lemmata_hold(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let layout = VarLayout::scalar(2);
        let spec = random_moment_spec(layout, &mut rng).unwrap();
        let p = random_polynomial(layout, 4, 4, &mut rng);
        prop_assert!(lemma_residuals(&p, &spec).unwrap().max() < 1e-10);
    }

    #[test]
    fn display_round_trips_through_parser(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let layout = VarLayout::scalar(3);
        let p = random_polynomial(layout, 5, 5, &mut rng);
        let q = parse_polynomial(&p.to_string(), layout).unwrap();
        let spec = random_moment_spec(layout, &mut rng).unwrap();
        let (a, b) = (gaussian_expectation(&p, &spec).unwrap(), gaussian_expectation(&q, &spec).unwrap());
        prop_assert!(rel(a, b) < 1e-12);
    }
}
