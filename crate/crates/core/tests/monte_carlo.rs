use proptest::prelude::*;

use nfpdf_core::genfpk::DriftSpec;
use nfpdf_core::linear_exact::closed_form_series;
use nfpdf_core::mc_oracle::{integrate_path, simulate, simulate_recording};
use nfpdf_core::{
    assemble_joint, sample_joint, GaussianInputModel, JointSampler, KernelSpec, ScenarioConfig,
    TimeFunction, TimeGrid,
};

const LINEAR: &str = include_str!("../../../scenarios/linear.toml");

fn small_linear() -> ScenarioConfig {
    let mut cfg = ScenarioConfig::from_toml_str(LINEAR, None).unwrap();
    cfg.time.n_points = 81;
    cfg
}

#[test]
fn ensemble_moments_match_closed_form() {
    let cfg = small_linear();
    let ens = simulate(&cfg, 20_000, 3).unwrap();
    let exact = closed_form_series(&cfg.linear_scenario().unwrap()).unwrap();
    let se = ens.standard_error();
    for n in (0..cfg.time.n_points).step_by(10) {
        let z = (ens.mean[n] - exact.mean[n]).abs() / se[n].max(1e-300);
        assert!(z < 5.0, "mean at node {n}: z = {z}");
        // Variance of the sample variance for Gaussian data.
        let se_var = exact.variance[n] * (2.0 / (ens.n_paths as f64 - 1.0)).sqrt();
        let zv = (ens.variance[n] - exact.variance[n]).abs() / se_var;
        assert!(zv < 5.0, "variance at node {n}: z = {zv}");
    }
}

#[test]
fn results_are_reproducible_from_the_seed() {
    let cfg = small_linear();
    let a = simulate(&cfg, 3000, 42).unwrap();
    let b = simulate(&cfg, 3000, 42).unwrap();
    assert_eq!(a, b);
    let c = simulate(&cfg, 3000, 43).unwrap();
    assert_ne!(a.mean, c.mean);
    // Path p depends only on (seed, p), not on the ensemble size.
    let d = simulate(&cfg, 1500, 42).unwrap();
    assert_eq!(a.path(1234), d.path(1234));
}

#[test]
fn storage_cap_drops_full_paths_but_keeps_records() {
    let mut cfg = small_linear();
    cfg.mc.storage_cap = 10;
    let ens = simulate_recording(&cfg, 2000, 1, &[0, 40, 80]).unwrap();
    assert!(ens.paths.is_none());
    assert_eq!(ens.values_at(40).unwrap().len(), 2000);
    assert!(ens.values_at(41).is_err());
}

#[test]
fn blowup_is_reported() {
    let mut cfg = small_linear();
    cfg.drift = DriftSpec::polynomial(&[(3, 5.0)]);
    cfg.input_model.m_x0 = 3.0;
    assert!(simulate(&cfg, 500, 1).is_err());
}

fn cubic_decay_exact(x0: f64, t: f64) -> f64 {
    // x' = -x - x^3  =>  x^2 = x0^2 e^{-2t} / (1 + x0^2 (1 - e^{-2t})).
    let e = (-2.0 * t).exp();
    x0.signum() * (x0 * x0 * e / (1.0 + x0 * x0 * (1.0 - e))).sqrt()
}

#[test]
fn noise_free_integration_is_fourth_order() {
    let drift = DriftSpec::polynomial(&[(1, -1.0), (3, -1.0)]);
    let err = |n: usize| {
        let times = TimeGrid::uniform(0.0, 2.0, n).unwrap().points().to_vec();
        let mut out = vec![0.0; n];
        integrate_path(&drift, 0.0, &times, 1.5, &vec![0.0; n], 1e6, &mut out).unwrap();
        (out[n - 1] - cubic_decay_exact(1.5, 2.0)).abs()
    };
    let (coarse, fine) = (err(21), err(41));
    assert!(coarse < 1e-4);
    assert!(coarse / fine > 12.0, "ratio {}", coarse / fine);
}

#[test]
fn sampled_covariance_matches_assembled_matrix() {
    let model = GaussianInputModel {
        m_x0: 0.5,
        c_x0x0: 0.7,
        m_xi: TimeFunction::constant(-0.3),
        kernel: KernelSpec::SquaredExponential {
            variance: 1.2,
            tau: 0.4,
        },
        cross: TimeFunction::Exponential {
            amplitude: 0.3,
            rate: -1.0,
            origin: 0.0,
        },
    };
    let grid = TimeGrid::uniform(0.0, 1.0, 6).unwrap();
    let cov = assemble_joint(&model, &grid).unwrap();
    let n = 40_000;
    let s = sample_joint(&cov, n, 9);
    let d = cov.dim();
    for a in 0..d {
        let ma = s.column(a).mean();
        let sa = cov.matrix[(a, a)].sqrt();
        assert!((ma - cov.mean[a]).abs() < 6.0 * sa / (n as f64).sqrt());
        for b in 0..d {
            let mb = s.column(b).mean();
            let c = s
                .column(a)
                .iter()
                .zip(s.column(b).iter())
                .map(|(x, y)| (x - ma) * (y - mb))
                .sum::<f64>()
                / (n as f64 - 1.0);
            let exact = cov.matrix[(a, b)];
            let se = ((cov.matrix[(a, a)] * cov.matrix[(b, b)] + exact * exact) / n as f64).sqrt();
            assert!((c - exact).abs() < 6.0 * se, "({a},{b}): {c} vs {exact}");
        }
    }
}

#[test]
fn sampler_draws_depend_only_on_index() {
    let model = GaussianInputModel::deterministic_excitation(0.0, 1.0);
    let grid = TimeGrid::uniform(0.0, 1.0, 4).unwrap();
    let cov = assemble_joint(&model, &grid).unwrap();
    let a = JointSampler::new(&cov, 5);
    let b = JointSampler::new(&cov, 5);
    assert_eq!(a.draw(17), b.draw(17));
    assert_ne!(a.draw(17), a.draw(18));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn sub_grid_covariance_is_principal_submatrix(
        variance in 0.1f64..3.0,
        tau in 0.05f64..2.0,
        stride in 2usize..5,
    ) {
        let model = GaussianInputModel {
            m_x0: 0.0,
            c_x0x0: 1.0,
            m_xi: TimeFunction::zero(),
            kernel: KernelSpec::Exponential { variance, tau },
            cross: TimeFunction::zero(),
        };
        let grid = TimeGrid::uniform(0.0, 2.0, 13).unwrap();
        let full = assemble_joint(&model, &grid).unwrap();
        let sub_grid = grid.thinned(stride);
        let sub = assemble_joint(&model, &sub_grid).unwrap();
        let idx: Vec<usize> = sub_grid
            .points()
            .iter()
            .map(|&t| grid.index_of(t, 1e-12).unwrap())
            .collect();
        prop_assert_eq!(full.principal_submatrix(&idx), sub.matrix);
    }

    #[test]
    fn noise_free_paths_follow_the_ode(x0 in -2.0f64..2.0) {
        let drift = DriftSpec::polynomial(&[(1, -1.0), (3, -1.0)]);
        let times = TimeGrid::uniform(0.0, 1.0, 201).unwrap().points().to_vec();
        let mut out = vec![0.0; times.len()];
        integrate_path(&drift, 0.0, &times, x0, &vec![0.0; times.len()], 1e6, &mut out).unwrap();
        for (t, x) in times.iter().zip(&out) {
            prop_assert!((x - cubic_decay_exact(x0, *t)).abs() < 1e-8);
        }
    }
}
