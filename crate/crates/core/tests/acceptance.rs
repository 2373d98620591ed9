//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit when any
//! criterion fails. Run with `cargo test -p nfpdf-core --test acceptance`.

use std::process::ExitCode;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use nfpdf_core::effective_noise::{
    effective_intensity_linear, effective_intensity_linear_at, generalized_intensities,
    ResponseMomentHistory,
};
use nfpdf_core::genfpk::{solve_genfpk, solve_linear, PdfSnapshot, PdfTrajectory};
use nfpdf_core::linear_exact::{closed_form_series, exact_pdf, moment_odes_integrate};
use nfpdf_core::mc_oracle::{
    estimate_pdf, l1_distance, nf_empirical_check, simulate, variational_check, DensityEstimator,
    PathEnsemble,
};
use nfpdf_core::nf_core::random::{random_moment_spec, random_polynomial};
use nfpdf_core::nf_core::{
    averaged_shift_expectation, gaussian_expectation, lemma_residuals, nf_lhs, nf_rhs, VarLayout,
};
use nfpdf_core::{GaussianInputModel, KernelSpec, ScenarioConfig, TimeFunction, TimeGrid};

const LINEAR: &str = include_str!("../../../scenarios/linear.toml");
const NONLINEAR: &str = include_str!("../../../scenarios/nonlinear.toml");

// Pinned tolerances.
const NF_REL_TOL: f64 = 1e-9;
const SHIFT_REL_TOL: f64 = 1e-9;
const LEMMA_TOL: f64 = 1e-10;
const INTENSITY_TOL: f64 = 1e-6;
const INTENSITY_ORDER_RATIO: f64 = 3.5;
const REDUCTION_TOL: f64 = 1e-12;
const MOMENT_ROUTES_TOL: f64 = 1e-6;
const PDE_L1_TOL: f64 = 1e-3;
const PDE_REFINEMENT_RATIO: f64 = 3.0;
const MC_LINEAR_L1_TOL: f64 = 0.02;
const MC_NONLINEAR_L1_TOL: f64 = 0.05;
const VARIATIONAL_TOL: f64 = 1e-3;
const VARIATIONAL_LINEAR_TOL: f64 = 1e-6;
const NF_EMPIRICAL_Z: f64 = 5.0;

const N_PATHS: usize = 100_000;

struct Outcome {
    pass: bool,
    detail: String,
}

fn scenario(text: &str) -> ScenarioConfig {
    ScenarioConfig::from_toml_str(text, None).expect("shipped scenario is valid")
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / (1.0 + a.abs())
}

fn nf_identity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut scalar = 0.0f64;
    for _ in 0..500 {
        let layout = VarLayout::scalar(rng.random_range(1..=8));
        let spec = random_moment_spec(layout, &mut rng).unwrap();
        let f = random_polynomial(layout, 6, 6, &mut rng);
        let target = layout.excitation(0, rng.random_range(0..layout.n_times));
        let lhs = nf_lhs(target, &f, &spec).unwrap();
        let rhs = nf_rhs(target, &f, &spec).unwrap().total();
        scalar = scalar.max(rel(lhs, rhs));
    }
    let mut vector = 0.0f64;
    for _ in 0..200 {
        let layout = VarLayout::vector(2, 2, 2);
        let spec = random_moment_spec(layout, &mut rng).unwrap();
        let f = random_polynomial(layout, 6, 6, &mut rng);
        let target = layout.excitation(rng.random_range(0..2), rng.random_range(0..2));
        let lhs = nf_lhs(target, &f, &spec).unwrap();
        let rhs = nf_rhs(target, &f, &spec).unwrap().total();
        vector = vector.max(rel(lhs, rhs));
    }
    Outcome {
        pass: scalar <= NF_REL_TOL && vector <= NF_REL_TOL,
        detail: format!(
            "extended NF identity: scalar 500 trials max rel {scalar:.2e}, vector (2 initial, 2 components, 2 times) 200 trials max rel {vector:.2e}, tol {NF_REL_TOL:.0e}"
        ),
    }
}

fn averaged_shift() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut worst = 0.0f64;
    for _ in 0..500 {
        let layout = VarLayout::scalar(rng.random_range(1..=6));
        let spec = random_moment_spec(layout, &mut rng).unwrap();
        let p = random_polynomial(layout, 8, 6, &mut rng);
        let oracle = gaussian_expectation(&p, &spec).unwrap();
        let shifted = averaged_shift_expectation(&p, &spec).unwrap();
        worst = worst.max(rel(oracle, shifted));
    }
    Outcome {
        pass: worst <= SHIFT_REL_TOL,
        detail: format!(
            "averaged shift expectation vs Isserlis: 500 trials degree <= 8, max rel {worst:.2e}, tol {SHIFT_REL_TOL:.0e}"
        ),
    }
}

fn lemmata() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let mut worst = 0.0f64;
    let mut worst_name = "";
    for _ in 0..200 {
        let layout = VarLayout::scalar(rng.random_range(1..=4));
        let spec = random_moment_spec(layout, &mut rng).unwrap();
        let p = random_polynomial(layout, 5, 5, &mut rng);
        let report = lemma_residuals(&p, &spec).unwrap();
        for (name, v) in report.entries() {
            if v > worst {
                worst = v;
                worst_name = name;
            }
        }
    }
    Outcome {
        pass: worst <= LEMMA_TOL,
        detail: format!(
            "operator lemmata incl. 6 orderings: 200 trials, max residual {worst:.2e} ({worst_name}), tol {LEMMA_TOL:.0e}"
        ),
    }
}

fn effective_intensity() -> Outcome {
    let model = GaussianInputModel {
        m_x0: 0.0,
        c_x0x0: 1.0,
        m_xi: TimeFunction::zero(),
        kernel: KernelSpec::Exponential {
            variance: 1.0,
            tau: 1.0,
        },
        cross: TimeFunction::zero(),
    };
    let exact = (1.0 - (-2.0f64).exp()) / 2.0;
    let err = |n: usize| {
        let g = TimeGrid::uniform(0.0, 1.0, n).unwrap();
        (effective_intensity_linear_at(&model, -1.0, 1.0, g.points()).unwrap() - exact).abs()
    };
    let (coarse, fine) = (err(1000), err(1999));
    let on_2000 = err(2000);
    let ratio = coarse / fine;

    let mut correlated = model.clone();
    correlated.cross = TimeFunction::Exponential {
        amplitude: 0.5,
        rate: -1.0,
        origin: 0.0,
    };
    let grid = TimeGrid::uniform(0.0, 1.0, 2000).unwrap();
    let d = effective_intensity_linear(&correlated, -1.0, 1.0, &grid).unwrap();
    let history = ResponseMomentHistory::constant(grid.points(), -1.0);
    let mut reduction = 0.0f64;
    for n in (0..grid.len()).step_by(37).chain([grid.len() - 1]) {
        let g = generalized_intensities(&correlated, &history, 1.0, n, 0).unwrap();
        reduction = reduction.max((g[0] - d[n]).abs() / (1.0 + d[n].abs()));
    }
    Outcome {
        pass: on_2000 <= INTENSITY_TOL && ratio >= INTENSITY_ORDER_RATIO && reduction <= REDUCTION_TOL,
        detail: format!(
            "effective intensity: |D - (1-e^-2)/2| = {on_2000:.2e} on 2000 points (tol {INTENSITY_TOL:.0e}), halving-step ratio {ratio:.2} (min {INTENSITY_ORDER_RATIO}), order-0 reduction {reduction:.2e} (tol {REDUCTION_TOL:.0e})"
        ),
    }
}

fn l1_to_exact(cfg: &ScenarioConfig, traj: &PdfTrajectory) -> Vec<f64> {
    let sc = cfg.linear_scenario().unwrap();
    traj.snapshots[1..]
        .iter()
        .map(|s| {
            let exact = exact_pdf(&sc, s.time, &s.grid.nodes()).unwrap();
            l1_distance(s, &PdfSnapshot::new(s.grid, s.time, exact).unwrap()).unwrap()
        })
        .collect()
}

fn linear_pipeline() -> Outcome {
    let mut cfg = scenario(LINEAR);
    cfg.time.n_points = 200;
    cfg.solver.output_times.clear();
    let sc = cfg.linear_scenario().unwrap();
    let ode = moment_odes_integrate(&sc).unwrap();
    let closed = closed_form_series(&sc).unwrap();
    let (dm, dv) = ode.max_abs_diff(&closed);

    let mut coarse = scenario(LINEAR);
    coarse.time.n_points = 2001;
    coarse.pdf_grid.n_x = 1024;
    coarse.solver.output_times = vec![0.5, 1.0, 1.5, 2.0];
    let mut fine = coarse.clone();
    fine.time.n_points = 4001;
    fine.pdf_grid.n_x = 2047;
    // Same physical domain so both runs resolve the same problem.
    let g = nfpdf_core::genfpk::solver_grid(&coarse).unwrap();
    coarse.pdf_grid.x_min = Some(g.x_min);
    coarse.pdf_grid.x_max = Some(g.x_max);
    fine.pdf_grid.x_min = Some(g.x_min);
    fine.pdf_grid.x_max = Some(g.x_max);
    let e_coarse = l1_to_exact(&coarse, &solve_linear(&coarse).unwrap());
    let e_fine = l1_to_exact(&fine, &solve_linear(&fine).unwrap());
    let worst = e_coarse.iter().copied().fold(0.0, f64::max);
    let min_ratio = e_coarse
        .iter()
        .zip(&e_fine)
        .map(|(a, b)| a / b)
        .fold(f64::INFINITY, f64::min);
    Outcome {
        pass: dm <= MOMENT_ROUTES_TOL
            && dv <= MOMENT_ROUTES_TOL
            && worst <= PDE_L1_TOL
            && min_ratio >= PDE_REFINEMENT_RATIO,
        detail: format!(
            "linear pipeline: ODE vs closed form |dm| {dm:.2e} |dv| {dv:.2e} (tol {MOMENT_ROUTES_TOL:.0e}); PDE vs Gaussian L1 max {worst:.2e} over t = 0.5..2 (tol {PDE_L1_TOL:.0e}); 2x refinement ratio min {min_ratio:.2} (min {PDE_REFINEMENT_RATIO})"
        ),
    }
}

fn solver_vs_mc(cfg: &ScenarioConfig, ens: &PathEnsemble) -> f64 {
    let traj = solve_genfpk(cfg).unwrap();
    let nodes = cfg.time.nodes();
    traj.snapshots[1..]
        .iter()
        .map(|s| {
            let idx = nodes
                .iter()
                .position(|&t| (t - s.time).abs() < 1e-9)
                .unwrap();
            let kde = estimate_pdf(ens, idx, s.grid, DensityEstimator::GaussianKde).unwrap();
            l1_distance(s, &kde).unwrap()
        })
        .fold(0.0, f64::max)
}

fn monte_carlo(linear_ens: &PathEnsemble) -> Outcome {
    let linear = scenario(LINEAR);
    let l_lin = solver_vs_mc(&linear, linear_ens);
    let nonlinear = scenario(NONLINEAR);
    let ens = simulate(&nonlinear, N_PATHS, nonlinear.mc.seed).unwrap();
    let l_non = solver_vs_mc(&nonlinear, &ens);
    Outcome {
        pass: l_lin <= MC_LINEAR_L1_TOL && l_non <= MC_NONLINEAR_L1_TOL,
        detail: format!(
            "solver vs Monte Carlo KDE at {N_PATHS} paths: linear L1 max {l_lin:.4} (tol {MC_LINEAR_L1_TOL}), cubic M=2 L1 max {l_non:.4} (tol {MC_NONLINEAR_L1_TOL})"
        ),
    }
}

fn variational() -> Outcome {
    let mut linear = scenario(LINEAR);
    linear.time.t_end = 1.0;
    linear.time.n_points = 1001;
    linear.solver.output_times.clear();
    let lin = variational_check(&linear, 20, 1e-5, 5).unwrap();
    let lin_worst = lin
        .max_rel_err_initial
        .max(lin.max_rel_err_excitation.unwrap_or(f64::INFINITY));
    let cubic = scenario(NONLINEAR);
    let non = variational_check(&cubic, 20, 1e-5, 5).unwrap();
    let non_worst = non
        .max_rel_err_initial
        .max(non.max_rel_err_excitation.unwrap_or(f64::INFINITY));
    Outcome {
        pass: lin_worst <= VARIATIONAL_LINEAR_TOL && non_worst <= VARIATIONAL_TOL,
        detail: format!(
            "response derivatives by finite differences (eps 1e-5, 20 probes): linear max rel {lin_worst:.2e} (tol {VARIATIONAL_LINEAR_TOL:.0e}), cubic max rel {non_worst:.2e} (tol {VARIATIONAL_TOL:.0e})"
        ),
    }
}

fn nf_empirical(ens: &PathEnsemble) -> Outcome {
    let cfg = scenario(LINEAR);
    let mut worst = 0.0f64;
    for idx in cfg.output_indices().unwrap() {
        let r = nf_empirical_check(&cfg, ens, idx).unwrap();
        worst = worst.max(r.z_score());
    }
    Outcome {
        pass: worst <= NF_EMPIRICAL_Z,
        detail: format!(
            "empirical NF split for F = X(t) at {N_PATHS} paths: max |lhs - rhs| = {worst:.2} standard errors (tol {NF_EMPIRICAL_Z})"
        ),
    }
}

fn main() -> ExitCode {
    let start = Instant::now();
    let mut results: Vec<(u32, Outcome)> = vec![
        (1, nf_identity()),
        (2, averaged_shift()),
        (3, lemmata()),
        (4, effective_intensity()),
        (5, linear_pipeline()),
    ];
    let linear = scenario(LINEAR);
    let shared = simulate(&linear, N_PATHS, linear.mc.seed).unwrap();
    results.push((6, monte_carlo(&shared)));
    results.push((7, variational()));
    results.push((8, nf_empirical(&shared)));

    let mut failed = 0;
    for (n, o) in &results {
        let tag = if o.pass { "PASS" } else { "FAIL" };
        println!("criterion {n} {tag} {}", o.detail);
        failed += usize::from(!o.pass);
    }
    println!(
        "acceptance: {} of {} criteria passed in {:.1}s",
        results.len() - failed,
        results.len(),
        start.elapsed().as_secs_f64()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
