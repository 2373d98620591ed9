use std::fmt::Write as _;

use anyhow::{anyhow, Context, Result};

use nfpdf_core::genfpk::{self, solver_grid, PdfTrajectory};
use nfpdf_core::linear_exact::closed_form_series;
use nfpdf_core::mc_oracle::{self, estimate_pdf, l1_distance, simulate};
use nfpdf_core::nf_core::sweep::{lemma_sweep, nf_sweep, shift_sweep, CheckOutcome};
use nfpdf_core::scenario::parse_scenario;
use nfpdf_core::{PdfSnapshot, ScenarioConfig};

use crate::artifacts::{checks_csv, pdf_csv, Check, RunDir};
use crate::{RunArgs, Status};

const NF_TRIALS: usize = 500;
const NF_MAX_DEGREE: u32 = 6;
const LEMMA_TRIALS: usize = 200;
const LEMMA_MAX_DEGREE: u32 = 5;
const VARIATIONAL_PROBES: usize = 20;
const VARIATIONAL_EPS: f64 = 1e-5;
const VARIATIONAL_TOL: f64 = 1e-3;
const VARIATIONAL_LINEAR_TOL: f64 = 1e-6;
const NODE_TOL: f64 = 1e-9;

/// Parses the scenario and applies the command-line overrides.
fn load(args: &RunArgs) -> Result<ScenarioConfig> {
    let path = args.scenario.as_ref().ok_or_else(|| {
        anyhow!(nfpdf_core::Error::InvalidInput {
            what: "arguments".into(),
            reason: "this command needs --scenario <path>".into(),
        })
    })?;
    let mut cfg = parse_scenario(path).with_context(|| format!("reading {}", path.display()))?;
    if let Some(seed) = args.seed {
        cfg.mc.seed = seed;
    }
    if let Some(n) = args.n_paths {
        cfg.mc.n_paths = n;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn sweep_run(
    args: &RunArgs,
    command: &str,
    outcomes: Vec<CheckOutcome>,
    summary: &[(&str, usize, f64)],
) -> Result<Status> {
    let seed = args.seed.unwrap_or(0);
    let mut run = RunDir::create(&args.out, command, command, seed)?;
    run.write("checks.csv", &checks_csv(&outcomes))?;
    let mut table = Vec::new();
    for &(name, n, worst) in summary {
        println!("{name}: {n} trials, max |lhs - rhs| / tol = {worst:.3e}");
        table.push(serde_json::json!({"check": name, "trials": n, "max_error_over_tol": worst}));
    }
    run.record("summary", table)?;
    let checks: Vec<Check> = outcomes.iter().map(Check::from).collect();
    run.finish(&checks)
}

fn worst(outcomes: &[CheckOutcome], select: impl Fn(&str) -> bool) -> (usize, f64) {
    let hits: Vec<&CheckOutcome> = outcomes.iter().filter(|o| select(&o.check)).collect();
    let w = hits.iter().map(|o| o.error() / o.tol).fold(0.0, f64::max);
    (hits.len(), w)
}

pub fn verify_nf(args: &RunArgs) -> Result<Status> {
    let trials = args.trials.unwrap_or(NF_TRIALS);
    let degree = args.max_degree.unwrap_or(NF_MAX_DEGREE);
    let seed = args.seed.unwrap_or(0);
    let mut outcomes = nf_sweep(trials, degree, seed)?;
    outcomes.extend(shift_sweep(trials, degree, seed)?);
    let scalar = worst(&outcomes, |c| c == "nf_identity");
    let vector = worst(&outcomes, |c| c == "nf_identity_vector");
    let shift = worst(&outcomes, |c| c == "averaged_shift");
    sweep_run(
        args,
        "verify-nf",
        outcomes,
        &[
            ("nf_identity", scalar.0, scalar.1),
            ("nf_identity_vector", vector.0, vector.1),
            ("averaged_shift", shift.0, shift.1),
        ],
    )
}

pub fn verify_lemmata(args: &RunArgs) -> Result<Status> {
    let trials = args.trials.unwrap_or(LEMMA_TRIALS);
    let degree = args.max_degree.unwrap_or(LEMMA_MAX_DEGREE);
    let outcomes = lemma_sweep(trials, degree, args.seed.unwrap_or(0))?;
    let w = worst(&outcomes, |c| c.starts_with("lemma."));
    sweep_run(args, "verify-lemmata", outcomes, &[("lemma", trials, w.1)])
}

fn clip_check(traj: &PdfTrajectory, cfg: &ScenarioConfig) -> Check {
    Check {
        name: "clipped_mass".into(),
        lhs: traj.metadata.clipped_mass,
        rhs: 0.0,
        tol: cfg.solver.tolerances.clipped_mass,
    }
}

fn moments_csv(snapshots: &[PdfSnapshot]) -> String {
    let mut s = String::from("t,mean,var,mass\n");
    for snap in snapshots {
        let (m, v) = snap.moments();
        let _ = writeln!(s, "{},{},{},{}", snap.time, m, v, snap.mass);
    }
    s
}

fn write_solution(run: &RunDir, traj: &PdfTrajectory) -> Result<()> {
    run.write("pdf.csv", &pdf_csv(&traj.snapshots))?;
    run.write("moments.csv", &moments_csv(&traj.snapshots))?;
    run.write_json("solver.json", &traj.metadata)
}

pub fn solve_linear(args: &RunArgs) -> Result<Status> {
    let cfg = load(args)?;
    let mut run = RunDir::create(&args.out, "solve-linear", &cfg.name, cfg.mc.seed)?;
    run.write_config(&cfg)?;
    let traj = genfpk::solve_linear(&cfg)?;
    write_solution(&run, &traj)?;
    let exact = closed_form_series(&cfg.linear_scenario()?)?;
    let mut s = String::from("t,mean,var\n");
    for ((t, m), v) in exact.times.iter().zip(&exact.mean).zip(&exact.variance) {
        writeln!(s, "{t},{m},{v}")?;
    }
    run.write("exact_moments.csv", &s)?;
    run.record("steps", traj.metadata.n_steps)?;
    println!(
        "{} snapshots, {} steps",
        traj.snapshots.len(),
        traj.metadata.n_steps
    );
    run.finish(&[clip_check(&traj, &cfg)])
}

pub fn solve_genfpk(args: &RunArgs) -> Result<Status> {
    let cfg = load(args)?;
    let mut run = RunDir::create(&args.out, "solve-genfpk", &cfg.name, cfg.mc.seed)?;
    run.write_config(&cfg)?;
    let traj = genfpk::solve_genfpk(&cfg)?;
    write_solution(&run, &traj)?;
    run.record("order", cfg.solver.order)?;
    run.record("steps", traj.metadata.n_steps)?;
    if let Some(t) = traj.metadata.first_negative_diffusion_time {
        println!("warning: negative effective diffusion first at t={t}");
    }
    println!(
        "{} snapshots, {} steps",
        traj.snapshots.len(),
        traj.metadata.n_steps
    );
    run.finish(&[clip_check(&traj, &cfg)])
}

fn node_index(cfg: &ScenarioConfig, t: f64) -> Result<usize> {
    let grid = cfg
        .time
        .grid()?
        .ok_or_else(|| anyhow!("scenario has a single time node"))?;
    grid.index_of(t, NODE_TOL)
        .ok_or_else(|| anyhow!("output time {t} is not a grid node"))
}

pub fn mc(args: &RunArgs) -> Result<Status> {
    let cfg = load(args)?;
    let mut run = RunDir::create(&args.out, "mc", &cfg.name, cfg.mc.seed)?;
    run.write_config(&cfg)?;
    let ens = simulate(&cfg, cfg.mc.n_paths, cfg.mc.seed)?;
    let mut s = String::from("t,mean,var,n\n");
    for (k, t) in ens.grid.points().iter().enumerate() {
        writeln!(s, "{t},{},{},{}", ens.mean[k], ens.variance[k], ens.n_paths)?;
    }
    run.write("ensemble.csv", &s)?;
    let grid = solver_grid(&cfg)?;
    let snaps = cfg
        .output_indices()?
        .into_iter()
        .map(|i| estimate_pdf(&ens, i, grid, cfg.mc.estimator))
        .collect::<nfpdf_core::Result<Vec<_>>>()?;
    run.write("pdf.csv", &pdf_csv(&snaps))?;
    run.record("n_paths", ens.n_paths)?;
    run.record("estimator", cfg.mc.estimator)?;
    println!("{} paths on {} nodes", ens.n_paths, ens.n_points());
    run.finish(&[])
}

pub fn compare(args: &RunArgs) -> Result<Status> {
    let cfg = load(args)?;
    let mut run = RunDir::create(&args.out, "compare", &cfg.name, cfg.mc.seed)?;
    run.write_config(&cfg)?;
    let traj = genfpk::solve_genfpk(&cfg)?;
    let ens = simulate(&cfg, cfg.mc.n_paths, cfg.mc.seed)?;
    let tol = cfg.solver.tolerances.compare_l1;
    let mut table = String::from("t,l1\n");
    let mut checks = vec![clip_check(&traj, &cfg)];
    let mut mc_snaps = Vec::new();
    println!("{:>12} {:>12}", "t", "L1");
    for snap in traj.snapshots.iter().filter(|s| s.time > cfg.time.t0) {
        let est = estimate_pdf(
            &ens,
            node_index(&cfg, snap.time)?,
            snap.grid,
            cfg.mc.estimator,
        )?;
        let l1 = l1_distance(snap, &est)?;
        println!("{:>12} {:>12.6}", snap.time, l1);
        writeln!(table, "{},{}", snap.time, l1)?;
        checks.push(Check {
            name: format!("l1[t={}]", snap.time),
            lhs: l1,
            rhs: 0.0,
            tol,
        });
        mc_snaps.push(est);
    }
    run.write("l1.csv", &table)?;
    write_solution(&run, &traj)?;
    run.write("mc_pdf.csv", &pdf_csv(&mc_snaps))?;
    run.record("n_paths", ens.n_paths)?;
    run.record("l1_tolerance", tol)?;
    run.finish(&checks)
}

pub fn variational_check(args: &RunArgs) -> Result<Status> {
    let cfg = load(args)?;
    let mut run = RunDir::create(&args.out, "variational-check", &cfg.name, cfg.mc.seed)?;
    run.write_config(&cfg)?;
    let n_probe = args.trials.unwrap_or(VARIATIONAL_PROBES);
    let report = mc_oracle::variational_check(&cfg, n_probe, VARIATIONAL_EPS, cfg.mc.seed)?;
    let rel = if cfg.drift.linear_rate().is_some() {
        VARIATIONAL_LINEAR_TOL
    } else {
        VARIATIONAL_TOL
    };
    let mut s = String::from(
        "draw,fd_initial,formula_initial,bump_index,fd_excitation,formula_excitation\n",
    );
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    let mut checks = Vec::new();
    for p in &report.probes {
        writeln!(
            s,
            "{},{},{},{},{},{}",
            p.draw_index,
            p.fd_initial,
            p.formula_initial,
            p.bump_index.map(|j| j.to_string()).unwrap_or_default(),
            opt(p.fd_excitation),
            opt(p.formula_excitation)
        )?;
        checks.push(Check {
            name: format!("initial_derivative[{}]", p.draw_index),
            lhs: p.fd_initial,
            rhs: p.formula_initial,
            tol: rel * p.formula_initial.abs(),
        });
        if let (Some(fd), Some(exact)) = (p.fd_excitation, p.formula_excitation) {
            checks.push(Check {
                name: format!("excitation_derivative[{}]", p.draw_index),
                lhs: fd,
                rhs: exact,
                tol: rel * exact.abs(),
            });
        }
    }
    run.write("probes.csv", &s)?;
    if let Some(n) = &report.notice {
        println!("note: {n}");
    }
    println!(
        "max relative error: initial {:.3e}, excitation {}",
        report.max_rel_err_initial,
        report
            .max_rel_err_excitation
            .map(|e| format!("{e:.3e}"))
            .unwrap_or_else(|| "skipped".into())
    );
    run.record("relative_tolerance", rel)?;
    run.record("report", &report)?;
    run.finish(&checks)
}
