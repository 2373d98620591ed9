use super::operator::{diffusion_bracket, stencil};
use super::{
    response_moments, DriftSpec, GenFpkCoefficients, PdfGrid, PdfSnapshot, PdfTrajectory,
    SolveMetadata, StepRecord,
};
use crate::effective_noise::{effective_intensity_linear_at, generalized_intensities_on};
use crate::error::{Error, Result};
use crate::gaussian_model::GaussianInputModel;
use crate::linear_exact::gaussian_pdf;
use crate::quadrature::{cumulative_trapezoid, trapezoid_uniform};
use crate::scenario::{ScenarioConfig, Tolerances};

/// Default largest accepted one-step mass change.
pub const DEFAULT_STEP_MASS_DRIFT: f64 = 1e-2;
/// Half-width of the automatic state domain in envelope standard deviations.
const ENVELOPE_SDS: f64 = 10.0;
/// Time nodes used to trace the automatic domain envelope.
const ENVELOPE_POINTS: usize = 201;
/// Domain fraction at each end counted as boundary mass.
const BOUNDARY_FRACTION: f64 = 0.01;

/// Mass bookkeeping of one accepted step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepReport {
    /// `|mass - incoming mass|` straight after the Runge-Kutta update.
    pub raw_drift: f64,
    /// Mass added by zeroing negative values.
    pub clipped: f64,
}

/// One classical Runge-Kutta step of `f_t = rhs(f, t)`, then negatives are
/// clipped and the incoming mass restored. Fails when the clipped mass
/// differs from the incoming one by more than [`DEFAULT_STEP_MASS_DRIFT`].
pub fn step(
    pdf: &PdfSnapshot,
    rhs: impl FnMut(&[f64], f64) -> Vec<f64>,
    dt: f64,
) -> Result<PdfSnapshot> {
    rk4_step(pdf, rhs, dt, DEFAULT_STEP_MASS_DRIFT).map(|(s, _)| s)
}

fn rk4_step(
    pdf: &PdfSnapshot,
    mut rhs: impl FnMut(&[f64], f64) -> Vec<f64>,
    dt: f64,
    limit: f64,
) -> Result<(PdfSnapshot, StepReport)> {
    let f = &pdf.values;
    let t = pdf.time;
    let n = f.len();
    let axpy =
        |k: &[f64], h: f64| -> Vec<f64> { f.iter().zip(k).map(|(a, b)| a + h * b).collect() };
    let k1 = rhs(f, t);
    let k2 = rhs(&axpy(&k1, 0.5 * dt), t + 0.5 * dt);
    let k3 = rhs(&axpy(&k2, 0.5 * dt), t + 0.5 * dt);
    let k4 = rhs(&axpy(&k3, dt), t + dt);
    let mut values: Vec<f64> = (0..n)
        .map(|i| f[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        .collect();
    let dx = pdf.grid.dx();
    let raw_mass = trapezoid_uniform(dx, &values);
    let mut negative = vec![0.0; n];
    for (v, neg) in values.iter_mut().zip(negative.iter_mut()) {
        if *v < 0.0 {
            *neg = -*v;
            *v = 0.0;
        }
    }
    let clipped = trapezoid_uniform(dx, &negative);
    let mass = trapezoid_uniform(dx, &values);
    let reference = if pdf.mass > 0.0 { pdf.mass } else { 1.0 };
    let drift = (mass - pdf.mass).abs() / reference;
    if !mass.is_finite() || drift > limit {
        return Err(Error::Instability {
            time: t + dt,
            drift,
            limit,
        });
    }
    if mass > 0.0 && mass != pdf.mass {
        let s = pdf.mass / mass;
        values.iter_mut().for_each(|v| *v *= s);
    }
    let snapshot = PdfSnapshot {
        grid: pdf.grid,
        time: t + dt,
        values,
        mass: if mass > 0.0 { pdf.mass } else { mass },
    };
    Ok((
        snapshot,
        StepReport {
            raw_drift: (raw_mass - pdf.mass).abs(),
            clipped,
        },
    ))
}

/// State domain of a run: the configured bounds, or mean +- 10 sd of the
/// response of the linear part of the drift.
pub fn solver_grid(cfg: &ScenarioConfig) -> Result<PdfGrid> {
    if let (Some(a), Some(b)) = (cfg.pdf_grid.x_min, cfg.pdf_grid.x_max) {
        return PdfGrid::new(a, b, cfg.pdf_grid.n_x);
    }
    // A confining nonlinearity keeps an unstable linear part bounded, so the
    // envelope only follows the linear rate when the drift is linear.
    let eta = match cfg.drift.linear_rate() {
        Some(eta) => eta,
        None => cfg.drift.linear_part().min(0.0),
    };
    let nodes = cfg.time.nodes();
    let stride = nodes.len().div_ceil(ENVELOPE_POINTS).max(1);
    let mut thin: Vec<f64> = nodes.iter().copied().step_by(stride).collect();
    if *thin.last().expect("nonempty") != *nodes.last().expect("nonempty") {
        thin.push(*nodes.last().expect("nonempty"));
    }
    let model = &cfg.input_model;
    let t0 = thin[0];
    let mut d = Vec::with_capacity(thin.len());
    for k in 0..thin.len() {
        d.push(effective_intensity_linear_at(
            model,
            eta,
            cfg.kappa,
            &thin[..=k],
        )?);
    }
    let var_int: Vec<f64> = thin
        .iter()
        .zip(&d)
        .map(|(&s, &dv)| dv * (-2.0 * eta * (s - t0)).exp())
        .collect();
    let mean_int: Vec<f64> = thin
        .iter()
        .map(|&s| model.m_xi.eval(s) * (-eta * (s - t0)).exp())
        .collect();
    let cv = cumulative_trapezoid(&thin, &var_int);
    let cm = cumulative_trapezoid(&thin, &mean_int);
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for (k, &t) in thin.iter().enumerate() {
        let g = (eta * (t - t0)).exp();
        let mean = g * (model.m_x0 + cfg.kappa * cm[k]);
        let sd = (g * g * (model.c_x0x0 + 2.0 * cv[k])).max(0.0).sqrt();
        lo = lo.min(mean - ENVELOPE_SDS * sd);
        hi = hi.max(mean + ENVELOPE_SDS * sd);
    }
    if !(hi > lo) {
        return Err(Error::DegenerateVariance {
            time: t0,
            variance: model.c_x0x0,
        });
    }
    PdfGrid::new(lo, hi, cfg.pdf_grid.n_x)
}

/// Initial Gaussian density on `grid`, normalized to unit trapezoid mass.
pub fn initial_snapshot(model: &GaussianInputModel, grid: PdfGrid, t0: f64) -> Result<PdfSnapshot> {
    if !(model.c_x0x0 > 0.0) {
        return Err(Error::DegenerateVariance {
            time: t0,
            variance: model.c_x0x0,
        });
    }
    let raw = PdfSnapshot::from_fn(grid, t0, |x| gaussian_pdf(model.m_x0, model.c_x0x0, x));
    if !(raw.mass > 0.0) {
        return Err(Error::invalid(
            "pdf grid",
            "initial density has no mass on the domain",
        ));
    }
    let values = raw.values.iter().map(|v| v / raw.mass).collect();
    Ok(PdfSnapshot {
        grid,
        time: t0,
        values,
        mass: 1.0,
    })
}

/// Supplies the intensities `D_0..D_M` at both ends of each grid interval.
trait IntensitySource {
    fn order(&self) -> usize;
    fn interval(
        &mut self,
        n: usize,
        nodes: &[f64],
        pdf: &PdfSnapshot,
    ) -> Result<(Vec<f64>, Vec<f64>)>;
}

/// Linear-drift intensities tabulated once on the time grid.
struct LinearIntensity {
    d: Vec<f64>,
}

impl IntensitySource for LinearIntensity {
    fn order(&self) -> usize {
        0
    }

    fn interval(&mut self, n: usize, _: &[f64], _: &PdfSnapshot) -> Result<(Vec<f64>, Vec<f64>)> {
        Ok((vec![self.d[n]], vec![self.d[n + 1]]))
    }
}

/// Ordered intensities from the running history of `R_h'`; the right end of
/// each interval holds `R_h'` at its left-end value.
struct ClosureIntensity<'a> {
    model: &'a GaussianInputModel,
    drift: &'a DriftSpec,
    kappa: f64,
    order: usize,
    times: Vec<f64>,
    r_h: Vec<f64>,
}

impl IntensitySource for ClosureIntensity<'_> {
    fn order(&self) -> usize {
        self.order
    }

    fn interval(
        &mut self,
        n: usize,
        nodes: &[f64],
        pdf: &PdfSnapshot,
    ) -> Result<(Vec<f64>, Vec<f64>)> {
        let r = response_moments(pdf, self.drift).r_h;
        self.times.push(nodes[n]);
        self.r_h.push(r);
        let left =
            generalized_intensities_on(self.model, self.kappa, &self.times, &self.r_h, self.order)?;
        self.times.push(nodes[n + 1]);
        self.r_h.push(r);
        let right =
            generalized_intensities_on(self.model, self.kappa, &self.times, &self.r_h, self.order);
        self.times.pop();
        self.r_h.pop();
        Ok((left, right?))
    }
}

struct Problem<'a> {
    drift: &'a DriftSpec,
    kappa: f64,
    model: &'a GaussianInputModel,
    tolerances: &'a Tolerances,
}

fn march(
    cfg: &ScenarioConfig,
    problem: Problem<'_>,
    mut source: impl IntensitySource,
) -> Result<PdfTrajectory> {
    let grid = solver_grid(cfg)?;
    let nodes = cfg.time.nodes();
    let outputs = cfg.output_indices()?;
    let order = source.order();
    let xs = grid.nodes();
    let dx = grid.dx();
    let a_base: Vec<f64> = xs.iter().map(|&x| problem.drift.h(x)).collect();
    let kappa = problem.kappa;
    let tol = problem.tolerances;

    let mut pdf = initial_snapshot(problem.model, grid, nodes[0])?;
    let mut snapshots = vec![pdf.clone()];
    let mut meta = SolveMetadata {
        grid,
        order,
        n_steps: 0,
        dt_history: Vec::with_capacity(nodes.len().saturating_sub(1)),
        max_step_mass_drift: 0.0,
        mass_drift_per_time: 0.0,
        clipped_mass: 0.0,
        clip_flagged: false,
        negative_diffusion_steps: 0,
        first_negative_diffusion_time: None,
        max_boundary_mass: pdf.boundary_mass(BOUNDARY_FRACTION),
    };
    let mut drift_sum = 0.0;
    let mut a = vec![0.0; grid.n_x];
    let mut d_stage = vec![0.0; order + 1];

    for n in 0..nodes.len() - 1 {
        let (t_left, t_right) = (nodes[n], nodes[n + 1]);
        let h = t_right - t_left;
        let (d_left, d_right) = source.interval(n, &nodes, &pdf)?;

        // Substep count from the stability bound at the interval ends.
        let shapes = shape_sums(problem.drift, &pdf, order, &d_left)?;
        let b_max = [&d_left, &d_right]
            .iter()
            .flat_map(|d| diffusion_bracket(d, &shapes, grid.n_x))
            .fold(0.0f64, |m, v| m.max(v.abs()));
        let a_max = [t_left, t_right]
            .iter()
            .flat_map(|&t| {
                let shift = kappa * problem.model.m_xi.eval(t);
                a_base.iter().map(move |v| (v + shift).abs())
            })
            .fold(0.0f64, f64::max);
        let mut dt_stable = f64::INFINITY;
        if b_max > 0.0 {
            dt_stable = dt_stable.min(dx * dx / (2.0 * b_max));
        }
        if a_max > 0.0 {
            dt_stable = dt_stable.min(dx / a_max);
        }
        dt_stable *= tol.stability_factor;
        let substeps = if dt_stable.is_finite() {
            ((h / dt_stable).ceil() as usize).max(1)
        } else {
            1
        };
        let dt = h / substeps as f64;
        meta.dt_history.push(StepRecord {
            t_start: t_left,
            dt,
            substeps,
        });

        for j in 0..substeps {
            let shapes = if j == 0 {
                shapes.clone()
            } else {
                shape_sums(problem.drift, &pdf, order, &d_left)?
            };
            let mut negative = false;
            let rhs = |f: &[f64], tau: f64| -> Vec<f64> {
                let w = ((tau - t_left) / h).clamp(0.0, 1.0);
                for m in 0..=order {
                    d_stage[m] = d_left[m] + (d_right[m] - d_left[m]) * w;
                }
                let shift = kappa * problem.model.m_xi.eval(tau);
                for (ai, bi) in a.iter_mut().zip(&a_base) {
                    *ai = bi + shift;
                }
                let b = diffusion_bracket(&d_stage, &shapes, grid.n_x);
                negative |= b.iter().any(|&v| v < 0.0);
                let mut out = vec![0.0; f.len()];
                stencil(f, &a, &b, dx, &mut out);
                out
            };
            let (mut next, report) = rk4_step(&pdf, rhs, dt, tol.step_mass_drift)?;
            if j + 1 == substeps {
                next.time = t_right;
            }
            if negative {
                meta.negative_diffusion_steps += 1;
                meta.first_negative_diffusion_time.get_or_insert(pdf.time);
            }
            meta.n_steps += 1;
            meta.max_step_mass_drift = meta.max_step_mass_drift.max(report.raw_drift);
            drift_sum += report.raw_drift;
            meta.clipped_mass += report.clipped;
            pdf = next;
        }
        if outputs.binary_search(&(n + 1)).is_ok() {
            meta.max_boundary_mass = meta
                .max_boundary_mass
                .max(pdf.boundary_mass(BOUNDARY_FRACTION));
            snapshots.push(pdf.clone());
        }
    }
    let span = nodes[nodes.len() - 1] - nodes[0];
    meta.mass_drift_per_time = if span > 0.0 { drift_sum / span } else { 0.0 };
    meta.clip_flagged = meta.clipped_mass > tol.clipped_mass;
    Ok(PdfTrajectory {
        snapshots,
        metadata: meta,
    })
}

/// Shape sums `S_1..S_M` from the response moments of `pdf`.
fn shape_sums(
    drift: &DriftSpec,
    pdf: &PdfSnapshot,
    order: usize,
    d: &[f64],
) -> Result<Vec<Vec<f64>>> {
    if order == 0 {
        return Ok(Vec::new());
    }
    let r = response_moments(pdf, drift);
    Ok(GenFpkCoefficients::new(drift, &pdf.grid, &r.r_gk, d.to_vec(), order)?.shape_sums())
}

/// Solves the exact linear pdf equation; the drift must be `eta x`.
pub fn solve_linear(cfg: &ScenarioConfig) -> Result<PdfTrajectory> {
    let eta = cfg
        .drift
        .linear_rate()
        .ok_or_else(|| Error::invalid("drift", "the linear equation needs h(x) = eta * x"))?;
    let drift = DriftSpec::linear(eta);
    let nodes = cfg.time.nodes();
    let mut d = Vec::with_capacity(nodes.len());
    for k in 0..nodes.len() {
        d.push(effective_intensity_linear_at(
            &cfg.input_model,
            eta,
            cfg.kappa,
            &nodes[..=k],
        )?);
    }
    march(
        cfg,
        Problem {
            drift: &drift,
            kappa: cfg.kappa,
            model: &cfg.input_model,
            tolerances: &cfg.solver.tolerances,
        },
        LinearIntensity { d },
    )
}

/// Solves the closure equation of order `cfg.solver.order` with response
/// moments lagged at each substep start.
pub fn solve_genfpk(cfg: &ScenarioConfig) -> Result<PdfTrajectory> {
    march(
        cfg,
        Problem {
            drift: &cfg.drift,
            kappa: cfg.kappa,
            model: &cfg.input_model,
            tolerances: &cfg.solver.tolerances,
        },
        ClosureIntensity {
            model: &cfg.input_model,
            drift: &cfg.drift,
            kappa: cfg.kappa,
            order: cfg.solver.order,
            times: Vec::new(),
            r_h: Vec::new(),
        },
    )
}
