use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::simulate::integrate_path;
use super::PathEnsemble;
use crate::effective_noise::integrate_kernel_weighted;
use crate::error::{Error, Result};
use crate::gaussian_model::{assemble_joint, JointSampler};
use crate::quadrature::trapezoid;
use crate::scenario::ScenarioConfig;

/// One finite-difference probe of the response derivatives at `t_end`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeResult {
    pub draw_index: u64,
    /// `(X(t; X0 + eps) - X(t; X0)) / eps`.
    pub fd_initial: f64,
    /// `exp(int_{t0}^t h'(X(u)) du)`.
    pub formula_initial: f64,
    /// Grid index of the bumped excitation node, when probed.
    pub bump_index: Option<usize>,
    pub fd_excitation: Option<f64>,
    /// `kappa exp(int_s^t h'(X(u)) du)`.
    pub formula_excitation: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VariationalReport {
    pub eps: f64,
    pub probes: Vec<ProbeResult>,
    pub max_rel_err_initial: f64,
    /// `None` when the excitation derivative check was skipped.
    pub max_rel_err_excitation: Option<f64>,
    pub notice: Option<String>,
}

fn rel_err(fd: f64, exact: f64) -> f64 {
    (fd - exact).abs() / exact.abs().max(f64::MIN_POSITIVE)
}

/// Compares finite differences of the simulated response against
/// `dX/dX0 = exp(int h'(X))` and `dX/dXi(s) = kappa exp(int_s^t h'(X))`.
/// The excitation bump at node `n` has height `eps / w_n`, so it integrates
/// to `eps`; only interior nodes are bumped.
pub fn variational_check(
    cfg: &ScenarioConfig,
    n_probe: usize,
    eps: f64,
    seed: u64,
) -> Result<VariationalReport> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::invalid("eps", "must be positive and finite"));
    }
    let grid = cfg
        .time
        .grid()?
        .ok_or_else(|| Error::invalid("time", "the check needs t_end > t0"))?;
    let n = grid.len();
    let cov = assemble_joint(&cfg.input_model, &grid)?;
    let sampler = JointSampler::new(&cov, seed);
    let times = grid.points();
    let weights = grid.weights();
    let guard = cfg.mc.blowup_guard;
    let mut pick = ChaCha8Rng::seed_from_u64(seed ^ 0x9E37_79B9_7F4A_7C15);
    let probe_excitation = cfg.kappa != 0.0 && n >= 3;
    let notice = (!probe_excitation).then(|| {
        if cfg.kappa == 0.0 {
            "kappa = 0: excitation derivative vanishes, check skipped".to_string()
        } else {
            "grid has no interior node: excitation derivative check skipped".to_string()
        }
    });

    let mut base = vec![0.0; n];
    let mut pert = vec![0.0; n];
    let mut probes = Vec::with_capacity(n_probe);
    let blowup = |p: u64, node: usize| Error::Blowup {
        path: p as usize,
        time: times[node],
        guard,
    };
    for p in 0..n_probe as u64 {
        let draw = sampler.draw(p);
        let (x0, xi) = (draw[0], &draw[1..]);
        integrate_path(&cfg.drift, cfg.kappa, times, x0, xi, guard, &mut base)
            .map_err(|k| blowup(p, k))?;
        let hp: Vec<f64> = base.iter().map(|&x| cfg.drift.h_prime(x)).collect();

        integrate_path(&cfg.drift, cfg.kappa, times, x0 + eps, xi, guard, &mut pert)
            .map_err(|k| blowup(p, k))?;
        let fd_initial = (pert[n - 1] - base[n - 1]) / eps;
        let formula_initial = trapezoid(times, &hp).exp();

        let (mut bump_index, mut fd_excitation, mut formula_excitation) = (None, None, None);
        if probe_excitation {
            let j = pick.random_range(1..n - 1);
            let mut bumped = xi.to_vec();
            bumped[j] += eps / weights[j];
            integrate_path(&cfg.drift, cfg.kappa, times, x0, &bumped, guard, &mut pert)
                .map_err(|k| blowup(p, k))?;
            bump_index = Some(j);
            fd_excitation = Some((pert[n - 1] - base[n - 1]) / eps);
            formula_excitation = Some(cfg.kappa * trapezoid(&times[j..], &hp[j..]).exp());
        }
        probes.push(ProbeResult {
            draw_index: p,
            fd_initial,
            formula_initial,
            bump_index,
            fd_excitation,
            formula_excitation,
        });
    }
    let max_rel_err_initial = probes
        .iter()
        .map(|r| rel_err(r.fd_initial, r.formula_initial))
        .fold(0.0, f64::max);
    let max_rel_err_excitation = probe_excitation.then(|| {
        probes
            .iter()
            .filter_map(|r| Some(rel_err(r.fd_excitation?, r.formula_excitation?)))
            .fold(0.0, f64::max)
    });
    Ok(VariationalReport {
        eps,
        probes,
        max_rel_err_initial,
        max_rel_err_excitation,
        notice,
    })
}

/// Both sides of the correlation-splitting identity for `F = X(t)` of a
/// linear drift, estimated from an ensemble.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NfEmpiricalReport {
    pub time: f64,
    /// Ensemble mean of `Xi(t) X(t)`.
    pub lhs: f64,
    /// `m_Xi(t) E[X(t)] + C_X0Xi(t) e^{eta (t - t0)} + kappa int C(t, s) e^{eta (t - s)} ds`.
    pub rhs: f64,
    /// Standard error of `lhs - rhs`.
    pub standard_error: f64,
}

impl NfEmpiricalReport {
    /// `|lhs - rhs|` in standard errors.
    pub fn z_score(&self) -> f64 {
        (self.lhs - self.rhs).abs() / self.standard_error
    }
}

/// Splits `E[Xi(t) X(t)]` with the known linear-drift derivatives
/// `dX/dX0 = e^{eta (t - t0)}` and `dX/dXi(s) = kappa e^{eta (t - s)}`.
pub fn nf_empirical_check(
    cfg: &ScenarioConfig,
    ens: &PathEnsemble,
    t_index: usize,
) -> Result<NfEmpiricalReport> {
    let eta = cfg
        .drift
        .linear_rate()
        .ok_or_else(|| Error::invalid("drift", "the empirical split needs h(x) = eta * x"))?;
    let x = ens.values_at(t_index)?;
    let xi = ens.excitation_at(t_index)?;
    let nodes = &ens.grid.points()[..=t_index];
    let (t0, t) = (nodes[0], nodes[t_index]);
    let m_xi = cfg.input_model.m_xi.eval(t);
    // Per-path Xi X - m_Xi X has mean equal to the two covariance terms.
    let d: Vec<f64> = x
        .iter()
        .zip(xi)
        .map(|(&xv, &sv)| (sv - m_xi) * xv)
        .collect();
    let n = d.len() as f64;
    let mean_d = d.iter().sum::<f64>() / n;
    let var_d = d.iter().map(|v| (v - mean_d) * (v - mean_d)).sum::<f64>() / (n - 1.0);
    let mean_x = x.iter().sum::<f64>() / n;
    let lhs = x.iter().zip(xi).map(|(a, b)| a * b).sum::<f64>() / n;
    let cross = cfg.input_model.cross.eval(t) * (eta * (t - t0)).exp();
    let history = if cfg.kappa != 0.0 {
        cfg.kappa
            * integrate_kernel_weighted(
                &cfg.input_model.kernel,
                t,
                |s| (eta * (t - s)).exp(),
                nodes,
            )?
    } else {
        0.0
    };
    Ok(NfEmpiricalReport {
        time: t,
        lhs,
        rhs: m_xi * mean_x + cross + history,
        standard_error: (var_d / n).sqrt(),
    })
}
