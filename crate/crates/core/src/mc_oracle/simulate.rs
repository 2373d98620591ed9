use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::gaussian_model::{assemble_joint, JointSampler, TimeGrid};
use crate::genfpk::DriftSpec;
use crate::scenario::ScenarioConfig;

/// Paths per parallel work unit. Chunk boundaries are fixed so merged
/// statistics do not depend on the number of worker threads.
const CHUNK: usize = 1024;

/// Simulated responses and the draws that produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct PathEnsemble {
    pub grid: TimeGrid,
    pub seed: u64,
    pub n_paths: usize,
    /// Per-node ensemble mean and (unbiased) variance of `X`.
    pub mean: Vec<f64>,
    pub variance: Vec<f64>,
    /// Grid indices whose per-path values are kept.
    pub record_indices: Vec<usize>,
    /// `recorded_x[r][p]` is `X` of path `p` at `record_indices[r]`.
    pub recorded_x: Vec<Vec<f64>>,
    /// `recorded_xi[r][p]` is `Xi` of path `p` at `record_indices[r]`.
    pub recorded_xi: Vec<Vec<f64>>,
    /// Full `n_paths x n_points` responses, row-major, when within the cap.
    pub paths: Option<Vec<f64>>,
    /// Full `n_paths x (1 + n_points)` draws `(X0, Xi(s_1..))`, when within the cap.
    pub draws: Option<Vec<f64>>,
}

impl PathEnsemble {
    pub fn n_points(&self) -> usize {
        self.grid.len()
    }

    pub fn path(&self, p: usize) -> Option<&[f64]> {
        let n = self.n_points();
        self.paths.as_ref().map(|v| &v[p * n..(p + 1) * n])
    }

    pub fn draw(&self, p: usize) -> Option<&[f64]> {
        let n = self.n_points() + 1;
        self.draws.as_ref().map(|v| &v[p * n..(p + 1) * n])
    }

    /// Recorded response values at grid index `t_index`.
    pub fn values_at(&self, t_index: usize) -> Result<&[f64]> {
        let r = self.record_slot(t_index)?;
        Ok(&self.recorded_x[r])
    }

    /// Recorded excitation values at grid index `t_index`.
    pub fn excitation_at(&self, t_index: usize) -> Result<&[f64]> {
        let r = self.record_slot(t_index)?;
        Ok(&self.recorded_xi[r])
    }

    fn record_slot(&self, t_index: usize) -> Result<usize> {
        self.record_indices
            .iter()
            .position(|&i| i == t_index)
            .ok_or_else(|| Error::invalid("time index", format!("{t_index} was not recorded")))
    }

    /// Standard error of the mean at every node.
    pub fn standard_error(&self) -> Vec<f64> {
        self.variance
            .iter()
            .map(|v| (v / self.n_paths as f64).sqrt())
            .collect()
    }
}

/// Classical Runge-Kutta integration of `x' = h(x) + kappa xi(t)` over
/// `times`, with `xi` linear between nodes. Returns the first node index at
/// which `|x| > guard`, if any.
pub fn integrate_path(
    drift: &DriftSpec,
    kappa: f64,
    times: &[f64],
    x0: f64,
    xi: &[f64],
    guard: f64,
    out: &mut [f64],
) -> std::result::Result<(), usize> {
    let mut x = x0;
    out[0] = x;
    if !(x.abs() <= guard) {
        return Err(0);
    }
    for n in 1..times.len() {
        let dt = times[n] - times[n - 1];
        let (a, b) = (kappa * xi[n - 1], kappa * xi[n]);
        let mid = 0.5 * (a + b);
        let k1 = drift.h(x) + a;
        let k2 = drift.h(x + 0.5 * dt * k1) + mid;
        let k3 = drift.h(x + 0.5 * dt * k2) + mid;
        let k4 = drift.h(x + dt * k3) + b;
        x += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        out[n] = x;
        if !(x.abs() <= guard) {
            return Err(n);
        }
    }
    Ok(())
}

struct Chunk {
    count: usize,
    mean: Vec<f64>,
    m2: Vec<f64>,
    recorded_x: Vec<Vec<f64>>,
    recorded_xi: Vec<Vec<f64>>,
    paths: Vec<f64>,
    draws: Vec<f64>,
}

/// Simulates `n_paths` responses on the scenario grid, keeping per-path
/// values at `t0` and at the output times.
pub fn simulate(cfg: &ScenarioConfig, n_paths: usize, seed: u64) -> Result<PathEnsemble> {
    let mut record = cfg.output_indices()?;
    if !record.contains(&0) {
        record.insert(0, 0);
    }
    simulate_recording(cfg, n_paths, seed, &record)
}

/// As [`simulate`], keeping per-path values at the grid indices `record`.
pub fn simulate_recording(
    cfg: &ScenarioConfig,
    n_paths: usize,
    seed: u64,
    record: &[usize],
) -> Result<PathEnsemble> {
    let grid = cfg
        .time
        .grid()?
        .ok_or_else(|| Error::invalid("time", "simulation needs t_end > t0"))?;
    let n = grid.len();
    if let Some(&bad) = record.iter().find(|&&i| i >= n) {
        return Err(Error::invalid(
            "record index",
            format!("{bad} outside grid of {n} nodes"),
        ));
    }
    let cov = assemble_joint(&cfg.input_model, &grid)?;
    let sampler = JointSampler::new(&cov, seed);
    let keep_full = n_paths.saturating_mul(n) <= cfg.mc.storage_cap;
    let guard = cfg.mc.blowup_guard;
    let times = grid.points();

    let n_chunks = n_paths.div_ceil(CHUNK);
    let chunks: Vec<std::result::Result<Chunk, (usize, usize)>> = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let lo = c * CHUNK;
            let hi = (lo + CHUNK).min(n_paths);
            let mut chunk = Chunk {
                count: 0,
                mean: vec![0.0; n],
                m2: vec![0.0; n],
                recorded_x: vec![Vec::with_capacity(hi - lo); record.len()],
                recorded_xi: vec![Vec::with_capacity(hi - lo); record.len()],
                paths: Vec::with_capacity(if keep_full { (hi - lo) * n } else { 0 }),
                draws: Vec::with_capacity(if keep_full { (hi - lo) * (n + 1) } else { 0 }),
            };
            let mut z = vec![0.0; n + 1];
            let mut draw = vec![0.0; n + 1];
            let mut path = vec![0.0; n];
            for p in lo..hi {
                sampler.draw_into(p as u64, &mut z, &mut draw);
                integrate_path(
                    &cfg.drift,
                    cfg.kappa,
                    times,
                    draw[0],
                    &draw[1..],
                    guard,
                    &mut path,
                )
                .map_err(|node| (p, node))?;
                chunk.count += 1;
                let k = chunk.count as f64;
                for ((&x, m), m2) in path.iter().zip(&mut chunk.mean).zip(&mut chunk.m2) {
                    let delta = x - *m;
                    *m += delta / k;
                    *m2 += delta * (x - *m);
                }
                for (r, &i) in record.iter().enumerate() {
                    chunk.recorded_x[r].push(path[i]);
                    chunk.recorded_xi[r].push(draw[1 + i]);
                }
                if keep_full {
                    chunk.paths.extend_from_slice(&path);
                    chunk.draws.extend_from_slice(&draw);
                }
            }
            Ok(chunk)
        })
        .collect();

    let mut count = 0usize;
    let mut mean = vec![0.0; n];
    let mut m2 = vec![0.0; n];
    let mut recorded_x = vec![Vec::with_capacity(n_paths); record.len()];
    let mut recorded_xi = vec![Vec::with_capacity(n_paths); record.len()];
    let mut paths = Vec::with_capacity(if keep_full { n_paths * n } else { 0 });
    let mut draws = Vec::with_capacity(if keep_full { n_paths * (n + 1) } else { 0 });
    for chunk in chunks {
        let chunk = chunk.map_err(|(path, node)| Error::Blowup {
            path,
            time: times[node],
            guard,
        })?;
        // Pairwise update of mean and sum of squared deviations.
        let (na, nb) = (count as f64, chunk.count as f64);
        let total = na + nb;
        for i in 0..n {
            let delta = chunk.mean[i] - mean[i];
            mean[i] += delta * nb / total;
            m2[i] += chunk.m2[i] + delta * delta * na * nb / total;
        }
        count += chunk.count;
        for r in 0..record.len() {
            recorded_x[r].extend_from_slice(&chunk.recorded_x[r]);
            recorded_xi[r].extend_from_slice(&chunk.recorded_xi[r]);
        }
        paths.extend_from_slice(&chunk.paths);
        draws.extend_from_slice(&chunk.draws);
    }
    let variance = m2
        .iter()
        .map(|v| {
            if count > 1 {
                v / (count - 1) as f64
            } else {
                0.0
            }
        })
        .collect();
    Ok(PathEnsemble {
        grid,
        seed,
        n_paths,
        mean,
        variance,
        record_indices: record.to_vec(),
        recorded_x,
        recorded_xi,
        paths: keep_full.then_some(paths),
        draws: keep_full.then_some(draws),
    })
}
