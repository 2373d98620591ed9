use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use super::{GaussianInputModel, TimeGrid};
use crate::error::{Error, Result};

/// Joint mean and covariance of `(X0, Xi(s_1), ..., Xi(s_N))`.
///
/// Row/column 0 is `X0`; rows `1..=N` are the excitation at the grid points.
#[derive(Debug, Clone)]
pub struct JointCovariance {
    pub grid: TimeGrid,
    pub mean: DVector<f64>,
    pub matrix: DMatrix<f64>,
    factor: CholeskyFactor,
}

impl JointCovariance {
    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn factor(&self) -> &CholeskyFactor {
        &self.factor
    }

    /// Restriction to the given grid indices (plus `X0`).
    pub fn principal_submatrix(&self, grid_indices: &[usize]) -> DMatrix<f64> {
        let rows: Vec<usize> = std::iter::once(0)
            .chain(grid_indices.iter().map(|i| i + 1))
            .collect();
        DMatrix::from_fn(rows.len(), rows.len(), |a, b| {
            self.matrix[(rows[a], rows[b])]
        })
    }
}

/// Lower-triangular factor `L` with `L L^T = A + jitter I`, stored row-major.
#[derive(Debug, Clone)]
pub struct CholeskyFactor {
    n: usize,
    lower: Vec<f64>,
    pub jitter: f64,
}

impl CholeskyFactor {
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if j > i {
            0.0
        } else {
            self.lower[i * self.n + j]
        }
    }

    pub fn to_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.n, |i, j| self.get(i, j))
    }

    /// `out = mean + L z`
    pub fn affine(&self, mean: &[f64], z: &[f64], out: &mut [f64]) {
        for i in 0..self.n {
            let row = &self.lower[i * self.n..i * self.n + i + 1];
            out[i] = mean[i] + row.iter().zip(z).map(|(l, z)| l * z).sum::<f64>();
        }
    }
}

const JITTER_START: f64 = 1e-14;
const JITTER_CAP: f64 = 1e-10;

/// Cholesky factorisation tolerant of exactly singular positive semidefinite
/// matrices. Zero pivots produce zero columns; negative pivots trigger diagonal
/// jitter starting at `1e-14 * trace`, escalating by 10x up to `1e-10 * trace`.
pub fn semidefinite_cholesky(a: &DMatrix<f64>) -> Result<CholeskyFactor> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: a.ncols(),
        });
    }
    let scale = a.trace().abs().max(f64::MIN_POSITIVE);
    let mut jitter = 0.0;
    let mut last_pivot = 0;
    loop {
        match try_factor(a, jitter, 64.0 * f64::EPSILON * scale) {
            Ok(lower) => return Ok(CholeskyFactor { n, lower, jitter }),
            Err(pivot) => last_pivot = last_pivot.max(pivot),
        }
        jitter = if jitter == 0.0 {
            JITTER_START * scale
        } else {
            jitter * 10.0
        };
        if jitter > JITTER_CAP * scale * (1.0 + 1e-9) {
            return Err(Error::NonPositiveSemidefinite {
                pivot: last_pivot,
                max_jitter: JITTER_CAP * scale,
            });
        }
    }
}

fn try_factor(a: &DMatrix<f64>, jitter: f64, tol: f64) -> std::result::Result<Vec<f64>, usize> {
    let n = a.nrows();
    let mut l = vec![0.0; n * n];
    // Residual diagonal of the running Schur complement.
    let mut diag: Vec<f64> = (0..n).map(|i| a[(i, i)] + jitter).collect();
    for k in 0..n {
        let d = diag[k];
        if d < -tol {
            return Err(k);
        }
        let (head, tail) = l.split_at_mut((k + 1) * n);
        let row_k = &head[k * n..k * n + k];
        if d <= tol {
            // Zero pivot: the rest of column k must vanish as well.
            for i in k + 1..n {
                let row_i = &tail[(i - k - 1) * n..(i - k - 1) * n + k];
                let r = a[(i, k)] - dot(row_i, row_k);
                if r.abs() > 10.0 * (tol * diag[i].max(0.0)).sqrt() + tol {
                    return Err(k);
                }
            }
            continue;
        }
        let pivot = d.sqrt();
        head[k * n + k] = pivot;
        let row_k = &head[k * n..k * n + k];
        for i in k + 1..n {
            let row_i = &mut tail[(i - k - 1) * n..(i - k - 1) * n + k + 1];
            let v = (a[(i, k)] - dot(&row_i[..k], row_k)) / pivot;
            row_i[k] = v;
            diag[i] -= v * v;
        }
    }
    Ok(l)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Builds the joint mean and block covariance on `grid` and verifies that it
/// is positive semidefinite.
pub fn assemble_joint(model: &GaussianInputModel, grid: &TimeGrid) -> Result<JointCovariance> {
    let pts = grid.points();
    let n = pts.len() + 1;
    let mut mean = DVector::zeros(n);
    mean[0] = model.m_x0;
    for (j, &s) in pts.iter().enumerate() {
        mean[j + 1] = model.m_xi.eval(s);
    }
    let mut matrix = DMatrix::zeros(n, n);
    matrix[(0, 0)] = model.c_x0x0;
    for (j, &s) in pts.iter().enumerate() {
        let c = model.cross.eval(s);
        matrix[(0, j + 1)] = c;
        matrix[(j + 1, 0)] = c;
    }
    for (i, &si) in pts.iter().enumerate() {
        for (j, &sj) in pts.iter().enumerate().skip(i) {
            let c = model.kernel(si, sj)?;
            matrix[(i + 1, j + 1)] = c;
            matrix[(j + 1, i + 1)] = c;
        }
    }
    let factor = semidefinite_cholesky(&matrix)?;
    Ok(JointCovariance {
        grid: grid.clone(),
        mean,
        matrix,
        factor,
    })
}

/// Reproducible exact Gaussian draws. Draw `i` uses its own generator stream,
/// so any subset of draws can be produced in any order or in parallel.
#[derive(Debug, Clone)]
pub struct JointSampler {
    mean: Vec<f64>,
    factor: CholeskyFactor,
    seed: u64,
}

impl JointSampler {
    pub fn new(cov: &JointCovariance, seed: u64) -> Self {
        JointSampler {
            mean: cov.mean.as_slice().to_vec(),
            factor: cov.factor.clone(),
            seed,
        }
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    /// Writes draw number `index` into `out`, using `z` as scratch space.
    pub fn draw_into(&self, index: u64, z: &mut [f64], out: &mut [f64]) {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(index);
        for zi in z.iter_mut() {
            *zi = StandardNormal.sample(&mut rng);
        }
        self.factor.affine(&self.mean, z, out);
    }

    pub fn draw(&self, index: u64) -> Vec<f64> {
        let mut z = vec![0.0; self.dim()];
        let mut out = vec![0.0; self.dim()];
        self.draw_into(index, &mut z, &mut out);
        out
    }
}

/// `n_samples` joint draws as rows of an `n_samples x (1+N)` matrix.
pub fn sample_joint(cov: &JointCovariance, n_samples: usize, seed: u64) -> DMatrix<f64> {
    let sampler = JointSampler::new(cov, seed);
    let dim = sampler.dim();
    let rows: Vec<Vec<f64>> = (0..n_samples as u64)
        .into_par_iter()
        .map(|i| sampler.draw(i))
        .collect();
    DMatrix::from_fn(n_samples, dim, |r, c| rows[r][c])
}
