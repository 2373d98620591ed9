use super::{DriftSpec, PdfGrid, PdfSnapshot};
use crate::error::{Error, Result};

/// `R_h' = E[h'(X)]` and `R_g'k = E[g'_k(X)]` under one snapshot.
#[derive(Debug, Clone, PartialEq)]
pub struct ResponseMoments {
    pub r_h: f64,
    /// One entry per drift term.
    pub r_gk: Vec<f64>,
}

/// Trapezoid moments of the drift derivatives. Terms with constant
/// derivative return that constant exactly.
pub fn response_moments(pdf: &PdfSnapshot, drift: &DriftSpec) -> ResponseMoments {
    let r_gk: Vec<f64> = drift
        .terms
        .iter()
        .map(|t| match t.basis.constant_derivative() {
            Some(c) => c,
            None => pdf.expectation(|x| t.basis.derivative(x)),
        })
        .collect();
    let r_h = drift
        .terms
        .iter()
        .zip(&r_gk)
        .map(|(t, r)| t.coefficient * r)
        .sum();
    ResponseMoments { r_h, r_gk }
}

/// Multi-indices `alpha` over `n` slots with `|alpha| <= order`, grouped by
/// `|alpha|` and lexicographically descending within a group.
pub fn multi_indices(n: usize, order: usize) -> Vec<Vec<u32>> {
    fn fill(slot: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if slot + 1 == cur.len() {
            cur[slot] = left;
            out.push(cur.clone());
            return;
        }
        for a in (0..=left).rev() {
            cur[slot] = a;
            fill(slot + 1, left - a, cur, out);
        }
    }
    let mut out = Vec::new();
    if n == 0 {
        out.push(Vec::new());
        return out;
    }
    let mut cur = vec![0u32; n];
    for m in 0..=order as u32 {
        fill(0, m, &mut cur, &mut out);
    }
    out
}

fn factorial(k: u32) -> f64 {
    (1..=k).map(f64::from).product()
}

/// Closure coefficients at one time: intensities `D_0..D_M` and the shape
/// functions `Phi^alpha(x) / alpha!` on the state grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GenFpkCoefficients {
    pub order: usize,
    pub d: Vec<f64>,
    /// Multi-indices over the nonlinear drift terms.
    pub multi_indices: Vec<Vec<u32>>,
    /// `phi_alpha[j][i]` is `Phi^alpha(x_i) / alpha!` for `multi_indices[j]`.
    pub phi_alpha: Vec<Vec<f64>>,
}

impl GenFpkCoefficients {
    /// `r_gk` holds one response moment per drift term; `d` the intensities
    /// of orders `0..=order`.
    pub fn new(
        drift: &DriftSpec,
        grid: &PdfGrid,
        r_gk: &[f64],
        d: Vec<f64>,
        order: usize,
    ) -> Result<Self> {
        if d.len() != order + 1 {
            return Err(Error::DimensionMismatch {
                expected: order + 1,
                found: d.len(),
            });
        }
        if r_gk.len() != drift.terms.len() {
            return Err(Error::DimensionMismatch {
                expected: drift.terms.len(),
                found: r_gk.len(),
            });
        }
        let nonlinear = drift.nonlinear_terms();
        let xs = grid.nodes();
        // phi_k(x) = eta_k (g'_k(x) - R_g'k)
        let phi: Vec<Vec<f64>> = nonlinear
            .iter()
            .map(|&k| {
                let t = &drift.terms[k];
                xs.iter()
                    .map(|&x| t.coefficient * (t.basis.derivative(x) - r_gk[k]))
                    .collect()
            })
            .collect();
        let multi_indices = multi_indices(nonlinear.len(), order);
        let phi_alpha = multi_indices
            .iter()
            .map(|alpha| {
                let denom: f64 = alpha.iter().map(|&a| factorial(a)).product();
                (0..xs.len())
                    .map(|i| {
                        alpha
                            .iter()
                            .zip(&phi)
                            .map(|(&a, p)| p[i].powi(a as i32))
                            .product::<f64>()
                            / denom
                    })
                    .collect()
            })
            .collect();
        Ok(GenFpkCoefficients {
            order,
            d,
            multi_indices,
            phi_alpha,
        })
    }

    /// `S_m(x) = sum_{|alpha| = m} Phi^alpha(x) / alpha!` for `m = 1..=order`.
    pub fn shape_sums(&self) -> Vec<Vec<f64>> {
        let n = self.phi_alpha.first().map_or(0, Vec::len);
        let mut out = vec![vec![0.0; n]; self.order];
        for (alpha, vals) in self.multi_indices.iter().zip(&self.phi_alpha) {
            let m = alpha.iter().sum::<u32>() as usize;
            if m == 0 {
                continue;
            }
            for (o, v) in out[m - 1].iter_mut().zip(vals) {
                *o += v;
            }
        }
        out
    }

    /// Diffusion bracket `D_0 + sum_m D_m S_m(x)` for intensities `d`.
    pub fn bracket_with(&self, d: &[f64], n_x: usize) -> Vec<f64> {
        diffusion_bracket(d, &self.shape_sums(), n_x)
    }

    pub fn bracket(&self, n_x: usize) -> Vec<f64> {
        self.bracket_with(&self.d, n_x)
    }
}

pub(crate) fn diffusion_bracket(d: &[f64], shapes: &[Vec<f64>], n_x: usize) -> Vec<f64> {
    let mut b = vec![d[0]; n_x];
    for (dm, s) in d[1..].iter().zip(shapes) {
        if *dm == 0.0 {
            continue;
        }
        for (bi, si) in b.iter_mut().zip(s) {
            *bi += dm * si;
        }
    }
    b
}

/// `-d/dx[a f] + d^2/dx^2[b f]` with central differences, zero at the two
/// boundary nodes (homogeneous Dirichlet).
pub(crate) fn stencil(f: &[f64], a: &[f64], b: &[f64], dx: f64, out: &mut [f64]) {
    let n = f.len();
    let (c1, c2) = (0.5 / dx, 1.0 / (dx * dx));
    out[0] = 0.0;
    out[n - 1] = 0.0;
    for i in 1..n - 1 {
        let adv = c1 * (a[i + 1] * f[i + 1] - a[i - 1] * f[i - 1]);
        let dif = c2 * (b[i + 1] * f[i + 1] - 2.0 * b[i] * f[i] + b[i - 1] * f[i - 1]);
        out[i] = dif - adv;
    }
}

/// Right-hand side of the exact linear equation
/// `f_t = -d/dx[(eta x + kappa m_Xi) f] + D f_xx`.
pub fn rhs_linear(pdf: &PdfSnapshot, eta: f64, kappa: f64, m_xi_t: f64, d_eff_t: f64) -> Vec<f64> {
    let grid = pdf.grid;
    let a: Vec<f64> = (0..grid.n_x)
        .map(|i| eta * grid.node(i) + kappa * m_xi_t)
        .collect();
    let b = vec![d_eff_t; grid.n_x];
    let mut out = vec![0.0; grid.n_x];
    stencil(&pdf.values, &a, &b, grid.dx(), &mut out);
    out
}

/// Right-hand side of the closure equation and whether its diffusion
/// bracket is negative anywhere.
#[derive(Debug, Clone, PartialEq)]
pub struct GenFpkRhs {
    pub field: Vec<f64>,
    pub negative_diffusion: bool,
}

/// `f_t = -d/dx[(h + kappa m_Xi) f] + d^2/dx^2[(D_0 + sum_m D_m S_m) f]`.
pub fn rhs_genfpk(
    pdf: &PdfSnapshot,
    drift: &DriftSpec,
    kappa: f64,
    m_xi_t: f64,
    coeffs: &GenFpkCoefficients,
) -> GenFpkRhs {
    let grid = pdf.grid;
    let a: Vec<f64> = (0..grid.n_x)
        .map(|i| drift.h(grid.node(i)) + kappa * m_xi_t)
        .collect();
    let b = coeffs.bracket(grid.n_x);
    let mut field = vec![0.0; grid.n_x];
    stencil(&pdf.values, &a, &b, grid.dx(), &mut field);
    GenFpkRhs {
        field,
        negative_diffusion: b.iter().any(|&v| v < 0.0),
    }
}
