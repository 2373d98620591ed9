//! Effective noise intensities: the history-weighted covariance integrals
//! that act as diffusion coefficients in the response-pdf equations.
//!
//! For the linear drift `h(x) = eta x`,
//!
//! `D(t) = kappa e^{eta (t - t0)} C_X0Xi(t) + kappa^2 int_{t0}^t e^{eta (t - s)} C_XiXi(t, s) ds`,
//!
//! and for a general drift the ordered intensities replace `eta (t - s)` by
//! `int_s^t R_h'(u) du` and carry an extra factor `(t - s)^m`.

use crate::error::{Error, Result};
use crate::gaussian_model::{kernel_eval, GaussianInputModel, KernelSpec, TimeGrid};
use crate::quadrature::{cumulative_trapezoid, trapezoid};

/// Trapezoid value of `int C(t, s) weight(s) ds` over the nodes `nodes`.
pub fn integrate_kernel_weighted(
    kernel: &KernelSpec,
    t: f64,
    weight: impl Fn(f64) -> f64,
    nodes: &[f64],
) -> Result<f64> {
    if nodes.len() < 2 {
        return Ok(0.0);
    }
    let mut values = Vec::with_capacity(nodes.len());
    for &s in nodes {
        values.push(kernel_eval(kernel, t, s)? * weight(s));
    }
    Ok(trapezoid(nodes, &values))
}

/// Linear-drift intensity at `t = nodes.last()`, integrating over `nodes`
/// (which must start at `t0`).
pub fn effective_intensity_linear_at(
    model: &GaussianInputModel,
    eta: f64,
    kappa: f64,
    nodes: &[f64],
) -> Result<f64> {
    let (&t0, &t) = match (nodes.first(), nodes.last()) {
        (Some(a), Some(b)) => (a, b),
        _ => return Err(Error::invalid("quadrature nodes", "empty")),
    };
    let cross = kappa * (eta * (t - t0)).exp() * model.cross.eval(t);
    if kappa == 0.0 || model.kernel.is_identically_zero() {
        return Ok(cross);
    }
    let history = integrate_kernel_weighted(&model.kernel, t, |s| (eta * (t - s)).exp(), nodes)?;
    Ok(cross + kappa * kappa * history)
}

/// Linear-drift intensity at every node of `grid`, each integral taken over
/// the grid nodes up to that time.
pub fn effective_intensity_linear(
    model: &GaussianInputModel,
    eta: f64,
    kappa: f64,
    grid: &TimeGrid,
) -> Result<Vec<f64>> {
    let pts = grid.points();
    (0..pts.len())
        .map(|n| effective_intensity_linear_at(model, eta, kappa, &pts[..=n]))
        .collect()
}

/// Response moments `R_h'(s) = E[h'(X(s))]` and `R_g'k(s) = E[g'_k(X(s))]`
/// recorded along a run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ResponseMomentHistory {
    pub times: Vec<f64>,
    pub r_h: Vec<f64>,
    /// One series per drift basis function.
    pub r_gk: Vec<Vec<f64>>,
}

impl ResponseMomentHistory {
    pub fn new(n_basis: usize) -> Self {
        ResponseMomentHistory {
            times: Vec::new(),
            r_h: Vec::new(),
            r_gk: vec![Vec::new(); n_basis],
        }
    }

    /// History with `R_h' = eta` at every node and no basis series.
    pub fn constant(times: &[f64], eta: f64) -> Self {
        ResponseMomentHistory {
            times: times.to_vec(),
            r_h: vec![eta; times.len()],
            r_gk: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Appends one record; times must increase.
    pub fn push(&mut self, t: f64, r_h: f64, r_gk: &[f64]) -> Result<()> {
        if let Some(&last) = self.times.last() {
            if t <= last {
                return Err(Error::invalid(
                    "history time",
                    format!("{t} does not follow {last}"),
                ));
            }
        }
        if r_gk.len() != self.r_gk.len() {
            return Err(Error::DimensionMismatch {
                expected: self.r_gk.len(),
                found: r_gk.len(),
            });
        }
        self.times.push(t);
        self.r_h.push(r_h);
        for (series, &v) in self.r_gk.iter_mut().zip(r_gk) {
            series.push(v);
        }
        Ok(())
    }
}

/// Ordered intensities `D_0..D_order` at `t = times.last()` from the `R_h'`
/// values `r_h` sampled at `times` (starting at `t0`).
pub fn generalized_intensities_on(
    model: &GaussianInputModel,
    kappa: f64,
    times: &[f64],
    r_h: &[f64],
    order: usize,
) -> Result<Vec<f64>> {
    if times.is_empty() || times.len() != r_h.len() {
        return Err(Error::DimensionMismatch {
            expected: times.len().max(1),
            found: r_h.len(),
        });
    }
    let k = times.len() - 1;
    let (t0, t) = (times[0], times[k]);
    let growth = cumulative_trapezoid(times, r_h);
    let cross = kappa * growth[k].exp() * model.cross.eval(t);
    let mut out: Vec<f64> = (0..=order)
        .map(|m| cross * (t - t0).powi(m as i32))
        .collect();
    if kappa == 0.0 || k == 0 || model.kernel.is_identically_zero() {
        return Ok(out);
    }
    let mut base = Vec::with_capacity(times.len());
    for j in 0..=k {
        let s = times[j];
        base.push((growth[k] - growth[j]).exp() * kernel_eval(&model.kernel, t, s)?);
    }
    let mut integrand = vec![0.0; times.len()];
    for (m, d) in out.iter_mut().enumerate() {
        for j in 0..=k {
            integrand[j] = base[j] * (t - times[j]).powi(m as i32);
        }
        *d += kappa * kappa * trapezoid(times, &integrand);
    }
    Ok(out)
}

/// Ordered intensities at `history.times[t_index]`, using the history up to
/// and including that node.
pub fn generalized_intensities(
    model: &GaussianInputModel,
    history: &ResponseMomentHistory,
    kappa: f64,
    t_index: usize,
    order: usize,
) -> Result<Vec<f64>> {
    if t_index >= history.len() {
        return Err(Error::HistoryTooShort {
            available: history.len(),
            requested: t_index,
        });
    }
    generalized_intensities_on(
        model,
        kappa,
        &history.times[..=t_index],
        &history.r_h[..=t_index],
        order,
    )
}

/// Intensities of orders `0..=order` at every node of a time axis.
#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveIntensitySeries {
    pub times: Vec<f64>,
    /// `values[n][m]` is `D_m` at `times[n]`.
    pub values: Vec<Vec<f64>>,
    pub order: usize,
}

impl EffectiveIntensitySeries {
    /// Linear-drift series (order 0) on `grid`.
    pub fn linear(
        model: &GaussianInputModel,
        eta: f64,
        kappa: f64,
        grid: &TimeGrid,
    ) -> Result<Self> {
        let d = effective_intensity_linear(model, eta, kappa, grid)?;
        Ok(EffectiveIntensitySeries {
            times: grid.points().to_vec(),
            values: d.into_iter().map(|v| vec![v]).collect(),
            order: 0,
        })
    }

    /// Ordered series over every node of `history`.
    pub fn from_history(
        model: &GaussianInputModel,
        history: &ResponseMomentHistory,
        kappa: f64,
        order: usize,
    ) -> Result<Self> {
        let values = (0..history.len())
            .map(|n| generalized_intensities(model, history, kappa, n, order))
            .collect::<Result<Vec<_>>>()?;
        Ok(EffectiveIntensitySeries {
            times: history.times.clone(),
            values,
            order,
        })
    }

    /// Series of a single order.
    pub fn order_series(&self, m: usize) -> Vec<f64> {
        self.values.iter().map(|v| v[m]).collect()
    }
}
