//! Closed-form machinery for the linear equation `dX/dt = eta X + kappa Xi(t)`:
//! moment ODEs, their solutions, the Gaussian response density and its
//! characteristic function.

use nalgebra::Complex;

use crate::effective_noise::effective_intensity_linear_at;
use crate::error::{Error, Result};
use crate::gaussian_model::{GaussianInputModel, TimeGrid};
use crate::quadrature::trapezoid;

/// Sub-intervals per grid interval for the outer integrals of the closed
/// forms.
const OUTER_REFINEMENT: usize = 8;

/// Default number of nodes of [`default_x_grid`].
pub const DEFAULT_X_POINTS: usize = 1024;

#[derive(Debug, Clone, PartialEq)]
pub struct LinearScenario {
    pub eta: f64,
    pub kappa: f64,
    pub model: GaussianInputModel,
    pub grid: TimeGrid,
}

/// Mean and variance of a Gaussian response at the nodes of a time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianMomentTrajectory {
    pub times: Vec<f64>,
    pub mean: Vec<f64>,
    pub variance: Vec<f64>,
}

impl GaussianMomentTrajectory {
    /// First node whose variance is negative; values are never clamped.
    pub fn first_negative_variance(&self) -> Option<usize> {
        self.variance.iter().position(|&v| v < 0.0)
    }

    pub fn max_abs_diff(&self, other: &GaussianMomentTrajectory) -> (f64, f64) {
        let diff = |a: &[f64], b: &[f64]| {
            a.iter()
                .zip(b)
                .map(|(x, y)| (x - y).abs())
                .fold(0.0, f64::max)
        };
        (
            diff(&self.mean, &other.mean),
            diff(&self.variance, &other.variance),
        )
    }
}

impl LinearScenario {
    /// Effective intensity at an arbitrary `t` in the grid span, integrating
    /// over the grid nodes below `t` and `t` itself.
    pub fn effective_intensity(&self, t: f64) -> Result<f64> {
        let nodes = self.nodes_through(t)?;
        effective_intensity_linear_at(&self.model, self.eta, self.kappa, &nodes)
    }

    fn nodes_through(&self, t: f64) -> Result<Vec<f64>> {
        let pts = self.grid.points();
        let span = self.grid.t_end() - self.grid.t0();
        let tol = 1e-12 * span.max(1.0);
        if !(t >= pts[0] - tol && t <= pts[pts.len() - 1] + tol) {
            return Err(Error::invalid(
                "time",
                format!("{t} outside [{}, {}]", pts[0], pts[pts.len() - 1]),
            ));
        }
        let mut nodes: Vec<f64> = pts.iter().copied().take_while(|&s| s < t - tol).collect();
        nodes.push(t);
        Ok(nodes)
    }

    fn check(&self) -> Result<()> {
        let v = self.model.violations("model");
        if !v.is_empty() {
            return Err(Error::Validation(v));
        }
        if !self.eta.is_finite() || !self.kappa.is_finite() {
            return Err(Error::invalid(
                "linear scenario",
                "eta and kappa must be finite",
            ));
        }
        Ok(())
    }
}

/// Classical fourth-order Runge-Kutta integration of
/// `m' = eta m + kappa m_Xi(t)`, `v' = 2 eta v + 2 D(t)` on the scenario grid.
pub fn moment_odes_integrate(sc: &LinearScenario) -> Result<GaussianMomentTrajectory> {
    sc.check()?;
    let pts = sc.grid.points();
    let (eta, kappa) = (sc.eta, sc.kappa);
    let m_xi = |t: f64| sc.model.m_xi.eval(t);
    let mut mean = Vec::with_capacity(pts.len());
    let mut variance = Vec::with_capacity(pts.len());
    let (mut m, mut v) = (sc.model.m_x0, sc.model.c_x0x0);
    mean.push(m);
    variance.push(v);
    let mut nodes: Vec<f64> = vec![pts[0]];
    let mut d_left = effective_intensity_linear_at(&sc.model, eta, kappa, &nodes)?;
    for n in 1..pts.len() {
        let (t, h) = (pts[n - 1], pts[n] - pts[n - 1]);
        let tm = t + 0.5 * h;
        nodes.push(tm);
        let d_mid = effective_intensity_linear_at(&sc.model, eta, kappa, &nodes)?;
        *nodes.last_mut().expect("nonempty") = pts[n];
        let d_right = effective_intensity_linear_at(&sc.model, eta, kappa, &nodes)?;

        let fm = |mm: f64, s: f64| eta * mm + kappa * m_xi(s);
        let k1 = fm(m, t);
        let k2 = fm(m + 0.5 * h * k1, tm);
        let k3 = fm(m + 0.5 * h * k2, tm);
        let k4 = fm(m + h * k3, pts[n]);
        m += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);

        let fv = |vv: f64, d: f64| 2.0 * eta * vv + 2.0 * d;
        let k1 = fv(v, d_left);
        let k2 = fv(v + 0.5 * h * k1, d_mid);
        let k3 = fv(v + 0.5 * h * k2, d_mid);
        let k4 = fv(v + h * k3, d_right);
        v += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);

        mean.push(m);
        variance.push(v);
        d_left = d_right;
    }
    Ok(GaussianMomentTrajectory {
        times: pts.to_vec(),
        mean,
        variance,
    })
}

/// Sub-nodes of `[t0, t]`: every grid interval below `t` split into
/// [`OUTER_REFINEMENT`] equal pieces, the last partial interval likewise.
fn refined_nodes(coarse: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity((coarse.len().max(1) - 1) * OUTER_REFINEMENT + 1);
    out.push(coarse[0]);
    for w in coarse.windows(2) {
        for j in 1..=OUTER_REFINEMENT {
            if j == OUTER_REFINEMENT {
                out.push(w[1]);
            } else {
                out.push(w[0] + (w[1] - w[0]) * j as f64 / OUTER_REFINEMENT as f64);
            }
        }
    }
    out
}

/// Mean and variance at `t` from the explicit solutions
/// `m(t) = m0 e^{eta (t-t0)} + kappa int m_Xi(s) e^{eta (t-s)} ds` and
/// `v(t) = v0 e^{2 eta (t-t0)} + 2 int D(s) e^{2 eta (t-s)} ds`.
pub fn closed_form_moments(sc: &LinearScenario, t: f64) -> Result<(f64, f64)> {
    sc.check()?;
    let coarse = sc.nodes_through(t)?;
    let t0 = coarse[0];
    let t = *coarse.last().expect("nonempty");
    let (eta, kappa) = (sc.eta, sc.kappa);
    let mut mean = sc.model.m_x0 * (eta * (t - t0)).exp();
    let mut variance = sc.model.c_x0x0 * (2.0 * eta * (t - t0)).exp();
    if coarse.len() < 2 {
        return Ok((mean, variance));
    }
    let fine = refined_nodes(&coarse);
    if kappa != 0.0 && !sc.model.m_xi.is_identically_zero() {
        let integrand: Vec<f64> = fine
            .iter()
            .map(|&s| sc.model.m_xi.eval(s) * (eta * (t - s)).exp())
            .collect();
        mean += kappa * trapezoid(&fine, &integrand);
    }
    if kappa != 0.0 && !sc.model.is_noise_free() {
        let mut integrand = Vec::with_capacity(fine.len());
        for &s in &fine {
            integrand.push(sc.effective_intensity(s)? * (2.0 * eta * (t - s)).exp());
        }
        variance += 2.0 * trapezoid(&fine, &integrand);
    }
    Ok((mean, variance))
}

/// Closed-form moments at every grid node.
pub fn closed_form_series(sc: &LinearScenario) -> Result<GaussianMomentTrajectory> {
    sc.check()?;
    let pts = sc.grid.points();
    let fine = refined_nodes(pts);
    let t0 = pts[0];
    let (eta, kappa) = (sc.eta, sc.kappa);
    // Integrands with the factor e^{eta (t - t0)} pulled out so that one
    // running sum serves every node.
    let mut mean_int = Vec::with_capacity(fine.len());
    let mut var_int = Vec::with_capacity(fine.len());
    let drive = kappa != 0.0 && !sc.model.m_xi.is_identically_zero();
    let noisy = kappa != 0.0 && !sc.model.is_noise_free();
    for &s in &fine {
        mean_int.push(if drive {
            sc.model.m_xi.eval(s) * (-eta * (s - t0)).exp()
        } else {
            0.0
        });
        var_int.push(if noisy {
            sc.effective_intensity(s)? * (-2.0 * eta * (s - t0)).exp()
        } else {
            0.0
        });
    }
    let mut mean = Vec::with_capacity(pts.len());
    let mut variance = Vec::with_capacity(pts.len());
    let (mut acc_m, mut acc_v) = (0.0, 0.0);
    for (n, &t) in pts.iter().enumerate() {
        if n > 0 {
            let lo = (n - 1) * OUTER_REFINEMENT;
            let hi = n * OUTER_REFINEMENT;
            acc_m += trapezoid(&fine[lo..=hi], &mean_int[lo..=hi]);
            acc_v += trapezoid(&fine[lo..=hi], &var_int[lo..=hi]);
        }
        let g = (eta * (t - t0)).exp();
        mean.push(g * (sc.model.m_x0 + kappa * acc_m));
        variance.push(g * g * (sc.model.c_x0x0 + 2.0 * acc_v));
    }
    Ok(GaussianMomentTrajectory {
        times: pts.to_vec(),
        mean,
        variance,
    })
}

/// Gaussian density with the given moments.
pub fn gaussian_pdf(mean: f64, variance: f64, x: f64) -> f64 {
    let z = x - mean;
    (-0.5 * z * z / variance).exp() / (2.0 * std::f64::consts::PI * variance).sqrt()
}

/// Exact response density at `t` on `x_grid`.
pub fn exact_pdf(sc: &LinearScenario, t: f64, x_grid: &[f64]) -> Result<Vec<f64>> {
    let (mean, variance) = closed_form_moments(sc, t)?;
    if variance <= 0.0 || !variance.is_finite() {
        return Err(Error::DegenerateVariance { time: t, variance });
    }
    Ok(x_grid
        .iter()
        .map(|&x| gaussian_pdf(mean, variance, x))
        .collect())
}

/// `mean +- 8 sd` with [`DEFAULT_X_POINTS`] nodes.
pub fn default_x_grid(mean: f64, variance: f64) -> Vec<f64> {
    let half = 8.0 * variance.max(0.0).sqrt();
    let n = DEFAULT_X_POINTS;
    (0..n)
        .map(|i| mean - half + 2.0 * half * i as f64 / (n - 1) as f64)
        .collect()
}

/// `E[exp(i y X(t))] = exp(i m(t) y - v(t) y^2 / 2)`.
pub fn char_function(sc: &LinearScenario, y: f64, t: f64) -> Result<Complex<f64>> {
    let (mean, variance) = closed_form_moments(sc, t)?;
    Ok(Complex::new(-0.5 * variance * y * y, mean * y).exp())
}

/// Trapezoid transform `int e^{i y x} f(x) dx` of sampled density values.
pub fn empirical_char_function(x_grid: &[f64], f: &[f64], y: f64) -> Complex<f64> {
    let re: Vec<f64> = x_grid
        .iter()
        .zip(f)
        .map(|(&x, &v)| (y * x).cos() * v)
        .collect();
    let im: Vec<f64> = x_grid
        .iter()
        .zip(f)
        .map(|(&x, &v)| (y * x).sin() * v)
        .collect();
    Complex::new(trapezoid(x_grid, &re), trapezoid(x_grid, &im))
}
