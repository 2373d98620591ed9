use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::trapezoid_uniform;

/// Uniform state-space grid `x_min = x_0 < ... < x_{n-1} = x_max`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PdfGrid {
    pub x_min: f64,
    pub x_max: f64,
    pub n_x: usize,
}

impl PdfGrid {
    pub fn new(x_min: f64, x_max: f64, n_x: usize) -> Result<Self> {
        if !(x_min.is_finite() && x_max.is_finite() && x_min < x_max) {
            return Err(Error::invalid(
                "pdf grid",
                format!("need x_min < x_max, got [{x_min}, {x_max}]"),
            ));
        }
        if n_x < 16 {
            return Err(Error::invalid(
                "pdf grid",
                format!("need at least 16 nodes, got {n_x}"),
            ));
        }
        Ok(PdfGrid { x_min, x_max, n_x })
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / (self.n_x - 1) as f64
    }

    pub fn node(&self, i: usize) -> f64 {
        if i + 1 == self.n_x {
            self.x_max
        } else {
            self.x_min + self.dx() * i as f64
        }
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n_x).map(|i| self.node(i)).collect()
    }
}

/// Density values on a [`PdfGrid`] at one time.
#[derive(Debug, Clone, PartialEq)]
pub struct PdfSnapshot {
    pub grid: PdfGrid,
    pub time: f64,
    pub values: Vec<f64>,
    /// Trapezoid integral of `values`.
    pub mass: f64,
}

impl PdfSnapshot {
    pub fn new(grid: PdfGrid, time: f64, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n_x {
            return Err(Error::DimensionMismatch {
                expected: grid.n_x,
                found: values.len(),
            });
        }
        let mass = trapezoid_uniform(grid.dx(), &values);
        Ok(PdfSnapshot {
            grid,
            time,
            values,
            mass,
        })
    }

    pub fn from_fn(grid: PdfGrid, time: f64, f: impl Fn(f64) -> f64) -> Self {
        let values: Vec<f64> = (0..grid.n_x).map(|i| f(grid.node(i))).collect();
        let mass = trapezoid_uniform(grid.dx(), &values);
        PdfSnapshot {
            grid,
            time,
            values,
            mass,
        }
    }

    /// Trapezoid `int g(x) f(x) dx`.
    pub fn expectation(&self, g: impl Fn(f64) -> f64) -> f64 {
        let w: Vec<f64> = self
            .values
            .iter()
            .enumerate()
            .map(|(i, &v)| g(self.grid.node(i)) * v)
            .collect();
        trapezoid_uniform(self.grid.dx(), &w)
    }

    /// Mean and variance under the trapezoid rule.
    pub fn moments(&self) -> (f64, f64) {
        let m = self.expectation(|x| x) / self.mass;
        let v = self.expectation(|x| (x - m) * (x - m)) / self.mass;
        (m, v)
    }

    /// Mass within `fraction` of the domain width from either end.
    pub fn boundary_mass(&self, fraction: f64) -> f64 {
        let n = self.grid.n_x;
        let k = ((fraction * (n - 1) as f64).ceil() as usize).clamp(1, n / 2);
        let dx = self.grid.dx();
        trapezoid_uniform(dx, &self.values[..=k]) + trapezoid_uniform(dx, &self.values[n - 1 - k..])
    }
}

/// Per-interval stepping record.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StepRecord {
    pub t_start: f64,
    pub dt: f64,
    pub substeps: usize,
}

/// Diagnostics of a solver run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveMetadata {
    pub grid: PdfGrid,
    pub order: usize,
    pub n_steps: usize,
    pub dt_history: Vec<StepRecord>,
    /// Largest one-step `|mass - 1|` before clipping and renormalization.
    pub max_step_mass_drift: f64,
    /// Summed pre-renormalization drift divided by the elapsed time.
    pub mass_drift_per_time: f64,
    /// Total mass added by clipping negative values.
    pub clipped_mass: f64,
    /// Set when `clipped_mass` exceeds the configured tolerance.
    pub clip_flagged: bool,
    /// Steps at which the diffusion bracket was negative somewhere.
    pub negative_diffusion_steps: usize,
    pub first_negative_diffusion_time: Option<f64>,
    /// Largest mass found within 1% of either domain end.
    pub max_boundary_mass: f64,
}

/// Snapshots at the requested output times, first one at `t0`.
#[derive(Debug, Clone, PartialEq)]
pub struct PdfTrajectory {
    pub snapshots: Vec<PdfSnapshot>,
    pub metadata: SolveMetadata,
}

impl PdfTrajectory {
    pub fn at_time(&self, t: f64) -> Option<&PdfSnapshot> {
        self.snapshots
            .iter()
            .find(|s| (s.time - t).abs() <= 1e-9 * (1.0 + t.abs()))
    }

    pub fn last(&self) -> &PdfSnapshot {
        self.snapshots
            .last()
            .expect("trajectory holds the initial snapshot")
    }
}
