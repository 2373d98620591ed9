use crate::error::{Error, Result};
use crate::quadrature::trapezoid_weights;

/// Strictly increasing time nodes with composite trapezoid weights.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrid {
    points: Vec<f64>,
    weights: Vec<f64>,
}

impl TimeGrid {
    pub fn uniform(t0: f64, t_end: f64, n_points: usize) -> Result<Self> {
        if n_points < 2 {
            return Err(Error::invalid("time grid", "needs at least two points"));
        }
        if !(t0.is_finite() && t_end.is_finite() && t_end > t0) {
            return Err(Error::invalid(
                "time grid",
                format!("need finite t0 < t_end, got [{t0}, {t_end}]"),
            ));
        }
        let h = (t_end - t0) / (n_points - 1) as f64;
        let mut points: Vec<f64> = (0..n_points).map(|i| t0 + h * i as f64).collect();
        points[n_points - 1] = t_end;
        Self::from_points(points)
    }

    pub fn from_points(points: Vec<f64>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::invalid("time grid", "needs at least two points"));
        }
        if points.iter().any(|p| !p.is_finite()) {
            return Err(Error::invalid("time grid", "points must be finite"));
        }
        if let Some(w) = points.windows(2).find(|w| w[1] <= w[0]) {
            return Err(Error::invalid(
                "time grid",
                format!(
                    "points must be strictly increasing ({} then {})",
                    w[0], w[1]
                ),
            ));
        }
        let weights = trapezoid_weights(&points);
        Ok(TimeGrid { points, weights })
    }

    pub fn t0(&self) -> f64 {
        self.points[0]
    }

    pub fn t_end(&self) -> f64 {
        self.points[self.points.len() - 1]
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Index of the node equal to `t` within `tol` (absolute).
    pub fn index_of(&self, t: f64, tol: f64) -> Option<usize> {
        let idx = self.points.partition_point(|&p| p < t);
        [idx.checked_sub(1), Some(idx)]
            .into_iter()
            .flatten()
            .filter(|&i| i < self.points.len())
            .find(|&i| (self.points[i] - t).abs() <= tol)
    }

    /// Sub-grid consisting of every `stride`-th node, always keeping the last.
    pub fn thinned(&self, stride: usize) -> TimeGrid {
        let stride = stride.max(1);
        let mut pts: Vec<f64> = self.points.iter().copied().step_by(stride).collect();
        if *pts.last().unwrap() != self.t_end() {
            pts.push(self.t_end());
        }
        if pts.len() < 2 {
            return self.clone();
        }
        TimeGrid::from_points(pts).expect("sub-grid of a valid grid is valid")
    }
}
