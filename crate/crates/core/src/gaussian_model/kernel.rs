use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, Violation};

/// Autocovariance `C(s1, s2)` of the excitation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum KernelSpec {
    /// `variance * exp(-|s1 - s2| / tau)`, the Ornstein-Uhlenbeck covariance.
    Exponential { variance: f64, tau: f64 },
    /// `variance * exp(-(s1 - s2)^2 / (2 tau^2))`
    SquaredExponential { variance: f64, tau: f64 },
    /// Grid-sampled symmetric matrix.
    UserTable(KernelTable),
}

/// Kernel values tabulated on a set of time nodes. `values[i][j]` is
/// `C(points[i], points[j])`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelTable {
    pub points: Vec<f64>,
    pub values: Vec<Vec<f64>>,
}

const TABLE_NODE_TOL: f64 = 1e-9;

impl KernelTable {
    /// Reads a `s1,s2,value` CSV listing every ordered pair of nodes.
    pub fn from_csv_path(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path.as_ref())?;
        Self::from_csv_str(&text)
    }

    pub fn from_csv_str(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty());
        let (_, header) = lines.next().ok_or_else(|| Error::Parse {
            line: Some(1),
            message: "empty kernel table".into(),
        })?;
        let cols: Vec<&str> = header.split(',').map(str::trim).collect();
        if cols != ["s1", "s2", "value"] {
            return Err(Error::Parse {
                line: Some(1),
                message: format!("expected header `s1,s2,value`, found `{header}`"),
            });
        }
        let mut triples = Vec::new();
        for (idx, line) in lines {
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            let parsed: Option<Vec<f64>> = (fields.len() == 3)
                .then(|| fields.iter().map(|f| f.parse::<f64>().ok()).collect())
                .flatten();
            match parsed {
                Some(v) => triples.push((v[0], v[1], v[2])),
                None => {
                    return Err(Error::Parse {
                        line: Some(idx + 1),
                        message: format!("expected three numbers, found `{line}`"),
                    })
                }
            }
        }
        let mut points: Vec<f64> = triples.iter().map(|t| t.0).collect();
        points.sort_by(f64::total_cmp);
        points.dedup_by(|a, b| (*a - *b).abs() <= TABLE_NODE_TOL);
        let n = points.len();
        let locate = |s: f64| points.iter().position(|p| (p - s).abs() <= TABLE_NODE_TOL);
        let mut values = vec![vec![f64::NAN; n]; n];
        for (s1, s2, v) in triples {
            match (locate(s1), locate(s2)) {
                (Some(i), Some(j)) => values[i][j] = v,
                _ => {
                    return Err(Error::Parse {
                        line: None,
                        message: format!("pair ({s1}, {s2}) does not lie on the s1 node set"),
                    })
                }
            }
        }
        if values.iter().flatten().any(|v| v.is_nan()) {
            return Err(Error::Parse {
                line: None,
                message: format!("kernel table must list all {} ordered pairs", n * n),
            });
        }
        let table = KernelTable { points, values };
        match table.violations("kernel").into_iter().next() {
            Some(v) => Err(Error::Parse {
                line: None,
                message: v.to_string(),
            }),
            None => Ok(table),
        }
    }

    fn index(&self, s: f64) -> Option<usize> {
        let idx = self.points.partition_point(|&p| p < s);
        [idx.checked_sub(1), Some(idx)]
            .into_iter()
            .flatten()
            .filter(|&i| i < self.points.len())
            .find(|&i| (self.points[i] - s).abs() <= TABLE_NODE_TOL * s.abs().max(1.0))
    }

    fn violations(&self, field: &str) -> Vec<Violation> {
        let mut out = Vec::new();
        let n = self.points.len();
        if n == 0 {
            out.push(Violation::new(field, "table has no nodes"));
        }
        if self.points.windows(2).any(|w| w[1] <= w[0]) {
            out.push(Violation::new(
                format!("{field}.points"),
                "must be strictly increasing",
            ));
        }
        if self.values.len() != n || self.values.iter().any(|r| r.len() != n) {
            out.push(Violation::new(
                format!("{field}.values"),
                format!("must be a {n}x{n} matrix"),
            ));
            return out;
        }
        let scale = self
            .values
            .iter()
            .flatten()
            .fold(0.0f64, |m, v| m.max(v.abs()))
            .max(1.0);
        let asym = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .map(|(i, j)| (self.values[i][j] - self.values[j][i]).abs())
            .fold(0.0, f64::max);
        if asym > 1e-12 * scale {
            out.push(Violation::new(
                format!("{field}.values"),
                format!("matrix is not symmetric (max asymmetry {asym:e})"),
            ));
        }
        out
    }
}

impl KernelSpec {
    pub fn is_stationary(&self) -> bool {
        !matches!(self, KernelSpec::UserTable(_))
    }

    pub fn is_identically_zero(&self) -> bool {
        match self {
            KernelSpec::Exponential { variance, .. }
            | KernelSpec::SquaredExponential { variance, .. } => *variance == 0.0,
            KernelSpec::UserTable(t) => t.values.iter().flatten().all(|v| *v == 0.0),
        }
    }

    pub(crate) fn violations(&self, field: &str) -> Vec<Violation> {
        match self {
            KernelSpec::Exponential { variance, tau }
            | KernelSpec::SquaredExponential { variance, tau } => {
                let mut out = Vec::new();
                if !(variance.is_finite() && *variance >= 0.0) {
                    out.push(Violation::new(
                        format!("{field}.variance"),
                        format!("must be finite and >= 0, got {variance}"),
                    ));
                }
                if !(tau.is_finite() && *tau > 0.0) {
                    out.push(Violation::new(
                        format!("{field}.tau"),
                        format!("correlation time must be finite and > 0, got {tau}"),
                    ));
                }
                out
            }
            KernelSpec::UserTable(t) => t.violations(field),
        }
    }
}

/// Evaluates the kernel. Symmetric in its arguments.
pub fn kernel_eval(spec: &KernelSpec, s1: f64, s2: f64) -> Result<f64> {
    match spec {
        KernelSpec::Exponential { variance, tau } => Ok(variance * (-(s1 - s2).abs() / tau).exp()),
        KernelSpec::SquaredExponential { variance, tau } => {
            let r = (s1 - s2) / tau;
            Ok(variance * (-0.5 * r * r).exp())
        }
        KernelSpec::UserTable(table) => {
            let i = table.index(s1).ok_or(Error::OutOfDomain { time: s1 })?;
            let j = table.index(s2).ok_or(Error::OutOfDomain { time: s2 })?;
            Ok(table.values[i][j])
        }
    }
}
