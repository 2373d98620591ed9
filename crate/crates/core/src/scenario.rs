//! Scenario files: one TOML document holding the full problem statement.
//!
//! ```toml
//! name = "linear"
//! kappa = 1.0
//!
//! [[drift]]
//! coefficient = -1.0
//! basis = { kind = "power", exponent = 1 }
//!
//! [input_model]
//! m_x0 = 1.0
//! c_x0x0 = 1.0
//! kernel = { family = "exponential", variance = 1.0, tau = 1.0 }
//! cross = { kind = "exponential", amplitude = 0.5, rate = -1.0 }
//!
//! [time]
//! t0 = 0.0
//! t_end = 2.0
//! n_points = 201
//! ```
//!
//! A tabulated kernel may be given inline or as `kernel_csv = "file.csv"`
//! inside `[input_model]`, resolved relative to the scenario file.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, Violation};
use crate::gaussian_model::{
    assemble_joint, GaussianInputModel, KernelSpec, KernelTable, TimeGrid,
};
use crate::genfpk::DriftSpec;
use crate::linear_exact::LinearScenario;
use crate::mc_oracle::DensityEstimator;

/// Relative tolerance for matching output times to grid nodes.
const NODE_TOL: f64 = 1e-9;
/// Largest time grid used for the joint positive-semidefiniteness check.
const PSD_CHECK_POINTS: usize = 101;
/// Largest supported closure order.
pub const MAX_ORDER: usize = 8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeConfig {
    pub t0: f64,
    pub t_end: f64,
    pub n_points: usize,
}

impl TimeConfig {
    /// Grid nodes; a single node when `t_end == t0`.
    pub fn nodes(&self) -> Vec<f64> {
        if self.t_end == self.t0 {
            return vec![self.t0];
        }
        match TimeGrid::uniform(self.t0, self.t_end, self.n_points) {
            Ok(g) => g.points().to_vec(),
            Err(_) => vec![self.t0],
        }
    }

    /// `None` for the degenerate span `t_end == t0`.
    pub fn grid(&self) -> Result<Option<TimeGrid>> {
        if self.t_end == self.t0 {
            return Ok(None);
        }
        TimeGrid::uniform(self.t0, self.t_end, self.n_points).map(Some)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PdfGridConfig {
    #[serde(default = "default_n_x")]
    pub n_x: usize,
    /// Domain bounds; both default to the linear-theory envelope.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x_min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x_max: Option<f64>,
}

fn default_n_x() -> usize {
    512
}

impl Default for PdfGridConfig {
    fn default() -> Self {
        PdfGridConfig {
            n_x: default_n_x(),
            x_min: None,
            x_max: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    /// Largest accepted one-step mass change after clipping.
    #[serde(default = "default_step_mass_drift")]
    pub step_mass_drift: f64,
    /// Cumulative clipped mass above which a run is flagged.
    #[serde(default = "default_clipped_mass")]
    pub clipped_mass: f64,
    /// Safety factor applied to the explicit stability bound.
    #[serde(default = "default_stability_factor")]
    pub stability_factor: f64,
    /// Largest accepted L1 distance between solver and Monte Carlo densities.
    #[serde(default = "default_compare_l1")]
    pub compare_l1: f64,
}

fn default_step_mass_drift() -> f64 {
    1e-2
}
fn default_clipped_mass() -> f64 {
    1e-3
}
fn default_stability_factor() -> f64 {
    0.4
}
fn default_compare_l1() -> f64 {
    0.02
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            step_mass_drift: default_step_mass_drift(),
            clipped_mass: default_clipped_mass(),
            stability_factor: default_stability_factor(),
            compare_l1: default_compare_l1(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    /// Closure order `M`.
    #[serde(default = "default_order")]
    pub order: usize,
    /// Snapshot times; must be grid nodes. Empty means `[t_end]`.
    #[serde(default)]
    pub output_times: Vec<f64>,
    #[serde(default)]
    pub tolerances: Tolerances,
}

fn default_order() -> usize {
    2
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            order: default_order(),
            output_times: Vec::new(),
            tolerances: Tolerances::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McConfig {
    #[serde(default = "default_n_paths")]
    pub n_paths: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub estimator: DensityEstimator,
    /// Paths are kept in full only while `n_paths * n_points` stays below this.
    #[serde(default = "default_storage_cap")]
    pub storage_cap: usize,
    /// Paths with `|x|` above this abort the run.
    #[serde(default = "default_guard")]
    pub blowup_guard: f64,
}

fn default_n_paths() -> usize {
    10_000
}
fn default_storage_cap() -> usize {
    20_000_000
}
fn default_guard() -> f64 {
    1e6
}

impl Default for McConfig {
    fn default() -> Self {
        McConfig {
            n_paths: default_n_paths(),
            seed: 0,
            estimator: DensityEstimator::default(),
            storage_cap: default_storage_cap(),
            blowup_guard: default_guard(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    pub kappa: f64,
    pub drift: DriftSpec,
    pub input_model: GaussianInputModel,
    pub time: TimeConfig,
    #[serde(default)]
    pub pdf_grid: PdfGridConfig,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub mc: McConfig,
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

/// Reads and validates a scenario file.
pub fn parse_scenario(path: impl AsRef<Path>) -> Result<ScenarioConfig> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    ScenarioConfig::from_toml_str(&text, path.parent())
}

impl ScenarioConfig {
    /// Parses and validates; `base_dir` resolves relative `kernel_csv` paths.
    pub fn from_toml_str(text: &str, base_dir: Option<&Path>) -> Result<Self> {
        let mut doc: toml::Table = text.parse().map_err(|e: toml::de::Error| Error::Parse {
            line: e.span().map(|s| line_of(text, s.start)),
            message: e.message().to_string(),
        })?;
        if let Some(toml::Value::Table(model)) = doc.get_mut("input_model") {
            if let Some(csv) = model.remove("kernel_csv") {
                let rel = csv.as_str().ok_or_else(|| Error::Parse {
                    line: None,
                    message: "input_model.kernel_csv must be a string".into(),
                })?;
                let path = match base_dir {
                    Some(dir) => dir.join(rel),
                    None => rel.into(),
                };
                let table = KernelTable::from_csv_path(&path)?;
                let value = toml::Value::try_from(KernelSpec::UserTable(table)).map_err(|e| {
                    Error::Parse {
                        line: None,
                        message: e.to_string(),
                    }
                })?;
                model.insert("kernel".into(), value);
            }
        }
        let config: ScenarioConfig =
            ScenarioConfig::deserialize(doc).map_err(|e: toml::de::Error| Error::Parse {
                line: e.span().map(|s| line_of(text, s.start)),
                message: e.message().to_string(),
            })?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::invalid("scenario", e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(v))
        }
    }

    /// Every violated invariant, not just the first.
    pub fn violations(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        if self.name.trim().is_empty() {
            out.push(Violation::new("name", "must not be empty"));
        }
        if !self.kappa.is_finite() {
            out.push(Violation::new("kappa", "must be finite"));
        }
        out.extend(self.drift.violations("drift"));
        let model_violations = self.input_model.violations("input_model");
        let model_ok = model_violations.is_empty();
        out.extend(model_violations);

        let t = &self.time;
        let mut time_ok = true;
        if !(t.t0.is_finite() && t.t_end.is_finite() && t.t_end >= t.t0) {
            out.push(Violation::new(
                "time",
                format!("need finite t0 <= t_end, got [{}, {}]", t.t0, t.t_end),
            ));
            time_ok = false;
        } else if t.t_end > t.t0 && t.n_points < 2 {
            out.push(Violation::new("time.n_points", "must be at least 2"));
            time_ok = false;
        }

        let g = &self.pdf_grid;
        if g.n_x < 16 {
            out.push(Violation::new(
                "pdf_grid.n_x",
                format!("must be at least 16, got {}", g.n_x),
            ));
        }
        for (field, v) in [("pdf_grid.x_min", g.x_min), ("pdf_grid.x_max", g.x_max)] {
            if matches!(v, Some(x) if !x.is_finite()) {
                out.push(Violation::new(field, "must be finite"));
            }
        }
        match (g.x_min, g.x_max) {
            (Some(a), Some(b)) if a >= b => out.push(Violation::new(
                "pdf_grid",
                format!("x_min {a} must be below x_max {b}"),
            )),
            (Some(_), None) | (None, Some(_)) => out.push(Violation::new(
                "pdf_grid",
                "x_min and x_max must be given together",
            )),
            _ => {}
        }

        let s = &self.solver;
        if s.order > MAX_ORDER {
            out.push(Violation::new(
                "solver.order",
                format!("must be at most {MAX_ORDER}"),
            ));
        }
        let tol = &s.tolerances;
        for (field, v) in [
            ("solver.tolerances.step_mass_drift", tol.step_mass_drift),
            ("solver.tolerances.clipped_mass", tol.clipped_mass),
            ("solver.tolerances.compare_l1", tol.compare_l1),
        ] {
            if !(v.is_finite() && v > 0.0) {
                out.push(Violation::new(field, "must be finite and > 0"));
            }
        }
        if !(tol.stability_factor > 0.0 && tol.stability_factor <= 1.0) {
            out.push(Violation::new(
                "solver.tolerances.stability_factor",
                "must lie in (0, 1]",
            ));
        }
        if time_ok {
            let nodes = t.nodes();
            for (i, &o) in s.output_times.iter().enumerate() {
                let field = format!("solver.output_times[{i}]");
                if !(o >= t.t0 && o <= t.t_end) {
                    out.push(Violation::new(
                        field,
                        format!("{o} outside [{}, {}]", t.t0, t.t_end),
                    ));
                } else if node_index(&nodes, o).is_none() {
                    out.push(Violation::new(
                        field,
                        format!("{o} is not a time-grid node"),
                    ));
                }
            }
        }

        let mc = &self.mc;
        if mc.n_paths == 0 {
            out.push(Violation::new("mc.n_paths", "must be positive"));
        }
        if mc.seed > i64::MAX as u64 {
            out.push(Violation::new(
                "mc.seed",
                format!("must fit a TOML integer (<= {})", i64::MAX),
            ));
        }
        if !(mc.blowup_guard.is_finite() && mc.blowup_guard > 0.0) {
            out.push(Violation::new("mc.blowup_guard", "must be finite and > 0"));
        }

        if model_ok && time_ok {
            if let Ok(Some(grid)) = t.grid() {
                if let KernelSpec::UserTable(table) = &self.input_model.kernel {
                    if let Some(p) = grid.points().iter().find(|&&p| {
                        !table
                            .points
                            .iter()
                            .any(|&q| (p - q).abs() <= NODE_TOL * (1.0 + p.abs()))
                    }) {
                        out.push(Violation::new(
                            "input_model.kernel",
                            format!("tabulated kernel has no node at grid time {p}"),
                        ));
                        return out;
                    }
                }
                let stride = grid.len().div_ceil(PSD_CHECK_POINTS).max(1);
                if let Err(e) = assemble_joint(&self.input_model, &grid.thinned(stride)) {
                    out.push(Violation::new(
                        "input_model",
                        format!("joint covariance of (X0, Xi) is invalid: {e}"),
                    ));
                }
            }
        }
        out
    }

    /// Time-grid indices of the requested snapshots, ascending and unique;
    /// defaults to the last node.
    pub fn output_indices(&self) -> Result<Vec<usize>> {
        let nodes = self.time.nodes();
        if self.solver.output_times.is_empty() {
            return Ok(vec![nodes.len() - 1]);
        }
        let mut idx = Vec::with_capacity(self.solver.output_times.len());
        for &o in &self.solver.output_times {
            idx.push(node_index(&nodes, o).ok_or_else(|| {
                Error::invalid("output time", format!("{o} is not a time-grid node"))
            })?);
        }
        idx.sort_unstable();
        idx.dedup();
        Ok(idx)
    }

    /// The scenario as a linear problem; requires a purely linear drift.
    pub fn linear_scenario(&self) -> Result<LinearScenario> {
        let eta = self
            .drift
            .linear_rate()
            .ok_or_else(|| Error::invalid("drift", "the linear pipeline needs h(x) = eta * x"))?;
        let grid = self
            .time
            .grid()?
            .ok_or_else(|| Error::invalid("time", "the linear pipeline needs t_end > t0"))?;
        Ok(LinearScenario {
            eta,
            kappa: self.kappa,
            model: self.input_model.clone(),
            grid,
        })
    }
}

fn node_index(nodes: &[f64], t: f64) -> Option<usize> {
    let scale = 1.0 + t.abs();
    nodes
        .iter()
        .position(|&p| (p - t).abs() <= NODE_TOL * scale)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
name = "linear"
kappa = 1.0

[[drift]]
coefficient = -1.0
basis = { kind = "power", exponent = 1 }

[input_model]
m_x0 = 1.0
c_x0x0 = 1.0
kernel = { family = "exponential", variance = 1.0, tau = 1.0 }
cross = { kind = "exponential", amplitude = 0.5, rate = -1.0 }

[time]
t0 = 0.0
t_end = 1.0
n_points = 11
"#;

    #[test]
    fn minimal_linear_file_parses() {
        let c = ScenarioConfig::from_toml_str(MINIMAL, None).unwrap();
        assert_eq!(c.name, "linear");
        assert_eq!(c.solver.order, 2);
        assert_eq!(c.output_indices().unwrap(), vec![10]);
        assert_eq!(c.linear_scenario().unwrap().eta, -1.0);
    }

    #[test]
    fn negative_tau_names_the_kernel_field() {
        let text = MINIMAL.replace("tau = 1.0", "tau = -1.0");
        match ScenarioConfig::from_toml_str(&text, None) {
            Err(Error::Validation(v)) => {
                assert!(
                    v.iter().any(|v| v.field == "input_model.kernel.tau"),
                    "{v:?}"
                )
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn all_violations_are_reported() {
        let text = MINIMAL
            .replace("tau = 1.0", "tau = -1.0")
            .replace("n_points = 11", "n_points = 11\n[pdf_grid]\nn_x = 4");
        match ScenarioConfig::from_toml_str(&text, None) {
            Err(Error::Validation(v)) => assert!(v.len() >= 2, "{v:?}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn missing_drift_is_a_parse_error() {
        let text = MINIMAL.replace(
            "[[drift]]\ncoefficient = -1.0\nbasis = { kind = \"power\", exponent = 1 }\n",
            "",
        );
        assert!(matches!(
            ScenarioConfig::from_toml_str(&text, None),
            Err(Error::Parse { .. })
        ));
    }

    #[test]
    fn syntax_error_reports_line() {
        let text = MINIMAL.replace("kappa = 1.0", "kappa = = 1.0");
        match ScenarioConfig::from_toml_str(&text, None) {
            Err(Error::Parse { line: Some(l), .. }) => assert_eq!(l, 3),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn inconsistent_cross_covariance_rejected() {
        let text = MINIMAL.replace("amplitude = 0.5", "amplitude = 3.0");
        match ScenarioConfig::from_toml_str(&text, None) {
            Err(Error::Validation(v)) => assert!(v.iter().any(|v| v.field == "input_model")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn output_times_must_be_nodes() {
        let text = format!("{MINIMAL}\n[solver]\noutput_times = [0.5, 0.55]\n");
        match ScenarioConfig::from_toml_str(&text, None) {
            Err(Error::Validation(v)) => {
                assert_eq!(v.len(), 1);
                assert_eq!(v[0].field, "solver.output_times[1]");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn serialization_round_trips() {
        let text = format!("{MINIMAL}\n[solver]\norder = 3\noutput_times = [0.5, 1.0]\n[mc]\nestimator = \"histogram\"\nseed = 9\n");
        let c = ScenarioConfig::from_toml_str(&text, None).unwrap();
        let back = ScenarioConfig::from_toml_str(&c.to_toml_string().unwrap(), None).unwrap();
        assert_eq!(c, back);
    }

    #[test]
    fn degenerate_time_span() {
        let text = MINIMAL.replace("t_end = 1.0", "t_end = 0.0");
        let c = ScenarioConfig::from_toml_str(&text, None).unwrap();
        assert_eq!(c.time.nodes(), vec![0.0]);
        assert_eq!(c.output_indices().unwrap(), vec![0]);
    }
}
