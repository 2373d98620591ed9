use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use chrono::Utc;
use serde::Serialize;
use serde_json::{json, Value};

use nfpdf_core::genfpk::PdfSnapshot;
use nfpdf_core::nf_core::sweep::CheckOutcome;
use nfpdf_core::{ScenarioConfig, RNG_ALGORITHM, VERSION};

use crate::Status;

/// One line of the failure report.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub tol: f64,
}

impl Check {
    pub fn passed(&self) -> bool {
        (self.lhs - self.rhs).abs() <= self.tol
    }

    pub fn report_line(&self) -> String {
        format!(
            "CHECK {} FAIL lhs={} rhs={} tol={}",
            self.name, self.lhs, self.rhs, self.tol
        )
    }
}

impl From<&CheckOutcome> for Check {
    fn from(o: &CheckOutcome) -> Self {
        Check {
            name: format!("{}[{}]", o.check, o.trial),
            lhs: o.lhs,
            rhs: o.rhs,
            tol: o.tol,
        }
    }
}

/// A fresh run directory plus the metadata accumulated for `run.json`.
pub struct RunDir {
    pub path: PathBuf,
    meta: Value,
}

impl RunDir {
    /// Creates `<out>/<name>-<timestamp>-<seed>`, suffixed with a counter if
    /// that directory already exists.
    pub fn create(out: &Path, command: &str, name: &str, seed: u64) -> Result<Self> {
        let now = Utc::now();
        let stem = format!("{name}-{}-{seed}", now.format("%Y%m%dT%H%M%SZ"));
        fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
        let mut path = out.join(&stem);
        let mut k = 1;
        while path.exists() {
            path = out.join(format!("{stem}.{k}"));
            k += 1;
        }
        fs::create_dir(&path).with_context(|| format!("creating {}", path.display()))?;
        let meta = json!({
            "command": command,
            "scenario": name,
            "seed": seed,
            "version": VERSION,
            "rng": RNG_ALGORITHM,
            "started": now.to_rfc3339(),
        });
        Ok(RunDir { path, meta })
    }

    pub fn write(&self, file: &str, contents: &str) -> Result<()> {
        let p = self.path.join(file);
        fs::write(&p, contents).with_context(|| format!("writing {}", p.display()))
    }

    pub fn write_config(&self, cfg: &ScenarioConfig) -> Result<()> {
        self.write("scenario.toml", &cfg.to_toml_string()?)
    }

    pub fn write_json(&self, file: &str, value: &impl Serialize) -> Result<()> {
        self.write(file, &(serde_json::to_string_pretty(value)? + "\n"))
    }

    pub fn record(&mut self, key: &str, value: impl Serialize) -> Result<()> {
        self.meta[key] = serde_json::to_value(value)?;
        Ok(())
    }

    /// Writes `report.txt` and `run.json`, prints the failure lines and
    /// returns the exit status.
    pub fn finish(mut self, checks: &[Check]) -> Result<Status> {
        let failed: Vec<&Check> = checks.iter().filter(|c| !c.passed()).collect();
        let mut report = String::new();
        for c in &failed {
            println!("{}", c.report_line());
            writeln!(report, "{}", c.report_line())?;
        }
        self.write("report.txt", &report)?;
        let status = if failed.is_empty() {
            Status::Pass
        } else {
            Status::CheckFailed
        };
        self.meta["checks"] = json!(checks.len());
        self.meta["checks_failed"] = json!(failed.len());
        self.meta["status"] = json!(if failed.is_empty() { "pass" } else { "fail" });
        let meta = self.meta.clone();
        self.write_json("run.json", &meta)?;
        println!("run directory: {}", self.path.display());
        Ok(status)
    }
}

/// `t,x,f` rows for each snapshot.
pub fn pdf_csv(snapshots: &[PdfSnapshot]) -> String {
    let mut s = String::from("t,x,f\n");
    for snap in snapshots {
        for (i, f) in snap.values.iter().enumerate() {
            let _ = writeln!(s, "{},{},{}", snap.time, snap.grid.node(i), f);
        }
    }
    s
}

pub fn checks_csv(outcomes: &[CheckOutcome]) -> String {
    let mut s = String::from("check,trial,lhs,rhs,abs_err,tol,pass\n");
    for o in outcomes {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{}",
            o.check,
            o.trial,
            o.lhs,
            o.rhs,
            o.error(),
            o.tol,
            o.passed()
        );
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn report_line_format() {
        let c = Check {
            name: "l1[t=0.5]".into(),
            lhs: 0.03,
            rhs: 0.0,
            tol: 0.02,
        };
        assert!(!c.passed());
        assert_eq!(
            c.report_line(),
            "CHECK l1[t=0.5] FAIL lhs=0.03 rhs=0 tol=0.02"
        );
    }

    #[test]
    fn run_directories_do_not_collide() {
        let tmp = tempfile::tempdir().unwrap();
        let a = RunDir::create(tmp.path(), "mc", "demo", 3).unwrap();
        let b = RunDir::create(tmp.path(), "mc", "demo", 3).unwrap();
        assert_ne!(a.path, b.path);
        assert!(a
            .path
            .file_name()
            .unwrap()
            .to_str()
            .unwrap()
            .starts_with("demo-"));
        assert!(a
            .path
            .file_name()
            .unwrap()
            .to_str()
            .unwrap()
            .ends_with("-3"));
    }
}
