//! Named pass/fail checks, CSV artifacts and the per-run report.

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::error::Result;

/// One verification with its measured value and tolerance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub measured: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    pub detail: String,
    /// Sub-checks; the check passes only if all of them do.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub parts: Vec<Check>,
}

impl Check {
    /// Passes when `measured <= tolerance`.
    pub fn at_most(name: impl Into<String>, measured: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            passed: measured <= tolerance,
            measured: Some(measured),
            tolerance: Some(tolerance),
            detail: format!("{measured:.6e} <= {tolerance:.6e}"),
            parts: Vec::new(),
        }
    }

    /// Passes when `measured >= tolerance`.
    pub fn at_least(name: impl Into<String>, measured: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            passed: measured >= tolerance,
            measured: Some(measured),
            tolerance: Some(tolerance),
            detail: format!("{measured:.6e} >= {tolerance:.6e}"),
            parts: Vec::new(),
        }
    }

    pub fn flag(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            passed,
            measured: None,
            tolerance: None,
            detail: detail.into(),
            parts: Vec::new(),
        }
    }

    /// A check that records an error instead of a measurement.
    pub fn error(name: impl Into<String>, err: &crate::Error) -> Self {
        Self::flag(name, false, format!("error: {err}"))
    }

    /// Conjunction of `parts`.
    pub fn all(name: impl Into<String>, parts: Vec<Check>) -> Self {
        let passed = !parts.is_empty() && parts.iter().all(|c| c.passed);
        let failed: Vec<&str> = parts.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
        let detail = if failed.is_empty() {
            format!("{} parts passed", parts.len())
        } else {
            format!("failed: {}", failed.join(", "))
        };
        Self {
            name: name.into(),
            passed,
            measured: None,
            tolerance: None,
            detail,
            parts,
        }
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = detail.into();
        self
    }

    /// Prefixes the detail, keeping the comparison.
    pub fn note(mut self, note: impl AsRef<str>) -> Self {
        self.detail = format!("{}: {}", note.as_ref(), self.detail);
        self
    }

    /// One line per check and sub-check, indented by depth.
    pub fn render(&self) -> String {
        let mut out = String::new();
        self.render_into(&mut out, 0);
        out
    }

    fn render_into(&self, out: &mut String, depth: usize) {
        let status = if self.passed { "PASS" } else { "FAIL" };
        let _ = writeln!(out, "{}{status} {} ({})", "  ".repeat(depth), self.name, self.detail);
        for p in &self.parts {
            p.render_into(out, depth + 1);
        }
    }
}

/// A named CSV file.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Artifact {
    pub name: String,
    #[serde(skip)]
    pub csv: String,
}

impl Artifact {
    /// CSV from a header and rows of numbers.
    pub fn table(name: impl Into<String>, header: &[&str], rows: impl IntoIterator<Item = Vec<f64>>) -> Self {
        let mut csv = header.join(",");
        csv.push('\n');
        for row in rows {
            let line: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
            csv.push_str(&line.join(","));
            csv.push('\n');
        }
        Self { name: name.into(), csv }
    }
}

/// Checks and artifacts of one experiment.
#[derive(Debug, Clone, Default)]
pub struct Outcome {
    pub checks: Vec<Check>,
    pub artifacts: Vec<Artifact>,
}

impl Outcome {
    pub fn extend(&mut self, other: Outcome) {
        self.checks.extend(other.checks);
        self.artifacts.extend(other.artifacts);
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub subcommand: String,
    /// Resolved config; parsing it back reproduces the run.
    pub config: ExperimentConfig,
    pub checks: Vec<Check>,
    pub artifacts: Vec<Artifact>,
    pub passed: bool,
    pub wall_time_s: f64,
}

impl RunReport {
    pub fn new(subcommand: &str, config: ExperimentConfig, outcome: Outcome, wall_time_s: f64) -> Self {
        Self {
            subcommand: subcommand.into(),
            config,
            passed: outcome.passed(),
            checks: outcome.checks,
            artifacts: outcome.artifacts,
            wall_time_s,
        }
    }

    /// Writes `report.json` and one CSV per artifact into `dir`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        for a in &self.artifacts {
            std::fs::write(dir.join(format!("{}.csv", a.name)), &a.csv)?;
        }
        std::fs::write(dir.join("report.json"), serde_json::to_string_pretty(self)?)?;
        Ok(())
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            out.push_str(&c.render());
        }
        let _ = writeln!(
            out,
            "{} checks, {} failed, {:.1} s",
            self.checks.len(),
            self.checks.iter().filter(|c| !c.passed).count(),
            self.wall_time_s
        );
        out
    }
}
