use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::config::ExperimentConfig;
use crate::error::{Error, Result};
use crate::observables::WignerGrid;

/// One CSV file: a header line followed by rows of numbers.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(name: impl Into<String>, columns: &[&str]) -> Self {
        Self { name: name.into(), columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<f64>) -> Result<()> {
        if row.len() != self.columns.len() {
            return Err(Error::DimensionMismatch { expected: self.columns.len(), got: row.len() });
        }
        self.rows.push(row);
        Ok(())
    }

    /// Builds a table from equally long columns.
    pub fn from_columns(name: impl Into<String>, cols: Vec<(&str, Vec<f64>)>) -> Result<Self> {
        let n = cols.first().map(|(_, v)| v.len()).unwrap_or(0);
        if let Some((c, v)) = cols.iter().find(|(_, v)| v.len() != n) {
            return Err(Error::Contract(format!("column {c} has {} rows, expected {n}", v.len())));
        }
        let columns = cols.iter().map(|(c, _)| c.to_string()).collect();
        let rows = (0..n).map(|i| cols.iter().map(|(_, v)| v[i]).collect()).collect();
        Ok(Self { name: name.into(), columns, rows })
    }

    /// Long-format `(x, p, w)` table of a Wigner grid.
    pub fn from_wigner(name: impl Into<String>, w: &WignerGrid) -> Self {
        let mut t = Self::new(name, &["x", "p", "w"]);
        for i in 0..w.n_points {
            for j in 0..w.n_points {
                t.rows.push(vec![w.x(i), w.p(j), w.values[[i, j]]]);
            }
        }
        t
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[k]).collect())
    }

    /// CSV text with 12 significant digits.
    pub fn to_csv(&self) -> String {
        let mut s = self.columns.join(",");
        s.push('\n');
        for row in &self.rows {
            for (k, x) in row.iter().enumerate() {
                if k > 0 {
                    s.push(',');
                }
                let _ = write!(s, "{x:.11e}");
            }
            s.push('\n');
        }
        s
    }
}

/// Outcome of re-running a headline quantity with a larger cutoff or a
/// smaller step.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergenceCheck {
    pub quantity: String,
    pub baseline: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub refined_n_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub refined_dt: Option<f64>,
    /// Largest shift, relative for values above one.
    pub shift: f64,
    pub passed: bool,
}

impl ConvergenceCheck {
    pub fn new(quantity: &str, baseline: f64, refined_n_max: Option<f64>, refined_dt: Option<f64>) -> Self {
        let scale = baseline.abs().max(1.0);
        let shift = [refined_n_max, refined_dt]
            .iter()
            .flatten()
            .map(|v| (v - baseline).abs() / scale)
            .fold(0.0, f64::max);
        Self { quantity: quantity.into(), baseline, refined_n_max, refined_dt, shift, passed: shift < 1e-4 }
    }
}

/// Everything an experiment produces.
#[derive(Clone, Debug)]
pub struct ResultBundle {
    pub experiment: String,
    pub config: ExperimentConfig,
    pub tables: Vec<Table>,
    /// Derived parameters actually used (resonance frequencies, step sizes).
    pub resolved: BTreeMap<String, f64>,
    /// Headline results.
    pub summary: BTreeMap<String, f64>,
    pub convergence: Vec<ConvergenceCheck>,
    pub notes: Vec<String>,
    pub wall_time_s: f64,
    pub status: String,
}

#[derive(Serialize)]
struct Metadata<'a> {
    run: RunInfo<'a>,
    config: &'a ExperimentConfig,
    resolved: &'a BTreeMap<String, f64>,
    summary: &'a BTreeMap<String, f64>,
    convergence: &'a [ConvergenceCheck],
}

#[derive(Serialize)]
struct RunInfo<'a> {
    experiment: &'a str,
    version: &'a str,
    status: &'a str,
    fast: bool,
    wall_time_s: f64,
    tables: Vec<String>,
    notes: &'a [String],
}

impl ResultBundle {
    pub fn new(config: &ExperimentConfig) -> Self {
        Self {
            experiment: config.experiment.clone(),
            config: config.clone(),
            tables: Vec::new(),
            resolved: BTreeMap::new(),
            summary: BTreeMap::new(),
            convergence: Vec::new(),
            notes: Vec::new(),
            wall_time_s: 0.0,
            status: "ok".into(),
        }
    }

    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }

    pub fn summary_value(&self, key: &str) -> Option<f64> {
        self.summary.get(key).copied()
    }

    pub fn resolve(&mut self, key: &str, value: f64) {
        self.resolved.insert(key.into(), value);
    }

    pub fn report(&mut self, key: &str, value: f64) {
        self.summary.insert(key.into(), value);
    }

    pub fn note(&mut self, text: impl Into<String>) {
        self.notes.push(text.into());
    }

    pub fn metadata_toml(&self) -> Result<String> {
        let meta = Metadata {
            run: RunInfo {
                experiment: &self.experiment,
                version: env!("CARGO_PKG_VERSION"),
                status: &self.status,
                fast: self.config.numerics.fast,
                wall_time_s: self.wall_time_s,
                tables: self.tables.iter().map(|t| format!("{}.csv", t.name)).collect(),
                notes: &self.notes,
            },
            config: &self.config,
            resolved: &self.resolved,
            summary: &self.summary,
            convergence: &self.convergence,
        };
        toml::to_string(&meta).map_err(|e| Error::Config(e.to_string()))
    }

    /// Writes `<dir>/<table>.csv` for every table plus `<dir>/metadata.toml`.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        fs::create_dir_all(dir)?;
        let mut written = Vec::new();
        for t in &self.tables {
            let path = dir.join(format!("{}.csv", t.name));
            fs::write(&path, t.to_csv())?;
            written.push(path);
        }
        let path = dir.join("metadata.toml");
        fs::write(&path, self.metadata_toml()?)?;
        written.push(path);
        Ok(written)
    }
}
