use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use crate::error::{Error, Result};

use super::config::ExperimentConfig;

/// Column names of every momentum-density CSV.
pub const MOMENTUM_COLUMNS: [&str; 5] = [
    "p",
    "density_initial",
    "density_final",
    "density_oracle_initial",
    "density_oracle_final",
];

/// A rectangular table written as CSV with one header row.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    /// Builds a numeric table from equal-length columns.
    pub fn from_columns(header: &[&str], columns: &[&[f64]]) -> Self {
        let mut t = Self::new(header);
        let n = columns.first().map_or(0, |c| c.len());
        debug_assert!(columns.iter().all(|c| c.len() == n));
        t.rows = (0..n)
            .map(|i| columns.iter().map(|c| fmt_num(c[i])).collect())
            .collect();
        t
    }

    /// Numeric column by name; unparsable cells become NaN.
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let idx = self.header.iter().position(|h| h == name)?;
        Some(
            self.rows
                .iter()
                .map(|r| r[idx].parse().unwrap_or(f64::NAN))
                .collect(),
        )
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row)?;
        }
        w.flush().map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Ok(())
    }
}

/// Fixed scientific formatting for numeric cells; identical inputs give
/// identical bytes.
pub fn fmt_num(v: f64) -> String {
    format!("{v:.15e}")
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }

    /// `value <= limit`.
    pub fn at_most(name: impl Into<String>, value: f64, limit: f64) -> Self {
        Self::new(name, value <= limit, format!("{value:e} <= {limit:e}"))
    }

    /// `value > limit`.
    pub fn above(name: impl Into<String>, value: f64, limit: f64) -> Self {
        Self::new(name, value > limit, format!("{value:e} > {limit:e}"))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Provenance {
    pub version: String,
    pub timestamp_unix: u64,
}

impl Provenance {
    pub fn now() -> Self {
        Self {
            version: crate::VERSION.to_string(),
            timestamp_unix: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
        }
    }
}

/// Outcome of one experiment: config echo, data, metrics and checks.
#[derive(Debug, Clone)]
pub struct RunResult {
    pub name: String,
    pub config: ExperimentConfig,
    pub table: Option<Table>,
    pub metrics: Vec<(String, f64)>,
    pub checks: Vec<Check>,
    pub notes: Vec<(String, String)>,
    pub provenance: Provenance,
}

impl RunResult {
    pub fn new(name: impl Into<String>, config: ExperimentConfig) -> Self {
        Self {
            name: name.into(),
            config,
            table: None,
            metrics: Vec::new(),
            checks: Vec::new(),
            notes: Vec::new(),
            provenance: Provenance::now(),
        }
    }

    pub fn metric(&mut self, key: &str, v: f64) {
        self.metrics.push((key.to_string(), v));
    }

    pub fn get_metric(&self, key: &str) -> Option<f64> {
        self.metrics.iter().find(|(k, _)| k == key).map(|(_, v)| *v)
    }

    pub fn check(&mut self, c: Check) {
        self.checks.push(c);
    }

    pub fn get_check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }

    /// The sidecar body: `key=value` lines.
    pub fn summary_text(&self) -> String {
        let mut s = String::new();
        let mut line = |k: &str, v: &str| {
            s.push_str(k);
            s.push('=');
            s.push_str(v);
            s.push('\n');
        };
        line("name", &self.name);
        line("version", &self.provenance.version);
        line("timestamp_unix", &self.provenance.timestamp_unix.to_string());
        for (k, v) in self.config.to_kv() {
            line(&format!("config.{k}"), &v);
        }
        for (k, v) in &self.metrics {
            line(&format!("metric.{k}"), &format!("{v:?}"));
        }
        for c in &self.checks {
            line(&format!("check.{}", c.name), if c.passed { "pass" } else { "fail" });
            line(&format!("check.{}.detail", c.name), &c.detail);
        }
        for (k, v) in &self.notes {
            line(&format!("note.{k}"), v);
        }
        line("status", if self.passed() { "pass" } else { "fail" });
        s
    }

    /// Writes `<name>.csv` (when there is a table) and `<name>.summary.txt`
    /// into `dir`, returning the paths written.
    pub fn write_to(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        let io = |path: &Path| {
            let path = path.to_path_buf();
            move |source| Error::Io { path, source }
        };
        fs::create_dir_all(dir).map_err(io(dir))?;
        let mut written = Vec::new();
        if let Some(table) = &self.table {
            let path = dir.join(format!("{}.csv", self.name));
            table.write_csv(&path)?;
            written.push(path);
        }
        let path = dir.join(format!("{}.summary.txt", self.name));
        let mut f = fs::File::create(&path).map_err(io(&path))?;
        f.write_all(self.summary_text().as_bytes())
            .map_err(io(&path))?;
        written.push(path);
        Ok(written)
    }
}

/// Reads a `key=value` sidecar back into pairs.
pub fn parse_summary(text: &str) -> Vec<(String, String)> {
    text.lines()
        .filter_map(|l| l.split_once('='))
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect()
}
