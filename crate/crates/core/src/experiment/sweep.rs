//! Cartesian parameter sweeps over the single-run experiments.

use std::path::PathBuf;

use rayon::prelude::*;

use crate::error::{Error, Result};

use super::config::{ExperimentConfig, ExperimentKind};
use super::result::{fmt_num, Check, RunResult, Table};
use super::run;

/// Every combination of the axis values, first axis slowest. An empty axis
/// gives no points; no axes at all gives the single base point.
pub fn cartesian(axes: &[(String, Vec<f64>)]) -> Vec<Vec<(String, f64)>> {
    axes.iter().fold(vec![Vec::new()], |acc, (name, values)| {
        acc.iter()
            .flat_map(|prefix| {
                values.iter().map(move |&v| {
                    let mut p = prefix.clone();
                    p.push((name.clone(), v));
                    p
                })
            })
            .collect()
    })
}

/// Outcome of one sweep point.
#[derive(Debug)]
pub struct PointOutcome {
    pub index: usize,
    pub values: Vec<(String, f64)>,
    pub dir: PathBuf,
    pub result: std::result::Result<RunResult, String>,
}

impl PointOutcome {
    pub fn status(&self) -> &'static str {
        match &self.result {
            Ok(r) if r.passed() => "pass",
            Ok(_) => "fail",
            Err(_) => "error",
        }
    }

    fn metric(&self, key: &str) -> f64 {
        self.result
            .as_ref()
            .ok()
            .and_then(|r| r.get_metric(key))
            .unwrap_or(f64::NAN)
    }
}

/// Configuration of one point: the sweep's own settings with the base
/// experiment and the point's axis values.
pub fn point_config(cfg: &ExperimentConfig, base: ExperimentKind, values: &[(String, f64)]) -> Result<ExperimentConfig> {
    let mut c = cfg.clone();
    c.kind = base;
    c.sweep.clear();
    c.sweep_base = None;
    for (k, v) in values {
        c.set_number(k, *v)?;
    }
    Ok(c)
}

/// Runs every point, in parallel, writing each point's files under
/// `<out>/point-NNNN`, then assembles the summary table.
pub fn run_sweep(cfg: &ExperimentConfig) -> Result<RunResult> {
    let base = cfg.sweep_base.unwrap_or(ExperimentKind::TwoPacket);
    if matches!(base, ExperimentKind::Sweep | ExperimentKind::Verify) {
        return Err(Error::Config(format!("cannot sweep over `{base}` runs")));
    }
    let out = cfg.out_dir();
    let points = cartesian(&cfg.sweep);
    let mut outcomes: Vec<PointOutcome> = points
        .into_par_iter()
        .enumerate()
        .map(|(index, values)| {
            let dir = out.join(format!("point-{index:04}"));
            let result = point_config(cfg, base, &values)
                .and_then(|c| run(&c))
                .and_then(|r| r.write_to(&dir).map(|_| r))
                .map_err(|e| e.to_string());
            PointOutcome {
                index,
                values,
                dir,
                result,
            }
        })
        .collect();
    outcomes.sort_by_key(|o| o.index);

    let mut echo = cfg.clone();
    echo.sweep_base = Some(base);
    let mut r = RunResult::new("sweep_summary", echo);
    let axes: Vec<&str> = cfg.sweep.iter().map(|(k, _)| k.as_str()).collect();
    let mut header = vec!["point"];
    header.extend(&axes);
    header.extend(["status", "peak_final", "overlap_abs", "l1_change", "error"]);
    let mut table = Table::new(&header);
    for o in &outcomes {
        let mut row = vec![format!("{:04}", o.index)];
        row.extend(o.values.iter().map(|(_, v)| fmt_num(*v)));
        row.push(o.status().to_string());
        for key in ["peak_final", "overlap_abs", "l1_change"] {
            row.push(fmt_num(o.metric(key)));
        }
        row.push(o.result.as_ref().err().cloned().unwrap_or_default());
        table.rows.push(row);

        let detail = match &o.result {
            Ok(res) => {
                let failed: Vec<&str> = res.failures().map(|c| c.name.as_str()).collect();
                if failed.is_empty() {
                    format!("{}", o.dir.display())
                } else {
                    format!("{}: failed {}", o.dir.display(), failed.join(","))
                }
            }
            Err(e) => e.clone(),
        };
        r.check(Check::new(format!("point_{:04}", o.index), o.status() == "pass", detail));
    }
    let failures = outcomes.iter().filter(|o| o.status() != "pass").count();
    r.metric("points", outcomes.len() as f64);
    r.metric("failures", failures as f64);
    r.table = Some(table);
    Ok(r)
}
