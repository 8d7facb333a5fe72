//! Flat `key=value` experiment configuration.
//!
//! ```text
//! experiment=two-packet
//! d=2*pi
//! a=0.02*pi
//! alpha=pi/2
//! ```
//!
//! Blank lines and `#` comments are ignored. Numbers accept plain decimals
//! and multiples of pi (`pi`, `-pi/4`, `3*pi/4`, `20pi`). Sweep axes are
//! declared as `sweep.<key>=v1,v2,...` together with `sweep_base`.

use std::f64::consts::PI;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "ABWAVE_OUT";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    TwoPacket,
    Comb,
    Evolve,
    Verify,
    Sweep,
}

impl ExperimentKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ExperimentKind::TwoPacket => "two-packet",
            ExperimentKind::Comb => "comb",
            ExperimentKind::Evolve => "evolve",
            ExperimentKind::Verify => "verify",
            ExperimentKind::Sweep => "sweep",
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ExperimentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "two-packet" => Ok(ExperimentKind::TwoPacket),
            "comb" => Ok(ExperimentKind::Comb),
            "evolve" => Ok(ExperimentKind::Evolve),
            "verify" => Ok(ExperimentKind::Verify),
            "sweep" => Ok(ExperimentKind::Sweep),
            other => Err(Error::Config(format!("unknown experiment `{other}`"))),
        }
    }
}

/// Parses a number, allowing multiples of pi.
pub fn parse_value(s: &str) -> Result<f64> {
    let s = s.trim();
    let bad = || Error::Config(format!("cannot parse number `{s}`"));
    if let Ok(v) = s.parse::<f64>() {
        return Ok(v);
    }
    let (num, den) = match s.rsplit_once('/') {
        Some((n, d)) => (n.trim(), d.trim().parse::<f64>().map_err(|_| bad())?),
        None => (s, 1.0),
    };
    let coef = match num.strip_suffix("pi") {
        Some(c) => {
            let c = c.trim().trim_end_matches('*').trim();
            let c = match c {
                "" | "+" => 1.0,
                "-" => -1.0,
                c => c.parse::<f64>().map_err(|_| bad())?,
            };
            c * PI
        }
        None => num.parse::<f64>().map_err(|_| bad())?,
    };
    if den == 0.0 {
        return Err(bad());
    }
    Ok(coef / den)
}

fn parse_list(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(parse_value)
        .collect()
}

/// Declarative inputs for one run. Unset fields take per-experiment defaults
/// when the run resolves them.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub d: Option<f64>,
    pub a: Option<f64>,
    pub alpha: Option<f64>,
    pub big_l: Option<f64>,
    pub n: Option<usize>,
    pub xi: Option<f64>,
    pub p0: Option<f64>,
    pub sigma: Option<f64>,
    pub t: Option<f64>,
    pub mass: Option<f64>,
    pub grid_dx: Option<f64>,
    pub pmax: Option<f64>,
    pub out: Option<PathBuf>,
    /// Test hook for `verify`: perturbs one packet phase.
    pub fault: bool,
    pub sweep_base: Option<ExperimentKind>,
    /// Sweep axes in declaration order.
    pub sweep: Vec<(String, Vec<f64>)>,
}

/// Keys a sweep may vary.
pub const SWEEPABLE: &[&str] = &["d", "a", "alpha", "L", "n", "xi", "p0", "sigma", "t", "mass"];

impl ExperimentConfig {
    pub fn new(kind: ExperimentKind) -> Self {
        Self {
            kind,
            d: None,
            a: None,
            alpha: None,
            big_l: None,
            n: None,
            xi: None,
            p0: None,
            sigma: None,
            t: None,
            mass: None,
            grid_dx: None,
            pmax: None,
            out: None,
            fault: false,
            sweep_base: None,
            sweep: Vec::new(),
        }
    }

    /// Parses a config file body. The `experiment` key is required unless
    /// `kind` is supplied by the caller.
    pub fn parse(text: &str, kind: Option<ExperimentKind>) -> Result<Self> {
        let mut pairs = Vec::new();
        let mut found = kind;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected key=value, got `{line}`", lineno + 1))
            })?;
            let (k, v) = (k.trim(), v.trim());
            if k == "experiment" {
                let parsed: ExperimentKind = v.parse()?;
                if kind.is_none() {
                    found = Some(parsed);
                }
            } else {
                pairs.push((k.to_string(), v.to_string()));
            }
        }
        let kind = found.ok_or_else(|| Error::Config("missing `experiment` key".into()))?;
        let mut cfg = Self::new(kind);
        for (k, v) in pairs {
            cfg.set(&k, &v)?;
        }
        Ok(cfg)
    }

    /// Sets one key from its textual value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let num = || parse_value(value);
        match key {
            "d" => self.d = Some(num()?),
            "a" => self.a = Some(num()?),
            "alpha" => self.alpha = Some(num()?),
            "L" => self.big_l = Some(num()?),
            "n" | "N" => self.n = Some(parse_count(value)?),
            "xi" => self.xi = Some(num()?),
            "p0" => self.p0 = Some(num()?),
            "sigma" => self.sigma = Some(num()?),
            "t" => self.t = Some(num()?),
            "mass" => self.mass = Some(num()?),
            "grid_dx" => self.grid_dx = Some(num()?),
            "pmax" => self.pmax = Some(num()?),
            "out" => self.out = Some(PathBuf::from(value)),
            "fault" => {
                self.fault = match value.trim() {
                    "true" | "1" | "yes" => true,
                    "false" | "0" | "no" => false,
                    other => return Err(Error::Config(format!("fault: expected bool, got `{other}`"))),
                }
            }
            "sweep_base" => self.sweep_base = Some(value.parse()?),
            k if k.starts_with("sweep.") => {
                let axis = &k["sweep.".len()..];
                if !SWEEPABLE.contains(&axis) {
                    return Err(Error::Config(format!("cannot sweep over `{axis}`")));
                }
                let values = parse_list(value)?;
                match self.sweep.iter_mut().find(|(name, _)| name == axis) {
                    Some(entry) => entry.1 = values,
                    None => self.sweep.push((axis.to_string(), values)),
                }
            }
            other => return Err(Error::Config(format!("unknown key `{other}`"))),
        }
        Ok(())
    }

    /// Sets a numeric key, as used by sweeps.
    pub fn set_number(&mut self, key: &str, v: f64) -> Result<()> {
        if key == "n" {
            if v < 1.0 || v.fract() != 0.0 {
                return Err(Error::Config(format!("n must be a positive integer, got {v}")));
            }
            self.n = Some(v as usize);
            return Ok(());
        }
        self.set(key, &format!("{v:?}"))
    }

    pub fn out_dir(&self) -> PathBuf {
        self.out
            .clone()
            .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("abwave-out"))
    }

    /// Every set key as `key=value` lines, in a fixed order. Floats use
    /// round-trip formatting, so parsing the echo reproduces the config.
    pub fn to_kv(&self) -> Vec<(String, String)> {
        let mut kv = vec![("experiment".to_string(), self.kind.to_string())];
        let mut push = |k: &str, v: Option<String>| {
            if let Some(v) = v {
                kv.push((k.to_string(), v));
            }
        };
        let f = |v: Option<f64>| v.map(|x| format!("{x:?}"));
        push("d", f(self.d));
        push("a", f(self.a));
        push("alpha", f(self.alpha));
        push("L", f(self.big_l));
        push("n", self.n.map(|n| n.to_string()));
        push("xi", f(self.xi));
        push("p0", f(self.p0));
        push("sigma", f(self.sigma));
        push("t", f(self.t));
        push("mass", f(self.mass));
        push("grid_dx", f(self.grid_dx));
        push("pmax", f(self.pmax));
        push("out", self.out.as_ref().map(|p| p.display().to_string()));
        push("fault", self.fault.then(|| "true".to_string()));
        push("sweep_base", self.sweep_base.map(|k| k.to_string()));
        for (axis, values) in &self.sweep {
            let list: Vec<String> = values.iter().map(|v| format!("{v:?}")).collect();
            kv.push((format!("sweep.{axis}"), list.join(",")));
        }
        kv
    }

    pub fn to_text(&self) -> String {
        self.to_kv()
            .into_iter()
            .map(|(k, v)| format!("{k}={v}\n"))
            .collect()
    }
}

fn parse_count(s: &str) -> Result<usize> {
    s.trim()
        .parse::<usize>()
        .map_err(|_| Error::Config(format!("expected a positive integer, got `{s}`")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_with_pi() {
        assert_eq!(parse_value("0.25").unwrap(), 0.25);
        assert_eq!(parse_value("pi").unwrap(), PI);
        assert_eq!(parse_value("pi/2").unwrap(), PI / 2.0);
        assert_eq!(parse_value("3*pi/4").unwrap(), 3.0 * PI / 4.0);
        assert_eq!(parse_value("20pi").unwrap(), 20.0 * PI);
        assert_eq!(parse_value("-pi").unwrap(), -PI);
        assert_eq!(parse_value("1/8").unwrap(), 0.125);
        assert!(parse_value("pie").is_err());
        assert!(parse_value("pi/0").is_err());
    }

    #[test]
    fn parse_and_echo_round_trip() {
        let text = "# fig 5\nexperiment=two-packet\nd = 2*pi\na=0.02*pi\nalpha=pi/2 # relative\n";
        let cfg = ExperimentConfig::parse(text, None).unwrap();
        assert_eq!(cfg.kind, ExperimentKind::TwoPacket);
        assert_eq!(cfg.alpha, Some(PI / 2.0));
        let again = ExperimentConfig::parse(&cfg.to_text(), None).unwrap();
        assert_eq!(again, cfg);
    }

    #[test]
    fn sweep_axes() {
        let text = "experiment=sweep\nsweep_base=comb\nsweep.xi=0.02, 0.01\nsweep.n=20,40\n";
        let cfg = ExperimentConfig::parse(text, None).unwrap();
        assert_eq!(cfg.sweep.len(), 2);
        assert_eq!(cfg.sweep[1], ("n".to_string(), vec![20.0, 40.0]));
        let again = ExperimentConfig::parse(&cfg.to_text(), None).unwrap();
        assert_eq!(again, cfg);
        let empty = ExperimentConfig::parse("experiment=sweep\nsweep.alpha=\n", None).unwrap();
        assert_eq!(empty.sweep, vec![("alpha".to_string(), vec![])]);
    }

    #[test]
    fn config_errors() {
        assert!(ExperimentConfig::parse("d=1\n", None).is_err());
        assert!(ExperimentConfig::parse("experiment=warp\n", None).is_err());
        assert!(ExperimentConfig::parse("experiment=comb\nbogus=1\n", None).is_err());
        assert!(ExperimentConfig::parse("experiment=comb\nn=2.5\n", None).is_err());
        assert!(ExperimentConfig::parse("experiment=comb\njunk\n", None).is_err());
        assert!(ExperimentConfig::parse("experiment=sweep\nsweep.out=1\n", None).is_err());
    }

    #[test]
    fn caller_kind_overrides_file() {
        let cfg = ExperimentConfig::parse("experiment=comb\nd=1\n", Some(ExperimentKind::TwoPacket)).unwrap();
        assert_eq!(cfg.kind, ExperimentKind::TwoPacket);
    }
}
