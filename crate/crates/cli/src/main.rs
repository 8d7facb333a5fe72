//! `abwave` command-line front end.
//!
//! Exit codes: 0 when every check passes, 1 when a check fails, 2 for an
//! invalid config or any other error.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use abwave::experiment::{run, ExperimentConfig, ExperimentKind, RunResult};
use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "abwave", version, about = "Momentum distributions of phase-shifted wave packets")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Two separated packets with a relative phase.
    TwoPacket(Common),
    /// N-packet comb driven towards a boosted top-hat.
    Comb(Common),
    /// Free evolution of the smoothed two-packet state.
    Evolve(Common),
    /// The full invariant suite.
    Verify {
        #[command(flatten)]
        common: Common,
        /// Perturb one phase of the comb program (test hook).
        #[arg(long)]
        fault: bool,
    },
    /// Cartesian parameter sweep, configured by `sweep.<key>=v1,v2,...`.
    Sweep(Common),
}

#[derive(Args)]
struct Common {
    /// Flat key=value config file.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Output directory (defaults to $ABWAVE_OUT, then ./abwave-out).
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Position grid step.
    #[arg(long, value_name = "DX")]
    grid_dx: Option<String>,
    /// Half-width of the emitted momentum band.
    #[arg(long, value_name = "P")]
    pmax: Option<String>,
    /// Override any config key; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Print nothing but errors.
    #[arg(long, short)]
    quiet: bool,
}

fn build_config(kind: ExperimentKind, common: &Common, fault: bool) -> anyhow::Result<ExperimentConfig> {
    let mut cfg = match &common.config {
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            let cfg = ExperimentConfig::parse(&text, Some(kind))?;
            let declared = text
                .lines()
                .filter_map(|l| l.split('#').next()?.split_once('='))
                .find(|(k, _)| k.trim() == "experiment")
                .map(|(_, v)| v.trim().to_string());
            if let Some(declared) = declared {
                if declared != kind.as_str() {
                    bail!("{} declares experiment `{declared}` but the command is `{kind}`", path.display());
                }
            }
            cfg
        }
        None => ExperimentConfig::new(kind),
    };
    for pair in &common.set {
        let (k, v) = pair
            .split_once('=')
            .with_context(|| format!("--set expects KEY=VALUE, got `{pair}`"))?;
        if k.trim() == "experiment" {
            bail!("the experiment is chosen by the command, not --set");
        }
        cfg.set(k.trim(), v.trim())?;
    }
    if let Some(v) = &common.grid_dx {
        cfg.set("grid_dx", v)?;
    }
    if let Some(v) = &common.pmax {
        cfg.set("pmax", v)?;
    }
    if let Some(dir) = &common.out {
        cfg.out = Some(dir.clone());
    }
    if fault {
        cfg.fault = true;
    }
    Ok(cfg)
}

fn report(result: &RunResult, written: &[PathBuf]) {
    println!("{}: {}", result.name, if result.passed() { "pass" } else { "fail" });
    for c in &result.checks {
        let mark = if c.passed { "ok  " } else { "FAIL" };
        println!("  {mark} {} ({})", c.name, c.detail);
    }
    for (k, v) in &result.notes {
        println!("  note {k}: {v}");
    }
    for path in written {
        println!("  wrote {}", path.display());
    }
}

fn execute(cli: Cli) -> anyhow::Result<bool> {
    let (kind, common, fault) = match &cli.command {
        Command::TwoPacket(c) => (ExperimentKind::TwoPacket, c, false),
        Command::Comb(c) => (ExperimentKind::Comb, c, false),
        Command::Evolve(c) => (ExperimentKind::Evolve, c, false),
        Command::Verify { common, fault } => (ExperimentKind::Verify, common, *fault),
        Command::Sweep(c) => (ExperimentKind::Sweep, c, false),
    };
    let cfg = build_config(kind, common, fault)?;
    let result = run(&cfg)?;
    let dir = cfg.out_dir();
    let written = result
        .write_to(&dir)
        .with_context(|| format!("writing results to {}", dir.display()))?;
    if !common.quiet {
        report(&result, &written);
    }
    Ok(result.passed())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
