//! Declarative experiments: configs in, CSV tables and `key=value`
//! summaries out.

pub mod config;
pub mod result;
pub mod runs;
pub mod sweep;
pub mod verify;

pub use config::{parse_value, ExperimentConfig, ExperimentKind, OUT_DIR_ENV};
pub use result::{parse_summary, Check, Provenance, RunResult, Table, MOMENTUM_COLUMNS};
pub use runs::{run_comb, run_evolve, run_two_packet, CombParams, EvolveParams, TwoPacketParams};
pub use sweep::run_sweep;
pub use verify::run_verify;

use crate::error::Result;

/// Runs the experiment selected by `cfg.kind`.
pub fn run(cfg: &ExperimentConfig) -> Result<RunResult> {
    match cfg.kind {
        ExperimentKind::TwoPacket => run_two_packet(cfg),
        ExperimentKind::Comb => run_comb(cfg),
        ExperimentKind::Evolve => run_evolve(cfg),
        ExperimentKind::Verify => run_verify(cfg),
        ExperimentKind::Sweep => run_sweep(cfg),
    }
}
