//! Wavepacket superpositions under relative-phase programs.
//!
//! Builds top-hat superpositions exactly, imprints per-packet phases, and
//! measures what changes and what does not: the momentum distribution
//! changes, every momentum moment stays put, and the change shows up in the
//! modular momentum `<exp(-i p b)>`.

pub mod error;
pub mod evolution;
pub mod experiment;
pub mod spectral;
pub mod wavefunctions;

pub use error::{Error, Result};
pub use evolution::{evolution_grid, free_evolve, momentum_extent, position_density, PropagationSpec};
pub use spectral::{
    analytic_density_boosted_tophat, analytic_density_two_packet, band_mass,
    boosted_overlap_closed_form, fft_momentum_amplitude, oracle_step, fft_momentum_density, modular_expectation,
    moment, momentum_amplitude, momentum_density, overlap, peak_location, DensityCurve,
    ModularSample, MomentEstimate, Spectrum, Wave,
};
pub use wavefunctions::{
    apply_phase_program, boosted_tophat, make_comb, make_tophat, make_two_packet, sample,
    sample_unnormalized, smooth_edges, Grid, PhaseProgram, PiecewiseWave, Regularity, SampledWave,
    Segment,
};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
