use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("segments overlap or are out of order at index {index}")]
    Overlapping { index: usize },

    #[error("wave norm is {norm}, expected 1")]
    NotNormalized { norm: f64 },

    #[error("phase program has {got} entries but the wave has {expected} packets")]
    LengthMismatch { expected: usize, got: usize },

    #[error("grid [{grid_lo}, {grid_hi}] does not cover required span [{need_lo}, {need_hi}]")]
    GridDoesNotCover {
        grid_lo: f64,
        grid_hi: f64,
        need_lo: f64,
        need_hi: f64,
    },

    #[error("smoothing width {sigma} must be below half the narrowest segment ({min_width})")]
    SmoothingTooWide { sigma: f64, min_width: f64 },

    #[error("grid step {dx} under-resolves the wave: need dx <= {required} ({feature})")]
    UnderResolved {
        dx: f64,
        required: f64,
        feature: &'static str,
    },

    #[error("moment of order {order} diverges for a discontinuous wave; smooth the edges first")]
    Divergent { order: u32 },

    #[error("incompatible grids: {0}")]
    IncompatibleGrids(String),

    #[error("wave carries {boundary_mass:e} probability near the grid boundary; enlarge the domain")]
    Aliasing { boundary_mass: f64 },

    #[error("density curve has no interior maximum")]
    NoInteriorPeak,

    #[error("grid needs {requested} points, above the limit of {limit}")]
    GridTooLarge { requested: usize, limit: usize },

    #[error("config: {0}")]
    Config(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
