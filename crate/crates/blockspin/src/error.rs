use std::path::PathBuf;

use thiserror::Error;

/// Unified error type for the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// A model, schedule, or solver parameter violates its documented domain.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A spin configuration has the wrong number of spins for the model.
    #[error("spin configuration has {found} spins, expected {expected}")]
    ConfigLength { expected: usize, found: usize },

    /// A magnetization value does not sit on the admissible grid of the block.
    #[error("inadmissible magnetization: {0}")]
    Inadmissible(String),

    /// A dilution mask does not have one entry per matched pair.
    #[error("mask has {found} entries, expected {expected} (one per matched pair)")]
    MaskLength { expected: usize, found: usize },

    /// An exact computation would exceed the configured compute budget.
    /// Budgets are hard limits; nothing is silently truncated.
    #[error("compute budget exceeded: {work} {unit} required, budget allows {budget}")]
    BudgetExceeded {
        work: u64,
        budget: u64,
        unit: &'static str,
    },

    /// Two well boxes overlap (their interiors intersect).
    #[error("wells {0} and {1} overlap")]
    OverlappingWells(usize, usize),

    /// Two containers that must correspond one-to-one have different shapes
    /// (e.g. well masses vs. limit-law weights).
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    /// The coupling schedule falls outside every regime with a proven limit.
    #[error("no limiting law covers this schedule: {0}")]
    UncoveredRegime(String),

    /// A configuration file could not be interpreted.
    #[error("config error: {0}")]
    Config(String),

    /// Filesystem failure while reading or writing an artifact.
    #[error("io error at {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// A binary table cache file is malformed or from an incompatible version.
    #[error("invalid table cache: {0}")]
    Cache(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
