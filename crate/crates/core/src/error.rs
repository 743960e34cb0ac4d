use std::fmt;

use thiserror::Error;

/// Which density-matrix invariant a candidate matrix violated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Invariant {
    Square,
    Hermiticity,
    Trace,
    Positivity,
}

impl fmt::Display for Invariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Invariant::Square => "square shape",
            Invariant::Hermiticity => "hermiticity",
            Invariant::Trace => "unit trace",
            Invariant::Positivity => "positivity",
        };
        f.write_str(name)
    }
}

/// Report produced when a matrix fails [`crate::linalg::check_density`].
///
/// `amount` is the size of the violation: the largest `|ρ - ρ†|` entry, the
/// trace error `|Tr ρ - 1|`, or the magnitude of the most negative eigenvalue.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityViolation {
    pub invariant: Invariant,
    pub amount: f64,
    pub tolerance: f64,
}

impl fmt::Display for DensityViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} violated by {:.3e} (tolerance {:.1e})",
            self.invariant, self.amount, self.tolerance
        )
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimension {0}: qudit dimension must be at least 2")]
    InvalidDimension(usize),

    #[error("invalid matrix shape {rows}x{cols} with {len} entries")]
    InvalidShape { rows: usize, cols: usize, len: usize },

    #[error("matrix contains a non-finite entry at ({0}, {1})")]
    NonFinite(usize, usize),

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid subsystem dimensions: {0}")]
    InvalidDims(String),

    #[error("index {name}={value} out of range for d={d}")]
    IndexOutOfRange {
        name: &'static str,
        value: usize,
        d: usize,
    },

    #[error("parameter {name}={value} outside [0, 1]")]
    ParameterOutOfRange { name: &'static str, value: f64 },

    #[error("invalid density matrix: {0}")]
    Density(DensityViolation),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("perturbed sample rejected: {0}")]
    RejectedSample(DensityViolation),

    #[error("dimension d={d} not supported by {what} (limit {limit})")]
    UnsupportedDimension {
        what: &'static str,
        d: usize,
        limit: usize,
    },

    #[error("measurement outcome has probability {0:.3e}; state is degenerate")]
    DegenerateOutcome(f64),

    #[error("efficiency undefined: input state carries no coherence")]
    UndefinedEfficiency,

    #[error("Kraus set incomplete: max |Σ E†E - I| = {deviation:.3e} (tolerance {tolerance:.1e})")]
    IncompleteChannel { deviation: f64, tolerance: f64 },

    #[error("no closed form for {0}")]
    NoClosedForm(String),

    #[error("estimator drew {draws} samples and accepted none")]
    NoAcceptedSamples { draws: usize },

    #[error("invalid estimator configuration: {0}")]
    InvalidConfig(String),

    #[error("schema error at `{field}`: {message}")]
    Schema { field: String, message: String },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
