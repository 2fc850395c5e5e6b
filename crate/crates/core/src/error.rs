use std::path::PathBuf;

/// Errors raised anywhere in the simulator.
///
/// Variants fall in three families (see [`Error::category`]) so front ends
/// can map them to distinct exit codes.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("config: {0}")]
    Config(String),

    #[error("missing config fields: {}", .0.join(", "))]
    MissingFields(Vec<String>),

    #[error("unknown preset `{0}` (known: multimode, single_mode)")]
    UnknownPreset(String),

    #[error("{path}:{line}: {reason}")]
    Parse { path: String, line: usize, reason: String },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("tabulated data covers [{have_lo:.6e}, {have_hi:.6e}] but [{need_lo:.6e}, {need_hi:.6e}] is required")]
    Coverage { have_lo: f64, have_hi: f64, need_lo: f64, need_hi: f64 },

    #[error("pump grid holds {captured:.5} of the pulse energy; a span of at least {required_span:.6e} rad/s is needed")]
    PumpGridTooNarrow { captured: f64, required_span: f64 },

    #[error("eigenvalue {value:.9} exceeds 1 (passive filter/gate or grid too coarse)")]
    EigenvalueAboveOne { value: f64 },

    #[error("pair probability {0:.4} is outside the perturbative range (< 0.2)")]
    GainTooHigh(f64),

    #[error("unphysical moments: {0}")]
    Unphysical(String),

    #[error("negative probability {value:.3e} for subset {subset}")]
    NegativeProbability { value: f64, subset: String },

    #[error("fit failed: {0}")]
    Fit(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("scan row at tau = {tau_ps:.4} ps failed: {source}")]
    ScanRow { tau_ps: f64, #[source] source: Box<Error> },

    #[error("{path}: {source}")]
    Io { path: PathBuf, #[source] source: std::io::Error },
}

/// Coarse error family.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Category {
    /// Bad input: configuration, files, parameters.
    Config,
    /// The model or solver failed on valid input.
    Numerical,
    /// Reading or writing files.
    Io,
}

impl Error {
    pub fn category(&self) -> Category {
        match self {
            Error::InvalidParameter { .. }
            | Error::Config(_)
            | Error::MissingFields(_)
            | Error::UnknownPreset(_)
            | Error::Parse { .. }
            | Error::GridMismatch(_)
            | Error::Coverage { .. }
            | Error::PumpGridTooNarrow { .. }
            | Error::GainTooHigh(_) => Category::Config,
            Error::EigenvalueAboveOne { .. }
            | Error::Unphysical(_)
            | Error::NegativeProbability { .. }
            | Error::Fit(_)
            | Error::Numerical(_) => Category::Numerical,
            Error::ScanRow { source, .. } => source.category(),
            Error::Io { .. } => Category::Io,
        }
    }

    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter { name, reason: reason.into() }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
