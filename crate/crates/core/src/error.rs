use thiserror::Error;

pub type Result<T> = std::result::Result<T, TqgError>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TqgError {
    #[error("N must be even")]
    OddGridSize(usize),

    #[error("N must lie in [4, 1024], got {0}")]
    GridSizeOutOfRange(usize),

    #[error("mean mode not allowed")]
    MeanMode,

    #[error("wavevector ({0}, {1}) outside the grid range")]
    WavevectorOutOfRange(i64, i64),

    #[error("conjugate partner of ({0}, {1}) is not representable on the grid")]
    NoConjugatePartner(i64, i64),

    #[error("conjugate pair at ({0}, {1}) is inconsistent")]
    InconsistentConjugatePair(i64, i64),

    #[error("grid mismatch: {0} vs {1}")]
    GridMismatch(usize, usize),

    #[error("physical array has shape {got:?}, expected ({n}, {n})")]
    ShapeMismatch { got: (usize, usize), n: usize },

    #[error("gevrey weight overflow at shell |k| = {shell} (phi = {phi})")]
    WeightOverflow { shell: f64, phi: f64 },

    #[error("radius fit needs at least 4 nonempty shells, found {0}")]
    TooFewShells(usize),

    #[error("blow-up or instability detected at s = {s}: {reason}")]
    BlowUp { s: f64, reason: String },

    #[error("step ds = {ds} exceeds the stability bound {bound} at s = {s}")]
    StepTooLarge { ds: f64, bound: f64, s: f64 },

    #[error("h must be positive")]
    NonPositiveH,

    #[error("invalid ray: {0}")]
    InvalidRay(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("no c on the grid 2^-4..2^10 passes the monitors; worst run: {run_id}")]
    CalibrationFailed { run_id: String },

    #[error("calibration needs at least {needed} runs, got {got}")]
    EnsembleTooSmall { needed: usize, got: usize },

    #[error("config: {0}")]
    Config(String),

    #[error("io: {0}")]
    Io(String),

    #[error("parse: {0}")]
    Parse(String),
}

impl TqgError {
    /// Name of the subsystem that raised the error, used in error reports.
    pub fn module(&self) -> &'static str {
        use TqgError::*;
        match self {
            OddGridSize(_)
            | GridSizeOutOfRange(_)
            | MeanMode
            | WavevectorOutOfRange(..)
            | NoConjugatePartner(..)
            | InconsistentConjugatePair(..)
            | GridMismatch(..)
            | ShapeMismatch { .. } => "spectral_field",
            WeightOverflow { .. } | TooFewShells(_) => "norms_gevrey",
            BlowUp { .. } | StepTooLarge { .. } | NonPositiveH | InvalidRay(_) => {
                "complex_time_integrator"
            }
            CalibrationFailed { .. } | EnsembleTooSmall { .. } => "analyticity_tracker",
            InvalidArgument(_) => "lemma_lab",
            Config(_) | Io(_) | Parse(_) => "cli_io",
        }
    }

    /// True for errors that stem from bad input rather than numerical failure.
    pub fn is_configuration(&self) -> bool {
        !matches!(
            self,
            TqgError::BlowUp { .. }
                | TqgError::StepTooLarge { .. }
                | TqgError::WeightOverflow { .. }
                | TqgError::CalibrationFailed { .. }
        )
    }
}

impl From<std::io::Error> for TqgError {
    fn from(e: std::io::Error) -> Self {
        TqgError::Io(e.to_string())
    }
}

impl From<serde_json::Error> for TqgError {
    fn from(e: serde_json::Error) -> Self {
        TqgError::Parse(e.to_string())
    }
}
