use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid photon-number cutoff n_max = {0} (need n_max >= 3)")]
    InvalidCutoff(usize),

    #[error("cutoff n_max = {n_max} too small: unitarity defect {defect:.3e}")]
    CutoffTooSmall { n_max: usize, defect: f64 },

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("unstable parametric drive: |delta_c| = {delta_c} must exceed lambda = {lambda}")]
    Instability { delta_c: f64, lambda: f64 },

    #[error("singular effective frequency omega_c = {0}")]
    SingularFrequency(f64),

    #[error("index out of range: {0}")]
    Index(String),

    #[error("bracket error: {0}")]
    Bracket(String),

    #[error("tracking error: {0}")]
    Tracking(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("step-size error: {0}")]
    StepSize(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("usage error: {0}")]
    Usage(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Usage(_) | Error::Instability { .. } | Error::InvalidCutoff(_) => 2,
            Error::Bracket(_) | Error::Tracking(_) => 4,
            Error::Io(_) => 1,
            _ => 3,
        }
    }
}
