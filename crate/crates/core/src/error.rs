use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("wave speed is not positive: c({u}) = {c}")]
    NonPositiveSpeed { u: f64, c: f64 },

    #[error("invalid initial data: {0}")]
    InvalidData(String),

    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),

    #[error("coordinate {value} lies outside the boundary curve range [{lo}, {hi}]")]
    OutOfRange { value: f64, lo: f64, hi: f64 },

    #[error(
        "corrector diverged at node ({i}, {j}) = ({x:.6}, {y:.6}): update norm {last:e} after {iterations} iterations"
    )]
    FixedPointDivergence {
        i: usize,
        j: usize,
        x: f64,
        y: f64,
        last: f64,
        iterations: usize,
    },

    #[error("p or q became non-positive at node ({i}, {j}) = ({x:.6}, {y:.6})")]
    NonPositivePQ { i: usize, j: usize, x: f64, y: f64 },

    #[error("time {tau} is outside the computed horizon [0, {horizon}]")]
    OutOfHorizon { tau: f64, horizon: f64 },

    #[error("test function support leaves the solved region")]
    SupportExceedsDomain,

    #[error("rectangle is not inside the solved region")]
    OutsideSolvedRegion,

    #[error("finite-difference oracle left its validity range at t = {t}: max(|R|, |S|) = {max_rs:e}")]
    BlowupSuspected { t: f64, max_rs: f64 },

    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },

    #[error("{field}: {reason}")]
    Validation { field: String, reason: String },

    #[error("malformed grid dump: {0}")]
    Dump(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn validation(field: &str, reason: impl Into<String>) -> Self {
        Error::Validation {
            field: field.to_string(),
            reason: reason.into(),
        }
    }
}
