//! Crate-wide error type and exit-code mapping for the CLI.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, got {got}")]
    DimensionMismatch {
        context: String,
        expected: usize,
        got: usize,
    },

    #[error("unknown factor label {label:?}")]
    UnknownLabel { label: String },

    #[error("projector set is empty")]
    EmptyProjectorSet,

    #[error("invalid projector set: {detail}")]
    InvalidProjectorSet { detail: String },

    #[error("step {index} is not unitary (defect {defect:.3e})")]
    NonUnitaryStep { index: usize, defect: f64 },

    #[error("density operator is invalid: {detail}")]
    InvalidDensity { detail: String },

    #[error("time {t} lies outside the schedule range [{lo}, {hi}]")]
    TimeOutOfRange { t: i64, lo: i64, hi: i64 },

    #[error("time {t} does not fall on a step boundary of the schedule")]
    TimeNotOnStepBoundary { t: i64 },

    #[error("invalid time interval [{t_a}, {t_b}]")]
    InvalidInterval { t_a: i64, t_b: i64 },

    #[error("event ordering violated: {detail}")]
    EventOrdering { detail: String },

    #[error("path space has {paths} paths ({terms} summed terms), exceeding the cap of {cap}; raise EXPSEL_PATH_CAP or shrink the lattice")]
    PathCapExceeded { paths: u128, terms: u128, cap: u64 },

    #[error("non-finite step amplitude at step {step}, configurations ({from}, {to})")]
    NonFiniteAmplitude { step: usize, from: usize, to: usize },

    #[error("condition unreachable: total selection weight {total:.3e} is below 1e-14")]
    ConditionUnreachable { total: f64 },

    #[error("ill-posed selection for label {label:?}: weight {value} is not a nonnegative real within tolerance")]
    IllPosedSelection { label: String, value: String },

    #[error("auxiliary set {index} is not complete (defect {defect:.3e})")]
    IncompleteAuxiliary { index: usize, defect: f64 },

    #[error("auxiliary outcome label {label:?} is required but missing")]
    AuxiliaryRequired { label: String },

    #[error("events share the time stamp {time}, which has no defined insertion order")]
    CoincidentEventTimes { time: i64 },

    #[error("probability tables carry different label sets")]
    LabelMismatch,

    #[error("scenario field {field}: {message}")]
    Scenario { field: String, message: String },

    #[error("cannot express projector set at time {time} as sharp lattice selections: {detail}")]
    NotCompilable { time: i64, detail: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code for the CLI front end.
    ///
    /// 2 parse/validation, 3 unreachable condition, 4 enumeration cap,
    /// 5 missing auxiliary data for a requested prescription.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::ConditionUnreachable { .. } => 3,
            Error::PathCapExceeded { .. } => 4,
            Error::AuxiliaryRequired { .. } => 5,
            _ => 2,
        }
    }
}
