use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid frequency {0} rad/s (must be positive)")]
    InvalidFrequency(f64),

    #[error("inconsistent hybridization data: |x|^2 + |y|^2 = {0}")]
    InconsistentHybridization(f64),

    #[error("unknown graph node `{0}`")]
    UnknownNode(String),

    #[error("singular signal-flow graph at omega = {omega} rad/s (|det| = {det:e})")]
    SingularGraph { omega: f64, det: f64 },

    #[error("parametric instability: Stokes cooperativity {0} >= 1")]
    ParametricInstability(f64),

    #[error("integration diverged at t = {0} s")]
    Diverged(f64),

    #[error("time step {dt:e} s exceeds the stability limit {max:e} s")]
    StepTooLarge { dt: f64, max: f64 },

    #[error("signal sampled at {rate:e} Hz, at least {required:e} Hz required")]
    Undersampled { rate: f64, required: f64 },

    #[error("spectrum maximum lies on the grid boundary; widen the span")]
    InsufficientSpan,

    #[error("spectrum has no unique maximum")]
    FlatSpectrum,

    #[error("grid too coarse: {0} points across the half-maximum width, at least 8 needed")]
    InsufficientResolution(usize),

    #[error("referred noise is unbounded (conversion efficiency vanishes)")]
    UnboundedNoise,

    #[error("fit did not converge after {0} iterations")]
    NoConvergence(usize),

    #[error("degenerate data: {0}")]
    DegenerateData(String),

    #[error("data outside the model's regime: {0}")]
    OutOfRegime(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit status: 1 configuration or input error, 2 numerical failure,
    /// 3 physical instability.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::ParametricInstability(_) | Error::Diverged(_) => 3,
            Error::NoConvergence(_)
            | Error::SingularGraph { .. }
            | Error::InsufficientSpan
            | Error::FlatSpectrum
            | Error::InsufficientResolution(_)
            | Error::UnboundedNoise => 2,
            _ => 1,
        }
    }
}
