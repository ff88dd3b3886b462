use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown model `{0}`")]
    UnknownModel(String),
    #[error("model `{name}` violates an invariant: {reason}")]
    InvalidModel { name: String, reason: String },
    #[error("coordinate s = {s} lies outside [0, {length}]")]
    OutOfDomain { s: f64, length: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("spectrum request of {requested} eigenvalues exceeds the cap of {cap}")]
    SpectrumCapExceeded { requested: usize, cap: usize },
    #[error("inverse iteration did not converge for eigenvalue index {index}")]
    EigvecFailure { index: usize },
    #[error("model `{0}` has no closed-form spectrum")]
    NoExactBackend(String),
    #[error("records mix different semiclassical parameters ({first} vs {other})")]
    MixedParameters { first: f64, other: f64 },
    #[error("energy {c} is not a regular value (critical point near s = {s})")]
    NonRegularValue { c: f64, s: f64 },
    #[error("energy shell [{c}, {c} + {eps}] is empty")]
    ZeroShell { c: f64, eps: f64 },
    #[error("window shoulders too wide: 3 h^lambda = {width} >= 1/2")]
    ShoulderTooWide { width: f64 },
    #[error("spectrum of mode k = {k} covers energies up to {covered}, window needs {needed}")]
    InsufficientSpectrum { k: i64, needed: f64, covered: f64 },
    #[error("not enough data for a fit: {0}")]
    NotEnoughData(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
