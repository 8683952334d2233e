use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("grid mismatch between operands")]
    GridMismatch,
    #[error("multiplier is not finite at frequency {frequency:?}")]
    NonFiniteMultiplier { frequency: Vec<f64> },
    #[error(
        "top annulus 2^{} = {top} exceeds the Nyquist bound {nyquist:.4}; \
         use at least N = {required_points} points or a period L <= {max_length:.4}",
        .j_max + 1
    )]
    Nyquist {
        j_max: u32,
        top: f64,
        nyquist: f64,
        required_points: usize,
        max_length: f64,
    },
    #[error("resolution level {level} out of range 0..={j_max}")]
    LevelOutOfRange { level: u32, j_max: u32 },
    #[error("invalid resolution: {0}")]
    InvalidResolution(String),
    #[error("invalid weight: {0}")]
    InvalidWeight(String),
    #[error("admissibility violation: {0}")]
    AdmissibilityViolation(String),
    #[error("weight must be non-increasing or constant (property III): {0}")]
    WeightPropertyIII(String),
    #[error("band leakage: relative spectral mass {relative_mass:.3e} above |xi| = {cutoff}")]
    BandLeakage { relative_mass: f64, cutoff: f64 },
    #[error("invalid space parameters: {0}")]
    InvalidSpace(String),
    #[error("dyadic cubes do not align with the grid: {0}")]
    CubeAlignment(String),
    #[error("Fourier series tail {tail:.3e} at level {level} exceeds tolerance {tolerance:.1e}")]
    TailTooLarge { level: u32, tail: f64, tolerance: f64 },
    #[error("support condition violated: {0}")]
    SupportViolation(String),
    #[error("parameter gate rejected: {0}")]
    Gate(String),
    #[error("index relation violated: {0}")]
    IndexRelation(String),
    #[error("Picard iteration is not contracting after {iterations} iterations (growth factor {growth_factor:.4})")]
    Divergence { growth_factor: f64, iterations: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("malformed LPGF data at byte offset {offset}: {message}")]
    Format { offset: usize, message: String },
    #[error("unsupported LPGF version {0}")]
    UnsupportedVersion(u32),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
