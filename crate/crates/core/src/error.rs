use thiserror::Error;

/// Errors raised by the numerical routines of this crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix has non-finite entries")]
    NonFinite,

    #[error("spectrum is not in the open right half-plane (min real part {min_real_part:e})")]
    NotExpansive { min_real_part: f64 },

    #[error("symmetric part A + A^T is not positive definite; |A_t x| need not be monotone in t")]
    NotMonotone,

    #[error("dilation parameter must be positive, got {0}")]
    NonPositiveScale(f64),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("quasi-norm root finding did not converge (|x| = {norm:e})")]
    NoConvergence { norm: f64 },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("frequency band selects no lattice frequency")]
    EmptyBand,

    #[error("band overflow: {0}")]
    BandOverflow(String),

    #[error("not lattice compatible: {0}")]
    NotLatticeCompatible(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("weight exponent {gamma} of block {block} outside admissible window ({lo}, {hi})")]
    InadmissibleWeight { block: usize, gamma: f64, lo: f64, hi: f64 },

    #[error("spectrum leaves the covered band: rho = {rho} > {limit}")]
    CoverageViolation { rho: f64, limit: f64 },

    #[error("no usable scale: delta * 2^0 = {delta} exceeds the Nyquist quasi-norm radius {nyquist}")]
    NoUsableScale { delta: f64, nyquist: f64 },

    #[error("scale {n} out of range 0..={n_max}")]
    ScaleOutOfRange { n: usize, n_max: usize },

    #[error("parameter window violated: {0}")]
    ParameterWindow(String),

    #[error("degenerate cube: {samples} samples for {coefficients} polynomial coefficients")]
    DegenerateCube { samples: usize, coefficients: usize },

    #[error("scale {n} is unresolved: {points} lattice points in a block ball (need {need})")]
    UnresolvedScale { n: usize, points: usize, need: usize },

    #[error("too few nonzero pairs for a verdict: {got} (need at least {need})")]
    TooFewSamples { got: usize, need: usize },

    #[error("malformed data: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
