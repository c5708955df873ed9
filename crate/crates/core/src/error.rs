use num_complex::Complex64;
use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown potential `{0}`")]
    UnknownPotential(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("malformed grid: {0}")]
    MalformedGrid(String),

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("x = {0} lies outside [0, pi]")]
    OutOfRange(f64),

    #[error("spectral parameter z = sqrt(lambda) must be nonzero")]
    ZeroSpectralParameter,

    #[error("step-size underflow at x = {x}")]
    StepUnderflow { x: f64 },

    #[error("theta-existence threshold violated: Pruefer integration failed at x = {x} for lambda = {lambda}")]
    ThetaExistence { lambda: Complex64, x: f64 },

    #[error("Newton iteration did not converge from lambda = {start} (last iterate {last})")]
    NoConvergence { start: Complex64, last: Complex64 },

    #[error("characteristic function vanishes on the contour near lambda = {0}")]
    ContourZero(Complex64),

    #[error(
        "completeness failure: winding count {winding} but {found} eigenvalues found in box \
         [{re_lo}, {re_hi}] x [{im_lo}, {im_hi}]"
    )]
    Completeness {
        winding: usize,
        found: usize,
        re_lo: f64,
        re_hi: f64,
        im_lo: f64,
        im_hi: f64,
    },

    #[error("eigenvalue {n} is not simple (suspected algebraic multiplicity > 1)")]
    NotSimple { n: usize },

    #[error("near-Jordan degeneracy at n = {n}: (y_n, conj y_n) = {value}")]
    NearJordan { n: usize, value: Complex64 },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}
