use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("landscape `{0}` does not provide a Hessian")]
    HessianUnavailable(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("matrix is not symmetric")]
    NotSymmetric,

    #[error("symmetric eigendecomposition did not converge")]
    EigenFailure,

    #[error("non-finite value encountered: {0}")]
    NonFinite(&'static str),

    #[error("grid with {points} points exceeds the cap of {cap}")]
    GridTooLarge { points: u128, cap: usize },

    #[error("Gaussian spread {r0} is under-resolved by grid spacing {spacing} (need r0 >= 2 * spacing)")]
    UnderResolved { r0: f64, spacing: f64 },

    #[error("point lies outside the simulation box")]
    OutsideBox,

    #[error("time step {dt} violates leapfrog stability (dt * |H| = {product} >= 2)")]
    UnstableTimeStep { dt: f64, product: f64 },

    #[error("wave function blew up (non-finite amplitudes) at t = {0}")]
    BlowUp(f64),

    #[error("backend `{backend}` cannot handle this request: {reason}")]
    Backend { backend: &'static str, reason: String },

    #[error("perturbation sample degenerated to the zero vector")]
    DegenerateSample,

    #[error("unknown landscape `{0}`")]
    UnknownLandscape(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for failures of the numerics (as opposed to bad input or I/O).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NonFinite(_)
                | Error::EigenFailure
                | Error::BlowUp(_)
                | Error::UnstableTimeStep { .. }
                | Error::DegenerateSample
        )
    }
}
