use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("signals live on different grids")]
    GridMismatch,

    #[error("invalid window: {0}")]
    InvalidWindow(String),

    #[error("window does not fit in the period: tail mass {tail:e} beyond T/2 exceeds {tolerance:e}")]
    Wraparound { tail: f64, tolerance: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: String, found: String },

    #[error("not representable on the grid: {0}")]
    Unrepresentable(String),

    #[error("cannot snap {name} = {target} within {tolerance}: nearest representable value {snapped} (error {error:e})")]
    Unsnappable {
        name: &'static str,
        target: f64,
        snapped: f64,
        error: f64,
        tolerance: f64,
    },

    #[error("not a frame: lower bound {lower:e} is below the threshold {threshold:e}")]
    NotAFrame { lower: f64, threshold: f64 },

    #[error("windows are nearly orthogonal (|<g,h>| = {0:e}); the inversion formula divides by <g,h>")]
    NearOrthogonal(f64),

    #[error("singular slice at x = {x} with m = {m}: {reason}")]
    SingularSlice { x: f64, m: usize, reason: String },

    #[error("no block size m <= 3 works at ({alpha}, {beta}); larger m is beyond the proven regions")]
    BeyondProvenRegions { alpha: f64, beta: f64 },

    #[error("degenerate configuration: {0}")]
    Degenerate(String),

    #[error("matrix is not positive definite: {0}")]
    NotPositiveDefinite(String),

    #[error("domain too small: boundary maximum of F is {0:e}")]
    InsufficientCoverage(f64),
}

impl Error {
    /// True for failures of the numerics (as opposed to bad input).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NotAFrame { .. }
                | Error::NearOrthogonal(_)
                | Error::SingularSlice { .. }
                | Error::BeyondProvenRegions { .. }
                | Error::NotPositiveDefinite(_)
                | Error::InsufficientCoverage(_)
        )
    }

    /// Stable snake_case name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidGrid(_) => "invalid_grid",
            Error::GridMismatch => "grid_mismatch",
            Error::InvalidWindow(_) => "invalid_window",
            Error::Wraparound { .. } => "wraparound",
            Error::InvalidArgument(_) => "invalid_argument",
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::Unrepresentable(_) => "unrepresentable",
            Error::Unsnappable { .. } => "unsnappable",
            Error::NotAFrame { .. } => "not_a_frame",
            Error::NearOrthogonal(_) => "near_orthogonal",
            Error::SingularSlice { .. } => "singular_slice",
            Error::BeyondProvenRegions { .. } => "beyond_proven_regions",
            Error::Degenerate(_) => "degenerate",
            Error::NotPositiveDefinite(_) => "not_positive_definite",
            Error::InsufficientCoverage(_) => "insufficient_coverage",
        }
    }
}
