use alloc::string::String;

/// Failure modes of the geometric routines.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GeoError {
    #[error("geodesic left every chart domain")]
    ChartExit,
    #[error("integrator produced a non-finite state")]
    NonFiniteState,
    #[error("{0} did not converge")]
    NoConvergence(&'static str),
    #[error("shooting found distinct minimizing solutions (spread {spread:.3e})")]
    AmbiguousSolution { spread: f64 },
    #[error("tangent vectors span a degenerate plane")]
    DegeneratePlane,
    #[error("triangle vertices are geodesically collinear")]
    DegenerateTriangle,
    #[error("no Fermi tube radius >= 1e-3 validates")]
    TubeTooNarrow,
    #[error("projection found no candidate points")]
    EmptyCandidateSet,
    #[error("only {valid} valid samples drawn (need at least {required})")]
    SamplingFailure { valid: usize, required: usize },
    #[error("gradient vanishes at the requested point")]
    ZeroGradient,
    #[error("vector is not a proximal normal")]
    NotANormal,
    #[error("fields are not sampled on the geodesic's grid")]
    GridMismatch,
    #[error("geodesic endpoints are conjugate")]
    ConjugatePoint,
    #[error("set is not a geodesic segment")]
    NotAGeodesicBoundary,
    #[error("inward normal field is inconsistent")]
    OrientationFailure,
    #[error("function does not violate the chord inequality")]
    NotAViolation,
    #[error("maximizer of f - phi lies on the tube boundary")]
    MaximizerOnBoundary,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = core::result::Result<T, GeoError>;
