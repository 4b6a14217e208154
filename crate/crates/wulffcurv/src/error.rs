//! Crate-wide error type.
//!
//! Every fallible operation returns [`Result`]. Variants are grouped by the
//! stage that raises them; the CLI maps them onto process exit codes
//! (tolerance failures → 2, precondition failures → 3, parse errors → 4).

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Input direction expected on the unit sphere was too far from unit length.
    #[error("expected a unit vector, got |x| = {norm} (tolerance {tol})")]
    NonUnitInput { norm: f64, tol: f64 },

    /// The anisotropy function must be strictly positive on the sphere.
    #[error("anisotropy value F = {value} at a sample point is not strictly positive")]
    NonPositiveValue { value: f64 },

    /// A tangent frame handed to an evaluator was not orthonormal.
    #[error("tangent frame is not orthonormal (max deviation {deviation})")]
    NonOrthonormalFrame { deviation: f64 },

    /// A_F = ∇²F + F·1 has a non-positive eigenvalue somewhere on the sphere.
    #[error(
        "convexity condition fails: min eigenvalue of ∇²F + F·1 is {min_eigenvalue} at {argmin:?}"
    )]
    ConvexityViolation {
        min_eigenvalue: f64,
        argmin: Vec<f64>,
    },

    /// The chart's first fundamental form is numerically singular.
    #[error("degenerate parametrization at chart point {point:?} (condition estimate {cond})")]
    DegenerateParametrization { point: Vec<f64>, cond: f64 },

    /// A deformed surface stopped being an immersion within tolerance.
    #[error("deformation destroys the immersion at chart point {point:?}")]
    ImmersionLoss { point: Vec<f64> },

    /// Matrix/vector dimensions do not line up.
    #[error("size mismatch: {context} (expected {expected}, got {got})")]
    SizeMismatch {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    /// A field handed to the surface divergence had a normal component.
    #[error("vector field is not tangent (normal component {normal_part} exceeds tolerance)")]
    NonTangentField { normal_part: f64 },

    /// A radial chart failed to produce a valid point (e.g. radius ≤ 0).
    #[error("projection onto the surface failed at chart point {point:?}: {reason}")]
    ProjectionFailure { point: Vec<f64>, reason: String },

    /// A matrix that must be symmetric positive definite is not.
    #[error("matrix is not positive definite: {context}")]
    NotPositiveDefinite { context: &'static str },

    /// An operation requiring positive principal curvatures got a non-positive one.
    #[error("spectrum is not strictly positive (min eigenvalue {min_eigenvalue})")]
    NonPositiveSpectrum { min_eigenvalue: f64 },

    /// The triangle mesh is not a closed orientable 2-manifold.
    #[error("mesh topology error: {reason}")]
    TopologyError { reason: String },

    /// An iterative solver stagnated or diverged.
    #[error("solver failure: {reason}")]
    SolverFailure { reason: String },

    /// Stability analysis was requested on a surface that is not a critical point.
    #[error(
        "surface is not critical: Euler-Lagrange residual sup = {residual_sup} exceeds {tol} (fitted multiplier {lambda_fit})"
    )]
    NotCritical {
        residual_sup: f64,
        lambda_fit: f64,
        tol: f64,
    },

    /// Mini-language or file parse failure.
    #[error("parse error: {0}")]
    ParseError(String),

    /// Rank parameter r outside the admissible range for the operation.
    #[error("rank r = {r} out of range for {context} (n = {n})")]
    RankOutOfRange {
        r: usize,
        n: usize,
        context: &'static str,
    },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
