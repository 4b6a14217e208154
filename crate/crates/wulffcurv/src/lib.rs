//! Anisotropic curvature toolkit for closed hypersurfaces.
//!
//! The crate evaluates, on discretized closed hypersurfaces M^n ⊂ R^{n+1}
//! (curves in the plane, surfaces in space), the curvature calculus attached
//! to an anisotropy function F: S^n → R^+:
//!
//! * Wulff shapes φ(x) = F(x)·x + ∇_{S^n}F(x) and the convexity condition
//!   A_F = ∇²F + F·1 > 0 ([`anisotropy`]),
//! * anisotropic principal curvatures (eigenvalues of S_F = A_F∘dν),
//!   elementary symmetric functions σ_r, and the Newton operator stack
//!   P_r with its trace identities ([`curvature`]),
//! * curvature integrals: anisotropic area 𝒜_{r,F}, enclosed volume,
//!   Minkowski-type integral formulas, and first-variation checks
//!   ([`functionals`]),
//! * the quadratic form of the second variation and its constrained
//!   spectrum for stability verdicts ([`stability`]),
//! * independent low-tech re-computations used as cross-checks
//!   ([`oracle`]).
//!
//! Geometry enters through a single chart convention: every supported
//! closed hypersurface is the image of a map Ψ defined on the unit sphere,
//! and all frames, quadrature grids, and triangle meshes are built from
//! directional evaluations of Ψ ([`geometry`]).
//!
//! Sign conventions used throughout (fixed once, asserted in tests):
//! the unit normal ν points INTO the enclosed region, the shape operator
//! is h = -dν expressed in an orthonormal tangent frame (so the unit
//! sphere has h = identity and σ_1 = n), and the enclosed volume
//! V = 1/(n+1)·∮⟨X,ν⟩dA is NEGATIVE for convex bodies.

pub mod anisotropy;
pub mod cli;
pub mod curvature;
pub mod error;
pub mod functionals;
pub mod geometry;
pub mod jet;
pub mod oracle;
pub mod report;
pub mod stability;

pub use anisotropy::{AnisotropyKind, AnisotropyModel, ConvexityReport, DerivMode};
pub use curvature::CurvatureBundle;
pub use error::{Error, Result};
pub use functionals::VariationField;
pub use geometry::{GeomFrame, ParametricSurface, QuadratureGrid, SurfaceMesh};
pub use stability::{QuadraticForm, SpectrumReport, TestFunctionDiagnostics};
