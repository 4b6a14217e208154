//! Anisotropy functions F: S^n → R^+ and their Wulff shapes.
//!
//! A model is evaluated through its positively 1-homogeneous extension
//! F̃(y) = |y|·F(y/|y|). This gives closed-form expressions for all four
//! supported families and turns derivative bookkeeping into ordinary
//! calculus on R^{n+1}:
//!
//! * the sphere gradient is the tangential part of ∇F̃,
//!     ∇_{S^n}F(x) = ∇F̃(x) − F(x)·x  (Euler's relation ⟨∇F̃(x),x⟩ = F(x)),
//! * the operator A_F = ∇²_{S^n}F + F·1 in an orthonormal tangent frame is
//!   exactly the restriction of the Euclidean Hessian of F̃:
//!     (A_F)_ij = ⟨D²F̃(x)·e_i, e_j⟩,
//!   because along the straight line x + t·e_i the curvature correction and
//!   the F·1 term cancel,
//! * the Wulff position map is φ(x) = F(x)·x + ∇_{S^n}F(x) = ∇F̃(x).
//!
//! Supported families (all strictly positive by construction):
//!
//! | kind        | F(x)              | F̃(y)                    | Wulff shape        |
//! |-------------|-------------------|--------------------------|--------------------|
//! | constant c  | c                 | c·\|y\|                  | sphere of radius c |
//! | linear a    | 1 + ⟨a,x⟩         | \|y\| + ⟨a,y⟩            | unit sphere at a   |
//! | norm B      | \|Bx\|            | \|By\|                   | ellipsoid, axes bᵢ |
//! | quad c,d    | 1 + c·⟨d,x⟩²      | \|y\| + c·⟨d,y⟩²/\|y\|   | convex for small c |
//!
//! Two derivative modes are provided: `Analytic` evaluates F̃ on
//! second-order jets (exact directional derivatives), `FiniteDifference`
//! uses geodesic central differences on the sphere and never touches the
//! extension. The two routes are cross-validated in the test suite and the
//! FD route serves as the independent oracle for the analytic one.

use crate::error::{Error, Result};
use crate::geometry::sphere::{require_unit, sample_dirs, tangent_basis};
use crate::jet::{dot, norm, Jet, Real};
use nalgebra::{DMatrix, SVector};
use serde::Serialize;
use std::sync::OnceLock;

/// How derivatives of F are computed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DerivMode {
    /// Exact directional derivatives via second-order jets on F̃.
    Analytic,
    /// Geodesic central differences on the sphere with the given step.
    FiniteDifference { step: f64 },
}

impl DerivMode {
    /// Default finite-difference step: balances second-derivative
    /// truncation against roundoff for O(1) anisotropies.
    pub fn fd_default() -> Self {
        DerivMode::FiniteDifference { step: 1e-5 }
    }
}

/// The four supported anisotropy families on S^{D-1} ⊂ R^D.
#[derive(Debug, Clone, PartialEq)]
pub enum AnisotropyKind<const D: usize> {
    /// F ≡ c (isotropic, scaled).
    Constant { c: f64 },
    /// F(x) = 1 + ⟨a,x⟩ with |a| < 1.
    Linear { a: SVector<f64, D> },
    /// F(x) = |Bx| with B = diag(b), bᵢ > 0.
    Norm { b: SVector<f64, D> },
    /// F(x) = 1 + c·⟨d,x⟩².
    Quadratic { c: f64, d: SVector<f64, D> },
}

/// An anisotropy function together with its derivative mode and a cached
/// coarse convexity verdict (computed on first use by Wulff constructions).
#[derive(Debug, Clone)]
pub struct AnisotropyModel<const D: usize> {
    kind: AnisotropyKind<D>,
    mode: DerivMode,
    coarse_convexity: OnceLock<ConvexityReport>,
}

/// Result of a convexity scan of A_F = ∇²F + F·1 over a sphere sample.
#[derive(Debug, Clone, Serialize)]
pub struct ConvexityReport {
    /// Refinement level of the sample (count grows ≈ 4× per level).
    pub level: usize,
    pub sample_count: usize,
    /// Smallest eigenvalue of A_F seen over the sample.
    pub min_eigenvalue: f64,
    /// Direction achieving the minimum.
    pub argmin: Vec<f64>,
    /// min_eigenvalue > 0.
    pub pass: bool,
}

/// Lift an f64 vector into scalar type `T` componentwise.
fn lift<T: Real, const D: usize>(v: &SVector<f64, D>) -> [T; D] {
    std::array::from_fn(|i| T::from_f64(v[i]))
}

impl<const D: usize> AnisotropyKind<D> {
    /// The 1-homogeneous extension F̃(y), evaluated on any scalar type.
    fn extension<T: Real>(&self, y: &[T; D]) -> T {
        match self {
            AnisotropyKind::Constant { c } => T::from_f64(*c) * norm(y),
            AnisotropyKind::Linear { a } => norm(y) + dot(y, &lift(a)),
            AnisotropyKind::Norm { b } => {
                let by: [T; D] = std::array::from_fn(|i| T::from_f64(b[i]) * y[i]);
                norm(&by)
            }
            AnisotropyKind::Quadratic { c, d } => {
                let rho = norm(y);
                let q = dot(y, &lift(d));
                rho + T::from_f64(*c) * q * q / rho
            }
        }
    }

    /// Closed-form Euclidean gradient ∇F̃(y). Validated against jet
    /// differentiation of [`Self::extension`] in the tests (Euler check).
    fn extension_gradient<T: Real, const E: usize>(&self, y: &[T; E]) -> [T; E] {
        // E = D; the second const parameter keeps the borrow checker happy
        // when callers re-lift per-component.
        debug_assert_eq!(D, E);
        match self {
            AnisotropyKind::Constant { c } => {
                let rho = norm(y);
                std::array::from_fn(|i| T::from_f64(*c) * y[i] / rho)
            }
            AnisotropyKind::Linear { a } => {
                let rho = norm(y);
                std::array::from_fn(|i| y[i] / rho + T::from_f64(a[i]))
            }
            AnisotropyKind::Norm { b } => {
                let by: [T; E] = std::array::from_fn(|i| T::from_f64(b[i]) * y[i]);
                let nb = norm(&by);
                std::array::from_fn(|i| T::from_f64(b[i] * b[i]) * y[i] / nb)
            }
            AnisotropyKind::Quadratic { c, d } => {
                let rho = norm(y);
                let q = {
                    let dl: [T; E] = std::array::from_fn(|i| T::from_f64(d[i]));
                    dot(y, &dl)
                };
                let cc = T::from_f64(*c);
                // ∇(ρ + c q²/ρ) = ŷ·(1 − c q²/ρ²) + (2c q/ρ)·d
                let coef_y = (T::from_f64(1.0) - cc * q * q / (rho * rho)) / rho;
                let coef_d = T::from_f64(2.0) * cc * q / rho;
                std::array::from_fn(|i| coef_y * y[i] + coef_d * T::from_f64(d[i]))
            }
        }
    }
}

impl<const D: usize> AnisotropyModel<D> {
    pub fn new(kind: AnisotropyKind<D>) -> Result<Self> {
        // Validate strict positivity of F up front where it is cheap.
        match &kind {
            AnisotropyKind::Constant { c } => {
                if *c <= 0.0 {
                    return Err(Error::NonPositiveValue { value: *c });
                }
            }
            AnisotropyKind::Linear { a } => {
                if a.norm() >= 1.0 {
                    return Err(Error::NonPositiveValue { value: 1.0 - a.norm() });
                }
            }
            AnisotropyKind::Norm { b } => {
                if let Some(&bad) = b.iter().find(|&&bi| bi <= 0.0) {
                    return Err(Error::NonPositiveValue { value: bad });
                }
            }
            AnisotropyKind::Quadratic { c, d } => {
                let min = 1.0 + c.min(0.0) * d.norm_squared();
                if min <= 0.0 {
                    return Err(Error::NonPositiveValue { value: min });
                }
            }
        }
        Ok(AnisotropyModel {
            kind,
            mode: DerivMode::Analytic,
            coarse_convexity: OnceLock::new(),
        })
    }

    pub fn constant(c: f64) -> Result<Self> {
        Self::new(AnisotropyKind::Constant { c })
    }

    pub fn linear(a: SVector<f64, D>) -> Result<Self> {
        Self::new(AnisotropyKind::Linear { a })
    }

    pub fn norm(b: SVector<f64, D>) -> Result<Self> {
        Self::new(AnisotropyKind::Norm { b })
    }

    pub fn quadratic(c: f64, d: SVector<f64, D>) -> Result<Self> {
        Self::new(AnisotropyKind::Quadratic { c, d })
    }

    /// Isotropic F ≡ 1.
    pub fn isotropic() -> Self {
        Self::constant(1.0).expect("F ≡ 1 is valid")
    }

    pub fn with_mode(mut self, mode: DerivMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn kind(&self) -> &AnisotropyKind<D> {
        &self.kind
    }

    /// Hypersurface dimension n = D − 1.
    pub fn dimension(&self) -> usize {
        D - 1
    }

    /// F(x) for unit x. Errors on non-unit input or non-positive value.
    pub fn value(&self, x: &SVector<f64, D>) -> Result<f64> {
        let x = require_unit(x)?;
        let v = self.kind.extension(&lift::<f64, D>(&x));
        if v <= 0.0 {
            return Err(Error::NonPositiveValue { value: v });
        }
        Ok(v)
    }

    /// Sphere gradient ∇_{S^n}F(x) ∈ T_x S^n, as an ambient vector.
    pub fn sphere_gradient(&self, x: &SVector<f64, D>) -> Result<SVector<f64, D>> {
        let x = require_unit(x)?;
        match self.mode {
            DerivMode::Analytic => {
                let y = lift::<f64, D>(&x);
                let g = self.kind.extension_gradient(&y);
                let f = self.kind.extension(&y);
                Ok(SVector::from_fn(|i, _| g[i] - f * x[i]))
            }
            DerivMode::FiniteDifference { step } => {
                // component along each frame vector by a geodesic central
                // difference: d/dt F(cos t·x + sin t·τ)
                let frame = tangent_basis(&x);
                let mut grad = SVector::zeros();
                for tau in &frame {
                    let fp = self.value_on_geodesic(&x, tau, step)?;
                    let fm = self.value_on_geodesic(&x, tau, -step)?;
                    grad += tau * ((fp - fm) / (2.0 * step));
                }
                Ok(grad)
            }
        }
    }

    fn value_on_geodesic(
        &self,
        x: &SVector<f64, D>,
        dir: &SVector<f64, D>,
        t: f64,
    ) -> Result<f64> {
        let speed = dir.norm();
        let p = x * (speed * t).cos() + dir * ((speed * t).sin() / speed);
        let v = self.kind.extension(&lift::<f64, D>(&p));
        if v <= 0.0 {
            return Err(Error::NonPositiveValue { value: v });
        }
        Ok(v)
    }

    /// Geodesic second derivative of F along `dir` (not necessarily unit):
    /// this is the intrinsic Hessian form ∇²F(dir, dir).
    fn geodesic_second_difference(
        &self,
        x: &SVector<f64, D>,
        dir: &SVector<f64, D>,
        step: f64,
    ) -> Result<f64> {
        let f0 = self.kind.extension(&lift::<f64, D>(x));
        let fp = self.value_on_geodesic(x, dir, step)?;
        let fm = self.value_on_geodesic(x, dir, -step)?;
        Ok((fp - 2.0 * f0 + fm) / (step * step))
    }

    /// Second directional derivative of the extension along the straight
    /// line x + t·dir, via jets: equals D²F̃(x)(dir, dir).
    fn extension_second_derivative(&self, x: &SVector<f64, D>, dir: &SVector<f64, D>) -> f64 {
        let y: [Jet; D] = std::array::from_fn(|i| Jet::linear(x[i], dir[i]));
        self.kind.extension(&y).dd
    }

    /// The symmetric operator A_F = ∇²_{S^n}F + F·1 at unit x, expressed in
    /// the given orthonormal tangent frame (n = D−1 vectors).
    ///
    /// The spectrum of A_F is frame-independent; the matrix itself
    /// transforms by conjugation under frame changes.
    pub fn a_matrix(&self, x: &SVector<f64, D>, frame: &[SVector<f64, D>]) -> Result<DMatrix<f64>> {
        let x = require_unit(x)?;
        let n = D - 1;
        if frame.len() != n {
            return Err(Error::SizeMismatch {
                context: "tangent frame length",
                expected: n,
                got: frame.len(),
            });
        }
        // orthonormality and tangency check
        let mut dev: f64 = 0.0;
        for (i, ei) in frame.iter().enumerate() {
            dev = dev.max(ei.dot(&x).abs());
            for (j, ej) in frame.iter().enumerate() {
                let want = if i == j { 1.0 } else { 0.0 };
                dev = dev.max((ei.dot(ej) - want).abs());
            }
        }
        if dev > 1e-8 {
            return Err(Error::NonOrthonormalFrame { deviation: dev });
        }

        let mut a = DMatrix::<f64>::zeros(n, n);
        match self.mode {
            DerivMode::Analytic => {
                // A_ij = D²F̃(eᵢ, eⱼ); diagonal directly, off-diagonal by
                // polarization over eᵢ + eⱼ.
                let diag: Vec<f64> = frame
                    .iter()
                    .map(|e| self.extension_second_derivative(&x, e))
                    .collect();
                for i in 0..n {
                    a[(i, i)] = diag[i];
                    for j in (i + 1)..n {
                        let w = frame[i] + frame[j];
                        let dw = self.extension_second_derivative(&x, &w);
                        let aij = 0.5 * (dw - diag[i] - diag[j]);
                        a[(i, j)] = aij;
                        a[(j, i)] = aij;
                    }
                }
            }
            DerivMode::FiniteDifference { step } => {
                // ∇²F(eᵢ,eⱼ) by polarized geodesic second differences, then
                // A = ∇²F + F·1.
                let f0 = self.value(&x)?;
                let diag: Vec<f64> = frame
                    .iter()
                    .map(|e| self.geodesic_second_difference(&x, e, step))
                    .collect::<Result<_>>()?;
                for i in 0..n {
                    a[(i, i)] = diag[i] + f0;
                    for j in (i + 1)..n {
                        let w = frame[i] + frame[j];
                        let hw = self.geodesic_second_difference(&x, &w, step)?;
                        let hij = 0.5 * (hw - diag[i] - diag[j]);
                        a[(i, j)] = hij;
                        a[(j, i)] = hij;
                    }
                }
            }
        }
        Ok(a)
    }

    /// Scan min-eig(A_F) over a quasi-uniform sphere sample.
    pub fn check_convexity(&self, level: usize) -> Result<ConvexityReport> {
        let dirs = sample_dirs::<D>(level);
        let mut min_eig = f64::INFINITY;
        let mut argmin = dirs[0];
        for x in &dirs {
            let frame = tangent_basis(x);
            let a = self.a_matrix(x, &frame)?;
            let eig = a.symmetric_eigenvalues();
            let m = eig.iter().fold(f64::INFINITY, |acc, &e| acc.min(e));
            if m < min_eig {
                min_eig = m;
                argmin = *x;
            }
        }
        Ok(ConvexityReport {
            level,
            sample_count: dirs.len(),
            min_eigenvalue: min_eig,
            argmin: argmin.iter().copied().collect(),
            pass: min_eig > 0.0,
        })
    }

    /// Cached coarse convexity gate used by Wulff constructions.
    pub fn ensure_convex(&self) -> Result<()> {
        let report = self.coarse_convexity.get_or_init(|| {
            self.check_convexity(1)
                .expect("convexity scan on valid model")
        });
        if !report.pass {
            return Err(Error::ConvexityViolation {
                min_eigenvalue: report.min_eigenvalue,
                argmin: report.argmin.clone(),
            });
        }
        Ok(())
    }

    /// Wulff position map φ(x) = F(x)·x + ∇_{S^n}F(x) = ∇F̃(x).
    /// Requires the coarse convexity gate to pass.
    pub fn wulff_point(&self, x: &SVector<f64, D>) -> Result<SVector<f64, D>> {
        self.ensure_convex()?;
        let x = require_unit(x)?;
        let g = self.kind.extension_gradient(&lift::<f64, D>(&x));
        Ok(SVector::from_fn(|i, _| g[i]))
    }

    /// Wulff position evaluated on an arbitrary scalar type (used by the
    /// surface chart machinery to push jets through the map). No convexity
    /// gate here: callers gate once at construction.
    pub fn wulff_point_generic<T: Real>(&self, y: &[T; D]) -> [T; D] {
        self.kind.extension_gradient(y)
    }
}
