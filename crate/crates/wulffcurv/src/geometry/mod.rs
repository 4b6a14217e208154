//! Closed hypersurfaces parametrized over the unit sphere, and their
//! differential frames.
//!
//! Every supported surface is the image of a map Ψ: S^n → R^{n+1}
//! (n = 1: closed plane curves, n = 2: closed surfaces). The "parameter"
//! of a point is its unit direction label x̂; charts are built on the fly
//! around any x̂ by perturbing the direction,
//!
//!   φ(u) = Ψ( (x̂ + Σᵢ uᵢτᵢ) / |x̂ + Σᵢ uᵢτᵢ| ),
//!
//! with {τᵢ} the deterministic tangent basis of [`sphere::tangent_basis`].
//! This avoids the pole degeneracy of latitude–longitude charts: every
//! point gets its own well-conditioned chart. All first and second chart
//! derivatives are directional evaluations of Ψ along straight lines in
//! direction space, computed either exactly (jets) or by central
//! differences, so analytic and numerically-differentiated surfaces share
//! one code path.
//!
//! Frames follow the conventions stated in the crate root: the normal ν
//! points into the enclosed region (fixed by a one-time orientation probe
//! per surface), and the shape operator h = −dν is expressed in the
//! orthonormal tangent frame obtained from the chart by Cholesky
//! orthonormalization, h = L⁻¹·b·L⁻ᵀ with g = LLᵀ and b_ij = ⟨∂ᵢⱼφ, ν⟩.

pub mod grid;
pub mod mesh;
pub mod sphere;

pub use grid::QuadratureGrid;
pub use mesh::SurfaceMesh;

use crate::anisotropy::{AnisotropyModel, DerivMode};
use crate::error::{Error, Result};
use crate::functionals::VariationField;
use crate::jet::{Jet, Real};
use nalgebra::{DMatrix, DVector, SVector};
use std::sync::OnceLock;

/// Default step for chart finite differences. Larger than the anisotropy
/// default because chart second differences feed curvature integrands:
/// 1e-4 balances O(ε²) truncation against O(η/ε²) roundoff at ≈ 1e-8.
pub const CHART_FD_STEP: f64 = 1e-4;

/// One monomial term ε·Πᵢ xᵢ^{pᵢ} of a radial perturbation.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialTerm<const D: usize> {
    pub eps: f64,
    pub powers: [u32; D],
}

/// The supported surface families.
#[derive(Debug, Clone)]
pub enum SurfaceKind<const D: usize> {
    /// Ψ(x̂) = R·x̂.
    Sphere { radius: f64 },
    /// Ψ(x̂) = diag(a)·x̂.
    Ellipsoid { axes: SVector<f64, D> },
    /// Ψ(x̂) = ∇F̃(x̂), the Wulff shape of a convex anisotropy.
    Wulff { model: AnisotropyModel<D> },
    /// Ψ(x̂) = ρ(x̂)·x̂ with ρ = 1 + Σ terms, a radial graph over the sphere.
    Radial { terms: Vec<RadialTerm<D>> },
    /// Ψ(x̂) = base(x̂) + t·W(x̂): a deformed surface. Always evaluated by
    /// finite differences (the deformation field is an opaque closure).
    Deformed {
        base: Box<ParametricSurface<D>>,
        field: VariationField<D>,
        t: f64,
    },
}

/// A closed hypersurface: kind plus similarity modifiers and the chart
/// derivative mode. Modifiers act after the kind map:
/// position(x̂) = scale·Ψ(x̂) + translate.
#[derive(Debug, Clone)]
pub struct ParametricSurface<const D: usize> {
    kind: SurfaceKind<D>,
    scale: f64,
    translate: SVector<f64, D>,
    mode: DerivMode,
    /// ±1, fixed by the orientation probe so that ν points inward.
    flip: OnceLock<f64>,
}

/// Differential data of a surface at one chart point.
#[derive(Debug, Clone)]
pub struct GeomFrame<const D: usize> {
    /// Unit direction labeling the point.
    pub chart: SVector<f64, D>,
    /// Position X = Ψ(chart) in ambient space.
    pub position: SVector<f64, D>,
    /// Inner unit normal ν.
    pub normal: SVector<f64, D>,
    /// Orthonormal tangent frame e₁..e_n (ambient vectors).
    pub tangent: Vec<SVector<f64, D>>,
    /// Shape operator h = −dν in the tangent frame (n×n, symmetric;
    /// identity on the unit sphere).
    pub h: DMatrix<f64>,
    /// Cholesky factor L of the chart metric g = LLᵀ (kept for pulling
    /// chart derivatives back to the orthonormal frame).
    pub chol_l: DMatrix<f64>,
}

impl<const D: usize> GeomFrame<D> {
    /// Dimension n of the hypersurface.
    pub fn n(&self) -> usize {
        D - 1
    }

    /// Support value ⟨X, ν⟩ at this point.
    pub fn support(&self) -> f64 {
        self.position.dot(&self.normal)
    }
}

impl<const D: usize> ParametricSurface<D> {
    fn from_kind(kind: SurfaceKind<D>) -> Self {
        ParametricSurface {
            kind,
            scale: 1.0,
            translate: SVector::zeros(),
            mode: DerivMode::Analytic,
            flip: OnceLock::new(),
        }
    }

    /// Round sphere of the given radius.
    pub fn sphere(radius: f64) -> Result<Self> {
        if radius <= 0.0 {
            return Err(Error::NonPositiveValue { value: radius });
        }
        Ok(Self::from_kind(SurfaceKind::Sphere { radius }))
    }

    /// Axis-aligned ellipsoid with the given semi-axes.
    pub fn ellipsoid(axes: SVector<f64, D>) -> Result<Self> {
        if let Some(&bad) = axes.iter().find(|&&a| a <= 0.0) {
            return Err(Error::NonPositiveValue { value: bad });
        }
        Ok(Self::from_kind(SurfaceKind::Ellipsoid { axes }))
    }

    /// Wulff shape of a convex anisotropy model. Fails with
    /// `ConvexityViolation` if the coarse convexity gate fails.
    pub fn wulff(model: AnisotropyModel<D>) -> Result<Self> {
        model.ensure_convex()?;
        Ok(Self::from_kind(SurfaceKind::Wulff { model }))
    }

    /// Radial graph ρ(x̂)·x̂ over the unit sphere. The radius must stay
    /// positive; this is checked on a coarse sample here and again at every
    /// chart evaluation.
    pub fn radial(terms: Vec<RadialTerm<D>>) -> Result<Self> {
        let s = Self::from_kind(SurfaceKind::Radial { terms });
        for x in sphere::sample_dirs::<D>(2) {
            let rho = s.radial_value(&x);
            if rho <= 1e-6 {
                return Err(Error::ProjectionFailure {
                    point: x.iter().copied().collect(),
                    reason: format!("radial graph radius {rho} is not positive"),
                });
            }
        }
        Ok(s)
    }

    /// Deformed surface base + t·W. Chart derivatives switch to finite
    /// differences; the orientation is inherited from the base (the
    /// deformations used here are small and orientation-preserving —
    /// an actual loss of immersion surfaces as `ImmersionLoss` when frames
    /// are computed).
    pub fn deformed(base: ParametricSurface<D>, field: VariationField<D>, t: f64) -> Result<Self> {
        let flip = base.orientation_flip()?;
        let s = ParametricSurface {
            kind: SurfaceKind::Deformed {
                base: Box::new(base),
                field,
                t,
            },
            scale: 1.0,
            translate: SVector::zeros(),
            mode: DerivMode::FiniteDifference { step: CHART_FD_STEP },
            flip: OnceLock::new(),
        };
        let _ = s.flip.set(flip);
        Ok(s)
    }

    /// Multiply the surface by a positive factor (about the origin).
    pub fn scaled(mut self, factor: f64) -> Result<Self> {
        if factor <= 0.0 {
            return Err(Error::NonPositiveValue { value: factor });
        }
        self.scale *= factor;
        self.translate *= factor;
        self.flip = OnceLock::new();
        Ok(self)
    }

    /// Translate the surface.
    pub fn translated(mut self, offset: SVector<f64, D>) -> Self {
        self.translate += offset;
        self.flip = OnceLock::new();
        self
    }

    /// Switch chart derivative mode (deformed surfaces stay FD).
    pub fn with_mode(mut self, mode: DerivMode) -> Self {
        if !matches!(self.kind, SurfaceKind::Deformed { .. }) {
            self.mode = mode;
        }
        self
    }

    pub fn kind(&self) -> &SurfaceKind<D> {
        &self.kind
    }

    pub fn mode(&self) -> DerivMode {
        self.mode
    }

    /// Hypersurface dimension n = D − 1.
    pub fn n(&self) -> usize {
        D - 1
    }

    fn radial_value(&self, x: &SVector<f64, D>) -> f64 {
        match &self.kind {
            SurfaceKind::Radial { terms } => {
                let mut rho = 1.0;
                for t in terms {
                    let mut m = t.eps;
                    for i in 0..D {
                        m *= x[i].powi(t.powers[i] as i32);
                    }
                    rho += m;
                }
                rho
            }
            _ => unreachable!("radial_value on non-radial surface"),
        }
    }

    /// The kind map on generic scalars (catalog kinds only; `Deformed`
    /// takes the value-only path).
    fn map_generic<T: Real>(&self, y: &[T; D]) -> [T; D] {
        let mapped: [T; D] = match &self.kind {
            SurfaceKind::Sphere { radius } => {
                std::array::from_fn(|i| T::from_f64(*radius) * y[i])
            }
            SurfaceKind::Ellipsoid { axes } => {
                std::array::from_fn(|i| T::from_f64(axes[i]) * y[i])
            }
            SurfaceKind::Wulff { model } => model.wulff_point_generic(y),
            SurfaceKind::Radial { terms } => {
                let mut rho = T::from_f64(1.0);
                for t in terms {
                    let mut m = T::from_f64(t.eps);
                    for i in 0..D {
                        m = m * y[i].powi(t.powers[i]);
                    }
                    rho = rho + m;
                }
                std::array::from_fn(|i| rho * y[i])
            }
            SurfaceKind::Deformed { .. } => {
                unreachable!("deformed surfaces are evaluated by value only")
            }
        };
        std::array::from_fn(|i| T::from_f64(self.scale) * mapped[i] + T::from_f64(self.translate[i]))
    }

    /// Position for an exactly-unit direction (no input validation).
    fn position_unit(&self, x: &SVector<f64, D>) -> SVector<f64, D> {
        match &self.kind {
            SurfaceKind::Deformed { base, field, t } => {
                base.position_unit(x) + field.eval(x) * *t
            }
            _ => {
                let y: [f64; D] = std::array::from_fn(|i| x[i]);
                let p = self.map_generic(&y);
                SVector::from_fn(|i, _| p[i])
            }
        }
    }

    /// Position X = Ψ(x̂) with input validation.
    pub fn position(&self, x: &SVector<f64, D>) -> Result<SVector<f64, D>> {
        let x = sphere::require_unit(x)?;
        if matches!(self.kind, SurfaceKind::Radial { .. }) {
            let rho = self.radial_value(&x);
            if rho <= 0.0 {
                return Err(Error::ProjectionFailure {
                    point: x.iter().copied().collect(),
                    reason: format!("radial graph radius {rho} is not positive"),
                });
            }
        }
        Ok(self.position_unit(&x))
    }

    /// Directional chart evaluation: for the curve c(s) = Ψ(n(s)) with
    /// n(s) = (x̂ + s·w)/|x̂ + s·w|, returns (c(0), c′(0), c″(0)).
    /// `w` is an ambient vector tangent to the sphere at x̂.
    pub fn chart_jet(
        &self,
        x: &SVector<f64, D>,
        w: &SVector<f64, D>,
    ) -> Result<(SVector<f64, D>, SVector<f64, D>, SVector<f64, D>)> {
        let x = sphere::require_unit(x)?;
        match self.mode {
            DerivMode::Analytic => {
                let y: [Jet; D] = std::array::from_fn(|i| Jet::linear(x[i], w[i]));
                let r = crate::jet::norm(&y);
                let yhat: [Jet; D] = std::array::from_fn(|i| y[i] / r);
                let p = self.map_generic(&yhat);
                Ok((
                    SVector::from_fn(|i, _| p[i].v),
                    SVector::from_fn(|i, _| p[i].d),
                    SVector::from_fn(|i, _| p[i].dd),
                ))
            }
            DerivMode::FiniteDifference { step } => {
                let eval = |s: f64| -> SVector<f64, D> {
                    let y = x + w * s;
                    self.position_unit(&(y / y.norm()))
                };
                let c0 = self.position_unit(&x);
                let cp = eval(step);
                let cm = eval(-step);
                let d1 = (cp - cm) / (2.0 * step);
                let d2 = (cp - c0 * 2.0 + cm) / (step * step);
                Ok((c0, d1, d2))
            }
        }
    }

    /// Orientation sign making ν point into the enclosed region, computed
    /// once per surface by probing the sign of ∮⟨X, ν_raw⟩ on a coarse
    /// sample (negative for an inner normal).
    fn orientation_flip(&self) -> Result<f64> {
        if let Some(f) = self.flip.get() {
            return Ok(*f);
        }
        let dirs = sphere::sample_dirs::<D>(1);
        let mut acc = 0.0;
        for x in &dirs {
            let (p, nu_raw) = self.raw_normal(x)?;
            acc += p.dot(&nu_raw);
        }
        let flip = if acc > 0.0 { -1.0 } else { 1.0 };
        let _ = self.flip.set(flip);
        Ok(flip)
    }

    /// Position and *unflipped* unit normal from the chart cross product.
    fn raw_normal(&self, x: &SVector<f64, D>) -> Result<(SVector<f64, D>, SVector<f64, D>)> {
        let taus = sphere::tangent_basis(x);
        match D {
            2 => {
                let (c0, d1, _) = self.chart_jet(x, &taus[0])?;
                let n = d1.norm();
                if n < 1e-12 {
                    return Err(self.degenerate(x, f64::INFINITY));
                }
                let t = d1 / n;
                let mut nu = SVector::<f64, D>::zeros();
                nu[0] = t[1];
                nu[1] = -t[0];
                Ok((c0, nu))
            }
            3 => {
                let (c0, d1a, _) = self.chart_jet(x, &taus[0])?;
                let (_, d1b, _) = self.chart_jet(x, &taus[1])?;
                let cr = SVector::<f64, D>::from_fn(|i, _| {
                    let j = (i + 1) % 3;
                    let k = (i + 2) % 3;
                    d1a[j] * d1b[k] - d1a[k] * d1b[j]
                });
                let n = cr.norm();
                if n < 1e-12 {
                    return Err(self.degenerate(x, f64::INFINITY));
                }
                Ok((c0, cr / n))
            }
            _ => unreachable!("surfaces exist only for D = 2, 3"),
        }
    }

    fn degenerate(&self, x: &SVector<f64, D>, cond: f64) -> Error {
        if matches!(self.kind, SurfaceKind::Deformed { .. }) {
            Error::ImmersionLoss {
                point: x.iter().copied().collect(),
            }
        } else {
            Error::DegenerateParametrization {
                point: x.iter().copied().collect(),
                cond,
            }
        }
    }

    /// Complete differential frame at the chart point x̂.
    pub fn frame_at(&self, x: &SVector<f64, D>) -> Result<GeomFrame<D>> {
        let x = sphere::require_unit(x)?;
        let n = D - 1;
        let taus = sphere::tangent_basis(&x);

        // Directional evaluations: axes, then diagonals for mixed partials.
        let mut c0 = SVector::<f64, D>::zeros();
        let mut first: Vec<SVector<f64, D>> = Vec::with_capacity(n);
        let mut second_axis: Vec<SVector<f64, D>> = Vec::with_capacity(n);
        for (k, tau) in taus.iter().enumerate() {
            let (v, d1, d2) = self.chart_jet(&x, tau)?;
            if k == 0 {
                c0 = v;
            }
            first.push(d1);
            second_axis.push(d2);
        }
        let mut second = vec![vec![SVector::<f64, D>::zeros(); n]; n];
        for i in 0..n {
            second[i][i] = second_axis[i];
        }
        for i in 0..n {
            for j in (i + 1)..n {
                let w = taus[i] + taus[j];
                let (_, _, dw) = self.chart_jet(&x, &w)?;
                let mixed = (dw - second_axis[i] - second_axis[j]) * 0.5;
                second[i][j] = mixed;
                second[j][i] = mixed;
            }
        }

        // First fundamental form and its Cholesky factor.
        let mut g = DMatrix::<f64>::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                g[(i, j)] = first[i].dot(&first[j]);
            }
        }
        let scale2 = g.diagonal().max();
        let chol = match g.clone().cholesky() {
            Some(c) => c,
            None => return Err(self.degenerate(&x, f64::INFINITY)),
        };
        let l = chol.l();
        let cond = {
            let dmax = (0..n).map(|i| l[(i, i)]).fold(0.0f64, f64::max);
            let dmin = (0..n).map(|i| l[(i, i)]).fold(f64::INFINITY, f64::min);
            (dmax / dmin).powi(2)
        };
        if !cond.is_finite() || cond > 1e8 || scale2 < 1e-16 {
            return Err(self.degenerate(&x, cond));
        }

        // Normal (flipped to point inward).
        let flip = self.orientation_flip()?;
        let (_, nu_raw) = self.raw_normal(&x)?;
        let nu = nu_raw * flip;

        // Second fundamental form b and shape operator h = L⁻¹bL⁻ᵀ.
        let mut b = DMatrix::<f64>::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                b[(i, j)] = second[i][j].dot(&nu);
            }
        }
        // h = L⁻¹ b L⁻ᵀ via two triangular solves
        let mut hb = b.clone();
        if !l.solve_lower_triangular_mut(&mut hb) {
            return Err(self.degenerate(&x, cond));
        }
        let mut ht = hb.transpose();
        if !l.solve_lower_triangular_mut(&mut ht) {
            return Err(self.degenerate(&x, cond));
        }
        let mut h = ht.transpose();
        // symmetrize against roundoff
        for i in 0..n {
            for j in (i + 1)..n {
                let avg = 0.5 * (h[(i, j)] + h[(j, i)]);
                h[(i, j)] = avg;
                h[(j, i)] = avg;
            }
        }

        // Orthonormal frame E = C·L⁻ᵀ: solve Lᵀ columns.
        let mut coeff = DMatrix::<f64>::identity(n, n);
        if !l.transpose().solve_upper_triangular_mut(&mut coeff) {
            return Err(self.degenerate(&x, cond));
        }
        // E_k = Σ_m coeff[(m,k)]·first[m]
        let tangent: Vec<SVector<f64, D>> = (0..n)
            .map(|k| {
                let mut e = SVector::<f64, D>::zeros();
                for m in 0..n {
                    e += first[m] * coeff[(m, k)];
                }
                e
            })
            .collect();

        Ok(GeomFrame {
            chart: x,
            position: c0,
            normal: nu,
            tangent,
            h,
            chol_l: l,
        })
    }

    /// Signed enclosed volume, V = 1/(n+1)·∮⟨X,ν⟩dA, on a fresh grid of
    /// the given level. Negative for the inner-normal convention; the
    /// companion check that it *is* negative for the catalog surfaces
    /// lives in the tests.
    pub fn orient_check(&self, level: usize) -> Result<f64> {
        let grid = grid::build_grid(self, level)?;
        let vals: Vec<f64> = grid.frames.iter().map(|f| f.support()).collect();
        Ok(grid.integrate(&vals)? / D as f64)
    }
}

/// Surface gradient of a scalar field given as a function of the chart
/// label, evaluated at x̂. Returns an ambient vector in the tangent space.
///
/// The field is differentiated in the local chart by central differences
/// with the given step and pulled back through the chart metric:
/// ∇f = Σₖ (L⁻¹·∂f)ₖ·eₖ.
pub fn tangential_gradient<const D: usize>(
    surface: &ParametricSurface<D>,
    x: &SVector<f64, D>,
    f: &dyn Fn(&SVector<f64, D>) -> Result<f64>,
    step: f64,
) -> Result<SVector<f64, D>> {
    let frame = surface.frame_at(x)?;
    let taus = sphere::tangent_basis(&frame.chart);
    let n = D - 1;
    let mut df = DVector::<f64>::zeros(n);
    for k in 0..n {
        let fp = f(&perturb(&frame.chart, &taus[k], step))?;
        let fm = f(&perturb(&frame.chart, &taus[k], -step))?;
        df[k] = (fp - fm) / (2.0 * step);
    }
    if !frame.chol_l.solve_lower_triangular_mut(&mut df) {
        return Err(Error::DegenerateParametrization {
            point: frame.chart.iter().copied().collect(),
            cond: f64::INFINITY,
        });
    }
    let mut grad = SVector::<f64, D>::zeros();
    for k in 0..n {
        grad += frame.tangent[k] * df[k];
    }
    Ok(grad)
}

/// Surface divergence of a tangent vector field given as a function of the
/// chart label. Errors with `NonTangentField` if the field has a normal
/// component at x̂ beyond tolerance.
pub fn surface_divergence<const D: usize>(
    surface: &ParametricSurface<D>,
    x: &SVector<f64, D>,
    field: &dyn Fn(&SVector<f64, D>) -> Result<SVector<f64, D>>,
    step: f64,
) -> Result<f64> {
    let frame = surface.frame_at(x)?;
    let v0 = field(&frame.chart)?;
    let normal_part = v0.dot(&frame.normal).abs();
    if normal_part > 1e-7 * v0.norm().max(1.0) {
        return Err(Error::NonTangentField { normal_part });
    }
    let taus = sphere::tangent_basis(&frame.chart);
    let n = D - 1;
    // chart partials of the field
    let mut partials: Vec<SVector<f64, D>> = Vec::with_capacity(n);
    for tau in taus.iter() {
        let vp = field(&perturb(&frame.chart, tau, step))?;
        let vm = field(&perturb(&frame.chart, tau, -step))?;
        partials.push((vp - vm) / (2.0 * step));
    }
    // DIV = Σₖ ⟨∂V along chart direction L⁻ᵀeₖ, eₖ⟩
    let mut coeff = DMatrix::<f64>::identity(n, n);
    if !frame
        .chol_l
        .transpose()
        .solve_upper_triangular_mut(&mut coeff)
    {
        return Err(Error::DegenerateParametrization {
            point: frame.chart.iter().copied().collect(),
            cond: f64::INFINITY,
        });
    }
    let mut div = 0.0;
    for k in 0..n {
        let mut dv = SVector::<f64, D>::zeros();
        for m in 0..n {
            dv += partials[m] * coeff[(m, k)];
        }
        div += dv.dot(&frame.tangent[k]);
    }
    Ok(div)
}

fn perturb<const D: usize>(
    x: &SVector<f64, D>,
    tau: &SVector<f64, D>,
    s: f64,
) -> SVector<f64, D> {
    let y = x + tau * s;
    y / y.norm()
}
