//! Curvature functionals, their first variation, and pointwise
//! divergence identities.
//!
//! The functionals are the anisotropic r-areas and the enclosed volume,
//!
//!   𝒜_r = ∮ F(ν)·σ_r dA,      V = 1/(n+1)·∮ ⟨X,ν⟩ dA,
//!
//! evaluated by quadrature over a [`QuadratureGrid`]. Under a deformation
//! X ↦ X + t·W with normal speed ψ = ⟨W,ν⟩ the first variation is
//!
//!   d/dt 𝒜_r = −(r+1)·∮ ψ·σ_{r+1} dA,      d/dt V = ∮ ψ dA,
//!
//! (tangential parts integrate away on closed hypersurfaces), which is
//! checked against Richardson-extrapolated central differences of the
//! functionals along actually-deformed surfaces.
//!
//! The Minkowski-type integral formula ∮(H_r·F(ν) + H_{r+1}·⟨X,ν⟩)dA = 0
//! and the pointwise divergence identities behind it,
//!
//!   DIV(P_r·(∇_{S}F∘ν))  = F(ν)·tr(P_r·h) − (r+1)σ_{r+1},
//!   DIV(P_r·X^⊤)         = (n−r)σ_r + ⟨X,ν⟩·tr(P_r·h),
//!
//! are exposed as residual evaluators: both rest on the divergence-free
//! property of the anisotropic Newton operators, so their discrete
//! residuals must vanish at the O(step²) rate of the differencing.
//!
//! A surface is a critical point of 𝒜_r under the volume constraint
//! exactly when (r+1)σ_{r+1} is constant; `euler_lagrange_residual` fits
//! that constant (the Lagrange multiplier) and reports the sup deviation.

use crate::anisotropy::AnisotropyModel;
use crate::curvature::CurvatureBundle;
use crate::error::{Error, Result};
use crate::geometry::{
    grid::build_grid, surface_divergence, tangential_gradient, GeomFrame, ParametricSurface,
    QuadratureGrid,
};
use nalgebra::{DVector, SVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::fmt;
use std::sync::Arc;

/// A deformation field W on a surface, given as an ambient-vector function
/// of the chart label. Cloning is cheap (shared closure).
#[derive(Clone)]
pub struct VariationField<const D: usize> {
    func: Arc<dyn Fn(&SVector<f64, D>) -> SVector<f64, D> + Send + Sync>,
    pub tag: String,
}

impl<const D: usize> fmt::Debug for VariationField<D> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("VariationField").field("tag", &self.tag).finish()
    }
}

impl<const D: usize> VariationField<D> {
    pub fn new(
        tag: impl Into<String>,
        func: impl Fn(&SVector<f64, D>) -> SVector<f64, D> + Send + Sync + 'static,
    ) -> Self {
        VariationField { func: Arc::new(func), tag: tag.into() }
    }

    /// W(x̂) evaluated at a chart label.
    pub fn eval(&self, x: &SVector<f64, D>) -> SVector<f64, D> {
        (self.func)(x)
    }

    /// Constant (translation) field.
    pub fn constant(v: SVector<f64, D>) -> Self {
        let comps: Vec<String> = v.iter().map(|c| format!("{c:.3}")).collect();
        Self::new(format!("translate[{}]", comps.join(",")), move |_| v)
    }

    /// W = X, the position field (generates scaling).
    pub fn position(surface: &ParametricSurface<D>) -> Self {
        let s = surface.clone();
        Self::new("position", move |x| {
            s.position(x).expect("position field on valid chart point")
        })
    }

    /// Normal field W = ψ·ν for a scalar speed given on chart labels.
    pub fn normal(
        surface: &ParametricSurface<D>,
        tag: impl Into<String>,
        psi: impl Fn(&SVector<f64, D>) -> f64 + Send + Sync + 'static,
    ) -> Self {
        let s = surface.clone();
        Self::new(tag, move |x| {
            let f = s.frame_at(x).expect("frame on valid chart point");
            f.normal * psi(x)
        })
    }

    /// Seeded random smooth field: each ambient component is a quadratic
    /// polynomial in the chart label with coefficients in (−amp, amp).
    pub fn random_smooth(seed: u64, amp: f64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        // monomials: 1, xᵢ, xᵢxⱼ (i ≤ j)
        let n_mono = 1 + D + D * (D + 1) / 2;
        let coeffs: Vec<Vec<f64>> = (0..D)
            .map(|_| (0..n_mono).map(|_| rng.gen_range(-amp..amp)).collect())
            .collect();
        Self::new(format!("random#{seed}"), move |x| {
            let mut mono = Vec::with_capacity(n_mono);
            mono.push(1.0);
            for i in 0..D {
                mono.push(x[i]);
            }
            for i in 0..D {
                for j in i..D {
                    mono.push(x[i] * x[j]);
                }
            }
            SVector::from_fn(|c, _| {
                mono.iter().zip(&coeffs[c]).map(|(m, k)| m * k).sum()
            })
        })
    }

    /// Decompose W at a frame into normal speed and tangential part:
    /// ψ = ⟨W,ν⟩, ξ = W − ψν.
    pub fn psi_xi(&self, frame: &GeomFrame<D>) -> (f64, SVector<f64, D>) {
        let w = self.eval(&frame.chart);
        let psi = w.dot(&frame.normal);
        (psi, w - frame.normal * psi)
    }
}

/// Deform a surface: X ↦ X + t·W. The result always evaluates its charts
/// by finite differences.
pub fn deform<const D: usize>(
    surface: &ParametricSurface<D>,
    field: &VariationField<D>,
    t: f64,
) -> Result<ParametricSurface<D>> {
    ParametricSurface::deformed(surface.clone(), field.clone(), t)
}

/// Per-node anisotropy data on a grid: F(ν) and the curvature bundle.
/// Computed once, reused by every functional on the same (grid, model).
pub struct GridCurvature {
    /// F(ν) at each node.
    pub f: Vec<f64>,
    pub bundles: Vec<CurvatureBundle>,
}

impl GridCurvature {
    pub fn compute<const D: usize>(
        grid: &QuadratureGrid<D>,
        model: &AnisotropyModel<D>,
    ) -> Result<Self> {
        let per_node: Vec<Result<(f64, CurvatureBundle)>> = grid
            .frames
            .par_iter()
            .map(|fr| node_curvature(fr, model))
            .collect();
        let mut f = Vec::with_capacity(grid.frames.len());
        let mut bundles = Vec::with_capacity(grid.frames.len());
        for r in per_node {
            let (fv, b) = r?;
            f.push(fv);
            bundles.push(b);
        }
        Ok(GridCurvature { f, bundles })
    }
}

/// F(ν) and the curvature bundle at a single frame.
pub fn node_curvature<const D: usize>(
    frame: &GeomFrame<D>,
    model: &AnisotropyModel<D>,
) -> Result<(f64, CurvatureBundle)> {
    let a = model.a_matrix(&frame.normal, &frame.tangent)?;
    let f = model.value(&frame.normal)?;
    let bundle = CurvatureBundle::new(&a, &frame.h)?;
    Ok((f, bundle))
}

/// 𝒜_r = ∮ F(ν)·σ_r dA.
pub fn area_functional<const D: usize>(
    grid: &QuadratureGrid<D>,
    model: &AnisotropyModel<D>,
    r: usize,
) -> Result<f64> {
    let n = D - 1;
    if r > n {
        return Err(Error::RankOutOfRange { r, n, context: "area_functional" });
    }
    let gc = GridCurvature::compute(grid, model)?;
    area_from_cache(grid, &gc, r)
}

/// 𝒜_r from a precomputed cache.
pub fn area_from_cache<const D: usize>(
    grid: &QuadratureGrid<D>,
    gc: &GridCurvature,
    r: usize,
) -> Result<f64> {
    let vals: Vec<f64> = gc
        .f
        .iter()
        .zip(&gc.bundles)
        .map(|(f, b)| f * b.sigma_ext(r))
        .collect();
    grid.integrate(&vals)
}

/// Signed enclosed volume V = 1/(n+1)·∮⟨X,ν⟩dA (negative for the
/// inner-normal convention on convex bodies).
pub fn volume_functional<const D: usize>(grid: &QuadratureGrid<D>) -> Result<f64> {
    let vals: Vec<f64> = grid.frames.iter().map(|f| f.support()).collect();
    Ok(grid.integrate(&vals)? / D as f64)
}

/// Residual of the Minkowski-type formula at rank r:
/// value = ∮(H_r·F + H_{r+1}·⟨X,ν⟩)dA, scale = ∮(|H_r·F| + |H_{r+1}·⟨X,ν⟩|)dA.
#[derive(Debug, Clone)]
pub struct MinkowskiResidual {
    pub r: usize,
    pub value: f64,
    pub scale: f64,
}

impl MinkowskiResidual {
    pub fn relative(&self) -> f64 {
        self.value.abs() / self.scale.max(1e-300)
    }
}

pub fn minkowski_residual<const D: usize>(
    grid: &QuadratureGrid<D>,
    model: &AnisotropyModel<D>,
    r: usize,
) -> Result<MinkowskiResidual> {
    let n = D - 1;
    if r + 1 > n {
        return Err(Error::RankOutOfRange { r, n, context: "minkowski_residual" });
    }
    let gc = GridCurvature::compute(grid, model)?;
    minkowski_from_cache(grid, &gc, r)
}

pub fn minkowski_from_cache<const D: usize>(
    grid: &QuadratureGrid<D>,
    gc: &GridCurvature,
    r: usize,
) -> Result<MinkowskiResidual> {
    let mut vals = Vec::with_capacity(grid.frames.len());
    let mut mags = Vec::with_capacity(grid.frames.len());
    for ((f, b), frame) in gc.f.iter().zip(&gc.bundles).zip(&grid.frames) {
        let t1 = b.h_mean(r) * f;
        let t2 = b.h_mean(r + 1) * frame.support();
        vals.push(t1 + t2);
        mags.push(t1.abs() + t2.abs());
    }
    Ok(MinkowskiResidual {
        r,
        value: grid.integrate(&vals)?,
        scale: grid.integrate(&mags)?,
    })
}

/// Euler–Lagrange diagnosis: the fitted multiplier (area-weighted mean of
/// (r+1)σ_{r+1}) and the sup-norm deviation from it.
#[derive(Debug, Clone)]
pub struct EulerLagrange {
    pub r: usize,
    /// Λ = mean of (r+1)·σ_{r+1} (the Lagrange multiplier if critical).
    pub lambda_fit: f64,
    /// sup over nodes of |(r+1)σ_{r+1} − Λ|.
    pub sup_residual: f64,
}

pub fn euler_lagrange_residual<const D: usize>(
    grid: &QuadratureGrid<D>,
    model: &AnisotropyModel<D>,
    r: usize,
) -> Result<EulerLagrange> {
    let gc = GridCurvature::compute(grid, model)?;
    euler_lagrange_from_cache(grid, &gc, r)
}

pub fn euler_lagrange_from_cache<const D: usize>(
    grid: &QuadratureGrid<D>,
    gc: &GridCurvature,
    r: usize,
) -> Result<EulerLagrange> {
    let n = D - 1;
    if r + 1 > n + 1 {
        return Err(Error::RankOutOfRange { r, n, context: "euler_lagrange_residual" });
    }
    let vals: Vec<f64> = gc
        .bundles
        .iter()
        .map(|b| (r as f64 + 1.0) * b.sigma_ext(r + 1))
        .collect();
    let area = grid.total_area();
    let lambda = grid.integrate(&vals)? / area;
    let sup = vals.iter().fold(0.0f64, |m, v| m.max((v - lambda).abs()));
    Ok(EulerLagrange { r, lambda_fit: lambda, sup_residual: sup })
}

/// First-variation check: Richardson-extrapolated difference quotient of
/// 𝒜_r and V along X + t·W against the closed-form rates.
#[derive(Debug, Clone)]
pub struct FirstVariationCheck {
    pub r: usize,
    pub area_fd: f64,
    pub area_formula: f64,
    pub area_mismatch: f64,
    pub volume_fd: f64,
    pub volume_formula: f64,
    pub volume_mismatch: f64,
}

/// Default step for the t-differencing of functionals (first variation).
pub const VARIATION_FD_STEP: f64 = 1e-2;

pub fn first_variation_check<const D: usize>(
    surface: &ParametricSurface<D>,
    model: &AnisotropyModel<D>,
    field: &VariationField<D>,
    r: usize,
    level: usize,
    h: f64,
) -> Result<FirstVariationCheck> {
    let grid = build_grid(surface, level)?;
    let gc = GridCurvature::compute(&grid, model)?;

    // closed-form rates on the base surface
    let psi: Vec<f64> = grid.frames.iter().map(|f| field.psi_xi(f).0).collect();
    let rate_vals: Vec<f64> = psi
        .iter()
        .zip(&gc.bundles)
        .map(|(p, b)| -(r as f64 + 1.0) * p * b.sigma_ext(r + 1))
        .collect();
    let area_formula = grid.integrate(&rate_vals)?;
    let volume_formula = grid.integrate(&psi)?;

    // finite differences along the deformation
    let eval = |t: f64| -> Result<(f64, f64)> {
        let st = deform(surface, field, t)?;
        let gt = build_grid(&st, level)?;
        let a = area_functional(&gt, model, r)?;
        let v = volume_functional(&gt)?;
        Ok((a, v))
    };
    let (a_p, v_p) = eval(h)?;
    let (a_m, v_m) = eval(-h)?;
    let (a_p2, v_p2) = eval(h / 2.0)?;
    let (a_m2, v_m2) = eval(-h / 2.0)?;
    let d_h = (a_p - a_m) / (2.0 * h);
    let d_h2 = (a_p2 - a_m2) / h;
    let area_fd = (4.0 * d_h2 - d_h) / 3.0;
    let dv_h = (v_p - v_m) / (2.0 * h);
    let dv_h2 = (v_p2 - v_m2) / h;
    let volume_fd = (4.0 * dv_h2 - dv_h) / 3.0;

    let rel = |fd: f64, formula: f64| {
        (fd - formula).abs() / fd.abs().max(formula.abs()).max(1e-10)
    };
    Ok(FirstVariationCheck {
        r,
        area_fd,
        area_formula,
        area_mismatch: rel(area_fd, area_formula),
        volume_fd,
        volume_formula,
        volume_mismatch: rel(volume_fd, volume_formula),
    })
}

/// Pointwise residuals of the two divergence identities, evaluated on a
/// fixed sample of chart points with the given differencing step.
#[derive(Debug, Clone)]
pub struct DivergenceResiduals {
    /// Residual of DIV(P_r·(∇_S F∘ν)) − F·tr(P_r h) + (r+1)σ_{r+1}.
    pub grad_f: Vec<f64>,
    /// Residual of DIV(P_r·X^⊤) − (n−r)σ_r − ⟨X,ν⟩·tr(P_r h).
    pub position: Vec<f64>,
}

impl DivergenceResiduals {
    pub fn sup_grad_f(&self) -> f64 {
        self.grad_f.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }
    pub fn sup_position(&self) -> f64 {
        self.position.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

pub fn divergence_lemma_residuals<const D: usize>(
    surface: &ParametricSurface<D>,
    model: &AnisotropyModel<D>,
    points: &[SVector<f64, D>],
    r: usize,
    step: f64,
) -> Result<DivergenceResiduals> {
    let n = D - 1;
    if r > n {
        return Err(Error::RankOutOfRange { r, n, context: "divergence_lemma_residuals" });
    }

    // P_r·w as an ambient vector at an arbitrary chart point: geometric
    // (frame-independent) even though the matrix is frame-dependent.
    let apply_pr = |y: &SVector<f64, D>, pick: &dyn Fn(&GeomFrame<D>) -> SVector<f64, D>|
     -> Result<SVector<f64, D>> {
        let fr = surface.frame_at(y)?;
        let (_, b) = node_curvature(&fr, model)?;
        let w = pick(&fr);
        let comps = DVector::from_iterator(n, fr.tangent.iter().map(|e| e.dot(&w)));
        let out = &b.p_stack[r] * comps;
        let mut amb = SVector::<f64, D>::zeros();
        for k in 0..n {
            amb += fr.tangent[k] * out[k];
        }
        Ok(amb)
    };

    let results: Vec<Result<(f64, f64)>> = points
        .par_iter()
        .map(|x| {
            let fr = surface.frame_at(x)?;
            let (f, b) = node_curvature(&fr, model)?;
            let tr_ph = (&b.p_stack[r] * &fr.h).trace();

            let grad_field = |y: &SVector<f64, D>| -> Result<SVector<f64, D>> {
                apply_pr(y, &|fr: &GeomFrame<D>| {
                    model
                        .sphere_gradient(&fr.normal)
                        .expect("gradient at unit normal")
                })
            };
            let div_f = surface_divergence(surface, x, &grad_field, step)?;
            let res_f = div_f - f * tr_ph + (r as f64 + 1.0) * b.sigma_ext(r + 1);

            let pos_field = |y: &SVector<f64, D>| -> Result<SVector<f64, D>> {
                apply_pr(y, &|fr: &GeomFrame<D>| {
                    fr.position - fr.normal * fr.support()
                })
            };
            let div_x = surface_divergence(surface, x, &pos_field, step)?;
            let res_x = div_x - (n - r) as f64 * b.sigma[r] - fr.support() * tr_ph;

            Ok((res_f, res_x))
        })
        .collect();

    let mut grad_f = Vec::with_capacity(points.len());
    let mut position = Vec::with_capacity(points.len());
    for r in results {
        let (a, b) = r?;
        grad_f.push(a);
        position.push(b);
    }
    Ok(DivergenceResiduals { grad_f, position })
}

/// Weak-form check of the normal variation of σ_{r+1}: for W = ψν,
///
///   ∮ ψ · d/dt σ_{r+1} dA₀  =  −∮⟨T_r∇ψ, ∇ψ⟩dA + ∮ψ²·tr(T_r·h²)dA,
///
/// the left side differenced in t (surface deformed, labels fixed), the
/// right side assembled on the base surface. This is the self-adjoint
/// structure behind the second-variation form.
#[derive(Debug, Clone)]
pub struct WeakVariationCheck {
    pub r: usize,
    pub lhs: f64,
    pub rhs: f64,
    pub mismatch: f64,
}

pub fn sigma_variation_weak_check<const D: usize>(
    surface: &ParametricSurface<D>,
    model: &AnisotropyModel<D>,
    psi: Arc<dyn Fn(&SVector<f64, D>) -> f64 + Send + Sync>,
    r: usize,
    level: usize,
    fd_t: f64,
) -> Result<WeakVariationCheck> {
    let n = D - 1;
    if r >= n {
        return Err(Error::RankOutOfRange { r, n, context: "sigma_variation_weak_check" });
    }
    let grid = build_grid(surface, level)?;
    let gc = GridCurvature::compute(&grid, model)?;
    let psi_nodal: Vec<f64> = grid.nodes.iter().map(|x| psi(x)).collect();

    // left side: difference σ_{r+1} along the normal deformation
    let psi_for_field = psi.clone();
    let field = VariationField::normal(surface, "weak-check", move |x| psi_for_field(x));
    let sigma_at = |t: f64| -> Result<Vec<f64>> {
        let st = deform(surface, &field, t)?;
        let vals: Vec<Result<f64>> = grid
            .nodes
            .par_iter()
            .map(|x| {
                let fr = st.frame_at(x)?;
                let (_, b) = node_curvature(&fr, model)?;
                Ok(b.sigma_ext(r + 1))
            })
            .collect();
        vals.into_iter().collect()
    };
    let sp = sigma_at(fd_t)?;
    let sm = sigma_at(-fd_t)?;
    let lhs_vals: Vec<f64> = psi_nodal
        .iter()
        .zip(sp.iter().zip(&sm))
        .map(|(p, (a, b))| p * (a - b) / (2.0 * fd_t))
        .collect();
    let lhs = grid.integrate(&lhs_vals)?;

    // right side on the base surface
    let grad_step = 1e-5;
    let rhs_vals: Vec<Result<f64>> = grid
        .frames
        .par_iter()
        .zip(&gc.bundles)
        .zip(&psi_nodal)
        .map(|((fr, b), &p)| {
            let g = tangential_gradient(surface, &fr.chart, &|y| Ok(psi(y)), grad_step)?;
            let comps = DVector::from_iterator(n, fr.tangent.iter().map(|e| e.dot(&g)));
            let tg = &b.t_stack[r] * &comps;
            Ok(-comps.dot(&tg) + p * p * b.tr_t_h2(r))
        })
        .collect();
    let rhs_vals: Vec<f64> = rhs_vals.into_iter().collect::<Result<_>>()?;
    let rhs = grid.integrate(&rhs_vals)?;

    let mismatch = (lhs - rhs).abs() / lhs.abs().max(rhs.abs()).max(1.0);
    Ok(WeakVariationCheck { r, lhs, rhs, mismatch })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use nalgebra::{Vector2, Vector3};
    use std::f64::consts::PI;

    fn sphere() -> ParametricSurface<3> {
        ParametricSurface::sphere(1.0).unwrap()
    }

    fn iso() -> AnisotropyModel<3> {
        AnisotropyModel::isotropic()
    }

    #[test]
    fn sphere_functionals_closed_forms() {
        let g = build_grid(&sphere(), 2).unwrap();
        // 𝒜₀ = 4π, 𝒜₁ = ∮σ₁ = 8π, 𝒜₂ = ∮σ₂ = 4π
        assert_relative_eq!(area_functional(&g, &iso(), 0).unwrap(), 4.0 * PI, max_relative = 1e-12);
        assert_relative_eq!(area_functional(&g, &iso(), 1).unwrap(), 8.0 * PI, max_relative = 1e-10);
        assert_relative_eq!(area_functional(&g, &iso(), 2).unwrap(), 4.0 * PI, max_relative = 1e-10);
        assert_relative_eq!(volume_functional(&g).unwrap(), -4.0 * PI / 3.0, max_relative = 1e-12);
    }

    #[test]
    fn volume_is_translation_invariant_and_scales() {
        let s2 = ParametricSurface::<3>::sphere(2.0).unwrap();
        let g = build_grid(&s2, 2).unwrap();
        assert_relative_eq!(volume_functional(&g).unwrap(), -32.0 * PI / 3.0, max_relative = 1e-12);
        let st = sphere().translated(Vector3::new(0.7, -0.3, 0.2));
        let gt = build_grid(&st, 2).unwrap();
        assert_relative_eq!(volume_functional(&gt).unwrap(), -4.0 * PI / 3.0, max_relative = 1e-10);
        // circle: V = −π
        let c = ParametricSurface::<2>::sphere(1.0).unwrap();
        let gc = build_grid(&c, 2).unwrap();
        assert_relative_eq!(volume_functional(&gc).unwrap(), -PI, max_relative = 1e-12);
    }

    #[test]
    fn wulff_area_of_linear_model() {
        // Wulff shape of F = 1 + ⟨a,x⟩ is the unit sphere at a;
        // 𝒜₀ = ∮F(ν)dA = ∮(1 − ⟨a,x̂⟩)dA = 4π.
        let a = Vector3::new(0.3, 0.0, 0.0);
        let model = AnisotropyModel::linear(a).unwrap();
        let w = ParametricSurface::wulff(model.clone()).unwrap();
        let g = build_grid(&w, 2).unwrap();
        assert_relative_eq!(area_functional(&g, &model, 0).unwrap(), 4.0 * PI, max_relative = 1e-10);
    }

    #[test]
    fn minkowski_residuals_vanish_on_spheres_and_wulff_shapes() {
        let g = build_grid(&sphere(), 2).unwrap();
        for r in 0..=1 {
            let m = minkowski_residual(&g, &iso(), r).unwrap();
            assert!(m.relative() < 1e-12, "r={r}: {}", m.relative());
        }
        // pointwise zero on the unit sphere: H_r·1 + H_{r+1}·(−1) = 0
        let gc = GridCurvature::compute(&g, &iso()).unwrap();
        for (b, fr) in gc.bundles.iter().zip(&g.frames) {
            let v = b.h_mean(0) * 1.0 + b.h_mean(1) * fr.support();
            assert!(v.abs() < 1e-9);
        }
        // Wulff shape of the linear model
        let a = Vector3::new(0.3, 0.0, 0.0);
        let model = AnisotropyModel::linear(a).unwrap();
        let w = ParametricSurface::wulff(model.clone()).unwrap();
        let gw = build_grid(&w, 2).unwrap();
        let m = minkowski_residual(&gw, &model, 0).unwrap();
        assert!(m.relative() < 1e-10, "{}", m.relative());
    }

    #[test]
    fn minkowski_residual_on_ellipsoid_isotropic() {
        // non-trivial surface, isotropic F: both ranks, tight tolerance
        let e = ParametricSurface::ellipsoid(Vector3::new(1.0, 1.0, 2.0)).unwrap();
        let g = build_grid(&e, 3).unwrap();
        for r in 0..=1 {
            let m = minkowski_residual(&g, &iso(), r).unwrap();
            assert!(m.relative() < 1e-9, "r={r}: rel {}", m.relative());
        }
    }

    #[test]
    fn curve_minkowski_residual() {
        // n = 1: ellipse (2,1), isotropic, r = 0
        let e = ParametricSurface::<2>::ellipsoid(Vector2::new(2.0, 1.0)).unwrap();
        let g = build_grid(&e, 3).unwrap();
        let m = minkowski_residual(&g, &AnisotropyModel::<2>::isotropic(), 0).unwrap();
        assert!(m.relative() < 1e-12, "rel {}", m.relative());
    }

    #[test]
    fn euler_lagrange_flags_critical_and_non_critical() {
        // sphere, r = 0: Λ = σ₁ = 2 exactly
        let g = build_grid(&sphere(), 2).unwrap();
        let el = euler_lagrange_residual(&g, &iso(), 0).unwrap();
        assert_relative_eq!(el.lambda_fit, 2.0, max_relative = 1e-10);
        assert!(el.sup_residual < 1e-9);
        // Wulff shape of any convex F: Λ = (r+1)·C(n,r+1)
        let model = AnisotropyModel::norm(Vector3::new(2.0, 1.0, 1.0)).unwrap();
        let w = ParametricSurface::wulff(model.clone()).unwrap();
        let gw = build_grid(&w, 2).unwrap();
        for r in 0..=1 {
            let el = euler_lagrange_residual(&gw, &model, r).unwrap();
            let want = (r as f64 + 1.0) * crate::curvature::binomial(2, r + 1);
            assert_relative_eq!(el.lambda_fit, want, max_relative = 1e-8);
            assert!(el.sup_residual < 1e-6, "r={r}: sup {}", el.sup_residual);
        }
        // ellipsoid under isotropic F is not critical for r = 0
        let e = ParametricSurface::ellipsoid(Vector3::new(1.0, 1.0, 2.0)).unwrap();
        let ge = build_grid(&e, 2).unwrap();
        let el = euler_lagrange_residual(&ge, &iso(), 0).unwrap();
        assert!(el.sup_residual > 0.5);
    }

    #[test]
    fn deform_by_normal_field_shrinks_sphere() {
        // W = ν (inner): radius 1 − t
        let s = sphere();
        let field = VariationField::normal(&s, "inner-unit", |_| 1.0);
        let st = deform(&s, &field, 0.25).unwrap();
        let x = Vector3::new(0.48, -0.6, 0.64).normalize();
        let f = st.frame_at(&x).unwrap();
        assert!((f.position - x * 0.75).norm() < 1e-10);
        assert!((f.h.clone() - nalgebra::DMatrix::identity(2, 2) / 0.75).norm() < 1e-5);
        let g = build_grid(&st, 2).unwrap();
        assert_relative_eq!(g.total_area(), 4.0 * PI * 0.5625, max_relative = 1e-7);
    }

    #[test]
    fn deform_by_translation_preserves_functionals() {
        let s = sphere();
        let field = VariationField::constant(Vector3::new(0.4, 0.1, -0.2));
        let st = deform(&s, &field, 1.0).unwrap();
        let g0 = build_grid(&s, 2).unwrap();
        let g1 = build_grid(&st, 2).unwrap();
        for r in 0..=1 {
            assert_relative_eq!(
                area_functional(&g0, &iso(), r).unwrap(),
                area_functional(&g1, &iso(), r).unwrap(),
                max_relative = 1e-7
            );
        }
        assert_relative_eq!(
            volume_functional(&g0).unwrap(),
            volume_functional(&g1).unwrap(),
            max_relative = 1e-7
        );
    }

    #[test]
    fn deform_by_position_field_scales_areas() {
        // W = X: 𝒜_r(t) = (1+t)^{n−r}·𝒜_r(0)
        let e = ParametricSurface::ellipsoid(Vector3::new(1.0, 1.2, 0.9)).unwrap();
        let field = VariationField::position(&e);
        let t = 0.3;
        let st = deform(&e, &field, t).unwrap();
        let g0 = build_grid(&e, 2).unwrap();
        let g1 = build_grid(&st, 2).unwrap();
        for r in 0..=2 {
            let a0 = area_functional(&g0, &iso(), r).unwrap();
            let a1 = area_functional(&g1, &iso(), r).unwrap();
            assert_relative_eq!(a1, a0 * (1.0 + t).powi(2 - r as i32), max_relative = 1e-6);
        }
    }

    #[test]
    fn first_variation_sphere_normal_field() {
        // W = ν, r = 0: d𝒜₀/dt = −∮σ₁ = −8π; dV/dt = ∮1 = 4π
        let s = sphere();
        let field = VariationField::normal(&s, "inner-unit", |_| 1.0);
        let c = first_variation_check(&s, &iso(), &field, 0, 3, VARIATION_FD_STEP).unwrap();
        assert_relative_eq!(c.area_formula, -8.0 * PI, max_relative = 1e-10);
        assert_relative_eq!(c.area_fd, -8.0 * PI, max_relative = 1e-6);
        assert!(c.area_mismatch < 1e-6, "mismatch {}", c.area_mismatch);
        assert_relative_eq!(c.volume_formula, 4.0 * PI, max_relative = 1e-10);
        // floor set by the chart-differencing error of frames on the
        // deformed surface (~1e-8), not by the t-differencing
        assert!(c.volume_mismatch < 1e-7, "mismatch {}", c.volume_mismatch);
    }

    #[test]
    fn first_variation_translation_is_zero_rate() {
        let s = sphere();
        let field = VariationField::constant(Vector3::new(0.3, -0.5, 0.1));
        let c = first_variation_check(&s, &iso(), &field, 1, 3, VARIATION_FD_STEP).unwrap();
        // both sides vanish: compare absolutely against the functional scale
        assert!(c.area_formula.abs() < 1e-9);
        assert!(c.area_fd.abs() < 1e-5);
        assert!(c.volume_formula.abs() < 1e-9);
        assert!(c.volume_fd.abs() < 1e-7);
    }

    #[test]
    fn first_variation_random_fields_on_ellipsoid() {
        let e = ParametricSurface::ellipsoid(Vector3::new(1.0, 1.3, 1.7)).unwrap();
        for seed in 0..3u64 {
            let field = VariationField::random_smooth(seed, 0.5);
            for r in 0..=1 {
                let c =
                    first_variation_check(&e, &iso(), &field, r, 3, VARIATION_FD_STEP).unwrap();
                assert!(
                    c.area_mismatch < 1e-5,
                    "seed {seed} r {r}: mismatch {}",
                    c.area_mismatch
                );
                assert!(
                    c.volume_mismatch < 1e-6,
                    "seed {seed} r {r}: volume mismatch {}",
                    c.volume_mismatch
                );
            }
        }
    }

    #[test]
    fn divergence_residuals_vanish_on_unit_sphere() {
        let pts = crate::geometry::sphere::sample_dirs::<3>(1);
        let res = divergence_lemma_residuals(&sphere(), &iso(), &pts[..40], 0, 0.01).unwrap();
        assert!(res.sup_grad_f() < 1e-10, "grad_f sup {}", res.sup_grad_f());
        assert!(res.sup_position() < 1e-10, "position sup {}", res.sup_position());
    }

    #[test]
    fn divergence_residuals_converge_quadratically() {
        // non-trivial pair: ellipsoid with the norm anisotropy
        let e = ParametricSurface::ellipsoid(Vector3::new(1.0, 1.2, 1.5)).unwrap();
        let model = AnisotropyModel::norm(Vector3::new(1.3, 1.0, 0.9)).unwrap();
        let pts: Vec<_> = crate::geometry::sphere::sample_dirs::<3>(1)[..30].to_vec();
        let mut sups = Vec::new();
        for k in 0..3 {
            let step = 0.04 / 2f64.powi(k);
            let res = divergence_lemma_residuals(&e, &model, &pts, 1, step).unwrap();
            sups.push(res.sup_grad_f().max(res.sup_position()));
        }
        let o1 = (sups[0] / sups[1]).log2();
        let o2 = (sups[1] / sups[2]).log2();
        assert!(o1 > 1.8 && o2 > 1.8, "orders {o1}, {o2} (sups {sups:?})");
    }

    #[test]
    fn weak_variation_check_on_sphere() {
        // σ₁ variation against the T₀ form, ψ = x₁x₂ (a known eigenmode)
        let s = sphere();
        let psi = Arc::new(|x: &Vector3<f64>| x[0] * x[1]);
        let c = sigma_variation_weak_check(&s, &iso(), psi, 0, 2, 1e-3).unwrap();
        assert!(c.mismatch < 1e-4, "mismatch {} (lhs {}, rhs {})", c.mismatch, c.lhs, c.rhs);
        // and for σ₂ against T₁
        let psi = Arc::new(|x: &Vector3<f64>| x[2]);
        let c = sigma_variation_weak_check(&s, &iso(), psi, 1, 2, 1e-3).unwrap();
        assert!(c.mismatch < 1e-4, "mismatch {} (lhs {}, rhs {})", c.mismatch, c.lhs, c.rhs);
    }
}
