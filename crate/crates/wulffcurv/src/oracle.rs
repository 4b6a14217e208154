//! Independent cross-checks ("oracles") for the main pipeline.
//!
//! Everything here is deliberately low-tech and shares no differential
//! machinery with [`crate::geometry`] or [`crate::curvature`]: plain
//! 5-point finite-difference stencils on angle parametrizations,
//! trapezoid sums over periodic samples, subset enumeration for symmetric
//! polynomials, textbook adaptive Simpson quadrature, and closed-form
//! reference spectra. Agreement between these and the jet/quadrature
//! pipeline validates both sides.
//!
//! For plane curves (n = 1) the anisotropic principal curvature has the
//! classical form s = (F″(θ) + F(θ))·κ, where θ is the angle of the
//! normal, F the anisotropy restricted to the circle, and κ the signed
//! Euclidean curvature (positive for convex curves with inner normal).
//! The curve oracle evaluates exactly that, with Richardson-extrapolated
//! angle differences for F″ + F.

use crate::error::{Error, Result};
use crate::functionals::VariationField;
use crate::geometry::{
    grid::build_grid, surface_divergence, tangential_gradient, ParametricSurface,
};
use crate::functionals::node_curvature;
use crate::anisotropy::AnisotropyModel;
use nalgebra::{DVector, SVector, Vector2, Vector3};
use rayon::prelude::*;

/// Angle step for the 5-point curve stencils: small enough for O(h⁴)
/// truncation ~1e-11, large enough to keep second-difference roundoff
/// below ~1e-9.
const CURVE_FD_STEP: f64 = 2e-3;

/// Angle step for the Richardson second difference of F.
const ANGLE_RICHARDSON_STEP: f64 = 3e-3;

/// Independently computed data of a closed plane curve under an
/// anisotropy given as a function of the normal angle.
#[derive(Debug, Clone)]
pub struct CurveOracleReport {
    pub ts: Vec<f64>,
    pub points: Vec<Vector2<f64>>,
    /// Inner unit normals.
    pub normals: Vec<Vector2<f64>>,
    /// Signed Euclidean curvature (positive for convex).
    pub kappa: Vec<f64>,
    /// F″(θ) + F(θ) at the normal angle.
    pub a_values: Vec<f64>,
    /// Anisotropic curvature s = (F″+F)·κ.
    pub sigma1: Vec<f64>,
    pub length: f64,
    /// Enclosed volume 1/2·∮⟨X,ν⟩ds (negative for counterclockwise
    /// curves with inner normals).
    pub volume: f64,
    /// ∮(F(ν) + σ₁·⟨X,ν⟩)ds.
    pub minkowski_value: f64,
    pub minkowski_scale: f64,
}

/// Evaluate the curve oracle on `samples` uniform parameter values.
/// `position` must traverse the closed curve counterclockwise over
/// [0, 2π); `f_angle` is θ ↦ F(cos θ, sin θ).
pub fn curve_oracle(
    position: &(dyn Fn(f64) -> Vector2<f64> + Sync),
    f_angle: &(dyn Fn(f64) -> f64 + Sync),
    samples: usize,
) -> Result<CurveOracleReport> {
    let m = samples.max(64);
    let dt = 2.0 * std::f64::consts::PI / m as f64;
    let h = CURVE_FD_STEP;

    let rows: Vec<(f64, Vector2<f64>, Vector2<f64>, f64, f64, f64)> = (0..m)
        .into_par_iter()
        .map(|i| {
            let t = i as f64 * dt;
            let xm2 = position(t - 2.0 * h);
            let xm1 = position(t - h);
            let x0 = position(t);
            let xp1 = position(t + h);
            let xp2 = position(t + 2.0 * h);
            // O(h⁴) first and second derivatives
            let d1 = (xm2 - xm1 * 8.0 + xp1 * 8.0 - xp2) / (12.0 * h);
            let d2 = (-xm2 + xm1 * 16.0 - x0 * 30.0 + xp1 * 16.0 - xp2) / (12.0 * h * h);
            let speed = d1.norm();
            let kappa = (d1[0] * d2[1] - d1[1] * d2[0]) / (speed * speed * speed);
            let tangent = d1 / speed;
            // inner normal for counterclockwise traversal
            let nu = Vector2::new(-tangent[1], tangent[0]);
            let theta = nu[1].atan2(nu[0]);
            // A(θ) = F″(θ) + F(θ), Richardson-extrapolated
            let e = ANGLE_RICHARDSON_STEP;
            let second = |eps: f64| {
                (f_angle(theta + eps) - 2.0 * f_angle(theta) + f_angle(theta - eps)) / (eps * eps)
            };
            let f2 = (4.0 * second(e / 2.0) - second(e)) / 3.0;
            let a = f2 + f_angle(theta);
            (t, x0, nu, kappa, a, speed)
        })
        .collect();

    let mut ts = Vec::with_capacity(m);
    let mut points = Vec::with_capacity(m);
    let mut normals = Vec::with_capacity(m);
    let mut kappa = Vec::with_capacity(m);
    let mut a_values = Vec::with_capacity(m);
    let mut sigma1 = Vec::with_capacity(m);
    let mut length = 0.0;
    let mut volume = 0.0;
    let mut minkowski_value = 0.0;
    let mut minkowski_scale = 0.0;
    for (t, x, nu, k, a, speed) in rows {
        let s1 = a * k;
        let support = x.dot(&nu);
        let f = f_angle(nu[1].atan2(nu[0]));
        length += speed * dt;
        volume += 0.5 * support * speed * dt;
        minkowski_value += (f + s1 * support) * speed * dt;
        minkowski_scale += (f.abs() + (s1 * support).abs()) * speed * dt;
        ts.push(t);
        points.push(x);
        normals.push(nu);
        kappa.push(k);
        a_values.push(a);
        sigma1.push(s1);
    }
    if volume >= 0.0 {
        return Err(Error::TopologyError {
            reason: format!(
                "curve oracle expects counterclockwise traversal (volume {volume:.3e} ≥ 0)"
            ),
        });
    }
    Ok(CurveOracleReport {
        ts,
        points,
        normals,
        kappa,
        a_values,
        sigma1,
        length,
        volume,
        minkowski_value,
        minkowski_scale,
    })
}

/// Counterclockwise ellipse (a·cos t, b·sin t).
pub fn ellipse_curve(a: f64, b: f64) -> impl Fn(f64) -> Vector2<f64> + Sync {
    move |t: f64| Vector2::new(a * t.cos(), b * t.sin())
}

/// Boundary of the Wulff shape of F(x) = |B x| with B = diag(b0, b1):
/// the map x̂ ↦ B²x̂/|Bx̂| (a direct formula, independent of the
/// gradient machinery).
pub fn wulff_curve_of_norm(b0: f64, b1: f64) -> impl Fn(f64) -> Vector2<f64> + Sync {
    move |t: f64| {
        let x = Vector2::new(t.cos(), t.sin());
        let norm_bx = (b0 * b0 * x[0] * x[0] + b1 * b1 * x[1] * x[1]).sqrt();
        Vector2::new(b0 * b0 * x[0], b1 * b1 * x[1]) / norm_bx
    }
}

/// Elementary symmetric polynomial by explicit subset enumeration —
/// the third, dumbest route (the main path has two already).
pub fn sym_poly_subsets(lams: &[f64], r: usize) -> f64 {
    let n = lams.len();
    assert!(n <= 20, "subset enumeration is for small n");
    if r > n {
        return 0.0;
    }
    let mut total = 0.0;
    for mask in 0u32..(1 << n) {
        if mask.count_ones() as usize != r {
            continue;
        }
        let mut prod = 1.0;
        for (i, lam) in lams.iter().enumerate() {
            if mask & (1 << i) != 0 {
                prod *= lam;
            }
        }
        total += prod;
    }
    total
}

/// Exact constrained spectrum of the round unit sphere (F ≡ 1):
/// eigenvalues (r+1)·(l(l+1) − 2) with multiplicity 2l+1 for l ≥ 1,
/// ascending. The l = 0 mode is removed by the volume constraint.
pub fn harmonic_spectrum(l_max: usize, r: usize) -> Vec<f64> {
    let mut out = Vec::new();
    for l in 1..=l_max {
        let mu = (r as f64 + 1.0) * ((l * (l + 1)) as f64 - 2.0);
        for _ in 0..(2 * l + 1) {
            out.push(mu);
        }
    }
    out
}

/// Textbook adaptive Simpson quadrature.
pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson(f: &dyn Fn(f64) -> f64, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64) {
        let m = 0.5 * (a + b);
        let fm = f(m);
        ((b - a) / 6.0 * (fa + 4.0 * fm + fb), fm)
    }
    fn recurse(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        fa: f64,
        b: f64,
        fb: f64,
        whole: f64,
        fm: f64,
        tol: f64,
        depth: usize,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let (left, flm) = simpson(f, a, fa, m, fm);
        let (right, frm) = simpson(f, m, fm, b, fb);
        if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
            left + right + (left + right - whole) / 15.0
        } else {
            recurse(f, a, fa, m, fm, left, flm, tol / 2.0, depth - 1)
                + recurse(f, m, fm, b, fb, right, frm, tol / 2.0, depth - 1)
        }
    }
    let fa = f(a);
    let fb = f(b);
    let (whole, fm) = simpson(f, a, fa, b, fb);
    recurse(f, a, fa, b, fb, whole, fm, tol, 40)
}

/// Ellipsoid surface area by adaptive Simpson over the polar angle with
/// a dense composite Simpson rule in azimuth — no Gauss–Legendre, no
/// shared quadrature code.
pub fn ellipsoid_area_reference(axes: Vector3<f64>) -> f64 {
    let (a, b, c) = (axes[0], axes[1], axes[2]);
    let ring = move |theta: f64| -> f64 {
        let n = 4096;
        let dphi = 2.0 * std::f64::consts::PI / n as f64;
        let integrand = |phi: f64| -> f64 {
            let (st, ct) = theta.sin_cos();
            let (sp, cp) = phi.sin_cos();
            let x_t = Vector3::new(a * ct * cp, b * ct * sp, -c * st);
            let x_p = Vector3::new(-a * st * sp, b * st * cp, 0.0);
            x_t.cross(&x_p).norm()
        };
        // composite Simpson over a full period
        let mut acc = 0.0;
        for k in 0..n {
            let p0 = k as f64 * dphi;
            acc += dphi / 6.0
                * (integrand(p0) + 4.0 * integrand(p0 + 0.5 * dphi) + integrand(p0 + dphi));
        }
        acc
    };
    adaptive_simpson(&ring, 0.0, std::f64::consts::PI, 1e-11)
}

/// Consistency of the variation formulas for the Gauss map and the area
/// element under X ↦ X + t·W with ψ = ⟨W,ν⟩ and ξ = W − ψν:
///
///   ∂_t ν      = −∇ψ + dν(ξ)          (checked pointwise),
///   ∂_t log dA = DIV ξ − ψ·σ₁         (checked on grid nodes),
///
/// with everything on the right evaluated on the base surface and the
/// left sides differenced through actually-deformed surfaces at fixed
/// chart labels. σ₁ here is the Euclidean mean curvature trace — the
/// anisotropy plays no role in either formula.
#[derive(Debug, Clone)]
pub struct VariationConsistency {
    pub sup_gauss: f64,
    pub sup_area_element: f64,
    /// d/dt of total area by differencing.
    pub area_rate_fd: f64,
    /// ∮(DIV ξ − ψσ₁)dA on the base surface.
    pub area_rate_formula: f64,
}

pub fn variation_consistency<const D: usize>(
    surface: &ParametricSurface<D>,
    field: &VariationField<D>,
    level: usize,
    fd_t: f64,
) -> Result<VariationConsistency> {
    let grid = build_grid(surface, level)?;
    let plus = crate::functionals::deform(surface, field, fd_t)?;
    let minus = crate::functionals::deform(surface, field, -fd_t)?;
    let grid_p = build_grid(&plus, level)?;
    let grid_m = build_grid(&minus, level)?;

    let div_step = 1e-4;
    let psi_closure = |y: &SVector<f64, D>| -> Result<f64> {
        let fr = surface.frame_at(y)?;
        Ok(field.psi_xi(&fr).0)
    };

    let rows: Vec<Result<(f64, f64, f64)>> = grid
        .frames
        .par_iter()
        .enumerate()
        .map(|(i, fr)| {
            let x = &fr.chart;
            let (psi, xi) = field.psi_xi(fr);
            // Gauss-map rate by differencing
            let nu_p = plus.frame_at(x)?.normal;
            let nu_m = minus.frame_at(x)?.normal;
            let nu_rate = (nu_p - nu_m) / (2.0 * fd_t);
            // formula: −∇ψ + dν(ξ) = −∇ψ − h·ξ
            let grad_psi = tangential_gradient(surface, x, &psi_closure, 1e-5)?;
            let n = fr.n();
            let xi_comps = DVector::from_iterator(n, fr.tangent.iter().map(|e| e.dot(&xi)));
            let h_xi = &fr.h * &xi_comps;
            let mut formula = -grad_psi;
            for k in 0..n {
                formula -= fr.tangent[k] * h_xi[k];
            }
            let gauss_dev = (nu_rate - formula).norm();

            // area-element rate: the quadrature weights at matched nodes
            // differ only by the surface jacobian
            let rate_fd = (grid_p.weights[i].ln() - grid_m.weights[i].ln()) / (2.0 * fd_t);
            let sigma1 = fr.h.trace();
            let xi_field = |y: &SVector<f64, D>| -> Result<SVector<f64, D>> {
                let fy = surface.frame_at(y)?;
                let (p, x) = field.psi_xi(&fy);
                let _ = p;
                Ok(x)
            };
            let div_xi = surface_divergence(surface, x, &xi_field, div_step)?;
            let rate_formula = div_xi - psi * sigma1;
            let area_dev = (rate_fd - rate_formula).abs();
            Ok((gauss_dev, area_dev, rate_formula))
        })
        .collect();

    let mut sup_gauss = 0.0f64;
    let mut sup_area = 0.0f64;
    let mut formula_vals = Vec::with_capacity(grid.frames.len());
    for r in rows {
        let (g, a, f) = r?;
        sup_gauss = sup_gauss.max(g);
        sup_area = sup_area.max(a);
        formula_vals.push(f);
    }
    let area_rate_formula = grid.integrate(&formula_vals)?;
    let area_rate_fd = (grid_p.total_area() - grid_m.total_area()) / (2.0 * fd_t);
    Ok(VariationConsistency {
        sup_gauss,
        sup_area_element: sup_area,
        area_rate_fd,
        area_rate_formula,
    })
}

/// Match the curve oracle against the jet/quadrature pipeline at shared
/// parameter values: sup |σ₁(oracle) − σ₁(main)|. The main-path chart for
/// diagonally parametrized curves coincides with the oracle's angle
/// parametrization up to the chart label.
pub fn curve_sigma1_deviation(
    report: &CurveOracleReport,
    surface: &ParametricSurface<2>,
    model: &AnisotropyModel<2>,
    stride: usize,
) -> Result<f64> {
    let mut sup = 0.0f64;
    for (i, t) in report.ts.iter().enumerate().step_by(stride.max(1)) {
        let label = Vector2::new(t.cos(), t.sin());
        let fr = surface.frame_at(&label)?;
        // guard: the oracle point and the main-path point must agree
        let gap = (fr.position - report.points[i]).norm();
        if gap > 1e-10 {
            return Err(Error::ProjectionFailure {
                point: label.iter().copied().collect(),
                reason: format!("parametrizations disagree by {gap:.3e}"),
            });
        }
        let (_, bundle) = node_curvature(&fr, model)?;
        sup = sup.max((bundle.sigma[1] - report.sigma1[i]).abs());
    }
    Ok(sup)
}
