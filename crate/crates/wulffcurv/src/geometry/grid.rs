//! Quadrature grids over parametrized hypersurfaces.
//!
//! For surfaces (n = 2) the grid is Gauss–Legendre in t = cosθ crossed
//! with a uniform trapezoid rule in the azimuth φ — spectrally accurate
//! for the smooth integrands produced by the chart machinery, and free of
//! pole evaluations (Gauss nodes are interior). The substitution
//! t = cosθ puts the Jacobian in the form
//!
//!   ∮ f dA = ∫₋₁¹ ∫₀^{2π} f · |X_θ × X_φ|/sinθ dφ dt,
//!
//! and the ratio |X_θ × X_φ|/sinθ is evaluated without cancellation as
//! the cross product of the two *unit-direction* chart derivatives.
//! For curves (n = 1) a uniform trapezoid rule in the angle with |X′|
//! weights is spectrally accurate for the same reason.
//!
//! Node weights, node order, and the pairwise summation used by
//! [`QuadratureGrid::integrate`] are all deterministic: integrating the
//! same data twice gives bit-identical results.

use super::{GeomFrame, ParametricSurface};
use crate::error::{Error, Result};
use nalgebra::SVector;
use rayon::prelude::*;
use std::f64::consts::PI;

/// Nodes, weights, and cached frames for one surface at one level.
#[derive(Debug, Clone)]
pub struct QuadratureGrid<const D: usize> {
    pub level: usize,
    /// Chart labels (unit directions) of the nodes.
    pub nodes: Vec<SVector<f64, D>>,
    /// Area weights: ∮ f dA ≈ Σ wᵢ f(nodeᵢ).
    pub weights: Vec<f64>,
    /// Frame at every node, in node order.
    pub frames: Vec<GeomFrame<D>>,
}

/// Gauss–Legendre nodes and weights on [−1, 1], by Newton iteration on the
/// Legendre recurrence (deterministic; accurate to machine precision).
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        // Chebyshev-like initial guess for the i-th root (descending order)
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            // evaluate P_n and P_n' by upward recurrence
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        // final polish values for the weight
        let (mut p0, mut p1) = (1.0, x);
        for k in 2..=n {
            let kf = k as f64;
            let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
            p0 = p1;
            p1 = p2;
        }
        let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
        nodes[i] = x;
        weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

/// Deterministic pairwise (cascade) summation.
pub fn pairwise_sum(v: &[f64]) -> f64 {
    if v.len() <= 32 {
        return v.iter().sum();
    }
    let mid = v.len() / 2;
    pairwise_sum(&v[..mid]) + pairwise_sum(&v[mid..])
}

/// Build the quadrature grid for a surface at the given level.
///
/// Node counts: n = 2 uses (4·2^level) × (8·2^level) nodes; n = 1 uses
/// 32·2^level nodes. Frames are computed in parallel but stored in node
/// order, so the result does not depend on the thread count.
pub fn build_grid<const D: usize>(
    surface: &ParametricSurface<D>,
    level: usize,
) -> Result<QuadratureGrid<D>> {
    match D {
        2 => build_curve_grid(surface, level),
        3 => build_surface_grid(surface, level),
        _ => unreachable!("grids exist only for D = 2, 3"),
    }
}

fn build_surface_grid<const D: usize>(
    surface: &ParametricSurface<D>,
    level: usize,
) -> Result<QuadratureGrid<D>> {
    assert_eq!(D, 3);
    let n_theta = 4 << level;
    let n_phi = 8 << level;
    let (gl_nodes, gl_weights) = gauss_legendre(n_theta);
    let dphi = 2.0 * PI / n_phi as f64;

    // enumerate nodes in (θ, φ) lexicographic order
    let mut raw: Vec<(SVector<f64, D>, SVector<f64, D>, SVector<f64, D>, f64)> =
        Vec::with_capacity(n_theta * n_phi);
    for (ti, &t) in gl_nodes.iter().enumerate() {
        let sin_t = (1.0 - t * t).sqrt();
        for pj in 0..n_phi {
            let phi = pj as f64 * dphi;
            let (sp, cp) = phi.sin_cos();
            let x = from3::<D>([sin_t * cp, sin_t * sp, t]);
            // unit directions of the θ- and φ-coordinate lines
            let w_theta = from3::<D>([t * cp, t * sp, -sin_t]);
            let w_phi = from3::<D>([-sp, cp, 0.0]);
            raw.push((x, w_theta, w_phi, gl_weights[ti] * dphi));
        }
    }

    let entries: Vec<Result<(GeomFrame<D>, f64)>> = raw
        .par_iter()
        .map(|(x, wt, wp, base_w)| {
            let (_, d_theta, _) = surface.chart_jet(x, wt)?;
            let (_, d_phi, _) = surface.chart_jet(x, wp)?;
            // |X_θ × X_φ|/sinθ with both factors along unit directions
            let jac = cross3(&d_theta, &d_phi).norm();
            let frame = surface.frame_at(x)?;
            Ok((frame, base_w * jac))
        })
        .collect();

    let mut nodes = Vec::with_capacity(raw.len());
    let mut weights = Vec::with_capacity(raw.len());
    let mut frames = Vec::with_capacity(raw.len());
    for (i, e) in entries.into_iter().enumerate() {
        let (frame, w) = e?;
        nodes.push(raw[i].0);
        weights.push(w);
        frames.push(frame);
    }
    Ok(QuadratureGrid { level, nodes, weights, frames })
}

fn build_curve_grid<const D: usize>(
    surface: &ParametricSurface<D>,
    level: usize,
) -> Result<QuadratureGrid<D>> {
    assert_eq!(D, 2);
    let m = 32 << level;
    let da = 2.0 * PI / m as f64;
    let mut nodes = Vec::with_capacity(m);
    let mut weights = Vec::with_capacity(m);
    let mut frames = Vec::with_capacity(m);
    for j in 0..m {
        let alpha = j as f64 * da;
        let (s, c) = alpha.sin_cos();
        let x = from2::<D>([c, s]);
        let tau = from2::<D>([-s, c]);
        let (_, d1, _) = surface.chart_jet(&x, &tau)?;
        let frame = surface.frame_at(&x)?;
        nodes.push(x);
        weights.push(da * d1.norm());
        frames.push(frame);
    }
    Ok(QuadratureGrid { level, nodes, weights, frames })
}

impl<const D: usize> QuadratureGrid<D> {
    /// ∮ f dA for nodal values of f (pairwise-summed, deterministic).
    pub fn integrate(&self, values: &[f64]) -> Result<f64> {
        if values.len() != self.weights.len() {
            return Err(Error::SizeMismatch {
                context: "integrand nodal values",
                expected: self.weights.len(),
                got: values.len(),
            });
        }
        let products: Vec<f64> = values
            .iter()
            .zip(&self.weights)
            .map(|(v, w)| v * w)
            .collect();
        Ok(pairwise_sum(&products))
    }

    /// Total area ∮ 1 dA.
    pub fn total_area(&self) -> f64 {
        pairwise_sum(&self.weights)
    }

    /// Evaluate a chart-label function at every node (in parallel,
    /// order-preserving) and integrate it.
    pub fn integrate_fn(
        &self,
        f: &(dyn Fn(&GeomFrame<D>) -> Result<f64> + Sync),
    ) -> Result<f64> {
        let values: Vec<f64> = self
            .frames
            .par_iter()
            .map(|fr| f(fr))
            .collect::<Result<_>>()?;
        self.integrate(&values)
    }
}

#[inline]
fn from3<const D: usize>(v: [f64; 3]) -> SVector<f64, D> {
    SVector::from_fn(|i, _| v[i])
}

#[inline]
fn from2<const D: usize>(v: [f64; 2]) -> SVector<f64, D> {
    SVector::from_fn(|i, _| v[i])
}

#[inline]
fn cross3<const D: usize>(a: &SVector<f64, D>, b: &SVector<f64, D>) -> SVector<f64, D> {
    SVector::from_fn(|i, _| {
        let j = (i + 1) % 3;
        let k = (i + 2) % 3;
        a[j] * b[k] - a[k] * b[j]
    })
}
