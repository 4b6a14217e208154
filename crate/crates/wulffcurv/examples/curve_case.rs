//! The one-dimensional case: closed convex curves in the plane.
//!
//! For curves the anisotropic curvature is the scalar s = A(θ)·κ with
//! A(θ) = F''(θ) + F(θ) in the normal-angle parametrization, and the
//! whole calculus collapses to one rank. This example cross-checks the
//! chart-based pipeline against an independent arc-length oracle built
//! from finite-difference stencils, on an ellipse and on a Wulff curve.
//!
//! Run with: cargo run --release --example curve_case

use nalgebra::Vector2;
use wulffcurv::anisotropy::AnisotropyModel;
use wulffcurv::functionals::{minkowski_residual, volume_functional};
use wulffcurv::geometry::{grid::build_grid, ParametricSurface};
use wulffcurv::oracle::{curve_oracle, curve_sigma1_deviation, ellipse_curve, wulff_curve_of_norm};

fn main() -> wulffcurv::Result<()> {
    // Ellipse with an anisotropic weight.
    let surface = ParametricSurface::<2>::ellipsoid(Vector2::new(1.5, 1.0))?;
    let model = AnisotropyModel::norm(Vector2::new(1.2, 0.9))?;
    let b = Vector2::new(1.2, 0.9);
    let f_angle = move |theta: f64| -> f64 {
        // F(cos θ, sin θ) for F(x) = |Bx|
        let (s, c) = theta.sin_cos();
        (b[0] * b[0] * c * c + b[1] * b[1] * s * s).sqrt()
    };
    let report = curve_oracle(&ellipse_curve(1.5, 1.0), &f_angle, 4096)?;
    println!("ellipse(1.5, 1.0) with norm(1.2, 0.9) anisotropy:");
    println!("  oracle length  {:.10}", report.length);
    println!("  oracle volume  {:.10}  (negative: inner normal)", report.volume);
    println!(
        "  oracle Minkowski residual {:.3e} against scale {:.4}",
        report.minkowski_value, report.minkowski_scale
    );
    assert!(report.volume < 0.0);
    assert!(report.minkowski_value.abs() / report.minkowski_scale < 1e-9);

    // Chart pipeline on the same curve: integrals and pointwise curvature.
    let grid = build_grid(&surface, 6)?;
    let length = grid.total_area();
    let volume = volume_functional(&grid)?;
    println!("  chart  length  {:.10}   (diff {:.2e})", length, (length - report.length).abs());
    println!("  chart  volume  {:.10}   (diff {:.2e})", volume, (volume - report.volume).abs());
    assert!((length - report.length).abs() < 1e-8);
    assert!((volume - report.volume).abs() < 1e-8);

    let res = minkowski_residual(&grid, &model, 0)?;
    println!("  chart  Minkowski relative residual {:.3e}", res.relative());
    assert!(res.relative() < 1e-9);

    let dev = curve_sigma1_deviation(&report, &surface, &model, 16)?;
    println!("  sup |sigma_1(chart) - A·kappa(oracle)| = {dev:.3e}");
    assert!(dev < 1e-6);

    // Wulff curve: the anisotropic curvature is identically 1.
    let b0 = 1.6;
    let b1 = 0.9;
    let f_angle = move |theta: f64| -> f64 {
        let (s, c) = theta.sin_cos();
        (b0 * b0 * c * c + b1 * b1 * s * s).sqrt()
    };
    let report = curve_oracle(&wulff_curve_of_norm(b0, b1), &f_angle, 4096)?;
    let sup = report
        .a_values
        .iter()
        .zip(&report.kappa)
        .fold(0.0f64, |m, (a, k)| m.max((a * k - 1.0).abs()));
    println!("wulff curve of norm(1.6, 0.9):");
    println!("  sup |A(θ)·κ − 1| = {sup:.3e}  (unit anisotropic curvature)");
    assert!(sup < 1e-8);
    println!("curve pipeline agrees with the independent oracle");
    Ok(())
}
