//! Acceptance battery: every capability of the crate re-verified end to
//! end at its contractual tolerance, one summary line per criterion.
//!
//!   cargo test --test acceptance -- --nocapture
//!
//! The tests share a lock so the timed criteria run one at a time and the
//! stated runtime budgets are honest wall-clock measurements.

use nalgebra::{DMatrix, SVector, Vector3};
use rand::{Rng as _, SeedableRng as _};
use rand_chacha::ChaCha8Rng;
use std::sync::{Mutex, MutexGuard, OnceLock};
use std::time::Instant;

use wulffcurv::anisotropy::AnisotropyModel;
use wulffcurv::curvature::{
    maclaurin_gap, newton_kronecker, sigma_kronecker, trace_identities, CurvatureBundle,
};
use wulffcurv::functionals::{
    divergence_lemma_residuals, first_variation_check, minkowski_residual, node_curvature,
    VariationField, VARIATION_FD_STEP,
};
use wulffcurv::geometry::sphere::icosphere;
use wulffcurv::geometry::{grid::build_grid, mesh::build_mesh, ParametricSurface, RadialTerm};
use wulffcurv::stability::eigsolve::EigenOptions;
use wulffcurv::stability::{
    constrained_spectrum, operator_identity_residuals, second_variation_fd, test_function,
    QuadraticForm, SpectrumOptions,
};

fn lock() -> MutexGuard<'static, ()> {
    static LOCK: OnceLock<Mutex<()>> = OnceLock::new();
    LOCK.get_or_init(|| Mutex::new(()))
        .lock()
        .unwrap_or_else(|p| p.into_inner())
}

fn summary(pass: bool, name: &str, detail: &str) {
    println!("[{}] {name}: {detail}", if pass { "PASS" } else { "FAIL" });
}

/// The four catalog anisotropies.
fn catalog() -> Vec<(&'static str, AnisotropyModel<3>)> {
    vec![
        ("const", AnisotropyModel::isotropic()),
        ("linear(0.3)", AnisotropyModel::linear(Vector3::new(0.3, 0.0, 0.0)).unwrap()),
        ("norm(2,1,1)", AnisotropyModel::norm(Vector3::new(2.0, 1.0, 1.0)).unwrap()),
        ("quad(0.2)", AnisotropyModel::quadratic(0.2, Vector3::new(0.0, 0.0, 1.0)).unwrap()),
    ]
}

fn random_spd(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<f64> {
    let m = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
    m.transpose() * &m + DMatrix::identity(n, n) * 0.2
}

fn random_sym(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<f64> {
    let k = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
    (&k + k.transpose()) * 0.5
}

fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0f64, |acc, v| acc.max(v.abs()))
}

/// 1. Algebraic identity suite: trace identities and the two independent
///    computation routes for σ_r and P_r agree to 1e-10 on 1000 random
///    (A SPD, h symmetric) pairs per dimension, in under 5 s.
#[test]
fn a1_algebraic_identity_suite() {
    let _g = lock();
    let t0 = Instant::now();
    let tol = 1e-10;
    let mut worst_trace = 0.0f64;
    let mut worst_sigma = 0.0f64;
    let mut worst_newton = 0.0f64;
    for n in [2usize, 3] {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + n as u64);
        let pairs: Vec<(DMatrix<f64>, DMatrix<f64>)> =
            (0..1000).map(|_| (random_spd(&mut rng, n), random_sym(&mut rng, n))).collect();
        use rayon::prelude::*;
        let (t, s, p) = pairs
            .par_iter()
            .map(|(a, h)| {
                let b = CurvatureBundle::new(a, h).unwrap();
                let tr = trace_identities(&b).max_abs();
                let mut ds = 0.0f64;
                let mut dp = 0.0f64;
                for r in 0..=n {
                    let sk = sigma_kronecker(&b.s, r).unwrap();
                    ds = ds.max((b.sigma[r] - sk).abs() / b.sigma[r].abs().max(1.0));
                    let pk = newton_kronecker(&b.s, r).unwrap();
                    dp = dp.max(max_abs(&(&b.p_stack[r] - pk)) / max_abs(&b.p_stack[r]).max(1.0));
                }
                (tr, ds, dp)
            })
            .reduce(
                || (0.0f64, 0.0f64, 0.0f64),
                |a, b| (a.0.max(b.0), a.1.max(b.1), a.2.max(b.2)),
            );
        worst_trace = worst_trace.max(t);
        worst_sigma = worst_sigma.max(s);
        worst_newton = worst_newton.max(p);
    }
    let dt = t0.elapsed().as_secs_f64();
    let pass = worst_trace <= tol && worst_sigma <= tol && worst_newton <= tol && dt < 5.0;
    summary(
        pass,
        "algebraic identity suite",
        &format!(
            "trace {worst_trace:.2e}, sigma routes {worst_sigma:.2e}, newton routes \
             {worst_newton:.2e} (limit {tol:.0e}) in {dt:.1}s (limit 5s)"
        ),
    );
    assert!(pass);
}

/// 2. Wulff pointwise identity: s = A·h equals the identity matrix at
///    every grid node of every catalog Wulff shape, to 1e-6, under 10 s.
#[test]
fn a2_wulff_pointwise_identity() {
    let _g = lock();
    let t0 = Instant::now();
    let tol = 1e-6;
    let mut worst = 0.0f64;
    for (name, model) in catalog() {
        let wulff = ParametricSurface::wulff(model.clone()).unwrap();
        let grid = build_grid(&wulff, 4).unwrap();
        let id = DMatrix::<f64>::identity(2, 2);
        let mut sup = 0.0f64;
        for frame in &grid.frames {
            let (_, b) = node_curvature(frame, &model).unwrap();
            sup = sup.max(max_abs(&(&b.s - &id)));
        }
        assert!(sup <= tol, "{name}: sup |s - id| = {sup:.3e}");
        worst = worst.max(sup);
    }
    let dt = t0.elapsed().as_secs_f64();
    let pass = worst <= tol && dt < 10.0;
    summary(
        pass,
        "wulff pointwise identity",
        &format!("max |s - id| over catalog {worst:.2e} (limit {tol:.0e}) in {dt:.1}s (limit 10s)"),
    );
    assert!(pass);
}

/// 3. Minkowski formulas: the rank-r integral identity holds to 1e-8
///    relative for r ∈ {0,1} on sphere, stretched ellipsoid, and every
///    catalog Wulff shape, against every catalog anisotropy, under 30 s.
#[test]
fn a3_minkowski_formulas() {
    let _g = lock();
    let t0 = Instant::now();
    let tol = 1e-8;
    let mut surfaces: Vec<(String, ParametricSurface<3>)> = vec![
        ("sphere".into(), ParametricSurface::sphere(1.0).unwrap()),
        ("ellipsoid(1,1,2)".into(), ParametricSurface::ellipsoid(Vector3::new(1.0, 1.0, 2.0)).unwrap()),
    ];
    for (name, model) in catalog() {
        surfaces.push((format!("wulff {name}"), ParametricSurface::wulff(model).unwrap()));
    }
    let mut worst = 0.0f64;
    for (sname, surface) in &surfaces {
        let grid = build_grid(surface, 5).unwrap();
        for (mname, model) in catalog() {
            for r in 0..=1usize {
                let res = minkowski_residual(&grid, &model, r).unwrap();
                let rel = res.relative();
                assert!(rel <= tol, "{sname} / {mname} r={r}: relative residual {rel:.3e}");
                worst = worst.max(rel);
            }
        }
    }
    let dt = t0.elapsed().as_secs_f64();
    let pass = worst <= tol && dt < 30.0;
    summary(
        pass,
        "minkowski formulas",
        &format!(
            "worst relative residual {worst:.2e} over {} surface/anisotropy/rank cases \
             (limit {tol:.0e}) in {dt:.1}s (limit 30s)",
            surfaces.len() * catalog().len() * 2
        ),
    );
    assert!(pass);
}

/// 4. First variation: differenced functional rates match the closed
///    forms to 1e-5 (areas) and 1e-6 (volume) for five seeded random
///    fields on four surface/anisotropy pairs and both ranks, under 2 min.
#[test]
fn a4_first_variation() {
    let _g = lock();
    let t0 = Instant::now();
    let area_tol = 1e-5;
    let vol_tol = 1e-6;
    let radial = ParametricSurface::radial(vec![
        RadialTerm { eps: 0.15, powers: [2, 0, 0] },
        RadialTerm { eps: 0.10, powers: [0, 1, 1] },
    ])
    .unwrap();
    let pairs: Vec<(&str, ParametricSurface<3>, AnisotropyModel<3>)> = vec![
        (
            "sphere/quad(0.2)",
            ParametricSurface::sphere(1.0).unwrap(),
            AnisotropyModel::quadratic(0.2, Vector3::new(0.0, 0.0, 1.0)).unwrap(),
        ),
        (
            "ellipsoid/const",
            ParametricSurface::ellipsoid(Vector3::new(1.0, 1.3, 1.7)).unwrap(),
            AnisotropyModel::isotropic(),
        ),
        (
            "wulff norm/norm",
            ParametricSurface::wulff(AnisotropyModel::norm(Vector3::new(2.0, 1.0, 1.0)).unwrap())
                .unwrap(),
            AnisotropyModel::norm(Vector3::new(2.0, 1.0, 1.0)).unwrap(),
        ),
        ("radial/linear(0.3)", radial, AnisotropyModel::linear(Vector3::new(0.3, 0.0, 0.0)).unwrap()),
    ];
    let mut worst_area = 0.0f64;
    let mut worst_vol = 0.0f64;
    for (pname, surface, model) in &pairs {
        for k in 0..5u64 {
            let field = VariationField::random_smooth(101 + k, 0.4);
            for r in 0..=1usize {
                let chk = first_variation_check(surface, model, &field, r, 4, VARIATION_FD_STEP)
                    .unwrap();
                assert!(
                    chk.area_mismatch <= area_tol,
                    "{pname} field #{k} r={r}: area mismatch {:.3e} (fd {:.6e} vs {:.6e})",
                    chk.area_mismatch,
                    chk.area_fd,
                    chk.area_formula
                );
                assert!(
                    chk.volume_mismatch <= vol_tol,
                    "{pname} field #{k} r={r}: volume mismatch {:.3e}",
                    chk.volume_mismatch
                );
                worst_area = worst_area.max(chk.area_mismatch);
                worst_vol = worst_vol.max(chk.volume_mismatch);
            }
        }
    }
    let dt = t0.elapsed().as_secs_f64();
    let pass = worst_area <= area_tol && worst_vol <= vol_tol && dt < 120.0;
    summary(
        pass,
        "first variation",
        &format!(
            "worst area mismatch {worst_area:.2e} (limit {area_tol:.0e}), worst volume \
             mismatch {worst_vol:.2e} (limit {vol_tol:.0e}) over 40 checks in {dt:.1}s (limit 120s)"
        ),
    );
    assert!(pass);
}

/// 5. Divergence identities converge at second order: sup residuals on a
///    fixed 162-direction sample drop with observed order ≥ 1.8 when the
///    differencing step is halved twice.
#[test]
fn a5_divergence_identity_convergence() {
    let _g = lock();
    let surface = ParametricSurface::ellipsoid(Vector3::new(1.0, 1.2, 1.5)).unwrap();
    let model = AnisotropyModel::norm(Vector3::new(1.3, 1.0, 0.9)).unwrap();
    let points = icosphere(2).0;
    assert_eq!(points.len(), 162);
    let steps: Vec<f64> = (3..=5).map(|l| 0.32 * 0.5f64.powi(l)).collect();
    let mut min_order = f64::INFINITY;
    let mut pass = true;
    for r in 0..=1usize {
        let mut sup_f = Vec::new();
        let mut sup_x = Vec::new();
        for &step in &steps {
            let res = divergence_lemma_residuals(&surface, &model, &points, r, step).unwrap();
            sup_f.push(res.sup_grad_f());
            sup_x.push(res.sup_position());
        }
        for (tag, sups) in [("gradient-field", &sup_f), ("position-field", &sup_x)] {
            for w in sups.windows(2) {
                let order = (w[0] / w[1]).log2();
                min_order = min_order.min(order);
                if order < 1.8 {
                    pass = false;
                }
                println!(
                    "  divergence {tag} r={r}: {:.3e} -> {:.3e}, order {order:.2}",
                    w[0], w[1]
                );
            }
        }
    }
    summary(
        pass,
        "divergence identity convergence",
        &format!("minimum observed order {min_order:.2} (required 1.8) on steps {steps:?}"),
    );
    assert!(pass);
}

/// 6. Wulff stability: for every catalog anisotropy and both ranks, the
///    volume-constrained spectrum at mesh subdivision 5 has exactly three
///    eigenvalues inside the relative kernel band |μ| ≤ 1e-2·μ₄ and
///    μ₄ > 0; the unit-sphere spectrum reproduces the harmonic bands
///    {0×3, 4×5, 10×7} within 2%. Under 3 min.
#[test]
fn a6_wulff_stability() {
    let _g = lock();
    let t0 = Instant::now();
    let mut pass = true;
    for (name, model) in catalog() {
        let wulff = ParametricSurface::wulff(model.clone()).unwrap();
        let mesh = build_mesh(&wulff, 5).unwrap();
        for r in 0..=1usize {
            // the sphere case carries the three-band comparison and needs
            // more pairs; the kernel rule alone needs only four
            let n_eigen = if name == "const" && r == 0 { 15 } else { 4 };
            let opts = SpectrumOptions {
                n_eigen,
                kernel_tol: None,
                eigen: EigenOptions {
                    n_eigen,
                    block: n_eigen,
                    tol: 1e-5,
                    seed: 0xACCE97,
                    ..Default::default()
                },
            };
            let form = QuadraticForm::assemble(&mesh, &model, r).unwrap();
            let rep = constrained_spectrum(&form, &opts).unwrap();
            let mu4 = rep.eigenvalues[3];
            let band = 1e-2 * mu4;
            let in_band = rep.eigenvalues.iter().filter(|m| m.abs() <= band).count();
            let ok = mu4 > 0.0 && in_band == 3;
            println!(
                "  {name} r={r}: mu_1..4 = {:?}, kernel count {in_band} (band {band:.2e})",
                &rep.eigenvalues[..4].iter().map(|v| format!("{v:.4}")).collect::<Vec<_>>()
            );
            if !ok {
                pass = false;
            }
            if name == "const" && r == 0 {
                // harmonic bands l = 2 (value 4, multiplicity 5) and
                // l = 3 (value 10, multiplicity 7) within 2%
                for (idx, want) in
                    (3..8).map(|i| (i, 4.0)).chain((8..15).map(|i| (i, 10.0)))
                {
                    let got = rep.eigenvalues[idx];
                    if (got - want).abs() / want > 0.02 {
                        println!("  sphere band mismatch at #{idx}: {got:.4} vs {want}");
                        pass = false;
                    }
                }
            }
        }
    }
    let dt = t0.elapsed().as_secs_f64();
    pass = pass && dt < 180.0;
    summary(
        pass,
        "wulff stability spectra",
        &format!(
            "translation-only kernels and positive gaps for 4 anisotropies x 2 ranks at \
             subdivision 5; sphere bands within 2%; in {dt:.1}s (limit 180s)"
        ),
    );
    assert!(pass);
}

/// 7. Agreement of the differenced second variation with the assembled
///    quadratic form: within 2% for degree-2 and degree-3 harmonic speeds
///    on the unit sphere and for two mean-deflated random speeds on the
///    norm-anisotropy Wulff shape.
#[test]
fn a7_second_variation_fd_agreement() {
    let _g = lock();
    let tol = 0.02;
    let mut worst = 0.0f64;
    let sphere = ParametricSurface::sphere(1.0).unwrap();
    let iso = AnisotropyModel::<3>::isotropic();
    let mut cases: Vec<(String, ParametricSurface<3>, AnisotropyModel<3>, VariationField<3>)> =
        vec![
            (
                "sphere harmonic l=2".into(),
                sphere.clone(),
                iso.clone(),
                VariationField::normal(&sphere, "harmonic-2", |x: &Vector3<f64>| x[0] * x[1]),
            ),
            (
                "sphere harmonic l=3".into(),
                sphere.clone(),
                iso.clone(),
                VariationField::normal(&sphere, "harmonic-3", |x: &Vector3<f64>| {
                    x[0] * x[1] * x[2]
                }),
            ),
        ];
    // two mean-deflated random speeds on the norm Wulff shape
    let model = AnisotropyModel::norm(Vector3::new(2.0, 1.0, 1.0)).unwrap();
    let wulff = ParametricSurface::wulff(model.clone()).unwrap();
    let grid = build_grid(&wulff, 3).unwrap();
    for seed in [7u64, 8] {
        let raw = VariationField::random_smooth(seed, 0.4);
        let psi_vals: Vec<f64> =
            grid.frames.iter().map(|fr| raw.psi_xi(fr).0).collect();
        let mean = grid.integrate(&psi_vals).unwrap() / grid.total_area();
        let wulff_c = wulff.clone();
        let psi = move |x: &SVector<f64, 3>| {
            let fr = wulff_c.frame_at(x).expect("frame on valid chart point");
            raw.psi_xi(&fr).0 - mean
        };
        cases.push((
            format!("wulff deflated random #{seed}"),
            wulff.clone(),
            model.clone(),
            VariationField::normal(&wulff, format!("deflated#{seed}"), psi),
        ));
    }
    let mut pass = true;
    for (cname, surface, model, field) in &cases {
        for r in 0..=1usize {
            let chk =
                second_variation_fd(surface, model, field, r, 3, VARIATION_FD_STEP).unwrap();
            println!(
                "  {cname} r={r}: d2G(fd) {:.6e} vs form {:.6e}, mismatch {:.2e}",
                chk.g_second_fd, chk.form_value, chk.mismatch
            );
            if chk.mismatch > tol {
                pass = false;
            }
            worst = worst.max(chk.mismatch);
        }
    }
    summary(
        pass,
        "second variation fd/form agreement",
        &format!("worst mismatch {worst:.2e} (limit 2e-2) over {} cases", 2 * cases.len()),
    );
    assert!(pass);
}

/// 8. Test-function chain: the canonical speed on the translated-sphere
///    Wulff shape matches its closed form nodally and gives a vanishing
///    quadratic form; the operator identities converge at order ≥ 1.8 on
///    an ellipsoid sweep; the pinching gap is nonnegative with equality
///    exactly at umbilic data.
#[test]
fn a8_test_function_chain() {
    let _g = lock();
    let mut pass = true;

    // (a) translated-sphere Wulff shape
    let a = Vector3::new(0.3, 0.0, 0.0);
    let model = AnisotropyModel::linear(a).unwrap();
    let wulff = ParametricSurface::wulff(model.clone()).unwrap();
    let diag = test_function(&wulff, &model, 0, 4, None).unwrap();
    let grid = build_grid(&wulff, 4).unwrap();
    let mut nodal_sup = 0.0f64;
    for frame in &grid.frames {
        let psi = diag.alpha * model.value(&frame.normal).unwrap()
            + diag.h_bar * frame.support();
        let closed = -2.0 * a.dot(&-frame.normal); // outward direction is −ν
        nodal_sup = nodal_sup.max((psi - closed).abs());
    }
    println!(
        "  translated-sphere wulff: nodal sup {nodal_sup:.2e}, Q[psi*] {:.2e}, chain {:.2e}",
        diag.q_grid, diag.q_chain
    );
    if nodal_sup > 1e-6 || diag.q_grid.abs() > 1e-4 || diag.q_chain.abs() > 1e-4 {
        pass = false;
    }

    // (b) operator-identity convergence on an ellipsoid sweep
    let surface = ParametricSurface::ellipsoid(Vector3::new(1.0, 1.2, 1.5)).unwrap();
    let emodel = AnisotropyModel::norm(Vector3::new(1.3, 1.0, 0.9)).unwrap();
    let points = icosphere(2).0;
    let steps: Vec<f64> = (3..=5).map(|l| 0.32 * 0.5f64.powi(l)).collect();
    let mut min_order = f64::INFINITY;
    for r in 0..=1usize {
        let mut sup_f = Vec::new();
        let mut sup_u = Vec::new();
        for &step in &steps {
            let res = operator_identity_residuals(&surface, &emodel, &points, r, step).unwrap();
            sup_f.push(res.sup_f());
            sup_u.push(res.sup_support());
        }
        for (tag, sups) in [("anisotropy", &sup_f), ("support", &sup_u)] {
            for w in sups.windows(2) {
                let order = (w[0] / w[1]).log2();
                min_order = min_order.min(order);
                if order < 1.8 {
                    pass = false;
                }
                println!(
                    "  operator identity {tag} r={r}: {:.3e} -> {:.3e}, order {order:.2}",
                    w[0], w[1]
                );
            }
        }
    }

    // (c) pinching gap: nonnegative, zero exactly at umbilic data
    let mut rng = ChaCha8Rng::seed_from_u64(88);
    let mut min_gap = f64::INFINITY;
    let mut min_generic = f64::INFINITY;
    for _ in 0..2000 {
        let n = if rng.gen_bool(0.5) { 3 } else { 4 };
        let lam: Vec<f64> = (0..n).map(|_| rng.gen_range(0.1..3.0)).collect();
        for r in 0..=n - 2 {
            let g = maclaurin_gap(&lam, r).unwrap();
            min_gap = min_gap.min(g);
            min_generic = min_generic.min(g);
        }
        let c = rng.gen_range(0.1..3.0);
        let umb = vec![c; n];
        for r in 0..=n - 2 {
            let g = maclaurin_gap(&umb, r).unwrap();
            min_gap = min_gap.min(g);
            if g.abs() > 1e-12 {
                pass = false;
            }
        }
    }
    println!(
        "  pinching gap: min over random spectra {min_gap:.2e}, min over non-umbilic {min_generic:.2e}"
    );
    if min_gap < -1e-12 || min_generic <= 0.0 {
        pass = false;
    }

    summary(
        pass,
        "test-function chain",
        &format!(
            "nodal sup {nodal_sup:.2e} (limit 1e-6), operator-identity order {min_order:.2} \
             (required 1.8), gap floor {min_gap:.2e} (limit -1e-12)"
        ),
    );
    assert!(pass);
}

/// 9. Determinism: two CLI runs with the same configuration and seed
///    produce byte-identical reports once timing fields are removed.
#[test]
fn a9_determinism() {
    let _g = lock();
    let exe = env!("CARGO_BIN_EXE_wulffcurv");
    let base = std::env::temp_dir().join("wulffcurv_determinism");
    let _ = std::fs::remove_dir_all(&base);
    let mut pass = true;
    for (tag, args) in [
        (
            "identities",
            vec![
                "identities",
                "--F",
                "norm:B=[1.3,1,0.9]",
                "--surface",
                "ellipsoid:a=1,b=1.2,c=1.5",
                "--level",
                "3",
                "--seed",
                "11",
            ],
        ),
        (
            "variation",
            vec![
                "variation",
                "--F",
                "quad:c=0.2,d=[0,0,1]",
                "--surface",
                "sphere:R=1",
                "--level",
                "3",
                "--fields",
                "2",
                "--seed",
                "23",
            ],
        ),
        (
            "stability",
            vec![
                "stability",
                "--F",
                "norm:B=[1.3,1,0.9]",
                "--subdiv",
                "3",
                "--n-eigen",
                "6",
                "--seed",
                "5",
            ],
        ),
    ] {
        let mut stripped: Vec<String> = Vec::new();
        let mut csvs: Vec<String> = Vec::new();
        for run in 0..2 {
            let out = base.join(format!("{tag}_{run}"));
            let status = std::process::Command::new(exe)
                .args(&args)
                .arg("--out")
                .arg(&out)
                .stdout(std::process::Stdio::null())
                .status()
                .expect("spawn CLI");
            assert!(status.success(), "{tag} run {run} exited {status:?}");
            let text = std::fs::read_to_string(out.join("report.json")).unwrap();
            let mut value: serde_json::Value = serde_json::from_str(&text).unwrap();
            wulffcurv::report::strip_timings(&mut value);
            stripped.push(serde_json::to_string(&value).unwrap());
            csvs.push(std::fs::read_to_string(out.join("report.csv")).unwrap());
        }
        let same = stripped[0] == stripped[1] && csvs[0] == csvs[1];
        println!(
            "  {tag}: json {} bytes, identical {} / csv identical {}",
            stripped[0].len(),
            stripped[0] == stripped[1],
            csvs[0] == csvs[1]
        );
        if !same {
            pass = false;
        }
    }
    summary(
        pass,
        "report determinism",
        "two seeded runs of identities/variation/stability byte-identical modulo timings",
    );
    assert!(pass);
}
