//! Pointwise anisotropic curvature algebra.
//!
//! Inputs are the operator A (the anisotropy Hessian A_F = ∇²F + F·1 at
//! the normal, symmetric positive definite) and the shape operator h, both
//! n×n matrices in the same orthonormal tangent frame. The object of
//! study is s = A·h — similar to a symmetric matrix, hence with real
//! eigenvalues λ₁..λₙ (the anisotropic principal curvatures) — and the
//! derived quantities
//!
//! * σ_r: elementary symmetric functions of the λᵢ (σ₀ = 1),
//! * normalized means H_r = σ_r / C(n,r),
//! * Newton operators P₀ = 1, P_r = σ_r·1 − P_{r−1}·s,
//! * tilted operators T_r = P_r·A (the ones integrated by parts).
//!
//! Two independent routes are implemented for both σ_r and P_r: the
//! eigenvalue/recurrence route used in production, and a literal
//! generalized-Kronecker-symbol expansion used as an oracle. Their
//! agreement, the trace identities
//!
//!   tr(P_r·s)  = (r+1)·σ_{r+1}
//!   tr(P_r)    = (n−r)·σ_r
//!   tr(P_r·s²) = σ₁σ_{r+1} − (r+2)σ_{r+2}
//!
//! and the frame invariance of the spectrum are enforced by the tests and
//! the acceptance battery.

use crate::error::{Error, Result};
use nalgebra::DMatrix;

/// Binomial coefficient C(n, k) as f64 (n ≤ ~30 here, exact in f64).
pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0f64;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc.round()
}

/// Eigenvalues of s = A·h via the symmetric reduction: with A = LLᵀ,
/// the matrix Lᵀ·h·L is symmetric and similar to A·h, so the spectrum is
/// structurally real. Returns eigenvalues in ascending order.
///
/// Errors with `NotPositiveDefinite` if A has no Cholesky factor.
pub fn eigen_anisotropic(a: &DMatrix<f64>, h: &DMatrix<f64>) -> Result<Vec<f64>> {
    let n = a.nrows();
    check_square("A", a, n)?;
    check_square("h", h, n)?;
    let chol = a
        .clone()
        .cholesky()
        .ok_or(Error::NotPositiveDefinite { context: "anisotropy operator A" })?;
    let l = chol.l();
    let sym = l.transpose() * h * &l;
    let sym = (&sym + sym.transpose()) * 0.5;
    let mut eig: Vec<f64> = sym.symmetric_eigenvalues().iter().copied().collect();
    eig.sort_by(f64::total_cmp);
    Ok(eig)
}

/// Elementary symmetric functions σ₀..σₙ of the given values, by the
/// stable one-value-at-a-time recurrence σ_r ← σ_r + λ·σ_{r−1}.
pub fn sigma_from_eigenvalues(lambda: &[f64]) -> Vec<f64> {
    let n = lambda.len();
    let mut sigma = vec![0.0; n + 1];
    sigma[0] = 1.0;
    for (count, &l) in lambda.iter().enumerate() {
        for r in (1..=count + 1).rev() {
            sigma[r] += l * sigma[r - 1];
        }
    }
    sigma
}

/// σ_r of s by the literal generalized-Kronecker expansion
///
///   σ_r = 1/r! · Σ δ^{j₁..j_r}_{i₁..i_r} · s_{i₁j₁}···s_{i_rj_r},
///
/// summing over all index tuples. Exponential cost — this is the oracle
/// route, usable for n ≤ 4, r ≤ n.
pub fn sigma_kronecker(s: &DMatrix<f64>, r: usize) -> Result<f64> {
    let n = s.nrows();
    check_square("s", s, n)?;
    if r > n {
        return Err(Error::RankOutOfRange { r, n, context: "sigma_kronecker" });
    }
    if r == 0 {
        return Ok(1.0);
    }
    let tuples = index_tuples(n, r);
    let mut acc = 0.0;
    for upper in &tuples {
        for lower in &tuples {
            let d = kronecker_symbol(upper, lower);
            if d == 0 {
                continue;
            }
            let mut prod = d as f64;
            for k in 0..r {
                prod *= s[(lower[k], upper[k])];
            }
            acc += prod;
        }
    }
    Ok(acc / factorial(r))
}

/// Newton operator stack P₀..Pₙ from s and precomputed σ values, by the
/// recurrence P_r = σ_r·1 − P_{r−1}·s. The last entry Pₙ vanishes
/// identically (Cayley–Hamilton); it is kept for residual checks.
pub fn newton_recursion(s: &DMatrix<f64>, sigma: &[f64]) -> Result<Vec<DMatrix<f64>>> {
    let n = s.nrows();
    check_square("s", s, n)?;
    if sigma.len() != n + 1 {
        return Err(Error::SizeMismatch {
            context: "sigma list for newton_recursion",
            expected: n + 1,
            got: sigma.len(),
        });
    }
    let mut stack = Vec::with_capacity(n + 1);
    stack.push(DMatrix::identity(n, n));
    for r in 1..=n {
        let prev: &DMatrix<f64> = &stack[r - 1];
        let p = DMatrix::identity(n, n) * sigma[r] - prev * s;
        stack.push(p);
    }
    Ok(stack)
}

/// P_r of s by the literal Kronecker expansion
///
///   (P_r)_{ij} = 1/r! · Σ δ^{j₁..j_r i}_{i₁..i_r j} · s_{i₁j₁}···s_{i_rj_r}.
///
/// Oracle route, exponential cost.
pub fn newton_kronecker(s: &DMatrix<f64>, r: usize) -> Result<DMatrix<f64>> {
    let n = s.nrows();
    check_square("s", s, n)?;
    if r > n {
        return Err(Error::RankOutOfRange { r, n, context: "newton_kronecker" });
    }
    let mut p = DMatrix::<f64>::zeros(n, n);
    if r == 0 {
        return Ok(DMatrix::identity(n, n));
    }
    let tuples = index_tuples(n, r);
    for i in 0..n {
        for j in 0..n {
            let mut acc = 0.0;
            let mut upper_ext = vec![0usize; r + 1];
            let mut lower_ext = vec![0usize; r + 1];
            for upper in &tuples {
                upper_ext[..r].copy_from_slice(upper);
                upper_ext[r] = i;
                for lower in &tuples {
                    lower_ext[..r].copy_from_slice(lower);
                    lower_ext[r] = j;
                    let d = kronecker_symbol(&upper_ext, &lower_ext);
                    if d == 0 {
                        continue;
                    }
                    let mut prod = d as f64;
                    for k in 0..r {
                        prod *= s[(lower[k], upper[k])];
                    }
                    acc += prod;
                }
            }
            p[(i, j)] = acc / factorial(r);
        }
    }
    Ok(p)
}

/// All curvature data at one point, derived from (A, h) once.
#[derive(Debug, Clone)]
pub struct CurvatureBundle {
    pub n: usize,
    /// s = A·h (generally non-symmetric).
    pub s: DMatrix<f64>,
    /// Anisotropic principal curvatures, ascending.
    pub lambda: Vec<f64>,
    /// σ₀..σₙ.
    pub sigma: Vec<f64>,
    /// Newton operators P₀..Pₙ.
    pub p_stack: Vec<DMatrix<f64>>,
    /// T_r = P_r·A for r = 0..n−1 (the integration-by-parts operators).
    pub t_stack: Vec<DMatrix<f64>>,
    /// A copy of h for quantities like tr(T_r·h²).
    pub h: DMatrix<f64>,
    /// A copy of A.
    pub a: DMatrix<f64>,
}

impl CurvatureBundle {
    pub fn new(a: &DMatrix<f64>, h: &DMatrix<f64>) -> Result<Self> {
        let n = a.nrows();
        let lambda = eigen_anisotropic(a, h)?;
        let s = a * h;
        let sigma = sigma_from_eigenvalues(&lambda);
        let p_stack = newton_recursion(&s, &sigma)?;
        let t_stack: Vec<DMatrix<f64>> = (0..n).map(|r| &p_stack[r] * a).collect();
        Ok(CurvatureBundle {
            n,
            s,
            lambda,
            sigma,
            p_stack,
            t_stack,
            h: h.clone(),
            a: a.clone(),
        })
    }

    /// σ_r with the convention σ_r = 0 for r > n.
    pub fn sigma_ext(&self, r: usize) -> f64 {
        self.sigma.get(r).copied().unwrap_or(0.0)
    }

    /// Normalized r-th mean H_r = σ_r/C(n,r), with H_r = 0 for r > n.
    pub fn h_mean(&self, r: usize) -> f64 {
        if r > self.n {
            0.0
        } else {
            self.sigma[r] / binomial(self.n, r)
        }
    }

    /// tr(T_r·h·h), the zeroth-order coefficient of the stability form.
    pub fn tr_t_h2(&self, r: usize) -> f64 {
        (&self.t_stack[r] * &self.h * &self.h).trace()
    }
}

/// Relative residuals of the three trace identities at a single point.
#[derive(Debug, Clone)]
pub struct TraceResiduals {
    /// tr(P_r·s) − (r+1)σ_{r+1}, relative.
    pub ps: Vec<f64>,
    /// tr(P_r) − (n−r)σ_r, relative.
    pub p: Vec<f64>,
    /// tr(P_r·s²) − (σ₁σ_{r+1} − (r+2)σ_{r+2}), relative.
    pub ps2: Vec<f64>,
}

impl TraceResiduals {
    pub fn max_abs(&self) -> f64 {
        self.ps
            .iter()
            .chain(&self.p)
            .chain(&self.ps2)
            .fold(0.0f64, |m, &v| m.max(v.abs()))
    }
}

/// Evaluate the trace identities for every r = 0..n. Residuals are scaled
/// by max(1, |lhs|, |rhs|).
pub fn trace_identities(bundle: &CurvatureBundle) -> TraceResiduals {
    let n = bundle.n;
    let rel = |lhs: f64, rhs: f64| (lhs - rhs) / lhs.abs().max(rhs.abs()).max(1.0);
    let mut ps = Vec::with_capacity(n + 1);
    let mut p = Vec::with_capacity(n + 1);
    let mut ps2 = Vec::with_capacity(n + 1);
    let s2 = &bundle.s * &bundle.s;
    for r in 0..=n {
        let pr = &bundle.p_stack[r];
        ps.push(rel(
            (pr * &bundle.s).trace(),
            (r as f64 + 1.0) * bundle.sigma_ext(r + 1),
        ));
        p.push(rel(pr.trace(), (n - r) as f64 * bundle.sigma[r]));
        ps2.push(rel(
            (pr * &s2).trace(),
            bundle.sigma[1] * bundle.sigma_ext(r + 1)
                - (r as f64 + 2.0) * bundle.sigma_ext(r + 2),
        ));
    }
    TraceResiduals { ps, p, ps2 }
}

/// Verdict of the pointwise positivity cascade over a set of spectra:
/// if σ_{r+1} > 0 everywhere and there is an elliptic point (a point with
/// all λᵢ > 0), then σ₁..σ_r are positive everywhere and every P_k
/// (k ≤ r) is positive definite.
#[derive(Debug, Clone)]
pub struct CascadeReport {
    pub premise_sigma_r1_positive: bool,
    pub has_elliptic_point: bool,
    /// min over points of σ_k, for k = 1..r+1.
    pub sigma_minima: Vec<f64>,
    /// min over points of the smallest eigenvalue of sym(P_k), k = 0..r.
    pub newton_minima: Vec<f64>,
    /// Conclusion holds (vacuously true when the premise fails).
    pub pass: bool,
}

/// Check the positivity cascade on a collection of per-point spectra.
/// Each entry of `spectra` is the ascending λ list at one point.
pub fn positivity_cascade(spectra: &[Vec<f64>], r: usize) -> Result<CascadeReport> {
    if spectra.is_empty() {
        return Err(Error::SizeMismatch {
            context: "positivity cascade needs at least one point",
            expected: 1,
            got: 0,
        });
    }
    let n = spectra[0].len();
    if r + 1 > n {
        return Err(Error::RankOutOfRange { r, n, context: "positivity_cascade" });
    }
    let mut premise = true;
    let mut elliptic = false;
    let mut sigma_minima = vec![f64::INFINITY; r + 1];
    let mut newton_minima = vec![f64::INFINITY; r + 1];
    for lam in spectra {
        if lam.len() != n {
            return Err(Error::SizeMismatch {
                context: "spectrum length",
                expected: n,
                got: lam.len(),
            });
        }
        let sigma = sigma_from_eigenvalues(lam);
        if sigma[r + 1] <= 0.0 {
            premise = false;
        }
        if lam.iter().all(|&l| l > 0.0) {
            elliptic = true;
        }
        for k in 1..=r + 1 {
            sigma_minima[k - 1] = sigma_minima[k - 1].min(sigma[k]);
        }
        // Newton operator eigenvalues from the spectrum: P_k has eigenvalue
        // ∂σ_{k+1}/∂λᵢ = σ_k(λ with λᵢ removed) on the i-th eigenvector.
        for k in 0..=r {
            for i in 0..n {
                let rest: Vec<f64> = lam
                    .iter()
                    .enumerate()
                    .filter(|&(j, _)| j != i)
                    .map(|(_, &l)| l)
                    .collect();
                let sig_rest = sigma_from_eigenvalues(&rest);
                newton_minima[k] = newton_minima[k].min(sig_rest[k]);
            }
        }
    }
    let conclusion = sigma_minima.iter().all(|&m| m > 0.0)
        && newton_minima.iter().all(|&m| m > 0.0);
    Ok(CascadeReport {
        premise_sigma_r1_positive: premise,
        has_elliptic_point: elliptic,
        sigma_minima,
        newton_minima,
        pass: !(premise && elliptic) || conclusion,
    })
}

/// The pinching gap H₁H_{r+1} − H_{r+2} ≥ 0 for a strictly positive
/// spectrum, with equality exactly at umbilic data (all λ equal).
/// Requires r ≤ n − 2 so that all three means are genuine.
pub fn maclaurin_gap(lambda: &[f64], r: usize) -> Result<f64> {
    let n = lambda.len();
    if r + 2 > n {
        return Err(Error::RankOutOfRange { r, n, context: "maclaurin_gap" });
    }
    let min = lambda.iter().fold(f64::INFINITY, |m, &l| m.min(l));
    if min <= 0.0 {
        return Err(Error::NonPositiveSpectrum { min_eigenvalue: min });
    }
    let sigma = sigma_from_eigenvalues(lambda);
    let h1 = sigma[1] / binomial(n, 1);
    let hr1 = sigma[r + 1] / binomial(n, r + 1);
    let hr2 = sigma[r + 2] / binomial(n, r + 2);
    Ok(h1 * hr1 - hr2)
}

fn check_square(name: &'static str, m: &DMatrix<f64>, n: usize) -> Result<()> {
    if m.nrows() != n || m.ncols() != n {
        return Err(Error::SizeMismatch {
            context: name,
            expected: n,
            got: m.nrows().max(m.ncols()),
        });
    }
    Ok(())
}

fn factorial(r: usize) -> f64 {
    (1..=r).map(|k| k as f64).product()
}

/// All r-tuples of indices in 0..n (nᵣ of them, lexicographic order).
fn index_tuples(n: usize, r: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for _ in 0..r {
        let mut next = Vec::with_capacity(out.len() * n);
        for t in &out {
            for i in 0..n {
                let mut t2 = t.clone();
                t2.push(i);
                next.push(t2);
            }
        }
        out = next;
    }
    out
}

/// Generalized Kronecker symbol δ^{upper}_{lower} ∈ {−1, 0, +1}:
/// zero unless `lower` is a permutation of `upper` (with all entries of
/// `upper` distinct), otherwise the sign of that permutation.
fn kronecker_symbol(upper: &[usize], lower: &[usize]) -> i32 {
    let r = upper.len();
    // reject repeated indices
    for i in 0..r {
        for j in (i + 1)..r {
            if upper[i] == upper[j] || lower[i] == lower[j] {
                return 0;
            }
        }
    }
    // find the permutation mapping upper → lower and count inversions
    let mut perm = Vec::with_capacity(r);
    for &u in upper {
        match lower.iter().position(|&l| l == u) {
            Some(p) => perm.push(p),
            None => return 0,
        }
    }
    let mut sign = 1;
    for i in 0..r {
        for j in (i + 1)..r {
            if perm[i] > perm[j] {
                sign = -sign;
            }
        }
    }
    sign
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn diag(vals: &[f64]) -> DMatrix<f64> {
        DMatrix::from_diagonal(&nalgebra::DVector::from_row_slice(vals))
    }

    fn spd(n: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
        let g = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
        &g * g.transpose() + DMatrix::identity(n, n) * 0.3
    }

    fn sym(n: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
        let g = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
        (&g + g.transpose()) * 0.5
    }

    #[test]
    fn eigen_anisotropic_known_cases() {
        // A = 1: eigenvalues of h itself
        let e = eigen_anisotropic(&DMatrix::identity(2, 2), &diag(&[1.0, 2.0])).unwrap();
        assert_relative_eq!(e[0], 1.0, max_relative = 1e-14);
        assert_relative_eq!(e[1], 2.0, max_relative = 1e-14);
        // A = [[2,1],[1,2]], h = diag(1,−1): A·h has eigenvalues ±√3
        let a = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 2.0]);
        let e = eigen_anisotropic(&a, &diag(&[1.0, -1.0])).unwrap();
        let s3 = 3.0f64.sqrt();
        assert_relative_eq!(e[0], -s3, max_relative = 1e-14);
        assert_relative_eq!(e[1], s3, max_relative = 1e-14);
    }

    #[test]
    fn eigen_anisotropic_rejects_indefinite_a() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(matches!(
            eigen_anisotropic(&a, &DMatrix::identity(2, 2)),
            Err(Error::NotPositiveDefinite { .. })
        ));
    }

    #[test]
    fn sigma_recurrence_known_values() {
        assert_eq!(sigma_from_eigenvalues(&[1.0, 1.0]), vec![1.0, 2.0, 1.0]);
        assert_eq!(
            sigma_from_eigenvalues(&[1.0, 2.0, 3.0]),
            vec![1.0, 6.0, 11.0, 6.0]
        );
        assert_eq!(sigma_from_eigenvalues(&[2.0, 2.0]), vec![1.0, 4.0, 4.0]);
    }

    #[test]
    fn sigma_kronecker_matches_recurrence() {
        // hand cases
        let s = DMatrix::identity(2, 2);
        assert_relative_eq!(sigma_kronecker(&s, 0).unwrap(), 1.0);
        assert_relative_eq!(sigma_kronecker(&s, 1).unwrap(), 2.0);
        let s = diag(&[1.0, 2.0, 3.0]);
        assert_relative_eq!(sigma_kronecker(&s, 2).unwrap(), 11.0, max_relative = 1e-14);
        // random non-symmetric s with real products: compare the two routes
        // through coefficients of the characteristic polynomial
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for n in 2..=4usize {
            for _ in 0..20 {
                let a = spd(n, &mut rng);
                let h = sym(n, &mut rng);
                let lam = eigen_anisotropic(&a, &h).unwrap();
                let sig = sigma_from_eigenvalues(&lam);
                let s = &a * &h;
                for r in 0..=n {
                    let oracle = sigma_kronecker(&s, r).unwrap();
                    let scale = sig[r].abs().max(1.0);
                    assert!(
                        (oracle - sig[r]).abs() / scale < 1e-10,
                        "n={n} r={r}: {oracle} vs {}",
                        sig[r]
                    );
                }
            }
        }
    }

    #[test]
    fn newton_recursion_known_values() {
        // s = 1 (n = 2): P₁ = σ₁·1 − s = 1
        let s = DMatrix::identity(2, 2);
        let sig = sigma_from_eigenvalues(&[1.0, 1.0]);
        let p = newton_recursion(&s, &sig).unwrap();
        assert!((p[1].clone() - DMatrix::identity(2, 2)).norm() < 1e-14);
        // diagonal s = (1,2,3): P₁ = diag(5,4,3)
        let s = diag(&[1.0, 2.0, 3.0]);
        let sig = sigma_from_eigenvalues(&[1.0, 2.0, 3.0]);
        let p = newton_recursion(&s, &sig).unwrap();
        assert!((p[1].clone() - diag(&[5.0, 4.0, 3.0])).norm() < 1e-14);
        // tr P₁ = (n−1)σ₁ = 12
        assert_relative_eq!(p[1].trace(), 12.0, max_relative = 1e-14);
        // Cayley–Hamilton: Pₙ = 0
        assert!(p[3].norm() < 1e-12);
    }

    #[test]
    fn newton_kronecker_matches_recursion() {
        let s = diag(&[1.0, 2.0, 3.0]);
        let p1 = newton_kronecker(&s, 1).unwrap();
        assert!((p1 - diag(&[5.0, 4.0, 3.0])).norm() < 1e-13);
        assert!((newton_kronecker(&s, 0).unwrap() - DMatrix::identity(3, 3)).norm() < 1e-15);

        let mut rng = ChaCha8Rng::seed_from_u64(32);
        for n in 2..=4usize {
            for _ in 0..10 {
                let a = spd(n, &mut rng);
                let h = sym(n, &mut rng);
                let s = &a * &h;
                let lam = eigen_anisotropic(&a, &h).unwrap();
                let sig = sigma_from_eigenvalues(&lam);
                let stack = newton_recursion(&s, &sig).unwrap();
                for r in 0..=n.min(3) {
                    let oracle = newton_kronecker(&s, r).unwrap();
                    let scale = stack[r].norm().max(1.0);
                    assert!(
                        (oracle - &stack[r]).norm() / scale < 1e-10,
                        "n={n} r={r}"
                    );
                }
            }
        }
    }

    #[test]
    fn trace_identities_hand_values() {
        // λ = (1,2,3): tr(P₁s) = 2σ₂ = 22, tr(P₁s²) = σ₁σ₂ − 3σ₃ = 66−18 = 48
        let s = diag(&[1.0, 2.0, 3.0]);
        let sig = sigma_from_eigenvalues(&[1.0, 2.0, 3.0]);
        let p = newton_recursion(&s, &sig).unwrap();
        assert_relative_eq!((p[1].clone() * &s).trace(), 22.0, max_relative = 1e-14);
        assert_relative_eq!(
            (p[1].clone() * (&s * &s)).trace(),
            48.0,
            max_relative = 1e-14
        );
        // unit sphere, isotropic (n = 2, r = 0): tr(P₀s) = σ₁ = 2
        let b = CurvatureBundle::new(&DMatrix::identity(2, 2), &DMatrix::identity(2, 2)).unwrap();
        assert_relative_eq!(b.sigma[1], 2.0, max_relative = 1e-14);
        let res = trace_identities(&b);
        assert!(res.max_abs() < 1e-14);
    }

    #[test]
    fn bundle_on_wulff_like_data_is_binomial() {
        // On a Wulff shape s = identity: σ_r = C(n,r), P_r = C(n−1,r)·1
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        for n in 2..=3usize {
            let a = spd(n, &mut rng);
            let h = a.clone().try_inverse().unwrap();
            let b = CurvatureBundle::new(&a, &h).unwrap();
            for r in 0..=n {
                assert_relative_eq!(b.sigma[r], binomial(n, r), max_relative = 1e-10);
                let want = DMatrix::identity(n, n) * binomial(n - 1, r);
                assert!((b.p_stack[r].clone() - want).norm() < 1e-9);
            }
            for r in 0..n {
                let want = &b.a * binomial(n - 1, r);
                assert!((b.t_stack[r].clone() - want).norm() < 1e-9);
            }
        }
    }

    #[test]
    fn cascade_on_positive_and_synthetic_data() {
        // Wulff-like: premise holds, cascade concludes
        let spectra: Vec<Vec<f64>> = vec![vec![1.0, 1.0, 1.0], vec![0.5, 1.0, 2.0]];
        let rep = positivity_cascade(&spectra, 1).unwrap();
        assert!(rep.premise_sigma_r1_positive && rep.has_elliptic_point && rep.pass);
        // premise false: vacuous pass, flagged
        let spectra: Vec<Vec<f64>> = vec![vec![-1.0, -1.0, 0.5]];
        let rep = positivity_cascade(&spectra, 1).unwrap();
        assert!(!rep.premise_sigma_r1_positive);
        assert!(rep.pass);
    }

    #[test]
    fn maclaurin_gap_values() {
        // umbilic: zero gap
        assert_relative_eq!(maclaurin_gap(&[1.0, 1.0, 1.0], 0).unwrap(), 0.0);
        assert_relative_eq!(maclaurin_gap(&[2.0, 2.0], 0).unwrap(), 0.0);
        // λ = (1,2,3), r = 0: H₁² − H₂ = 4 − 11/3 = 1/3
        assert_relative_eq!(
            maclaurin_gap(&[1.0, 2.0, 3.0], 0).unwrap(),
            1.0 / 3.0,
            max_relative = 1e-14
        );
        // strictly positive for non-umbilic data, shrinking with the spread
        let g1 = maclaurin_gap(&[1.0, 1.0 + 1e-3], 0).unwrap();
        let g2 = maclaurin_gap(&[1.0, 1.0 + 2e-3], 0).unwrap();
        assert!(g1 > 0.0 && g2 > g1);
        // errors
        assert!(matches!(
            maclaurin_gap(&[1.0, -2.0, 3.0], 0),
            Err(Error::NonPositiveSpectrum { .. })
        ));
        assert!(matches!(
            maclaurin_gap(&[1.0, 2.0], 1),
            Err(Error::RankOutOfRange { .. })
        ));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        /// Route agreement and trace identities on random (A, h) pairs.
        #[test]
        fn routes_agree_on_random_pairs(seed in 0u64..1u64 << 32, n in 2usize..=3) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = spd(n, &mut rng);
            let h = sym(n, &mut rng);
            let b = CurvatureBundle::new(&a, &h).unwrap();
            // σ routes
            for r in 0..=n {
                let oracle = sigma_kronecker(&b.s, r).unwrap();
                let scale = b.sigma[r].abs().max(1.0);
                prop_assert!((oracle - b.sigma[r]).abs() / scale < 1e-9);
            }
            // P routes
            for r in 0..=n {
                let oracle = newton_kronecker(&b.s, r).unwrap();
                let scale = b.p_stack[r].norm().max(1.0);
                prop_assert!((oracle - &b.p_stack[r]).norm() / scale < 1e-9);
            }
            // trace identities
            prop_assert!(trace_identities(&b).max_abs() < 1e-10);
        }

        /// The λ spectrum is invariant under frame rotation (A, h) →
        /// (RᵀAR, RᵀhR).
        #[test]
        fn spectrum_is_frame_invariant(seed in 0u64..1u64 << 32) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let n = 3;
            let a = spd(n, &mut rng);
            let h = sym(n, &mut rng);
            // random rotation via QR of a random matrix
            let g = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
            let qr = g.qr();
            let rot = qr.q();
            let a2 = rot.transpose() * &a * &rot;
            let a2 = (&a2 + a2.transpose()) * 0.5;
            let h2 = rot.transpose() * &h * &rot;
            let h2 = (&h2 + h2.transpose()) * 0.5;
            let l1 = eigen_anisotropic(&a, &h).unwrap();
            let l2 = eigen_anisotropic(&a2, &h2).unwrap();
            for (x, y) in l1.iter().zip(&l2) {
                prop_assert!((x - y).abs() < 1e-9 * x.abs().max(1.0));
            }
        }
    }
}
