//! Unit-sphere utilities: deterministic tangent bases, quasi-uniform sample
//! sets, and icosahedral triangulations.
//!
//! Everything downstream parametrizes hypersurfaces by unit directions, so
//! these helpers fix, once and for all, how a tangent basis is attached to a
//! direction and how the sphere is sampled. All choices are deterministic:
//! repeated runs produce bit-identical output.

use crate::error::{Error, Result};
use nalgebra::SVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::HashMap;

/// Relative tolerance for accepting an input as a unit vector.
pub const UNIT_TOL: f64 = 1e-6;

/// Check that `x` has unit length (within [`UNIT_TOL`]) and return the
/// exactly normalized copy used by all internal evaluations.
pub fn require_unit<const D: usize>(x: &SVector<f64, D>) -> Result<SVector<f64, D>> {
    let n = x.norm();
    if (n - 1.0).abs() > UNIT_TOL {
        return Err(Error::NonUnitInput { norm: n, tol: UNIT_TOL });
    }
    Ok(x / n)
}

/// Deterministic orthonormal tangent basis of the sphere at unit `x`.
///
/// * D = 2: the counterclockwise rotation of `x` by 90°.
/// * D = 3: τ₁ from the coordinate axis most orthogonal to `x`,
///   τ₂ = x × τ₁, so that τ₁ × τ₂ = x (outward-oriented pair).
/// * D = 4: Gram–Schmidt over coordinate axes in index order, skipping the
///   axis most parallel to `x`.
pub fn tangent_basis<const D: usize>(x: &SVector<f64, D>) -> Vec<SVector<f64, D>> {
    match D {
        2 => {
            let mut t = SVector::<f64, D>::zeros();
            t[0] = -x[1];
            t[1] = x[0];
            vec![t / t.norm()]
        }
        3 => {
            let k = (0..3).min_by(|&i, &j| x[i].abs().total_cmp(&x[j].abs())).unwrap();
            let mut e = SVector::<f64, D>::zeros();
            e[k] = 1.0;
            let t1 = (e - x * x[k]).normalize();
            // cross product written out so the code stays generic in D
            let t2 = SVector::<f64, D>::from_fn(|i, _| {
                let j = (i + 1) % 3;
                let l = (i + 2) % 3;
                x[j] * t1[l] - x[l] * t1[j]
            });
            vec![t1, t2 / t2.norm()]
        }
        _ => {
            let skip = (0..D).max_by(|&i, &j| x[i].abs().total_cmp(&x[j].abs())).unwrap();
            let mut basis: Vec<SVector<f64, D>> = Vec::with_capacity(D - 1);
            for k in 0..D {
                if k == skip {
                    continue;
                }
                let mut v = SVector::<f64, D>::zeros();
                v[k] = 1.0;
                v -= x * x.dot(&v);
                for b in &basis {
                    v -= b * b.dot(&v);
                }
                basis.push(v.normalize());
            }
            basis
        }
    }
}

/// Quasi-uniform sample of unit directions on S^{D-1}, used by convexity
/// scans. The count grows by a factor ≈ 4 per level (D = 3 guarantees at
/// least 100·4^{level−1} points).
pub fn sample_dirs<const D: usize>(level: usize) -> Vec<SVector<f64, D>> {
    let level = level.max(1);
    match D {
        2 => {
            let m = 128usize << (2 * (level - 1));
            (0..m)
                .map(|j| {
                    let a = 2.0 * std::f64::consts::PI * j as f64 / m as f64;
                    SVector::<f64, D>::from_fn(|i, _| if i == 0 { a.cos() } else { a.sin() })
                })
                .collect()
        }
        3 => {
            let (dirs, _) = icosphere(level + 2);
            dirs.iter()
                .map(|v| SVector::<f64, D>::from_fn(|i, _| v[i]))
                .collect()
        }
        _ => {
            // Seeded Gaussian directions: uniform on the sphere, reproducible.
            let mut rng = ChaCha8Rng::seed_from_u64(0x5EED_D1A5 + level as u64);
            let m = 256usize << (2 * (level - 1));
            (0..m)
                .map(|_| {
                    let v = SVector::<f64, D>::from_fn(|_, _| gaussian(&mut rng));
                    v.normalize()
                })
                .collect()
        }
    }
}

/// One standard normal draw via Box–Muller (keeps the dependency list short
/// and the stream reproducible).
fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen::<f64>();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// Unit icosahedron subdivided `subdiv` times: 10·4^s + 2 vertices and
/// 20·4^s outward-oriented (counterclockwise) triangles.
pub fn icosphere(subdiv: usize) -> (Vec<SVector<f64, 3>>, Vec<[usize; 3]>) {
    let t = (1.0 + 5.0f64.sqrt()) / 2.0;
    let raw: [[f64; 3]; 12] = [
        [-1.0, t, 0.0],
        [1.0, t, 0.0],
        [-1.0, -t, 0.0],
        [1.0, -t, 0.0],
        [0.0, -1.0, t],
        [0.0, 1.0, t],
        [0.0, -1.0, -t],
        [0.0, 1.0, -t],
        [t, 0.0, -1.0],
        [t, 0.0, 1.0],
        [-t, 0.0, -1.0],
        [-t, 0.0, 1.0],
    ];
    let mut verts: Vec<SVector<f64, 3>> = raw
        .iter()
        .map(|v| SVector::<f64, 3>::new(v[0], v[1], v[2]).normalize())
        .collect();
    let mut faces: Vec<[usize; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];

    for _ in 0..subdiv {
        let mut cache: HashMap<(usize, usize), usize> = HashMap::new();
        let mut midpoint = |a: usize, b: usize, verts: &mut Vec<SVector<f64, 3>>| -> usize {
            let key = (a.min(b), a.max(b));
            *cache.entry(key).or_insert_with(|| {
                let m = (verts[a] + verts[b]).normalize();
                verts.push(m);
                verts.len() - 1
            })
        };
        let mut next = Vec::with_capacity(faces.len() * 4);
        for [a, b, c] in faces {
            let ab = midpoint(a, b, &mut verts);
            let bc = midpoint(b, c, &mut verts);
            let ca = midpoint(c, a, &mut verts);
            next.push([a, ab, ca]);
            next.push([b, bc, ab]);
            next.push([c, ca, bc]);
            next.push([ab, bc, ca]);
        }
        faces = next;
    }
    (verts, faces)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use nalgebra::Vector3;

    #[test]
    fn tangent_basis_is_orthonormal_and_oriented() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let x = Vector3::new(gaussian(&mut rng), gaussian(&mut rng), gaussian(&mut rng))
                .normalize();
            let b = tangent_basis(&x);
            assert_eq!(b.len(), 2);
            assert_relative_eq!(b[0].norm(), 1.0, max_relative = 1e-14);
            assert_relative_eq!(b[1].norm(), 1.0, max_relative = 1e-14);
            assert!(b[0].dot(&b[1]).abs() < 1e-14);
            assert!(b[0].dot(&x).abs() < 1e-14);
            assert!(b[1].dot(&x).abs() < 1e-14);
            // τ₁ × τ₂ = x (outward orientation)
            assert_relative_eq!(b[0].cross(&b[1]).dot(&x), 1.0, max_relative = 1e-13);
        }
    }

    #[test]
    fn tangent_basis_s3_is_orthonormal() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..100 {
            let x = SVector::<f64, 4>::from_fn(|_, _| gaussian(&mut rng)).normalize();
            let b = tangent_basis(&x);
            assert_eq!(b.len(), 3);
            for i in 0..3 {
                assert!(b[i].dot(&x).abs() < 1e-13);
                for j in 0..3 {
                    let want = if i == j { 1.0 } else { 0.0 };
                    assert!((b[i].dot(&b[j]) - want).abs() < 1e-13);
                }
            }
        }
    }

    #[test]
    fn icosphere_counts_and_orientation() {
        for subdiv in 0..4 {
            let (v, f) = icosphere(subdiv);
            assert_eq!(v.len(), 10 * 4usize.pow(subdiv as u32) + 2);
            assert_eq!(f.len(), 20 * 4usize.pow(subdiv as u32));
            // all vertices on the unit sphere
            for p in &v {
                assert_relative_eq!(p.norm(), 1.0, max_relative = 1e-14);
            }
            // counterclockwise-outward faces give positive enclosed volume
            let vol: f64 = f
                .iter()
                .map(|&[a, b, c]| v[a].dot(&v[b].cross(&v[c])) / 6.0)
                .sum();
            assert!(vol > 0.0);
            // volume converges to 4π/3 from below
            if subdiv == 3 {
                assert_relative_eq!(vol, 4.0 * std::f64::consts::PI / 3.0, max_relative = 0.01);
            }
        }
    }

    #[test]
    fn require_unit_rejects_off_sphere_input() {
        let x = Vector3::new(1.1, 0.0, 0.0);
        assert!(require_unit(&x).is_err());
        assert!(require_unit(&Vector3::new(0.0, 1.0, 0.0)).is_ok());
    }
}
