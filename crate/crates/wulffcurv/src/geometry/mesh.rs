//! Triangle meshes over surfaces (n = 2 only).
//!
//! The mesh is a subdivided icosahedron pushed through the surface chart:
//! vertex directions come from [`super::sphere::icosphere`], positions and
//! frames from the surface. Meshes feed the finite-element assembly of the
//! stability module and the OBJ export; quadrature-grade integrals use
//! [`super::grid`] instead (the mesh integrates at O(h²)).

use super::{GeomFrame, ParametricSurface};
use crate::error::{Error, Result};
use nalgebra::Vector3;
use rayon::prelude::*;
use std::collections::HashMap;
use std::io::Write;

/// Closed oriented triangle mesh with per-vertex differential data.
#[derive(Debug, Clone)]
pub struct SurfaceMesh {
    /// Unit direction labels of the vertices.
    pub chart_dirs: Vec<Vector3<f64>>,
    /// Vertex positions on the surface.
    pub vertices: Vec<Vector3<f64>>,
    /// Counterclockwise-outward triangles (indices into `vertices`).
    pub faces: Vec<[usize; 3]>,
    /// Surface frame at every vertex.
    pub vertex_frames: Vec<GeomFrame<3>>,
    /// Triangle areas.
    pub face_areas: Vec<f64>,
    /// Lumped vertex areas (one third of each incident triangle).
    pub vertex_areas: Vec<f64>,
    pub subdiv: usize,
}

/// Build a mesh at the given subdivision level (10·4^s + 2 vertices).
pub fn build_mesh(surface: &ParametricSurface<3>, subdiv: usize) -> Result<SurfaceMesh> {
    let (dirs, faces) = super::sphere::icosphere(subdiv);
    let data: Vec<Result<(Vector3<f64>, GeomFrame<3>)>> = dirs
        .par_iter()
        .map(|x| {
            let p = surface.position(x)?;
            let f = surface.frame_at(x)?;
            Ok((p, f))
        })
        .collect();
    let mut vertices = Vec::with_capacity(dirs.len());
    let mut frames = Vec::with_capacity(dirs.len());
    for d in data {
        let (p, f) = d?;
        vertices.push(p);
        frames.push(f);
    }

    let mut face_areas = Vec::with_capacity(faces.len());
    let mut vertex_areas = vec![0.0; vertices.len()];
    for &[a, b, c] in &faces {
        let area = 0.5
            * (vertices[b] - vertices[a])
                .cross(&(vertices[c] - vertices[a]))
                .norm();
        if area < 1e-14 {
            return Err(Error::TopologyError {
                reason: format!("degenerate triangle ({a},{b},{c}) with area {area}"),
            });
        }
        face_areas.push(area);
        for v in [a, b, c] {
            vertex_areas[v] += area / 3.0;
        }
    }

    let mesh = SurfaceMesh {
        chart_dirs: dirs,
        vertices,
        faces,
        vertex_frames: frames,
        face_areas,
        vertex_areas,
        subdiv,
    };
    mesh.validate()?;
    Ok(mesh)
}

impl SurfaceMesh {
    /// Closed-orientable-manifold check: every directed edge appears
    /// exactly once (so each undirected edge is shared by exactly two
    /// oppositely-oriented faces) and the Euler characteristic is 2.
    pub fn validate(&self) -> Result<()> {
        let mut directed: HashMap<(usize, usize), usize> = HashMap::new();
        for &[a, b, c] in &self.faces {
            for (u, v) in [(a, b), (b, c), (c, a)] {
                if u == v {
                    return Err(Error::TopologyError {
                        reason: format!("degenerate edge ({u},{v})"),
                    });
                }
                *directed.entry((u, v)).or_insert(0) += 1;
            }
        }
        for (&(u, v), &count) in &directed {
            if count != 1 {
                return Err(Error::TopologyError {
                    reason: format!("directed edge ({u},{v}) appears {count} times"),
                });
            }
            if !directed.contains_key(&(v, u)) {
                return Err(Error::TopologyError {
                    reason: format!("edge ({u},{v}) has no opposite face"),
                });
            }
        }
        let e = directed.len() / 2;
        let euler = self.vertices.len() as i64 - e as i64 + self.faces.len() as i64;
        if euler != 2 {
            return Err(Error::TopologyError {
                reason: format!("Euler characteristic {euler}, expected 2"),
            });
        }
        Ok(())
    }

    pub fn total_area(&self) -> f64 {
        super::grid::pairwise_sum(&self.face_areas)
    }

    /// Write Wavefront OBJ (positions and faces, 1-indexed).
    pub fn write_obj(&self, out: &mut dyn Write) -> Result<()> {
        writeln!(out, "# closed triangle mesh: {} vertices, {} faces", self.vertices.len(), self.faces.len())?;
        for v in &self.vertices {
            writeln!(out, "v {:.12e} {:.12e} {:.12e}", v[0], v[1], v[2])?;
        }
        for f in &self.faces {
            writeln!(out, "f {} {} {}", f[0] + 1, f[1] + 1, f[2] + 1)?;
        }
        Ok(())
    }

    /// Write a sidecar attribute file: one line per vertex per column.
    /// Used to attach eigenmode scalars to an exported OBJ.
    pub fn write_vertex_scalars(&self, out: &mut dyn Write, columns: &[(&str, &[f64])]) -> Result<()> {
        for (name, vals) in columns {
            if vals.len() != self.vertices.len() {
                return Err(Error::SizeMismatch {
                    context: "vertex scalar column",
                    expected: self.vertices.len(),
                    got: vals.len(),
                });
            }
            writeln!(out, "# {name}")?;
        }
        for i in 0..self.vertices.len() {
            let row: Vec<String> = columns.iter().map(|(_, v)| format!("{:.12e}", v[i])).collect();
            writeln!(out, "{}", row.join(" "))?;
        }
        Ok(())
    }
}
