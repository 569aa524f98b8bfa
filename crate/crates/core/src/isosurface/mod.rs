//! Isosurface extraction: table-driven marching cubes into a triangle soup,
//! welding into an indexed mesh, and vertex normals.

mod tables;
mod weld;

pub use weld::{default_weld_epsilon, weld};

use rayon::prelude::*;
use thiserror::Error;

use crate::geom::Vec3;
use crate::mesh::IndexedMesh;
use crate::scalar::Real;
use crate::volume::Volume;
use tables::{CORNERS, EDGES, TRI_TABLE};

#[derive(Debug, Error, PartialEq)]
pub enum IsoError {
    #[error("DegenerateVolume: marching cubes needs at least 2 voxels per axis, got {0:?}")]
    DegenerateVolume([usize; 3]),
    #[error("InvalidIso: iso-value {0} must lie in (0, 1)")]
    InvalidIso(f64),
}

/// Unwelded triangles in µm.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RawTriangleSoup<T> {
    pub triangles: Vec<[Vec3<T>; 3]>,
}

impl<T: Real> RawTriangleSoup<T> {
    pub fn len(&self) -> usize {
        self.triangles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triangles.is_empty()
    }
}

/// Extracts the `iso` level set of `v`. Triangles wind so that their normals
/// point toward lower scalar values; coordinates are voxel index times spacing.
///
/// Ambiguous cases follow the fixed table without a decider.
pub fn marching_cubes<T: Real>(v: &Volume<T>, iso: T) -> Result<RawTriangleSoup<T>, IsoError> {
    let dims = v.dims();
    if dims.iter().any(|&d| d < 2) {
        return Err(IsoError::DegenerateVolume(dims));
    }
    if !(iso > T::zero() && iso < T::one()) {
        return Err(IsoError::InvalidIso(iso.as_f64()));
    }
    let [nx, ny, nz] = dims;
    let spacing = v.spacing();
    let data = v.data();

    // Slabs of cells are independent; concatenating them in z order keeps the
    // output identical to a sequential sweep.
    let slabs: Vec<Vec<[Vec3<T>; 3]>> = (0..nz - 1)
        .into_par_iter()
        .map(|z| {
            let mut out = Vec::new();
            let mut vals = [T::zero(); 8];
            let mut crossing = [Vec3::zero(); 12];
            for y in 0..ny - 1 {
                for x in 0..nx - 1 {
                    let mut case = 0usize;
                    for (i, c) in CORNERS.iter().enumerate() {
                        let val = data[(x + c[0]) + nx * ((y + c[1]) + ny * (z + c[2]))];
                        vals[i] = val;
                        if val < iso {
                            case |= 1 << i;
                        }
                    }
                    let row = &TRI_TABLE[case];
                    if row[0] < 0 {
                        continue;
                    }
                    let mut needed = 0u16;
                    for &e in row.iter().take_while(|&&e| e >= 0) {
                        needed |= 1 << e;
                    }
                    for (e, [a, b]) in EDGES.iter().enumerate() {
                        if needed & (1 << e) != 0 {
                            crossing[e] = edge_crossing([x, y, z], *a, *b, &vals, iso, spacing);
                        }
                    }
                    for tri in row.chunks_exact(3).take_while(|t| t[0] >= 0) {
                        out.push([
                            crossing[tri[0] as usize],
                            crossing[tri[1] as usize],
                            crossing[tri[2] as usize],
                        ]);
                    }
                }
            }
            out
        })
        .collect();

    Ok(RawTriangleSoup {
        triangles: slabs.into_iter().flatten().collect(),
    })
}

/// Interpolated crossing on the cube edge between corners `a` and `b`,
/// always evaluated from the lower-indexed grid point so the cells sharing
/// an edge produce bit-identical positions.
#[inline]
fn edge_crossing<T: Real>(
    cell: [usize; 3],
    a: usize,
    b: usize,
    vals: &[T; 8],
    iso: T,
    spacing: [T; 3],
) -> Vec3<T> {
    let (lo, hi) = if CORNERS[a] < CORNERS[b] {
        (a, b)
    } else {
        (b, a)
    };
    let clo = CORNERS[lo];
    let axis = (0..3)
        .find(|&k| CORNERS[hi][k] != clo[k])
        .expect("edge spans one axis");
    let (v0, v1) = (vals[lo], vals[hi]);
    let denom = v1 - v0;
    let t = if denom == T::zero() {
        T::of(0.5)
    } else {
        ((iso - v0) / denom).max(T::zero()).min(T::one())
    };
    let mut p = [T::zero(); 3];
    for k in 0..3 {
        let base = T::of_usize(cell[k] + clo[k]);
        p[k] = if k == axis {
            (base + t) * spacing[k]
        } else {
            base * spacing[k]
        };
    }
    Vec3::new(p[0], p[1], p[2])
}

/// Area-weighted vertex normals; vertices whose incident faces have zero
/// total area get `(0, 0, 1)`.
pub fn compute_normals<T: Real>(m: &IndexedMesh<T>) -> Vec<Vec3<T>> {
    let mut acc = vec![Vec3::zero(); m.vertex_count()];
    for (f, face) in m.faces.iter().enumerate() {
        let n = m.face_cross(f);
        for &v in face {
            acc[v as usize] += n;
        }
    }
    let up = Vec3::new(T::zero(), T::zero(), T::one());
    acc.into_iter()
        .map(|n| n.normalized().unwrap_or(up))
        .collect()
}

/// `m` with its normals filled in.
pub fn with_normals<T: Real>(mut m: IndexedMesh<T>) -> IndexedMesh<T> {
    m.normals = Some(compute_normals(&m));
    m
}

/// Marching cubes, welding at the default epsilon, and normals.
pub fn extract_mesh<T: Real>(v: &Volume<T>, iso: T) -> Result<IndexedMesh<T>, IsoError> {
    let soup = marching_cubes(v, iso)?;
    Ok(with_normals(weld(&soup, default_weld_epsilon(v.spacing()))))
}
