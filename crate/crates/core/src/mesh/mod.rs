//! Indexed triangle meshes with per-vertex colour, their vertex graph and
//! connected components, and PLY storage.

mod adjacency;
mod color;
mod components;
pub mod ply;

pub use adjacency::{build_adjacency, VertexAdjacency};
pub use color::{
    color_components, golden_angle_hue, golden_angle_palette, hsv_to_rgb, GOLDEN_ANGLE_DEG,
};
pub use components::{connected_components, ComponentLabeling};
pub use ply::{load_mesh, read_ply, save_mesh, to_ply_bytes, write_ply, PlyError, PlyFormat};

use thiserror::Error;

use crate::geom::Vec3;
use crate::scalar::Real;

pub type Rgb = [u8; 3];

/// Colour given to vertices of meshes that carry none.
pub const DEFAULT_GREY: Rgb = [200, 200, 200];

#[derive(Debug, Error, PartialEq)]
pub enum MeshError {
    #[error("InvalidMesh: {0}")]
    Invalid(String),
    #[error("PaletteTooShort: {components} components but {palette} colours")]
    PaletteTooShort { components: usize, palette: usize },
    #[error("LabelingMismatch: labeling covers {labels} vertices, mesh has {vertices}")]
    LabelingMismatch { labels: usize, vertices: usize },
}

#[derive(Clone, Debug, PartialEq)]
pub struct IndexedMesh<T> {
    pub positions: Vec<Vec3<T>>,
    pub faces: Vec<[u32; 3]>,
    pub colors: Vec<Rgb>,
    pub normals: Option<Vec<Vec3<T>>>,
}

impl<T: Real> Default for IndexedMesh<T> {
    fn default() -> Self {
        Self {
            positions: Vec::new(),
            faces: Vec::new(),
            colors: Vec::new(),
            normals: None,
        }
    }
}

impl<T: Real> IndexedMesh<T> {
    /// Mesh with every vertex in [`DEFAULT_GREY`].
    pub fn new(positions: Vec<Vec3<T>>, faces: Vec<[u32; 3]>) -> Result<Self, MeshError> {
        let colors = vec![DEFAULT_GREY; positions.len()];
        let m = Self {
            positions,
            faces,
            colors,
            normals: None,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn vertex_count(&self) -> usize {
        self.positions.len()
    }

    pub fn face_count(&self) -> usize {
        self.faces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn validate(&self) -> Result<(), MeshError> {
        let n = self.positions.len();
        if n > u32::MAX as usize {
            return Err(MeshError::Invalid(format!(
                "{n} vertices exceed u32 indexing"
            )));
        }
        if self.colors.len() != n {
            return Err(MeshError::Invalid(format!(
                "{} colours for {} vertices",
                self.colors.len(),
                n
            )));
        }
        if let Some(normals) = &self.normals {
            if normals.len() != n {
                return Err(MeshError::Invalid(format!(
                    "{} normals for {} vertices",
                    normals.len(),
                    n
                )));
            }
        }
        for (i, f) in self.faces.iter().enumerate() {
            if f.iter().any(|&v| v as usize >= n) {
                return Err(MeshError::Invalid(format!(
                    "face {i} {f:?} indexes past {n} vertices"
                )));
            }
            if f[0] == f[1] || f[1] == f[2] || f[0] == f[2] {
                return Err(MeshError::Invalid(format!(
                    "face {i} {f:?} repeats a vertex"
                )));
            }
        }
        if let Some(i) = self.positions.iter().position(|p| !p.is_finite()) {
            return Err(MeshError::Invalid(format!("vertex {i} is not finite")));
        }
        Ok(())
    }

    #[inline]
    pub fn triangle(&self, f: usize) -> [Vec3<T>; 3] {
        let [a, b, c] = self.faces[f];
        [
            self.positions[a as usize],
            self.positions[b as usize],
            self.positions[c as usize],
        ]
    }

    /// Unnormalized face normal (twice the area times the unit normal).
    #[inline]
    pub fn face_cross(&self, f: usize) -> Vec3<T> {
        let [a, b, c] = self.triangle(f);
        (b - a).cross(c - a)
    }

    pub fn surface_area(&self) -> T {
        let half = T::of(0.5);
        (0..self.faces.len())
            .map(|f| self.face_cross(f).norm() * half)
            .sum()
    }

    /// Undirected edge count (each shared edge counted once).
    pub fn edge_count(&self) -> usize {
        let mut edges: Vec<(u32, u32)> = self
            .faces
            .iter()
            .flat_map(|f| [(f[0], f[1]), (f[1], f[2]), (f[2], f[0])])
            .map(|(a, b)| (a.min(b), a.max(b)))
            .collect();
        edges.sort_unstable();
        edges.dedup();
        edges.len()
    }

    /// `V - E + F` counting only vertices referenced by a face.
    pub fn euler_characteristic(&self) -> i64 {
        let mut used = vec![false; self.positions.len()];
        for f in &self.faces {
            for &v in f {
                used[v as usize] = true;
            }
        }
        let v = used.iter().filter(|&&u| u).count() as i64;
        v - self.edge_count() as i64 + self.faces.len() as i64
    }

    /// Number of undirected edges whose incident-face count differs from two.
    pub fn non_manifold_edge_count(&self) -> usize {
        let mut edges: Vec<(u32, u32)> = self
            .faces
            .iter()
            .flat_map(|f| [(f[0], f[1]), (f[1], f[2]), (f[2], f[0])])
            .map(|(a, b)| (a.min(b), a.max(b)))
            .collect();
        edges.sort_unstable();
        let mut bad = 0;
        let mut i = 0;
        while i < edges.len() {
            let mut j = i;
            while j < edges.len() && edges[j] == edges[i] {
                j += 1;
            }
            if j - i != 2 {
                bad += 1;
            }
            i = j;
        }
        bad
    }

    /// True when every directed edge appears once and its reverse appears once,
    /// i.e. neighbouring faces traverse shared edges in opposite directions.
    pub fn is_consistently_oriented(&self) -> bool {
        let mut directed: Vec<(u32, u32)> = self
            .faces
            .iter()
            .flat_map(|f| [(f[0], f[1]), (f[1], f[2]), (f[2], f[0])])
            .collect();
        directed.sort_unstable();
        if directed.windows(2).any(|w| w[0] == w[1]) {
            return false;
        }
        directed
            .iter()
            .all(|&(a, b)| directed.binary_search(&(b, a)).is_ok())
    }

    /// Axis-aligned bounds, `None` for an empty mesh.
    pub fn bounds(&self) -> Option<(Vec3<T>, Vec3<T>)> {
        let first = *self.positions.first()?;
        Some(
            self.positions
                .iter()
                .fold((first, first), |(lo, hi), &p| (lo.min(p), hi.max(p))),
        )
    }

    /// Appends `other`, offsetting its face indices.
    pub fn append(&mut self, other: &IndexedMesh<T>) {
        let off = self.positions.len() as u32;
        self.positions.extend_from_slice(&other.positions);
        self.colors.extend_from_slice(&other.colors);
        self.faces.extend(
            other
                .faces
                .iter()
                .map(|f| [f[0] + off, f[1] + off, f[2] + off]),
        );
        self.normals = match (self.normals.take(), &other.normals) {
            (Some(mut a), Some(b)) => {
                a.extend_from_slice(b);
                Some(a)
            }
            _ => None,
        };
    }

    /// Applies `f` to every position; normals are transformed with `g` when present.
    pub fn map_positions(
        &self,
        f: impl Fn(Vec3<T>) -> Vec3<T>,
        g: impl Fn(Vec3<T>) -> Vec3<T>,
    ) -> Self {
        Self {
            positions: self.positions.iter().map(|&p| f(p)).collect(),
            faces: self.faces.clone(),
            colors: self.colors.clone(),
            normals: self
                .normals
                .as_ref()
                .map(|n| n.iter().map(|&v| g(v)).collect()),
        }
    }

    pub fn cast<U: Real>(&self) -> IndexedMesh<U> {
        let c = |p: Vec3<T>| Vec3::<U>::from_f64(p.to_f64());
        IndexedMesh {
            positions: self.positions.iter().map(|&p| c(p)).collect(),
            faces: self.faces.clone(),
            colors: self.colors.clone(),
            normals: self
                .normals
                .as_ref()
                .map(|n| n.iter().map(|&p| c(p)).collect()),
        }
    }
}
