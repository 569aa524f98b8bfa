use std::cmp::Ordering;
use std::collections::BinaryHeap;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use super::AnalyticsError;
use crate::geom::Vec3;
use crate::mesh::{IndexedMesh, Rgb, VertexAdjacency};
use crate::scalar::Real;

/// Distances closer than this count as ties in [`nearest_vertex`].
pub const NEAREST_TIE_TOLERANCE: f64 = 1e-12;

fn default_factor() -> f64 {
    1.0
}

fn default_author() -> String {
    String::from("anonymous")
}

/// One geodesic paint stroke. Every vertex within
/// `tool_radius_um * geodesic_factor` graph distance of the vertex nearest
/// `seed_point` receives `color`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PaintOperation {
    pub mesh_id: String,
    pub seed_point: [f64; 3],
    pub tool_radius_um: f64,
    #[serde(default = "default_factor")]
    pub geodesic_factor: f64,
    pub color: Rgb,
    #[serde(default = "Utc::now")]
    pub timestamp: DateTime<Utc>,
    #[serde(default = "default_author")]
    pub author: String,
}

impl PaintOperation {
    pub fn new(
        mesh_id: impl Into<String>,
        seed_point: [f64; 3],
        tool_radius_um: f64,
        color: Rgb,
    ) -> Self {
        Self {
            mesh_id: mesh_id.into(),
            seed_point,
            tool_radius_um,
            geodesic_factor: 1.0,
            color,
            timestamp: Utc::now(),
            author: default_author(),
        }
    }

    pub fn geodesic_radius(&self) -> f64 {
        self.tool_radius_um * self.geodesic_factor
    }

    pub fn validate(&self) -> Result<(), AnalyticsError> {
        if !(self.tool_radius_um > 0.0) || !self.tool_radius_um.is_finite() {
            return Err(AnalyticsError::InvalidOperation(format!(
                "tool radius must be > 0, got {}",
                self.tool_radius_um
            )));
        }
        if !(self.geodesic_factor > 0.0) || !self.geodesic_factor.is_finite() {
            return Err(AnalyticsError::InvalidOperation(format!(
                "geodesic factor must be > 0, got {}",
                self.geodesic_factor
            )));
        }
        if self.seed_point.iter().any(|c| !c.is_finite()) {
            return Err(AnalyticsError::InvalidOperation(
                "seed point is not finite".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PaintResult {
    pub seed: usize,
    /// Painted vertex indices, ascending.
    pub painted: Vec<u32>,
    pub colors: Vec<Rgb>,
}

/// Index of the vertex closest to `p` if it lies within `max_dist_um`.
/// Distances within [`NEAREST_TIE_TOLERANCE`] of each other resolve to the
/// smaller index.
pub fn nearest_vertex<T: Real>(m: &IndexedMesh<T>, p: [f64; 3], max_dist_um: f64) -> Option<usize> {
    let p = Vec3::<T>::from_f64(p);
    let mut best: Option<(usize, f64)> = None;
    for (i, q) in m.positions.iter().enumerate() {
        let d = q.distance(p).as_f64();
        match best {
            Some((_, bd)) if d >= bd - NEAREST_TIE_TOLERANCE => {}
            _ => best = Some((i, d)),
        }
    }
    best.filter(|&(_, d)| d <= max_dist_um).map(|(i, _)| i)
}

#[derive(Clone, Copy, PartialEq)]
struct Frontier<T> {
    dist: T,
    vertex: u32,
}

impl<T: Real> Eq for Frontier<T> {}

impl<T: Real> Ord for Frontier<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        // Min-heap on distance, then vertex index.
        other
            .dist
            .partial_cmp(&self.dist)
            .unwrap_or(Ordering::Equal)
            .then_with(|| other.vertex.cmp(&self.vertex))
    }
}

impl<T: Real> PartialOrd for Frontier<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Edge-weighted shortest-path distances from `seed`, settled up to `limit`.
/// Returns `(vertex, distance)` for every vertex with distance `<= limit`,
/// in settling order.
pub fn geodesic_distances<T: Real>(
    adj: &VertexAdjacency<T>,
    seed: usize,
    limit: T,
) -> Vec<(u32, T)> {
    let mut dist = vec![T::infinity(); adj.vertex_count()];
    let mut settled = Vec::new();
    let mut heap = BinaryHeap::new();
    dist[seed] = T::zero();
    heap.push(Frontier {
        dist: T::zero(),
        vertex: seed as u32,
    });
    while let Some(Frontier { dist: d, vertex }) = heap.pop() {
        let v = vertex as usize;
        if d > dist[v] {
            continue;
        }
        if d > limit {
            break;
        }
        settled.push((vertex, d));
        for (w, len) in adj.edges(v) {
            let nd = d + len;
            if nd < dist[w] && nd <= limit {
                dist[w] = nd;
                heap.push(Frontier {
                    dist: nd,
                    vertex: w as u32,
                });
            }
        }
    }
    settled
}

/// Seed vertex and ascending painted set for `op`, without touching colours.
pub fn paint_region<T: Real>(
    m: &IndexedMesh<T>,
    adj: &VertexAdjacency<T>,
    op: &PaintOperation,
) -> Result<(usize, Vec<u32>), AnalyticsError> {
    op.validate()?;
    let seed = nearest_vertex(m, op.seed_point, op.tool_radius_um).ok_or(
        AnalyticsError::NoSeedVertex {
            point: op.seed_point,
            radius_um: op.tool_radius_um,
        },
    )?;
    let mut painted: Vec<u32> = geodesic_distances(adj, seed, T::of(op.geodesic_radius()))
        .into_iter()
        .map(|(v, _)| v)
        .collect();
    painted.sort_unstable();
    Ok((seed, painted))
}

/// Applies one paint stroke, returning the painted set and the new colours.
/// Vertices outside the set keep their colour.
pub fn geodesic_paint<T: Real>(
    m: &IndexedMesh<T>,
    adj: &VertexAdjacency<T>,
    op: &PaintOperation,
) -> Result<PaintResult, AnalyticsError> {
    let (seed, painted) = paint_region(m, adj, op)?;
    let mut colors = m.colors.clone();
    for &v in &painted {
        colors[v as usize] = op.color;
    }
    Ok(PaintResult {
        seed,
        painted,
        colors,
    })
}
