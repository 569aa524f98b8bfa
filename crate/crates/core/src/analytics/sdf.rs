use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::bvh::{Bvh, Ray};
use super::AnalyticsError;
use crate::geom::Vec3;
use crate::mesh::{build_adjacency, IndexedMesh};
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SdfConfig {
    pub rays: usize,
    pub cone_half_angle_deg: f64,
}

impl Default for SdfConfig {
    fn default() -> Self {
        Self {
            rays: 30,
            cone_half_angle_deg: 30.0,
        }
    }
}

impl SdfConfig {
    pub fn validate(&self) -> Result<(), AnalyticsError> {
        if self.rays < 4 {
            return Err(AnalyticsError::InvalidOperation(format!(
                "at least 4 rays required, got {}",
                self.rays
            )));
        }
        if !(self.cone_half_angle_deg > 0.0 && self.cone_half_angle_deg < 90.0) {
            return Err(AnalyticsError::InvalidOperation(format!(
                "cone half-angle must lie in (0, 90), got {}",
                self.cone_half_angle_deg
            )));
        }
        Ok(())
    }
}

/// Hits whose unit face normal has a dot product with the origin normal
/// above this are treated as facing the same way and discarded.
const SAME_SIDE_MARGIN: f64 = 1e-6;

/// Per-vertex local diameter in µm.
#[derive(Clone, Debug, PartialEq)]
pub struct SdfField<T> {
    pub values: Vec<T>,
    pub config: SdfConfig,
}

/// Shape diameter per vertex: rays are cast into the interior (against the
/// vertex normal) inside a cone; each ray takes the distance to the first
/// triangle it meets from behind, rays landing on a triangle facing the same
/// way as the origin normal are dropped, and the vertex value is the median of
/// the rest (0 when nothing is left).
///
/// Ray directions are drawn in a frame built from the normal and the first
/// neighbour of each vertex with a generator seeded by the vertex index, so
/// values do not change under rigid motion of the mesh.
pub fn shape_diameter<T: Real>(
    m: &IndexedMesh<T>,
    config: SdfConfig,
) -> Result<SdfField<T>, AnalyticsError> {
    config.validate()?;
    let normals = m.normals.as_ref().ok_or(AnalyticsError::MissingNormals)?;
    let adj = build_adjacency(m);
    let bvh = Bvh::build(m);
    let face_normals: Vec<Vec3<T>> = (0..m.face_count())
        .map(|f| m.face_cross(f).normalized().unwrap_or(Vec3::zero()))
        .collect();
    // Faces incident to each vertex are skipped so rays do not hit their own fan.
    let mut incident: Vec<Vec<u32>> = vec![Vec::new(); m.vertex_count()];
    for (f, face) in m.faces.iter().enumerate() {
        for &v in face {
            incident[v as usize].push(f as u32);
        }
    }
    let cos_cone = config.cone_half_angle_deg.to_radians().cos();

    let values = (0..m.vertex_count())
        .into_par_iter()
        .map(|v| {
            let Some(n) = normals[v].normalized() else {
                return T::zero();
            };
            if incident[v].is_empty() {
                return T::zero();
            }
            let p = m.positions[v];
            let inward = -n;
            let u = tangent(
                n,
                adj.neighbors(v)
                    .iter()
                    .map(|&j| m.positions[j as usize] - p),
            );
            let w = inward.cross(u);
            let mut rng = ChaCha8Rng::seed_from_u64(v as u64);
            let mut hits: Vec<T> = Vec::with_capacity(config.rays);
            for _ in 0..config.rays {
                let cos_t = 1.0 - rng.random::<f64>() * (1.0 - cos_cone);
                let sin_t = (1.0 - cos_t * cos_t).max(0.0).sqrt();
                let phi = rng.random::<f64>() * std::f64::consts::TAU;
                let dir = u * T::of(sin_t * phi.cos())
                    + w * T::of(sin_t * phi.sin())
                    + inward * T::of(cos_t);
                let ray = Ray { origin: p, dir };
                let hit = bvh.nearest_hit(&ray, |f| {
                    face_normals[f].dot(dir) > T::zero() && !incident[v].contains(&(f as u32))
                });
                if let Some(h) = hit {
                    // Perpendicular walls are kept; the margin stops rounding
                    // from flipping their sign under rotation.
                    if face_normals[h.face].dot(n) <= T::of(SAME_SIDE_MARGIN) {
                        hits.push(h.t * dir.norm());
                    }
                }
            }
            median(&mut hits)
        })
        .collect();
    Ok(SdfField { values, config })
}

/// Unit vector perpendicular to `n`, taken from the first usable edge.
fn tangent<T: Real>(n: Vec3<T>, edges: impl Iterator<Item = Vec3<T>>) -> Vec3<T> {
    for e in edges {
        if let Some(t) = (e - n * e.dot(n)).normalized() {
            return t;
        }
    }
    let helper = if n.x.abs() < T::of(0.9) {
        Vec3::new(T::one(), T::zero(), T::zero())
    } else {
        Vec3::new(T::zero(), T::one(), T::zero())
    };
    n.cross(helper).normalized().unwrap_or(helper)
}

fn median<T: Real>(xs: &mut [T]) -> T {
    if xs.is_empty() {
        return T::zero();
    }
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    let mid = xs.len() / 2;
    if xs.len() % 2 == 1 {
        xs[mid]
    } else {
        (xs[mid - 1] + xs[mid]) * T::of(0.5)
    }
}
