//! Bounding volume hierarchy over mesh triangles for nearest-hit ray queries.

use crate::geom::Vec3;
use crate::mesh::IndexedMesh;
use crate::scalar::Real;

const LEAF_SIZE: usize = 4;

#[derive(Clone, Copy, Debug)]
pub struct Ray<T> {
    pub origin: Vec3<T>,
    pub dir: Vec3<T>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RayHit<T> {
    pub face: usize,
    pub t: T,
}

#[derive(Clone, Debug)]
struct Node<T> {
    lo: Vec3<T>,
    hi: Vec3<T>,
    /// Leaf: `start..start + count` into `order`; inner: children at `start`, `start + 1`.
    start: usize,
    count: usize,
}

#[derive(Clone, Debug)]
pub struct Bvh<T> {
    nodes: Vec<Node<T>>,
    order: Vec<u32>,
    tris: Vec<[Vec3<T>; 3]>,
}

impl<T: Real> Bvh<T> {
    pub fn build(m: &IndexedMesh<T>) -> Self {
        let tris: Vec<[Vec3<T>; 3]> = (0..m.face_count()).map(|f| m.triangle(f)).collect();
        let half = T::of(0.5);
        let centroids: Vec<Vec3<T>> = tris
            .iter()
            .map(|t| (t[0].min(t[1]).min(t[2]) + t[0].max(t[1]).max(t[2])) * half)
            .collect();
        let mut order: Vec<u32> = (0..tris.len() as u32).collect();
        let mut nodes = Vec::new();
        if !tris.is_empty() {
            nodes.push(Node {
                lo: Vec3::zero(),
                hi: Vec3::zero(),
                start: 0,
                count: tris.len(),
            });
            let mut stack = vec![0usize];
            while let Some(ni) = stack.pop() {
                let (start, count) = (nodes[ni].start, nodes[ni].count);
                let slice = &mut order[start..start + count];
                let (mut lo, mut hi) = (tris[slice[0] as usize][0], tris[slice[0] as usize][0]);
                let (mut clo, mut chi) =
                    (centroids[slice[0] as usize], centroids[slice[0] as usize]);
                for &f in slice.iter() {
                    for p in tris[f as usize] {
                        lo = lo.min(p);
                        hi = hi.max(p);
                    }
                    clo = clo.min(centroids[f as usize]);
                    chi = chi.max(centroids[f as usize]);
                }
                nodes[ni].lo = lo;
                nodes[ni].hi = hi;
                if count <= LEAF_SIZE {
                    continue;
                }
                let ext = chi - clo;
                let axis = if ext.x >= ext.y && ext.x >= ext.z {
                    0
                } else if ext.y >= ext.z {
                    1
                } else {
                    2
                };
                let mid = count / 2;
                slice.select_nth_unstable_by(mid, |&a, &b| {
                    centroids[a as usize][axis]
                        .partial_cmp(&centroids[b as usize][axis])
                        .unwrap_or(std::cmp::Ordering::Equal)
                        .then(a.cmp(&b))
                });
                let left = nodes.len();
                nodes.push(Node {
                    lo,
                    hi,
                    start,
                    count: mid,
                });
                nodes.push(Node {
                    lo,
                    hi,
                    start: start + mid,
                    count: count - mid,
                });
                nodes[ni].start = left;
                nodes[ni].count = 0;
                stack.push(left);
                stack.push(left + 1);
            }
        }
        Self { nodes, order, tris }
    }

    pub fn triangle(&self, face: usize) -> [Vec3<T>; 3] {
        self.tris[face]
    }

    /// Nearest hit with `t > 0` among faces for which `accept(face)` holds.
    pub fn nearest_hit(
        &self,
        ray: &Ray<T>,
        mut accept: impl FnMut(usize) -> bool,
    ) -> Option<RayHit<T>> {
        if self.nodes.is_empty() {
            return None;
        }
        let inv = Vec3::new(
            T::one() / ray.dir.x,
            T::one() / ray.dir.y,
            T::one() / ray.dir.z,
        );
        let mut best: Option<RayHit<T>> = None;
        let mut stack = vec![0usize];
        while let Some(ni) = stack.pop() {
            let node = &self.nodes[ni];
            let tmax = best.map_or(T::infinity(), |h| h.t);
            if !slab_test(node.lo, node.hi, ray.origin, inv, tmax) {
                continue;
            }
            if node.count > 0 {
                for &f in &self.order[node.start..node.start + node.count] {
                    let f = f as usize;
                    if let Some(t) = intersect(ray, &self.tris[f]) {
                        if t < best.map_or(T::infinity(), |h| h.t) && accept(f) {
                            best = Some(RayHit { face: f, t });
                        }
                    }
                }
            } else {
                stack.push(node.start);
                stack.push(node.start + 1);
            }
        }
        best
    }
}

#[inline]
fn slab_test<T: Real>(lo: Vec3<T>, hi: Vec3<T>, o: Vec3<T>, inv: Vec3<T>, tmax: T) -> bool {
    let mut t0 = T::zero();
    let mut t1 = tmax;
    for k in 0..3 {
        if inv[k].is_infinite() {
            // Ray parallel to this slab: inside it or never.
            if o[k] < lo[k] || o[k] > hi[k] {
                return false;
            }
            continue;
        }
        let (a, b) = ((lo[k] - o[k]) * inv[k], (hi[k] - o[k]) * inv[k]);
        let (a, b) = if a <= b { (a, b) } else { (b, a) };
        t0 = t0.max(a);
        t1 = t1.min(b);
        if t0 > t1 {
            return false;
        }
    }
    true
}

/// Möller–Trumbore; returns the ray parameter of a proper hit with `t > 0`.
#[inline]
fn intersect<T: Real>(ray: &Ray<T>, tri: &[Vec3<T>; 3]) -> Option<T> {
    let e1 = tri[1] - tri[0];
    let e2 = tri[2] - tri[0];
    let p = ray.dir.cross(e2);
    let det = e1.dot(p);
    let scale = e1.norm() * e2.norm() * ray.dir.norm();
    if det.abs() <= T::epsilon() * scale {
        return None;
    }
    let inv = T::one() / det;
    let s = ray.origin - tri[0];
    let u = s.dot(p) * inv;
    if u < T::zero() || u > T::one() {
        return None;
    }
    let q = s.cross(e1);
    let v = ray.dir.dot(q) * inv;
    if v < T::zero() || u + v > T::one() {
        return None;
    }
    let t = e2.dot(q) * inv;
    (t > T::zero()).then_some(t)
}
