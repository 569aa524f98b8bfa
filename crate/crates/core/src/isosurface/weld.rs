use std::cmp::Ordering;
use std::collections::HashMap;

use super::RawTriangleSoup;
use crate::geom::Vec3;
use crate::mesh::IndexedMesh;
use crate::scalar::Real;

/// `1e-4 * min(spacing)`.
pub fn default_weld_epsilon<T: Real>(spacing: [T; 3]) -> T {
    spacing[0].min(spacing[1]).min(spacing[2]) * T::of(1e-4)
}

fn cmp_pos<T: Real>(a: &Vec3<T>, b: &Vec3<T>) -> Ordering {
    let c = |x: T, y: T| x.partial_cmp(&y).unwrap_or(Ordering::Equal);
    c(a.x, b.x).then(c(a.y, b.y)).then(c(a.z, b.z))
}

/// Merges soup vertices closer than `epsilon_um` and drops triangles that
/// collapse. Vertices are numbered in order of their quantized position
/// (grid cells of pitch `epsilon_um`), so the result depends only on the soup.
pub fn weld<T: Real>(soup: &RawTriangleSoup<T>, epsilon_um: T) -> IndexedMesh<T> {
    let eps = if epsilon_um > T::zero() {
        epsilon_um
    } else {
        T::zero()
    };
    let points: Vec<Vec3<T>> = soup.triangles.iter().flatten().copied().collect();
    let cell = |p: &Vec3<T>| -> [i64; 3] {
        if eps > T::zero() {
            let q = |x: T| (x / eps).floor().to_i64().unwrap_or(i64::MAX);
            [q(p.x), q(p.y), q(p.z)]
        } else {
            [0; 3]
        }
    };
    let keys: Vec<[i64; 3]> = points.iter().map(cell).collect();
    let mut order: Vec<u32> = (0..points.len() as u32).collect();
    order.sort_unstable_by(|&a, &b| {
        let (a, b) = (a as usize, b as usize);
        keys[a]
            .cmp(&keys[b])
            .then_with(|| cmp_pos(&points[a], &points[b]))
    });

    let mut remap = vec![0u32; points.len()];
    let mut positions: Vec<Vec3<T>> = Vec::new();
    let mut cells: HashMap<[i64; 3], Vec<u32>> = HashMap::new();
    let mut prev: Option<usize> = None;
    for &i in &order {
        let i = i as usize;
        let p = points[i];
        if let Some(j) = prev {
            if points[j] == p {
                remap[i] = remap[j];
                continue;
            }
        }
        prev = Some(i);
        let mut found = None;
        if eps > T::zero() {
            let k = keys[i];
            'search: for dz in -1..=1 {
                for dy in -1..=1 {
                    for dx in -1..=1 {
                        let nk = [k[0] + dx, k[1] + dy, k[2] + dz];
                        if let Some(reps) = cells.get(&nk) {
                            for &r in reps {
                                if positions[r as usize].distance(p) <= eps {
                                    found = Some(r);
                                    break 'search;
                                }
                            }
                        }
                    }
                }
            }
        }
        remap[i] = match found {
            Some(r) => r,
            None => {
                let r = positions.len() as u32;
                positions.push(p);
                if eps > T::zero() {
                    cells.entry(keys[i]).or_default().push(r);
                }
                r
            }
        };
    }

    let faces = (0..soup.triangles.len())
        .map(|t| [remap[3 * t], remap[3 * t + 1], remap[3 * t + 2]])
        .filter(|f| f[0] != f[1] && f[1] != f[2] && f[0] != f[2])
        .collect();
    IndexedMesh::new(positions, faces).expect("welded faces index welded vertices")
}
