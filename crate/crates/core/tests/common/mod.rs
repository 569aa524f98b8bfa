#![allow(dead_code)]

use std::collections::VecDeque;

use histoscope_core::{IndexedMesh, Vec3, Volume};
use rand::Rng;

/// Jittered `nx` x `ny` grid with a random diagonal per cell; each triangle is
/// dropped with probability `drop`, which splits the grid into pieces.
pub fn random_grid_mesh(rng: &mut impl Rng, nx: usize, ny: usize, drop: f64) -> IndexedMesh<f64> {
    let mut positions = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            positions.push(Vec3::new(
                i as f64 + rng.random_range(-0.3..0.3),
                j as f64 + rng.random_range(-0.3..0.3),
                rng.random_range(-0.5..0.5),
            ));
        }
    }
    let v = |i: usize, j: usize| (i + nx * j) as u32;
    let mut faces = Vec::new();
    for j in 0..ny - 1 {
        for i in 0..nx - 1 {
            let tris = if rng.random_bool(0.5) {
                [
                    [v(i, j), v(i + 1, j), v(i + 1, j + 1)],
                    [v(i, j), v(i + 1, j + 1), v(i, j + 1)],
                ]
            } else {
                [
                    [v(i, j), v(i + 1, j), v(i, j + 1)],
                    [v(i + 1, j), v(i + 1, j + 1), v(i, j + 1)],
                ]
            };
            for t in tris {
                if !rng.random_bool(drop) {
                    faces.push(t);
                }
            }
        }
    }
    IndexedMesh::new(positions, faces).unwrap()
}

pub fn edge_length(a: Vec3<f64>, b: Vec3<f64>) -> f64 {
    let (dx, dy, dz) = (a.x - b.x, a.y - b.y, a.z - b.z);
    (dx * dx + dy * dy + dz * dz).sqrt()
}

/// Single-source shortest paths by label correction over the face edges:
/// relax until no distance improves.
pub fn shortest_paths(m: &IndexedMesh<f64>, seed: usize) -> Vec<f64> {
    let n = m.vertex_count();
    let mut out: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for f in &m.faces {
        for k in 0..3 {
            let (a, b) = (f[k] as usize, f[(k + 1) % 3] as usize);
            let l = edge_length(m.positions[a], m.positions[b]);
            out[a].push((b, l));
            out[b].push((a, l));
        }
    }
    let mut dist = vec![f64::INFINITY; n];
    let mut queued = vec![false; n];
    let mut q = VecDeque::from([seed]);
    dist[seed] = 0.0;
    queued[seed] = true;
    while let Some(u) = q.pop_front() {
        queued[u] = false;
        for &(w, l) in &out[u] {
            if dist[u] + l < dist[w] {
                dist[w] = dist[u] + l;
                if !queued[w] {
                    queued[w] = true;
                    q.push_back(w);
                }
            }
        }
    }
    dist
}

/// Closest vertex by brute force; ties go to the lower index.
pub fn closest_vertex(m: &IndexedMesh<f64>, p: [f64; 3]) -> (usize, f64) {
    let mut best = (usize::MAX, f64::INFINITY);
    for (i, q) in m.positions.iter().enumerate() {
        let d = edge_length(*q, Vec3::new(p[0], p[1], p[2]));
        if d < best.1 {
            best = (i, d);
        }
    }
    best
}

/// Disjoint-set roots of the vertex graph.
pub fn union_find_roots(n: usize, faces: &[[u32; 3]]) -> Vec<usize> {
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    let mut parent: Vec<usize> = (0..n).collect();
    for f in faces {
        for k in 0..3 {
            let a = find(&mut parent, f[k] as usize);
            let b = find(&mut parent, f[(k + 1) % 3] as usize);
            if a != b {
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    (0..n).map(|i| find(&mut parent, i)).collect()
}

/// Distance ramp of a ball crossing 0.5 at `radius`. The ramp spans four
/// voxels, so no corner of a cell cut by the surface is clamped.
pub fn ball_volume(dims: [usize; 3], centre: [f64; 3], radius: f64) -> Volume<f32> {
    Volume::from_fn(dims, [1.0; 3], |x, y, z| {
        let d = ((x as f64 - centre[0]).powi(2)
            + (y as f64 - centre[1]).powi(2)
            + (z as f64 - centre[2]).powi(2))
        .sqrt();
        (0.5 + (radius - d) / 4.0).clamp(0.0, 1.0) as f32
    })
    .unwrap()
}
