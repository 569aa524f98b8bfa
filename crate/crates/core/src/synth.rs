//! Synthetic test data: scalar volumes of spheres, tubes and branching trees,
//! plus small analytic meshes in [`shapes`].
//!
//! Each primitive contributes a linear ramp `0.5 + (r - d) / (2w)` clamped to
//! `[0, 1]`, where `d` is the distance to its core and `w` twice the largest
//! voxel spacing, so the 0.5 isosurface sits on the primitive surface and no
//! corner of a cell cut by it is clamped. Primitives
//! combine by maximum.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Real;
use crate::volume::{Volume, VolumeError};

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("SpecInfeasible: {0}")]
    SpecInfeasible(String),
    #[error(transparent)]
    Volume(#[from] VolumeError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SyntheticKind {
    Spheres,
    Tubes,
    BranchingTree,
}

impl FromStr for SyntheticKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "spheres" => Ok(Self::Spheres),
            "tubes" => Ok(Self::Tubes),
            "branching_tree" | "branching-tree" => Ok(Self::BranchingTree),
            other => Err(format!(
                "unknown synthetic kind {other:?} (spheres, tubes, branching_tree)"
            )),
        }
    }
}

impl fmt::Display for SyntheticKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Spheres => "spheres",
            Self::Tubes => "tubes",
            Self::BranchingTree => "branching_tree",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub kind: SyntheticKind,
    /// Spheres or tubes to place; segments for a branching tree.
    pub count: usize,
    /// Inclusive radius range in µm.
    pub radii_um: [f64; 2],
    pub dims: [usize; 3],
    pub spacing: [f64; 3],
    /// Uniform noise amplitude added per voxel before clamping.
    pub noise_amplitude: f64,
    /// Surface-to-surface distance between neighbouring tubes; minimum
    /// clearance between spheres.
    pub gap_um: f64,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        Self {
            kind: SyntheticKind::Spheres,
            count: 3,
            radii_um: [4.0, 8.0],
            dims: [64, 64, 64],
            spacing: [1.0, 1.0, 1.0],
            noise_amplitude: 0.0,
            gap_um: 2.0,
            seed: 0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Primitive {
    Sphere {
        centre: [f64; 3],
        radius: f64,
    },
    /// Segment `a`-`b` swept by a ball, so both ends are closed.
    Capsule {
        a: [f64; 3],
        b: [f64; 3],
        radius: f64,
    },
}

fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn norm(a: [f64; 3]) -> f64 {
    dot(a, a).sqrt()
}

fn lerp(a: [f64; 3], b: [f64; 3], t: f64) -> [f64; 3] {
    [
        a[0] + (b[0] - a[0]) * t,
        a[1] + (b[1] - a[1]) * t,
        a[2] + (b[2] - a[2]) * t,
    ]
}

impl Primitive {
    pub fn radius(&self) -> f64 {
        match *self {
            Primitive::Sphere { radius, .. } | Primitive::Capsule { radius, .. } => radius,
        }
    }

    /// Distance from `p` to the primitive's core (centre point or segment).
    pub fn core_distance(&self, p: [f64; 3]) -> f64 {
        match *self {
            Primitive::Sphere { centre, .. } => norm(sub(p, centre)),
            Primitive::Capsule { a, b, .. } => {
                let ab = sub(b, a);
                let len2 = dot(ab, ab);
                let t = if len2 > 0.0 {
                    (dot(sub(p, a), ab) / len2).clamp(0.0, 1.0)
                } else {
                    0.0
                };
                norm(sub(p, lerp(a, b, t)))
            }
        }
    }

    /// Signed distance to the surface, negative inside.
    pub fn signed_distance(&self, p: [f64; 3]) -> f64 {
        self.core_distance(p) - self.radius()
    }

    fn bounds(&self) -> ([f64; 3], [f64; 3]) {
        let r = self.radius();
        let (lo, hi) = match *self {
            Primitive::Sphere { centre, .. } => (centre, centre),
            Primitive::Capsule { a, b, .. } => (
                [a[0].min(b[0]), a[1].min(b[1]), a[2].min(b[2])],
                [a[0].max(b[0]), a[1].max(b[1]), a[2].max(b[2])],
            ),
        };
        (
            [lo[0] - r, lo[1] - r, lo[2] - r],
            [hi[0] + r, hi[1] + r, hi[2] + r],
        )
    }
}

struct Frame {
    extent: [f64; 3],
    margin: f64,
}

impl SyntheticSpec {
    fn validate(&self) -> Result<Frame, SynthError> {
        let bad = |m: String| Err(SynthError::SpecInfeasible(m));
        if self.dims.iter().any(|&d| d < 2) {
            return bad(format!(
                "dims must be >= 2 on every axis, got {:?}",
                self.dims
            ));
        }
        if self.spacing.iter().any(|&s| !(s > 0.0) || !s.is_finite()) {
            return bad(format!("spacing must be positive, got {:?}", self.spacing));
        }
        let [rmin, rmax] = self.radii_um;
        if !(rmin > 0.0) || !(rmax >= rmin) || !rmax.is_finite() {
            return bad(format!(
                "radius range must satisfy 0 < min <= max, got {:?}",
                self.radii_um
            ));
        }
        if self.count == 0 {
            return bad("count must be >= 1".into());
        }
        if !(self.noise_amplitude >= 0.0) || !self.noise_amplitude.is_finite() {
            return bad(format!(
                "noise amplitude must be >= 0, got {}",
                self.noise_amplitude
            ));
        }
        let voxel = self.voxel();
        if self.kind != SyntheticKind::BranchingTree && !(self.gap_um >= 2.0 * voxel) {
            return bad(format!(
                "gap {} um is below two voxels ({} um); objects would fuse",
                self.gap_um,
                2.0 * voxel
            ));
        }
        let extent = [
            (self.dims[0] - 1) as f64 * self.spacing[0],
            (self.dims[1] - 1) as f64 * self.spacing[1],
            (self.dims[2] - 1) as f64 * self.spacing[2],
        ];
        // The ramp plus one voxel keeps every surface off the border.
        let margin = self.ramp_width() + voxel;
        let need = 2.0 * (rmax + margin);
        if extent.iter().any(|&e| e < need) {
            return bad(format!(
                "radius {rmax} um does not fit inside the {extent:?} um volume"
            ));
        }
        Ok(Frame { extent, margin })
    }

    fn voxel(&self) -> f64 {
        self.spacing.iter().cloned().fold(0.0, f64::max)
    }

    fn ramp_width(&self) -> f64 {
        2.0 * self.voxel()
    }
}

/// Places the primitives of `spec`; deterministic in `spec.seed`.
pub fn plan(spec: &SyntheticSpec) -> Result<Vec<Primitive>, SynthError> {
    let frame = spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    match spec.kind {
        SyntheticKind::Spheres => plan_spheres(spec, &frame, &mut rng),
        SyntheticKind::Tubes => plan_tubes(spec, &frame, &mut rng),
        SyntheticKind::BranchingTree => plan_tree(spec, &frame, &mut rng),
    }
}

fn radius(spec: &SyntheticSpec, rng: &mut ChaCha8Rng) -> f64 {
    let [lo, hi] = spec.radii_um;
    if hi > lo {
        rng.random_range(lo..=hi)
    } else {
        lo
    }
}

fn plan_spheres(
    spec: &SyntheticSpec,
    f: &Frame,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<Primitive>, SynthError> {
    let mut out: Vec<Primitive> = Vec::with_capacity(spec.count);
    let attempts = 2000 * spec.count;
    for _ in 0..attempts {
        if out.len() == spec.count {
            break;
        }
        let r = radius(spec, rng);
        let lim = r + f.margin;
        let c: [f64; 3] = std::array::from_fn(|k| rng.random_range(lim..=f.extent[k] - lim));
        let clear = out.iter().all(|p| match *p {
            Primitive::Sphere { centre, radius } => {
                norm(sub(c, centre)) >= r + radius + spec.gap_um
            }
            Primitive::Capsule { .. } => unreachable!(),
        });
        if clear {
            out.push(Primitive::Sphere {
                centre: c,
                radius: r,
            });
        }
    }
    if out.len() < spec.count {
        return Err(SynthError::SpecInfeasible(format!(
            "placed only {} of {} disjoint spheres in {attempts} attempts",
            out.len(),
            spec.count
        )));
    }
    Ok(out)
}

/// Parallel capsules along x, stacked in y with surfaces `gap_um` apart.
fn plan_tubes(
    spec: &SyntheticSpec,
    f: &Frame,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<Primitive>, SynthError> {
    let radii: Vec<f64> = (0..spec.count).map(|_| radius(spec, rng)).collect();
    let span: f64 =
        radii.iter().map(|r| 2.0 * r).sum::<f64>() + spec.gap_um * (spec.count - 1) as f64;
    if span + 2.0 * f.margin > f.extent[1] {
        return Err(SynthError::SpecInfeasible(format!(
            "{} tubes need {span} um in y, volume offers {} um",
            spec.count,
            f.extent[1] - 2.0 * f.margin
        )));
    }
    let z = f.extent[2] / 2.0;
    let mut y = (f.extent[1] - span) / 2.0;
    let mut out = Vec::with_capacity(spec.count);
    for r in radii {
        let cy = y + r;
        let x0 = f.margin + r;
        let x1 = f.extent[0] - f.margin - r;
        out.push(Primitive::Capsule {
            a: [x0, cy, z],
            b: [x1.max(x0), cy, z],
            radius: r,
        });
        y = cy + r + spec.gap_um;
    }
    Ok(out)
}

/// A trunk along x with `count - 1` branches, each starting on the axis of an
/// earlier segment, so the tree is a single component.
fn plan_tree(
    spec: &SyntheticSpec,
    f: &Frame,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<Primitive>, SynthError> {
    let [rmin, rmax] = spec.radii_um;
    let lim = |k: usize, r: f64| (r + f.margin, f.extent[k] - r - f.margin);
    let trunk_r = rmax;
    let (x0, x1) = lim(0, trunk_r);
    let mut out = vec![Primitive::Capsule {
        a: [x0, f.extent[1] / 2.0, f.extent[2] / 2.0],
        b: [x0 + 0.6 * (x1 - x0), f.extent[1] / 2.0, f.extent[2] / 2.0],
        radius: trunk_r,
    }];
    let attempts = 500 * spec.count;
    for _ in 0..attempts {
        if out.len() == spec.count {
            break;
        }
        let parent = out[rng.random_range(0..out.len())];
        let Primitive::Capsule { a, b, radius: pr } = parent else {
            unreachable!()
        };
        let start = lerp(a, b, rng.random_range(0.3..=1.0));
        let r = (pr * rng.random_range(0.6..=0.9)).max(rmin);
        let len = norm(sub(b, a)) * rng.random_range(0.4..=0.8) + 2.0 * r;
        let theta = rng.random_range(0.0..std::f64::consts::TAU);
        let phi = rng.random_range(-1.0f64..=1.0).acos();
        let dir = [phi.sin() * theta.cos(), phi.sin() * theta.sin(), phi.cos()];
        let end = [
            start[0] + dir[0] * len,
            start[1] + dir[1] * len,
            start[2] + dir[2] * len,
        ];
        let inside = (0..3).all(|k| {
            let (lo, hi) = lim(k, r);
            end[k] >= lo && end[k] <= hi
        });
        if inside {
            out.push(Primitive::Capsule {
                a: start,
                b: end,
                radius: r,
            });
        }
    }
    if out.len() < spec.count {
        return Err(SynthError::SpecInfeasible(format!(
            "grew only {} of {} tree segments inside the volume",
            out.len(),
            spec.count
        )));
    }
    Ok(out)
}

/// Samples the ramp field of `prims` on the grid of `spec`, then adds noise.
pub fn rasterize<T: Real>(
    spec: &SyntheticSpec,
    prims: &[Primitive],
) -> Result<Volume<T>, SynthError> {
    let [nx, ny, nz] = spec.dims;
    let s = spec.spacing;
    let w = spec.ramp_width();
    let plane = nx * ny;
    let mut field = vec![0.0f64; plane * nz];
    field
        .par_chunks_mut(plane)
        .enumerate()
        .for_each(|(z, out)| {
            let pz = z as f64 * s[2];
            for p in prims {
                let (lo, hi) = p.bounds();
                if pz < lo[2] - w || pz > hi[2] + w {
                    continue;
                }
                let range = |k: usize| {
                    let a = ((lo[k] - w) / s[k]).floor().max(0.0) as usize;
                    let b = (((hi[k] + w) / s[k]).ceil() as usize).min(spec.dims[k] - 1);
                    a..=b
                };
                for y in range(1) {
                    for x in range(0) {
                        let q = [x as f64 * s[0], y as f64 * s[1], pz];
                        let v = (0.5 - p.signed_distance(q) / (2.0 * w)).clamp(0.0, 1.0);
                        let cell = &mut out[x + nx * y];
                        if v > *cell {
                            *cell = v;
                        }
                    }
                }
            }
        });
    if spec.noise_amplitude > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed ^ 0x9e37_79b9_7f4a_7c15);
        for v in &mut field {
            *v = (*v + spec.noise_amplitude * rng.random_range(-1.0..=1.0)).clamp(0.0, 1.0);
        }
    }
    let spacing = [T::of(s[0]), T::of(s[1]), T::of(s[2])];
    let data = field.into_iter().map(T::of).collect();
    Ok(
        Volume::new(spec.dims, spacing, data)?.with_provenance(format!(
            "synthetic {} count={} seed={}",
            spec.kind, spec.count, spec.seed
        )),
    )
}

/// Plans and rasterizes `spec`.
pub fn synthesize<T: Real>(spec: &SyntheticSpec) -> Result<Volume<T>, SynthError> {
    let prims = plan(spec)?;
    rasterize(spec, &prims)
}

/// Analytic triangle meshes used as fixtures. All are outward oriented and
/// carry area-weighted vertex normals.
pub mod shapes {
    use std::f64::consts::{PI, TAU};

    use crate::geom::Vec3;
    use crate::isosurface::with_normals;
    use crate::mesh::IndexedMesh;
    use crate::scalar::Real;

    fn build<T: Real>(positions: Vec<[f64; 3]>, faces: Vec<[u32; 3]>) -> IndexedMesh<T> {
        let positions = positions.into_iter().map(Vec3::from_f64).collect();
        with_normals(IndexedMesh::new(positions, faces).expect("fixture indices are in range"))
    }

    /// Latitude/longitude sphere with a vertex at each pole.
    pub fn uv_sphere<T: Real>(
        centre: Vec3<T>,
        radius: T,
        rings: usize,
        segments: usize,
    ) -> IndexedMesh<T> {
        assert!(rings >= 2 && segments >= 3);
        let c = centre.to_f64();
        let r = radius.as_f64();
        let mut p = vec![[c[0], c[1], c[2] + r]];
        for i in 1..rings {
            let th = PI * i as f64 / rings as f64;
            for j in 0..segments {
                let ph = TAU * j as f64 / segments as f64;
                p.push([
                    c[0] + r * th.sin() * ph.cos(),
                    c[1] + r * th.sin() * ph.sin(),
                    c[2] + r * th.cos(),
                ]);
            }
        }
        p.push([c[0], c[1], c[2] - r]);
        let south = (p.len() - 1) as u32;
        let v = |i: usize, j: usize| (1 + (i - 1) * segments + j % segments) as u32;
        let mut f = Vec::new();
        for j in 0..segments {
            f.push([0, v(1, j), v(1, j + 1)]);
            for i in 1..rings - 1 {
                f.push([v(i, j), v(i + 1, j), v(i + 1, j + 1)]);
                f.push([v(i, j), v(i + 1, j + 1), v(i, j + 1)]);
            }
            f.push([v(rings - 1, j), south, v(rings - 1, j + 1)]);
        }
        build(p, f)
    }

    /// Cylinder of `radius` along z, centred on the origin, closed by fans.
    pub fn closed_cylinder<T: Real>(
        radius: f64,
        length: f64,
        segments: usize,
        rings: usize,
    ) -> IndexedMesh<T> {
        assert!(segments >= 3 && rings >= 1);
        let mut p = vec![[0.0, 0.0, -length / 2.0], [0.0, 0.0, length / 2.0]];
        for i in 0..=rings {
            let z = -length / 2.0 + length * i as f64 / rings as f64;
            for j in 0..segments {
                let ph = TAU * j as f64 / segments as f64;
                p.push([radius * ph.cos(), radius * ph.sin(), z]);
            }
        }
        let v = |i: usize, j: usize| (2 + i * segments + j % segments) as u32;
        let mut f = Vec::new();
        for j in 0..segments {
            for i in 0..rings {
                f.push([v(i + 1, j), v(i, j), v(i, j + 1)]);
                f.push([v(i + 1, j), v(i, j + 1), v(i + 1, j + 1)]);
            }
            f.push([1, v(rings, j), v(rings, j + 1)]);
            f.push([0, v(0, j + 1), v(0, j)]);
        }
        build(p, f)
    }

    fn grid_faces(nx: usize, ny: usize, base: u32, flip: bool, f: &mut Vec<[u32; 3]>) {
        let v = |i: usize, j: usize| base + (i + nx * j) as u32;
        for j in 0..ny - 1 {
            for i in 0..nx - 1 {
                let tris = [
                    [v(i, j), v(i + 1, j), v(i + 1, j + 1)],
                    [v(i, j), v(i + 1, j + 1), v(i, j + 1)],
                ];
                for t in tris {
                    f.push(if flip { [t[0], t[2], t[1]] } else { t });
                }
            }
        }
    }

    /// Flat `nx` x `ny` vertex grid in the z = 0 plane, facing +z.
    pub fn grid_mesh<T: Real>(nx: usize, ny: usize, spacing: f64) -> IndexedMesh<T> {
        assert!(nx >= 2 && ny >= 2);
        let mut p = Vec::with_capacity(nx * ny);
        for j in 0..ny {
            for i in 0..nx {
                p.push([i as f64 * spacing, j as f64 * spacing, 0.0]);
            }
        }
        let mut f = Vec::new();
        grid_faces(nx, ny, 0, false, &mut f);
        build(p, f)
    }

    /// Two square `size` plates centred on the z axis: one at z = 0 facing
    /// -z and one at z = `gap` facing +z, as the walls of a slab.
    pub fn facing_plates<T: Real>(size: f64, gap: f64, n: usize) -> IndexedMesh<T> {
        assert!(n >= 2);
        let mut p = Vec::with_capacity(2 * n * n);
        for z in [0.0, gap] {
            for j in 0..n {
                for i in 0..n {
                    let s = |k: usize| -size / 2.0 + size * k as f64 / (n - 1) as f64;
                    p.push([s(i), s(j), z]);
                }
            }
        }
        let mut f = Vec::new();
        grid_faces(n, n, 0, true, &mut f);
        grid_faces(n, n, (n * n) as u32, false, &mut f);
        build(p, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(kind: SyntheticKind, count: usize) -> SyntheticSpec {
        SyntheticSpec {
            kind,
            count,
            ..SyntheticSpec::default()
        }
    }

    #[test]
    fn same_seed_same_volume() {
        for kind in [
            SyntheticKind::Spheres,
            SyntheticKind::Tubes,
            SyntheticKind::BranchingTree,
        ] {
            let s = SyntheticSpec {
                noise_amplitude: 0.05,
                dims: [40, 40, 40],
                radii_um: [3.0, 4.0],
                gap_um: 2.0,
                ..spec(kind, 3)
            };
            let a: Volume<f32> = synthesize(&s).unwrap();
            let b: Volume<f32> = synthesize(&s).unwrap();
            assert_eq!(a, b, "{kind}");
            let c: Volume<f32> = synthesize(&SyntheticSpec { seed: 9, ..s }).unwrap();
            assert_ne!(a.data(), c.data(), "{kind}");
        }
    }

    #[test]
    fn spheres_are_disjoint_and_inside() {
        let s = spec(SyntheticKind::Spheres, 6);
        let prims = plan(&s).unwrap();
        assert_eq!(prims.len(), 6);
        for (i, a) in prims.iter().enumerate() {
            let Primitive::Sphere { centre, radius } = *a else {
                panic!()
            };
            for k in 0..3 {
                assert!(centre[k] - radius > 0.0 && centre[k] + radius < 63.0);
            }
            for b in &prims[i + 1..] {
                assert!(b.core_distance(centre) >= radius + b.radius() + s.gap_um);
            }
        }
    }

    #[test]
    fn tubes_keep_their_gap() {
        let s = SyntheticSpec {
            spacing: [0.25; 3],
            dims: [80, 80, 48],
            radii_um: [3.0, 4.0],
            gap_um: 1.0,
            ..spec(SyntheticKind::Tubes, 2)
        };
        let prims = plan(&s).unwrap();
        let (
            Primitive::Capsule {
                a: a0, radius: r0, ..
            },
            Primitive::Capsule {
                a: a1, radius: r1, ..
            },
        ) = (prims[0], prims[1])
        else {
            panic!()
        };
        assert!(((a1[1] - a0[1]) - (r0 + r1 + 1.0)).abs() < 1e-12);
    }

    #[test]
    fn ramp_crosses_half_on_the_surface() {
        let s = SyntheticSpec {
            radii_um: [10.0, 10.0],
            ..spec(SyntheticKind::Spheres, 1)
        };
        let prims = plan(&s).unwrap();
        let v: Volume<f64> = rasterize(&s, &prims).unwrap();
        let Primitive::Sphere { centre, .. } = prims[0] else {
            panic!()
        };
        for (i, x) in v.data().iter().enumerate() {
            let p = [(i % 64) as f64, ((i / 64) % 64) as f64, (i / 4096) as f64];
            let d = prims[0].core_distance(p);
            assert_eq!(*x >= 0.5, d <= 10.0, "voxel {p:?} centre {centre:?}");
        }
    }

    #[test]
    fn infeasible_specs() {
        let too_big = SyntheticSpec {
            radii_um: [40.0, 40.0],
            ..spec(SyntheticKind::Spheres, 1)
        };
        assert!(matches!(
            synthesize::<f32>(&too_big),
            Err(SynthError::SpecInfeasible(_))
        ));
        let crowded = SyntheticSpec {
            radii_um: [20.0, 20.0],
            ..spec(SyntheticKind::Spheres, 10)
        };
        assert!(matches!(plan(&crowded), Err(SynthError::SpecInfeasible(_))));
        let fused = SyntheticSpec {
            gap_um: 0.5,
            ..spec(SyntheticKind::Tubes, 2)
        };
        assert!(matches!(plan(&fused), Err(SynthError::SpecInfeasible(_))));
        assert!(plan(&spec(SyntheticKind::Spheres, 0)).is_err());
    }

    #[test]
    fn tree_segments_connect() {
        let s = SyntheticSpec {
            dims: [64, 48, 48],
            radii_um: [2.0, 4.0],
            ..spec(SyntheticKind::BranchingTree, 6)
        };
        let prims = plan(&s).unwrap();
        assert_eq!(prims.len(), 6);
        for p in &prims[1..] {
            let Primitive::Capsule { a, .. } = *p else {
                panic!()
            };
            assert!(prims.iter().any(|q| q != p && q.core_distance(a) < 1e-9));
        }
    }

    #[test]
    fn kind_parses() {
        assert_eq!(
            "branching_tree".parse::<SyntheticKind>().unwrap(),
            SyntheticKind::BranchingTree
        );
        assert!("cubes".parse::<SyntheticKind>().is_err());
        assert_eq!(
            serde_json::to_string(&SyntheticKind::Tubes).unwrap(),
            "\"tubes\""
        );
    }

    #[test]
    fn fixture_meshes_are_closed_where_expected() {
        let s = shapes::uv_sphere::<f64>(crate::geom::Vec3::zero(), 2.0, 8, 12);
        assert_eq!(s.euler_characteristic(), 2);
        assert!(s.is_consistently_oriented() && s.non_manifold_edge_count() == 0);
        let c = shapes::closed_cylinder::<f64>(4.0, 30.0, 32, 10);
        assert_eq!(c.euler_characteristic(), 2);
        assert!(c.is_consistently_oriented());
        let vol: f64 = (0..c.face_count())
            .map(|f| {
                let [a, b, d] = c.triangle(f);
                a.dot(b.cross(d)) / 6.0
            })
            .sum();
        assert!(vol > 0.0, "outward orientation gives positive volume");
        let g = shapes::grid_mesh::<f32>(3, 4, 1.0);
        assert_eq!((g.vertex_count(), g.face_count()), (12, 12));
        assert!(g.normals.as_ref().unwrap().iter().all(|n| n.z == 1.0));
        let p = shapes::facing_plates::<f64>(10.0, 2.0, 3);
        let n = p.normals.unwrap();
        assert!(n[..9].iter().all(|n| n.z == -1.0) && n[9..].iter().all(|n| n.z == 1.0));
    }
}
