mod common;

use common::{closest_vertex, random_grid_mesh, shortest_paths};
use histoscope_core::analytics::{
    geodesic_paint, journal_replay, paint_region, place_annotation, shape_diameter,
    AnnotationStore, FileAnnotationStore, NewAnnotation, PaintJournal, PaintOperation, SdfConfig,
};
use histoscope_core::geom::{axis_angle, rotate};
use histoscope_core::isosurface::extract_mesh;
use histoscope_core::mesh::{build_adjacency, connected_components, to_ply_bytes};
use histoscope_core::synth::{plan, shapes};
use histoscope_core::{synthesize, IndexedMesh, SectionStack, SyntheticKind, SyntheticSpec, Vec3};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn seed_near(rng: &mut impl Rng, m: &IndexedMesh<f64>) -> [f64; 3] {
    let p = m.positions[rng.random_range(0..m.vertex_count())];
    [
        p.x + rng.random_range(-0.2..0.2),
        p.y + rng.random_range(-0.2..0.2),
        p.z,
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn paint_matches_shortest_path_threshold(seed in any::<u64>(), nx in 2usize..60, ny in 2usize..60) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = random_grid_mesh(&mut rng, nx, ny, 0.1);
        let adj = build_adjacency(&m);
        for _ in 0..10 {
            let mut op = PaintOperation::new("m", seed_near(&mut rng, &m), rng.random_range(0.5..8.0), [255, 0, 0]);
            op.geodesic_factor = rng.random_range(0.5..2.0);
            let (seed_v, _) = closest_vertex(&m, op.seed_point);
            let dist = shortest_paths(&m, seed_v);
            let limit = op.tool_radius_um * op.geodesic_factor;
            let expected: Vec<u32> = (0..m.vertex_count() as u32).filter(|&v| dist[v as usize] <= limit).collect();
            let got = geodesic_paint(&m, &adj, &op).unwrap();
            prop_assert_eq!(got.seed, seed_v);
            prop_assert_eq!(&got.painted, &expected);
            for v in 0..m.vertex_count() {
                let want = if expected.binary_search(&(v as u32)).is_ok() { [255, 0, 0] } else { m.colors[v] };
                prop_assert_eq!(got.colors[v], want);
            }
        }
    }

    #[test]
    fn paint_grows_with_radius_and_stays_in_its_component(
        seed in any::<u64>(), r1 in 0.3f64..6.0, extra in 0.0f64..6.0,
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = random_grid_mesh(&mut rng, 30, 30, 0.35);
        let adj = build_adjacency(&m);
        let labels = connected_components(&m, &adj);
        let p = seed_near(&mut rng, &m);
        let small = PaintOperation::new("m", p, r1, [0, 0, 255]);
        let big = PaintOperation::new("m", p, r1 + extra, [0, 0, 255]);
        let (s, a) = paint_region(&m, &adj, &small).unwrap();
        let (_, b) = paint_region(&m, &adj, &big).unwrap();
        for v in &a {
            prop_assert!(b.binary_search(v).is_ok());
        }
        for &v in &b {
            prop_assert_eq!(labels.labels[v as usize], labels.labels[s]);
        }
    }
}

fn tubes_spec(seed: u64) -> SyntheticSpec {
    SyntheticSpec {
        kind: SyntheticKind::Tubes,
        count: 2,
        radii_um: [3.0, 4.0],
        dims: [96, 96, 48],
        spacing: [0.25; 3],
        gap_um: 1.0,
        seed,
        ..SyntheticSpec::default()
    }
}

#[test]
fn paint_does_not_bleed_across_a_gap() {
    let spec = tubes_spec(3);
    let m = extract_mesh(&synthesize::<f64>(&spec).unwrap(), 0.5).unwrap();
    let adj = build_adjacency(&m);
    let labels = connected_components(&m, &adj);
    assert_eq!(labels.count(), 2);
    let prims = plan(&spec).unwrap();
    let tube_a = |p: Vec3<f64>| {
        prims[0].signed_distance(p.to_f64()).abs() < prims[1].signed_distance(p.to_f64()).abs()
    };
    let a_vertices: Vec<usize> = (0..m.vertex_count())
        .filter(|&v| tube_a(m.positions[v]))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..20 {
        let v = a_vertices[rng.random_range(0..a_vertices.len())];
        let op = PaintOperation::new("t", m.positions[v].to_f64(), 5.0, [255, 0, 0]);
        let (_, painted) = paint_region(&m, &adj, &op).unwrap();
        assert!(!painted.is_empty());
        assert!(painted.iter().all(|&p| tube_a(m.positions[p as usize])));
    }
}

#[test]
fn tube_gap_is_preserved_in_the_mesh() {
    let spec = tubes_spec(5);
    let m = extract_mesh(&synthesize::<f64>(&spec).unwrap(), 0.5).unwrap();
    let labels = connected_components(&m, &build_adjacency(&m));
    assert_eq!(labels.count(), 2);
    let a = labels.members(0);
    let b = labels.members(1);
    let mut best = f64::INFINITY;
    for &i in &a {
        for &j in &b {
            best = best.min(m.positions[i].distance(m.positions[j]));
        }
    }
    assert!((0.8..=1.2).contains(&best), "closest pair {best}");
}

fn mid_cylinder_median(m: &IndexedMesh<f64>, values: &[f64], half: f64) -> f64 {
    let mut mid: Vec<f64> = (0..m.vertex_count())
        .filter(|&v| {
            m.positions[v].z.abs() <= half && m.positions[v].x.hypot(m.positions[v].y) > 1.0
        })
        .map(|v| values[v])
        .collect();
    mid.sort_by(|a, b| a.partial_cmp(b).unwrap());
    mid[mid.len() / 2]
}

#[test]
fn cylinder_diameter_and_rigid_invariance() {
    let m = shapes::closed_cylinder::<f64>(4.0, 40.0, 64, 40);
    let f = shape_diameter(&m, SdfConfig::default()).unwrap();
    let med = mid_cylinder_median(&m, &f.values, 5.0);
    assert!((med - 8.0).abs() <= 0.8, "median {med}");

    let r = axis_angle(Vec3::new(0.3, -1.0, 0.5), 1.1);
    let shift = Vec3::new(120.0, -45.5, 7.25);
    let moved = m.map_positions(|p| rotate(&r, p) + shift, |n| rotate(&r, n));
    let g = shape_diameter(&moved, SdfConfig::default()).unwrap();
    for (i, (a, b)) in f.values.iter().zip(&g.values).enumerate() {
        assert!((a - b).abs() <= 1e-6, "vertex {i}: {a} vs {b}");
    }
}

#[test]
fn nested_cylinders_are_bimodal() {
    let mut m = shapes::closed_cylinder::<f64>(2.0, 40.0, 48, 40);
    m.append(
        &shapes::closed_cylinder::<f64>(8.0, 40.0, 96, 40)
            .map_positions(|p| p + Vec3::new(30.0, 0.0, 0.0), |n| n),
    );
    let f = shape_diameter(&m, SdfConfig::default()).unwrap();
    let thin: Vec<f64> = (0..m.vertex_count())
        .filter(|&v| m.positions[v].x < 15.0)
        .map(|v| f.values[v])
        .collect();
    let thick: Vec<f64> = (0..m.vertex_count())
        .filter(|&v| m.positions[v].x >= 15.0)
        .map(|v| f.values[v])
        .collect();
    let med = |mut v: Vec<f64>| {
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        v[v.len() / 2]
    };
    let (a, b) = (med(thin), med(thick));
    assert!((a - 4.0).abs() < 0.6 && (b - 16.0).abs() < 2.0, "{a} {b}");
}

#[test]
fn replay_is_deterministic_and_survives_reopen() {
    let dir = tempfile::tempdir().unwrap();
    let m = random_grid_mesh(&mut ChaCha8Rng::seed_from_u64(4), 40, 40, 0.05);
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut journal = PaintJournal::open(dir.path().join("paint.jsonl")).unwrap();
    for k in 0..25u8 {
        let mut op = PaintOperation::new(
            "g",
            seed_near(&mut rng, &m),
            rng.random_range(1.0..6.0),
            [k, 255 - k, 7],
        );
        op.geodesic_factor = rng.random_range(0.8..1.6);
        journal.append(op).unwrap();
    }
    let ops: Vec<PaintOperation> = journal.ops_for("g").cloned().collect();
    let a = journal_replay(&m, "g", &ops).unwrap();
    drop(journal);
    let reopened = PaintJournal::open(dir.path().join("paint.jsonl")).unwrap();
    let ops2: Vec<PaintOperation> = reopened.ops_for("g").cloned().collect();
    assert_eq!(ops, ops2);
    let b = journal_replay(&m, "g", &ops2).unwrap();
    assert_eq!(to_ply_bytes(&a), to_ply_bytes(&b));
    assert_ne!(a.colors, m.colors);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn annotations_round_trip_bit_exact(
        pos in prop::array::uniform3(-1e4f64..1e4),
        radius in 1e-3f64..100.0,
        matrix in prop::array::uniform4(prop::array::uniform4(any::<f64>().prop_filter("finite", |x| x.is_finite()))),
        label in "\\PC{0,40}",
        color in prop::array::uniform3(any::<u8>()),
    ) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("annotations.jsonl");
        let stack = SectionStack::from_dims(21, 100, 100, 0.5, 7.0, [0.0; 3]).unwrap();
        let mut store = FileAnnotationStore::open(&path).unwrap();
        let new = NewAnnotation {
            position: pos,
            radius_um: radius,
            label,
            color,
            view_transform: matrix,
            author: "prop".into(),
        };
        let a = place_annotation(&mut store, new, &stack).unwrap();
        drop(store);
        let back = FileAnnotationStore::open(&path).unwrap().live();
        prop_assert_eq!(back.len(), 1);
        let b = &back[0];
        prop_assert_eq!(b, &a);
        for (ra, rb) in a.view_transform.iter().zip(&b.view_transform) {
            for (x, y) in ra.iter().zip(rb) {
                prop_assert_eq!(x.to_bits(), y.to_bits());
            }
        }
        for k in 0..3 {
            prop_assert_eq!(a.position[k].to_bits(), b.position[k].to_bits());
        }
    }
}

#[test]
fn marching_cubes_vertices_sit_in_their_section() {
    for (t, xy) in [(7.0, 2.0), (0.35, 0.1)] {
        // Voxel planes and sections share the origin and the z spacing.
        let spec = SyntheticSpec {
            kind: SyntheticKind::Spheres,
            count: 2,
            radii_um: [3.0 * t, 4.0 * t],
            dims: [120, 120, 24],
            spacing: [xy, xy, t],
            gap_um: 2.0 * t,
            seed: 2,
            ..SyntheticSpec::default()
        };
        let v = synthesize::<f64>(&spec).unwrap();
        let stack = SectionStack::from_dims(24, 120, 120, xy, t, [0.0; 3]).unwrap();
        let m = extract_mesh(&v, 0.5).unwrap();
        assert!(m.vertex_count() > 100);
        for p in &m.positions {
            // Voxel plane at or below the vertex, by linear scan.
            let k = (0..24).rev().find(|&k| k as f64 * t <= p.z).unwrap();
            let c = stack.cuboid_for(k as i64, false).unwrap();
            assert!(c.contains_z(p.z), "z {} not in section {k}", p.z);
            assert_eq!(stack.section_index_for_z(p.z), k);
        }
    }
}
