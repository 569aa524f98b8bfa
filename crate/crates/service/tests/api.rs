use std::path::{Path, PathBuf};
use std::sync::Arc;

use axum::body::{to_bytes, Body};
use axum::http::{Request, StatusCode};
use axum::Router;
use histoscope_core::analytics::{geodesic_paint, journal_replay, PaintJournal, PaintOperation};
use histoscope_core::mesh::{build_adjacency, read_ply, save_mesh, to_ply_bytes};
use histoscope_core::synth::shapes;
use histoscope_core::Mesh;
use histoscope_service::{router, sha256_hex, ProjectConfig, ProjectState, ServiceError};
use serde_json::{json, Value};
use tower::ServiceExt;

struct Fixture {
    dir: tempfile::TempDir,
    config: PathBuf,
}

fn grid() -> Mesh {
    shapes::grid_mesh(30, 20, 1.0)
}

fn write_config(dir: &Path, stack: Value) -> PathBuf {
    let cfg = json!({
        "name": "demo",
        "meshes": [
            {"id": "grid", "path": "meshes/grid.ply", "display_name": "Flat grid"},
            {"id": "ball", "path": "meshes/ball.ply", "initially_visible": false},
        ],
        "stack": stack,
    });
    let path = dir.join("project.json");
    std::fs::write(&path, serde_json::to_vec_pretty(&cfg).unwrap()).unwrap();
    path
}

fn fixture_with_stack(stack: Value) -> Fixture {
    let dir = tempfile::tempdir().unwrap();
    std::fs::create_dir(dir.path().join("meshes")).unwrap();
    save_mesh(&grid(), dir.path().join("meshes/grid.ply")).unwrap();
    save_mesh(
        &shapes::uv_sphere::<f32>(histoscope_core::Vec3::new(5.0, 5.0, 5.0), 3.0, 10, 16),
        dir.path().join("meshes/ball.ply"),
    )
    .unwrap();
    let config = write_config(dir.path(), stack);
    Fixture { dir, config }
}

fn fixture() -> Fixture {
    fixture_with_stack(
        json!({"blank": {"count": 21, "width": 100, "height": 80}, "pixel_pitch_um": 0.5, "thickness_um": 7.0}),
    )
}

fn open(f: &Fixture) -> Arc<ProjectState> {
    Arc::new(ProjectState::open(ProjectConfig::load(&f.config).unwrap()).unwrap())
}

async fn call(
    app: &Router,
    method: &str,
    uri: &str,
    body: Option<Value>,
) -> (StatusCode, axum::http::HeaderMap, Vec<u8>) {
    let mut req = Request::builder().method(method).uri(uri);
    let body = match body {
        Some(v) => {
            req = req.header("content-type", "application/json");
            Body::from(serde_json::to_vec(&v).unwrap())
        }
        None => Body::empty(),
    };
    let res = app.clone().oneshot(req.body(body).unwrap()).await.unwrap();
    let status = res.status();
    let headers = res.headers().clone();
    let bytes = to_bytes(res.into_body(), usize::MAX).await.unwrap();
    (status, headers, bytes.to_vec())
}

fn json_of(bytes: &[u8]) -> Value {
    serde_json::from_slice(bytes).unwrap()
}

fn paint_body(mesh: &str, p: [f64; 3], radius: f64, color: [u8; 3]) -> Value {
    json!({"mesh_id": mesh, "seed_point": p, "tool_radius_um": radius, "color": color})
}

#[tokio::test]
async fn manifest_lists_meshes_and_stack() {
    let f = fixture();
    let app = router(open(&f));
    let (status, _, body) = call(&app, "GET", "/api/project", None).await;
    assert_eq!(status, StatusCode::OK);
    let m = json_of(&body);
    assert_eq!(m["name"], "demo");
    let ids: Vec<&str> = m["meshes"]
        .as_array()
        .unwrap()
        .iter()
        .map(|x| x["id"].as_str().unwrap())
        .collect();
    assert_eq!(ids, ["grid", "ball"]);
    assert_eq!(m["meshes"][0]["name"], "Flat grid");
    assert_eq!(m["meshes"][0]["vertex_count"], 600);
    assert_eq!(m["meshes"][1]["initially_visible"], false);
    assert_eq!(m["stack"]["count"], 21);
    assert_eq!(m["stack"]["thickness_um"], 7.0);
    assert_eq!(m["defaults"]["clip_distance_m"], 0.6);

    let (status, headers, ply) = call(&app, "GET", "/api/mesh/grid", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(headers["content-type"], "application/octet-stream");
    assert_eq!(sha256_hex(&ply), m["meshes"][0]["digest"].as_str().unwrap());
    assert_eq!(read_ply::<f32>(&ply).unwrap(), grid());
}

#[tokio::test]
async fn config_errors_name_the_problem() {
    let f = fixture();
    std::fs::remove_file(f.dir.path().join("meshes/ball.ply")).unwrap();
    let err = ProjectConfig::load(&f.config).unwrap_err();
    assert!(matches!(err, ServiceError::ConfigInvalid(_)));
    assert!(err.to_string().contains("ball.ply"), "{err}");

    let f = fixture();
    let mut cfg: Value = json_of(&std::fs::read(&f.config).unwrap());
    cfg["meshes"][1]["id"] = json!("grid");
    std::fs::write(&f.config, cfg.to_string()).unwrap();
    assert!(ProjectConfig::load(&f.config)
        .unwrap_err()
        .to_string()
        .contains("duplicate"));

    let f = fixture_with_stack(json!({"pixel_pitch_um": 0.5, "thickness_um": 7.0}));
    assert!(ProjectConfig::load(&f.config)
        .unwrap_err()
        .to_string()
        .starts_with("ConfigInvalid"));
}

#[tokio::test]
async fn paint_changes_exactly_the_geodesic_set() {
    let f = fixture();
    let app = router(open(&f));
    let (_, _, before) = call(&app, "GET", "/api/project", None).await;
    let (status, _, body) = call(
        &app,
        "POST",
        "/api/paint",
        Some(paint_body("grid", [10.2, 7.9, 0.0], 3.0, [255, 0, 0])),
    )
    .await;
    assert_eq!(status, StatusCode::OK);
    let r = json_of(&body);
    assert_eq!(r["journal_seq"], 1);
    let painted_count = r["painted_count"].as_u64().unwrap() as usize;
    assert!(painted_count >= 1);

    let base = grid();
    let op = PaintOperation::new("grid", [10.2, 7.9, 0.0], 3.0, [255, 0, 0]);
    let expected = geodesic_paint(&base, &build_adjacency(&base), &op).unwrap();
    assert_eq!(painted_count, expected.painted.len());
    let listed: Vec<u32> = serde_json::from_value(r["painted_vertices"].clone()).unwrap();
    assert_eq!(listed, expected.painted);

    let (_, _, ply) = call(&app, "GET", "/api/export/grid", None).await;
    let served: Mesh = read_ply(&ply).unwrap();
    assert_eq!(served.colors, expected.colors);
    let (_, _, after) = call(&app, "GET", "/api/project", None).await;
    assert_ne!(
        json_of(&before)["meshes"][0]["digest"],
        json_of(&after)["meshes"][0]["digest"]
    );
    assert_eq!(
        json_of(&before)["meshes"][1]["digest"],
        json_of(&after)["meshes"][1]["digest"]
    );

    let (_, _, body) = call(
        &app,
        "POST",
        "/api/paint",
        Some(paint_body("grid", [1.0, 1.0, 0.0], 1.0, [0, 9, 0])),
    )
    .await;
    assert_eq!(json_of(&body)["journal_seq"], 2);
}

#[tokio::test]
async fn repainting_the_same_colour_keeps_the_digest() {
    let f = fixture();
    let app = router(open(&f));
    let body = paint_body("grid", [3.0, 3.0, 0.0], 2.0, [1, 2, 3]);
    call(&app, "POST", "/api/paint", Some(body.clone())).await;
    let (_, h1, _) = call(&app, "GET", "/api/mesh/grid", None).await;
    call(&app, "POST", "/api/paint", Some(body)).await;
    let (_, h2, _) = call(&app, "GET", "/api/mesh/grid", None).await;
    assert_eq!(h1["x-content-digest"], h2["x-content-digest"]);
}

#[tokio::test]
async fn paint_errors() {
    let f = fixture();
    let state = open(&f);
    let app = router(state.clone());
    let (status, _, body) = call(
        &app,
        "POST",
        "/api/paint",
        Some(paint_body("grid", [500.0, 0.0, 0.0], 2.0, [1, 1, 1])),
    )
    .await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(json_of(&body)["error"], "NoSeedVertex");
    assert_eq!(state.journal_len(), 0);

    let (status, _, body) = call(
        &app,
        "POST",
        "/api/paint",
        Some(paint_body("nope", [0.0; 3], 2.0, [1, 1, 1])),
    )
    .await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_eq!(json_of(&body)["error"], "UnknownMesh");

    let (status, _, body) =
        call(&app, "POST", "/api/paint", Some(json!({"mesh_id": "grid"}))).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(json_of(&body)["error"], "InvalidRequest");

    let (status, _, _) = call(&app, "GET", "/api/export/nope", None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    let (status, _, _) = call(&app, "GET", "/api/nothing", None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn concurrent_paints_are_all_journaled_and_replayable() {
    let f = fixture();
    let state = open(&f);
    let app = router(state.clone());
    let mut tasks = Vec::new();
    for k in 0..8u8 {
        let app = app.clone();
        tasks.push(tokio::spawn(async move {
            let body = paint_body(
                "grid",
                [2.0 + 3.0 * k as f64, 10.0, 0.0],
                4.0,
                [k * 20, 0, 255 - k],
            );
            call(&app, "POST", "/api/paint", Some(body)).await
        }));
    }
    let mut seqs = Vec::new();
    for t in tasks {
        let (status, _, body) = t.await.unwrap();
        assert_eq!(status, StatusCode::OK);
        seqs.push(json_of(&body)["journal_seq"].as_u64().unwrap());
    }
    seqs.sort();
    assert_eq!(seqs, (1..=8).collect::<Vec<u64>>());
    let (_, _, served) = call(&app, "GET", "/api/export/grid", None).await;

    let journal = PaintJournal::open(f.dir.path().join("paint_journal.jsonl")).unwrap();
    let ops: Vec<PaintOperation> = journal.ops_for("grid").cloned().collect();
    let replayed = journal_replay(&grid(), "grid", &ops).unwrap();
    assert_eq!(served, to_ply_bytes(&replayed));

    drop(app);
    drop(state);
    let restarted = router(open(&f));
    let (_, _, again) = call(&restarted, "GET", "/api/export/grid", None).await;
    assert_eq!(again, served);
}

#[tokio::test]
async fn existing_journal_is_replayed_on_start() {
    let f = fixture();
    let ops = vec![
        PaintOperation::new("grid", [4.0, 4.0, 0.0], 3.0, [255, 0, 0]),
        PaintOperation::new("ball", [5.0, 5.0, 8.0], 2.0, [0, 255, 0]),
        PaintOperation::new("grid", [5.0, 4.0, 0.0], 2.0, [0, 0, 255]),
    ];
    {
        let mut j = PaintJournal::open(f.dir.path().join("paint_journal.jsonl")).unwrap();
        for op in &ops {
            j.append(op.clone()).unwrap();
        }
    }
    let app = router(open(&f));
    let (_, _, served) = call(&app, "GET", "/api/mesh/grid", None).await;
    let grid_ops: Vec<PaintOperation> = ops
        .iter()
        .filter(|o| o.mesh_id == "grid")
        .cloned()
        .collect();
    assert_eq!(
        served,
        to_ply_bytes(&journal_replay(&grid(), "grid", &grid_ops).unwrap())
    );
}

#[tokio::test]
async fn annotation_lifecycle() {
    let f = fixture();
    let app = router(open(&f));
    let new = |z: f64, label: &str| json!({"position": [1.0, 2.0, z], "radius_um": 4.0, "label": label, "color": [9, 8, 7]});
    let (status, _, a) = call(&app, "POST", "/api/annotations", Some(new(22.0, "a"))).await;
    assert_eq!(status, StatusCode::CREATED);
    let a = json_of(&a);
    assert_eq!(a["section_index"], 3);
    assert_eq!(a["id"], 1);
    let (_, _, b) = call(&app, "POST", "/api/annotations", Some(new(1e5, "b"))).await;
    assert_eq!(json_of(&b)["section_index"], 20);

    let (_, _, list) = call(&app, "GET", "/api/annotations", None).await;
    let labels: Vec<String> = json_of(&list)
        .as_array()
        .unwrap()
        .iter()
        .map(|x| x["label"].as_str().unwrap().to_string())
        .collect();
    assert_eq!(labels, ["a", "b"]);

    let (status, _, _) = call(&app, "DELETE", "/api/annotations/1", None).await;
    assert_eq!(status, StatusCode::OK);
    let (_, _, list) = call(&app, "GET", "/api/annotations", None).await;
    assert_eq!(json_of(&list).as_array().unwrap().len(), 1);
    let (status, _, body) = call(&app, "DELETE", "/api/annotations/1", None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_eq!(json_of(&body)["error"], "UnknownAnnotation");
    let (status, _, _) = call(&app, "DELETE", "/api/annotations/abc", None).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);

    let (status, _, body) = call(
        &app,
        "POST",
        "/api/annotations",
        Some(json!({"position": [0, 0, 0], "radius_um": -1.0})),
    )
    .await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(json_of(&body)["error"], "InvalidOperation");

    let text = std::fs::read_to_string(f.dir.path().join("annotations.jsonl")).unwrap();
    let records: Vec<Value> = text
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(records.len(), 3);
    assert_eq!(records[2]["id"], 1);
    assert_eq!(records[2]["deleted"], true);
}

#[tokio::test]
async fn sections_are_served_as_png_mips() {
    let dir = tempfile::tempdir().unwrap();
    let img_dir = dir.path().join("sections");
    std::fs::create_dir(&img_dir).unwrap();
    for k in 0..3u8 {
        image::RgbImage::from_pixel(64, 40, image::Rgb([k * 50, 10, 200]))
            .save(img_dir.join(format!("s{k:02}.png")))
            .unwrap();
    }
    let f = fixture_with_stack(
        json!({"image_glob": img_dir.join("*.png"), "pixel_pitch_um": 0.416, "thickness_um": 7.0}),
    );
    let app = router(open(&f));
    let (status, headers, png) = call(&app, "GET", "/api/section/2?mip=1", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(headers["content-type"], "image/png");
    let img = image::load_from_memory(&png).unwrap().to_rgb8();
    assert_eq!(img.dimensions(), (32, 20));
    assert_eq!(img.get_pixel(5, 5).0, [100, 10, 200]);
    let (status, _, _) = call(&app, "GET", "/api/section/0", None).await;
    assert_eq!(status, StatusCode::OK);
    for uri in ["/api/section/3", "/api/section/-1", "/api/section/0?mip=7"] {
        let (status, _, body) = call(&app, "GET", uri, None).await;
        assert_eq!(status, StatusCode::NOT_FOUND, "{uri}");
        assert!(json_of(&body)["error"].is_string());
    }

    let blank = router(open(&fixture()));
    let (status, _, body) = call(&blank, "GET", "/api/section/0", None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_eq!(json_of(&body)["error"], "NoPixelData");
}

#[tokio::test]
async fn export_before_and_after_painting() {
    let f = fixture();
    let state = open(&f);
    let app = router(state.clone());
    let (_, headers, ply) = call(&app, "GET", "/api/export/ball", None).await;
    assert!(headers["content-disposition"]
        .to_str()
        .unwrap()
        .contains("ball.ply"));
    let on_disk: Mesh =
        histoscope_core::mesh::load_mesh(f.dir.path().join("meshes/ball.ply")).unwrap();
    assert_eq!(read_ply::<f32>(&ply).unwrap(), on_disk);

    let (_, _, r) = call(
        &app,
        "POST",
        "/api/paint",
        Some(paint_body("ball", [5.0, 5.0, 8.0], 2.5, [7, 7, 7])),
    )
    .await;
    let painted: Vec<usize> =
        serde_json::from_value(json_of(&r)["painted_vertices"].clone()).unwrap();
    let out = f.dir.path().join("export.ply");
    let digest = state.export_to("ball", &out).unwrap();
    let exported: Mesh = histoscope_core::mesh::load_mesh(&out).unwrap();
    for v in 0..exported.vertex_count() {
        assert_eq!(exported.colors[v] == [7, 7, 7], painted.contains(&v));
    }
    assert_eq!(digest, sha256_hex(&std::fs::read(&out).unwrap()));
}

#[test]
fn toml_config_and_data_dir_override() {
    let f = fixture();
    let data = tempfile::tempdir().unwrap();
    std::fs::create_dir(data.path().join("meshes")).unwrap();
    for m in ["grid", "ball"] {
        std::fs::rename(
            f.dir.path().join(format!("meshes/{m}.ply")),
            data.path().join(format!("meshes/{m}.ply")),
        )
        .unwrap();
    }
    let toml_path = f.dir.path().join("project.toml");
    std::fs::write(
        &toml_path,
        r#"
name = "toml demo"
journal_path = "state/paint.jsonl"

[[meshes]]
id = "grid"
path = "meshes/grid.ply"

[[meshes]]
id = "ball"
path = "meshes/ball.ply"

[stack]
pixel_pitch_um = 0.5
thickness_um = 7.0
origin = [0.0, 0.0, -3.5]
blank = { count = 4, width = 10, height = 10 }
"#,
    )
    .unwrap();
    std::env::set_var(histoscope_service::DATA_DIR_ENV, data.path());
    let loaded = ProjectConfig::load(&toml_path);
    std::env::remove_var(histoscope_service::DATA_DIR_ENV);
    let p = loaded.unwrap();
    assert_eq!(p.config.name, "toml demo");
    assert_eq!(p.journal_path, data.path().join("state/paint.jsonl"));
    assert_eq!(p.meshes[0].path, data.path().join("meshes/grid.ply"));
    assert_eq!(p.stack.section_index_for_z(0.0), 0);
    assert_eq!(p.stack.section_index_for_z(3.5), 1);
}
