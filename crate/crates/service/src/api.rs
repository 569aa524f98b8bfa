use std::sync::Arc;

use axum::body::Body;
use axum::extract::rejection::{JsonRejection, PathRejection, QueryRejection};
use axum::extract::{Path, Query, State};
use axum::http::{header, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{delete, get, post};
use axum::{Json, Router};
use histoscope_core::analytics::{Annotation, NewAnnotation, PaintOperation};
use serde::Deserialize;
use serde_json::{json, Value};

use crate::state::{PaintSummary, ProjectState};
use crate::ServiceError;

type AppState = Arc<ProjectState>;

pub fn router(state: Arc<ProjectState>) -> Router {
    Router::new()
        .route("/api/project", get(project))
        .route("/api/mesh/{id}", get(mesh))
        .route("/api/section/{k}", get(section))
        .route(
            "/api/annotations",
            get(list_annotations).post(create_annotation),
        )
        .route("/api/annotations/{id}", delete(delete_annotation))
        .route("/api/paint", post(paint))
        .route("/api/export/{id}", get(export))
        .fallback(|| async {
            ServiceError::InvalidRequest("no such endpoint".into())
                .with_status(StatusCode::NOT_FOUND)
        })
        .with_state(state)
}

impl ServiceError {
    fn with_status(self, status: StatusCode) -> Response {
        let mut r = self.into_response();
        *r.status_mut() = status;
        r
    }
}

fn body<T>(payload: Result<Json<T>, JsonRejection>) -> Result<T, ServiceError> {
    payload
        .map(|Json(v)| v)
        .map_err(|e| ServiceError::InvalidRequest(e.body_text()))
}

async fn blocking<T: Send + 'static>(
    f: impl FnOnce() -> Result<T, ServiceError> + Send + 'static,
) -> Result<T, ServiceError> {
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ServiceError::Internal(e.to_string()))?
}

async fn project(State(st): State<AppState>) -> Result<Json<Value>, ServiceError> {
    let meshes = blocking({
        let st = st.clone();
        move || {
            Ok(st
                .meshes()
                .iter()
                .map(|m| {
                    json!({
                        "id": m.id,
                        "name": m.display_name,
                        "digest": m.snapshot().digest,
                        "vertex_count": m.vertex_count(),
                        "face_count": m.face_count(),
                        "initially_visible": m.initially_visible,
                    })
                })
                .collect::<Vec<_>>())
        }
    })
    .await?;
    let s = st.stack();
    let first = &s.images()[0];
    Ok(Json(json!({
        "name": st.project.config.name,
        "meshes": meshes,
        "stack": {
            "count": s.len(),
            "width": first.width,
            "height": first.height,
            "pixel_pitch_um": s.pixel_pitch_um(),
            "thickness_um": s.thickness_um(),
            "origin": s.origin().to_f64(),
            "max_mip": s.max_mip(),
            "has_images": first.path.is_some(),
        },
        "defaults": {
            "clip_distance_m": st.project.config.default_clip_distance_m,
            "world_scale_m_per_mm": st.project.config.world_scale_m_per_mm,
            "section_index": 0,
        },
    })))
}

async fn ply_response(
    st: AppState,
    id: String,
    attachment: bool,
) -> Result<Response, ServiceError> {
    let slot = st.mesh(&id)?.clone();
    let snap = blocking(move || Ok(slot.snapshot())).await?;
    let mut r = Response::new(Body::from(snap.ply.as_ref().clone()));
    let h = r.headers_mut();
    h.insert(
        header::CONTENT_TYPE,
        HeaderValue::from_static("application/octet-stream"),
    );
    h.insert(
        header::ETAG,
        HeaderValue::from_str(&format!("\"{}\"", snap.digest)).unwrap(),
    );
    h.insert(
        "x-content-digest",
        HeaderValue::from_str(&format!("sha256={}", snap.digest)).unwrap(),
    );
    if attachment {
        h.insert(
            header::CONTENT_DISPOSITION,
            HeaderValue::from_str(&format!("attachment; filename=\"{id}.ply\"")).unwrap(),
        );
    }
    Ok(r)
}

async fn mesh(
    State(st): State<AppState>,
    Path(id): Path<String>,
) -> Result<Response, ServiceError> {
    ply_response(st, id, false).await
}

async fn export(
    State(st): State<AppState>,
    Path(id): Path<String>,
) -> Result<Response, ServiceError> {
    ply_response(st, id, true).await
}

#[derive(Deserialize)]
struct MipQuery {
    #[serde(default)]
    mip: u32,
}

async fn section(
    State(st): State<AppState>,
    k: Result<Path<i64>, PathRejection>,
    q: Result<Query<MipQuery>, QueryRejection>,
) -> Result<Response, ServiceError> {
    let Path(k) = k.map_err(|e| ServiceError::InvalidRequest(e.body_text()))?;
    let Query(q) = q.map_err(|e| ServiceError::InvalidRequest(e.body_text()))?;
    let count = st.stack().len();
    let k = usize::try_from(k)
        .ok()
        .filter(|&k| k < count)
        .ok_or(histoscope_core::section::SectionError::IndexOutOfRange { index: k, count })?;
    let png = blocking(move || Ok(st.stack().section_png(k, q.mip)?)).await?;
    Ok(([(header::CONTENT_TYPE, "image/png")], png).into_response())
}

async fn list_annotations(State(st): State<AppState>) -> Json<Vec<Annotation>> {
    Json(st.annotations())
}

async fn create_annotation(
    State(st): State<AppState>,
    payload: Result<Json<NewAnnotation>, JsonRejection>,
) -> Result<(StatusCode, Json<Annotation>), ServiceError> {
    let new = body(payload)?;
    let a = blocking(move || st.create_annotation(new)).await?;
    Ok((StatusCode::CREATED, Json(a)))
}

async fn delete_annotation(
    State(st): State<AppState>,
    id: Result<Path<u64>, PathRejection>,
) -> Result<Json<Annotation>, ServiceError> {
    let Path(id) = id.map_err(|e| ServiceError::InvalidRequest(e.body_text()))?;
    Ok(Json(blocking(move || st.delete_annotation(id)).await?))
}

async fn paint(
    State(st): State<AppState>,
    payload: Result<Json<PaintOperation>, JsonRejection>,
) -> Result<Json<PaintSummary>, ServiceError> {
    let op = body(payload)?;
    Ok(Json(st.paint(op).await?))
}
