//! HTTP service for one reconstruction project.
//!
//! Meshes are served whole as binary PLY, sections as PNG mip levels.
//! Paints and annotations are appended to line-delimited JSON files before
//! they are acknowledged, and the paint journal is replayed on start, so a
//! restarted service serves exactly the state it had acknowledged.

mod api;
pub mod config;
mod state;

use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use histoscope_core::analytics::AnalyticsError;
use histoscope_core::section::SectionError;
use thiserror::Error;

pub use api::router;
pub use config::{ProjectConfig, ResolvedProject, DATA_DIR_ENV};
pub use state::{sha256_hex, MeshSlot, PaintSummary, ProjectState, Snapshot};

#[derive(Debug, Error)]
pub enum ServiceError {
    #[error("ConfigInvalid: {0}")]
    ConfigInvalid(String),
    #[error("ReplayFailed: {0}")]
    ReplayFailed(String),
    #[error("UnknownMesh: no mesh with id {0:?}")]
    UnknownMesh(String),
    #[error("InvalidRequest: {0}")]
    InvalidRequest(String),
    #[error(transparent)]
    Analytics(#[from] AnalyticsError),
    #[error(transparent)]
    Section(#[from] SectionError),
    #[error("IoFailure: {0}")]
    Io(#[from] std::io::Error),
    #[error("Internal: {0}")]
    Internal(String),
}

impl ServiceError {
    pub fn status(&self) -> StatusCode {
        use AnalyticsError as A;
        use SectionError as S;
        match self {
            ServiceError::UnknownMesh(_)
            | ServiceError::Analytics(A::UnknownAnnotation(_))
            | ServiceError::Section(
                S::IndexOutOfRange { .. } | S::MipOutOfRange { .. } | S::NoPixelData(_),
            ) => StatusCode::NOT_FOUND,
            ServiceError::InvalidRequest(_) => StatusCode::BAD_REQUEST,
            ServiceError::Analytics(A::NoSeedVertex { .. } | A::InvalidOperation(_)) => {
                StatusCode::UNPROCESSABLE_ENTITY
            }
            ServiceError::Analytics(A::StoreUnavailable(_)) => StatusCode::SERVICE_UNAVAILABLE,
            _ => StatusCode::INTERNAL_SERVER_ERROR,
        }
    }
}

impl IntoResponse for ServiceError {
    fn into_response(self) -> Response {
        let status = self.status();
        if status.is_server_error() {
            tracing::error!(error = %self, "request failed");
        }
        let body = serde_json::json!({
            "error": histoscope_core::error_name(&self),
            "message": self.to_string(),
        });
        (status, Json(body)).into_response()
    }
}
