//! Inspection analytics on coloured meshes: geodesically bounded painting,
//! shape diameter values and their colour ramp, annotation markers, and the
//! append-only records that persist user edits.

mod annotation;
mod bvh;
mod journal;
mod paint;
mod ramp;
mod records;
mod sdf;

pub use annotation::{
    place_annotation, Annotation, AnnotationStore, FileAnnotationStore, MemoryAnnotationStore,
    NewAnnotation, IDENTITY_TRANSFORM,
};
pub use bvh::{Bvh, Ray, RayHit};
pub use journal::{journal_replay, replay_onto, JournalEntry, PaintJournal};
pub use paint::{
    geodesic_distances, geodesic_paint, nearest_vertex, paint_region, PaintOperation, PaintResult,
    NEAREST_TIE_TOLERANCE,
};
pub use ramp::{percentile, sdf_to_colors, RAMP_GREEN, RAMP_RED};
pub use records::{append_record, read_records};
pub use sdf::{shape_diameter, SdfConfig, SdfField};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum AnalyticsError {
    #[error("NoSeedVertex: no vertex within {radius_um} um of {point:?}")]
    NoSeedVertex { point: [f64; 3], radius_um: f64 },
    #[error("MissingNormals: compute vertex normals before the shape diameter")]
    MissingNormals,
    #[error("DegenerateRange: lo {lo} must be below hi {hi}")]
    DegenerateRange { lo: f64, hi: f64 },
    #[error("MeshMismatch: operation {seq} targets mesh {found:?}, expected {expected:?}")]
    MeshMismatch {
        seq: usize,
        expected: String,
        found: String,
    },
    #[error("InvalidOperation: {0}")]
    InvalidOperation(String),
    #[error("UnknownAnnotation: no live annotation with id {0}")]
    UnknownAnnotation(u64),
    #[error("StoreUnavailable: {0}")]
    StoreUnavailable(String),
    #[error("MalformedRecord: {path} line {line}: {reason}")]
    MalformedRecord {
        path: String,
        line: usize,
        reason: String,
    },
}
