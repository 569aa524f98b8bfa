use std::collections::BTreeMap;
use std::fs::File;
use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use super::records::{append_record, open_for_append, read_records};
use super::AnalyticsError;
use crate::mesh::Rgb;
use crate::section::SectionStack;

pub const IDENTITY_TRANSFORM: [[f64; 4]; 4] = [
    [1.0, 0.0, 0.0, 0.0],
    [0.0, 1.0, 0.0, 0.0],
    [0.0, 0.0, 1.0, 0.0],
    [0.0, 0.0, 0.0, 1.0],
];

/// Spherical marker placed in mesh space, with the camera pose at placement
/// and the section that contains it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Annotation {
    pub id: u64,
    pub position: [f64; 3],
    pub radius_um: f64,
    pub label: String,
    pub color: Rgb,
    pub view_transform: [[f64; 4]; 4],
    pub section_index: usize,
    pub created_at: DateTime<Utc>,
    pub author: String,
    /// Tombstone flag; deleted annotations stay in the store file.
    #[serde(default)]
    pub deleted: bool,
}

/// Client-supplied part of an annotation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NewAnnotation {
    pub position: [f64; 3],
    pub radius_um: f64,
    #[serde(default)]
    pub label: String,
    #[serde(default = "default_color")]
    pub color: Rgb,
    #[serde(default = "identity")]
    pub view_transform: [[f64; 4]; 4],
    #[serde(default = "default_author")]
    pub author: String,
}

fn default_color() -> Rgb {
    [255, 255, 0]
}

fn identity() -> [[f64; 4]; 4] {
    IDENTITY_TRANSFORM
}

fn default_author() -> String {
    String::from("anonymous")
}

pub trait AnnotationStore {
    /// Next unused id; ids are never reused, tombstoned ones included.
    fn next_id(&self) -> u64;
    /// Persists a new or updated record before returning.
    fn persist(&mut self, a: &Annotation) -> Result<(), AnalyticsError>;
    /// Latest state of every annotation ever stored, ordered by id.
    fn records(&self) -> Vec<Annotation>;

    fn live(&self) -> Vec<Annotation> {
        self.records().into_iter().filter(|a| !a.deleted).collect()
    }

    fn tombstone(&mut self, id: u64) -> Result<Annotation, AnalyticsError> {
        let mut a = self
            .records()
            .into_iter()
            .find(|a| a.id == id && !a.deleted)
            .ok_or(AnalyticsError::UnknownAnnotation(id))?;
        a.deleted = true;
        self.persist(&a)?;
        Ok(a)
    }
}

/// Creates and persists an annotation, deriving its section index from the stack.
pub fn place_annotation(
    store: &mut dyn AnnotationStore,
    new: NewAnnotation,
    stack: &SectionStack<f64>,
) -> Result<Annotation, AnalyticsError> {
    if !(new.radius_um > 0.0) || !new.radius_um.is_finite() {
        return Err(AnalyticsError::InvalidOperation(format!(
            "annotation radius must be > 0, got {}",
            new.radius_um
        )));
    }
    if new.position.iter().any(|c| !c.is_finite()) {
        return Err(AnalyticsError::InvalidOperation(
            "annotation position is not finite".into(),
        ));
    }
    let a = Annotation {
        id: store.next_id(),
        position: new.position,
        radius_um: new.radius_um,
        label: new.label,
        color: new.color,
        view_transform: new.view_transform,
        section_index: stack.section_index_for_z(new.position[2]),
        created_at: Utc::now(),
        author: new.author,
        deleted: false,
    };
    store.persist(&a)?;
    Ok(a)
}

#[derive(Debug, Default)]
pub struct MemoryAnnotationStore {
    by_id: BTreeMap<u64, Annotation>,
}

impl AnnotationStore for MemoryAnnotationStore {
    fn next_id(&self) -> u64 {
        self.by_id.keys().next_back().map_or(1, |k| k + 1)
    }

    fn persist(&mut self, a: &Annotation) -> Result<(), AnalyticsError> {
        self.by_id.insert(a.id, a.clone());
        Ok(())
    }

    fn records(&self) -> Vec<Annotation> {
        self.by_id.values().cloned().collect()
    }
}

/// Line-delimited JSON store: every create and every tombstone appends the
/// full record; the last line for an id is its current state.
#[derive(Debug)]
pub struct FileAnnotationStore {
    path: PathBuf,
    file: File,
    by_id: BTreeMap<u64, Annotation>,
}

impl FileAnnotationStore {
    pub fn open(path: impl AsRef<Path>) -> Result<Self, AnalyticsError> {
        let path = path.as_ref().to_path_buf();
        let mut by_id = BTreeMap::new();
        for a in read_records::<Annotation>(&path)? {
            by_id.insert(a.id, a);
        }
        let file = open_for_append(&path)?;
        Ok(Self { path, file, by_id })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }
}

impl AnnotationStore for FileAnnotationStore {
    fn next_id(&self) -> u64 {
        self.by_id.keys().next_back().map_or(1, |k| k + 1)
    }

    fn persist(&mut self, a: &Annotation) -> Result<(), AnalyticsError> {
        append_record(&mut self.file, &self.path, a)?;
        self.by_id.insert(a.id, a.clone());
        Ok(())
    }

    fn records(&self) -> Vec<Annotation> {
        self.by_id.values().cloned().collect()
    }
}
