//! In-memory project state rebuilt from the mesh files, the paint journal
//! and the annotation store.

use std::collections::HashMap;
use std::path::Path;
use std::sync::{Arc, Mutex, RwLock};

use histoscope_core::analytics::{
    paint_region, place_annotation, replay_onto, Annotation, AnnotationStore, FileAnnotationStore,
    NewAnnotation, PaintJournal, PaintOperation,
};
use histoscope_core::mesh::{build_adjacency, load_mesh, to_ply_bytes, VertexAdjacency};
use histoscope_core::{Mesh, Rgb, SectionStack};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::ResolvedProject;
use crate::ServiceError;

/// Encoded coloured mesh and its content digest.
#[derive(Debug)]
pub struct Snapshot {
    pub ply: Arc<Vec<u8>>,
    pub digest: String,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub struct MeshSlot {
    pub id: String,
    pub display_name: String,
    pub initially_visible: bool,
    base: Mesh,
    adj: VertexAdjacency<f32>,
    colors: RwLock<Arc<Vec<Rgb>>>,
    snapshot: Mutex<Option<Arc<Snapshot>>>,
    /// Serializes paints on this mesh in arrival order.
    writer: Arc<tokio::sync::Mutex<()>>,
}

impl MeshSlot {
    pub fn vertex_count(&self) -> usize {
        self.base.vertex_count()
    }

    pub fn face_count(&self) -> usize {
        self.base.face_count()
    }

    pub fn colors(&self) -> Arc<Vec<Rgb>> {
        self.colors.read().unwrap().clone()
    }

    /// Current coloured mesh.
    pub fn current(&self) -> Mesh {
        let mut m = self.base.clone();
        m.colors = self.colors().as_ref().clone();
        m
    }

    /// Binary PLY of the current state, cached until the next paint.
    pub fn snapshot(&self) -> Arc<Snapshot> {
        let mut cached = self.snapshot.lock().unwrap();
        if let Some(s) = cached.as_ref() {
            return s.clone();
        }
        let ply = to_ply_bytes(&self.current());
        let s = Arc::new(Snapshot {
            digest: sha256_hex(&ply),
            ply: Arc::new(ply),
        });
        *cached = Some(s.clone());
        s
    }

    fn set_colors(&self, colors: Vec<Rgb>) {
        let changed = **self.colors.read().unwrap() != colors;
        *self.colors.write().unwrap() = Arc::new(colors);
        if changed {
            *self.snapshot.lock().unwrap() = None;
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PaintSummary {
    pub painted_count: usize,
    pub journal_seq: u64,
    pub seed_vertex: usize,
    /// Ascending, so a viewer can apply the stroke to its local copy.
    pub painted_vertices: Vec<u32>,
}

pub struct ProjectState {
    pub project: ResolvedProject,
    meshes: Vec<Arc<MeshSlot>>,
    by_id: HashMap<String, usize>,
    journal: Mutex<PaintJournal>,
    annotations: Mutex<FileAnnotationStore>,
}

impl ProjectState {
    /// Loads every mesh and replays the journal onto it.
    pub fn open(project: ResolvedProject) -> Result<Self, ServiceError> {
        let journal = PaintJournal::open(&project.journal_path)?;
        let annotations = FileAnnotationStore::open(&project.annotation_path)?;
        let mut meshes = Vec::with_capacity(project.meshes.len());
        let mut by_id = HashMap::new();
        for entry in &project.meshes {
            let base: Mesh = load_mesh(&entry.path).map_err(|e| {
                ServiceError::ConfigInvalid(format!("mesh {}: {e}", entry.path.display()))
            })?;
            let adj = build_adjacency(&base);
            let mut colors = base.colors.clone();
            replay_onto(
                &base,
                &adj,
                &mut colors,
                &entry.id,
                journal.ops_for(&entry.id),
            )
            .map_err(|e| ServiceError::ReplayFailed(format!("mesh {}: {e}", entry.id)))?;
            tracing::info!(
                mesh = %entry.id,
                vertices = base.vertex_count(),
                replayed = journal.ops_for(&entry.id).count(),
                "mesh loaded"
            );
            by_id.insert(entry.id.clone(), meshes.len());
            meshes.push(Arc::new(MeshSlot {
                id: entry.id.clone(),
                display_name: entry
                    .display_name
                    .clone()
                    .unwrap_or_else(|| entry.id.clone()),
                initially_visible: entry.initially_visible,
                base,
                adj,
                colors: RwLock::new(Arc::new(colors)),
                snapshot: Mutex::new(None),
                writer: Arc::new(tokio::sync::Mutex::new(())),
            }));
        }
        let orphans = journal
            .entries()
            .iter()
            .filter(|e| !by_id.contains_key(&e.op.mesh_id))
            .count();
        if orphans > 0 {
            tracing::warn!(
                orphans,
                "journal entries reference meshes not in the project"
            );
        }
        Ok(Self {
            project,
            meshes,
            by_id,
            journal: Mutex::new(journal),
            annotations: Mutex::new(annotations),
        })
    }

    pub fn load(config_path: impl AsRef<Path>) -> Result<Self, ServiceError> {
        Self::open(crate::ProjectConfig::load(config_path)?)
    }

    pub fn meshes(&self) -> &[Arc<MeshSlot>] {
        &self.meshes
    }

    pub fn mesh(&self, id: &str) -> Result<&Arc<MeshSlot>, ServiceError> {
        self.by_id
            .get(id)
            .map(|&i| &self.meshes[i])
            .ok_or_else(|| ServiceError::UnknownMesh(id.to_string()))
    }

    pub fn stack(&self) -> &SectionStack<f64> {
        &self.project.stack
    }

    /// Applies and journals one paint. The stroke is durable before the
    /// served colours change; a failed append leaves both untouched.
    pub async fn paint(self: &Arc<Self>, op: PaintOperation) -> Result<PaintSummary, ServiceError> {
        let slot = self.mesh(&op.mesh_id)?.clone();
        let guard = slot.writer.clone().lock_owned().await;
        let state = self.clone();
        tokio::task::spawn_blocking(move || {
            let _guard = guard;
            state.paint_locked(&slot, op)
        })
        .await
        .map_err(|e| ServiceError::Internal(e.to_string()))?
    }

    /// Same as [`Self::paint`] for callers outside an async runtime.
    pub fn paint_blocking(&self, op: PaintOperation) -> Result<PaintSummary, ServiceError> {
        let slot = self.mesh(&op.mesh_id)?.clone();
        let _guard = slot.writer.blocking_lock();
        self.paint_locked(&slot, op)
    }

    fn paint_locked(
        &self,
        slot: &MeshSlot,
        op: PaintOperation,
    ) -> Result<PaintSummary, ServiceError> {
        let (seed, painted) = paint_region(&slot.base, &slot.adj, &op)?;
        let color = op.color;
        let seq = self.journal.lock().unwrap().append(op)?;
        let mut colors = slot.colors().as_ref().clone();
        for &v in &painted {
            colors[v as usize] = color;
        }
        slot.set_colors(colors);
        Ok(PaintSummary {
            painted_count: painted.len(),
            journal_seq: seq,
            seed_vertex: seed,
            painted_vertices: painted,
        })
    }

    pub fn journal_len(&self) -> usize {
        self.journal.lock().unwrap().entries().len()
    }

    pub fn annotations(&self) -> Vec<Annotation> {
        self.annotations.lock().unwrap().live()
    }

    pub fn create_annotation(&self, new: NewAnnotation) -> Result<Annotation, ServiceError> {
        let mut store = self.annotations.lock().unwrap();
        Ok(place_annotation(&mut *store, new, &self.project.stack)?)
    }

    pub fn delete_annotation(&self, id: u64) -> Result<Annotation, ServiceError> {
        Ok(self.annotations.lock().unwrap().tombstone(id)?)
    }

    /// Writes the current coloured state of `id` as binary PLY.
    pub fn export_to(&self, id: &str, path: impl AsRef<Path>) -> Result<String, ServiceError> {
        let snap = self.mesh(id)?.snapshot();
        std::fs::write(path, snap.ply.as_slice())?;
        Ok(snap.digest.clone())
    }
}
