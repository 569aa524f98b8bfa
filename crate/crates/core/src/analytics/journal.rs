use std::fs::File;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::records::{append_record, open_for_append, read_records};
use super::{paint_region, AnalyticsError, PaintOperation};
use crate::mesh::{build_adjacency, IndexedMesh, Rgb, VertexAdjacency};
use crate::scalar::Real;

/// One journal line: the operation plus its project-wide sequence number.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JournalEntry {
    pub seq: u64,
    #[serde(flatten)]
    pub op: PaintOperation,
}

/// Append-only paint journal file.
#[derive(Debug)]
pub struct PaintJournal {
    path: PathBuf,
    file: File,
    entries: Vec<JournalEntry>,
}

impl PaintJournal {
    pub fn open(path: impl AsRef<Path>) -> Result<Self, AnalyticsError> {
        let path = path.as_ref().to_path_buf();
        let entries: Vec<JournalEntry> = read_records(&path)?;
        let file = open_for_append(&path)?;
        Ok(Self {
            path,
            file,
            entries,
        })
    }

    pub fn entries(&self) -> &[JournalEntry] {
        &self.entries
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    /// Operations for one mesh, in journal order.
    pub fn ops_for<'a>(
        &'a self,
        mesh_id: &'a str,
    ) -> impl Iterator<Item = &'a PaintOperation> + 'a {
        self.entries
            .iter()
            .filter(move |e| e.op.mesh_id == mesh_id)
            .map(|e| &e.op)
    }

    pub fn next_seq(&self) -> u64 {
        self.entries.last().map_or(1, |e| e.seq + 1)
    }

    /// Durably appends `op` and returns its sequence number.
    pub fn append(&mut self, op: PaintOperation) -> Result<u64, AnalyticsError> {
        let entry = JournalEntry {
            seq: self.next_seq(),
            op,
        };
        append_record(&mut self.file, &self.path, &entry)?;
        let seq = entry.seq;
        self.entries.push(entry);
        Ok(seq)
    }
}

/// Applies `ops` in order to `colors` (the colour buffer of `m`).
pub fn replay_onto<'a, T: Real>(
    m: &IndexedMesh<T>,
    adj: &VertexAdjacency<T>,
    colors: &mut [Rgb],
    mesh_id: &str,
    ops: impl IntoIterator<Item = &'a PaintOperation>,
) -> Result<(), AnalyticsError> {
    for (seq, op) in ops.into_iter().enumerate() {
        if op.mesh_id != mesh_id {
            return Err(AnalyticsError::MeshMismatch {
                seq,
                expected: mesh_id.to_string(),
                found: op.mesh_id.clone(),
            });
        }
        let (_, painted) = paint_region(m, adj, op)?;
        for v in painted {
            colors[v as usize] = op.color;
        }
    }
    Ok(())
}

/// Reproduces the coloured state of `mesh` after `journal`. Later strokes
/// overwrite earlier ones.
pub fn journal_replay<T: Real>(
    mesh: &IndexedMesh<T>,
    mesh_id: &str,
    journal: &[PaintOperation],
) -> Result<IndexedMesh<T>, AnalyticsError> {
    let mut out = mesh.clone();
    if journal.is_empty() {
        return Ok(out);
    }
    let adj = build_adjacency(mesh);
    replay_onto(mesh, &adj, &mut out.colors, mesh_id, journal)?;
    Ok(out)
}
