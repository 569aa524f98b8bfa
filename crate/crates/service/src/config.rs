//! Project files: which meshes to serve, where the section images are, and
//! where paints and annotations are journaled.
//!
//! Relative paths resolve against `HISTOSCOPE_DATA_DIR` when set, otherwise
//! against the directory holding the project file.

use std::collections::HashSet;
use std::path::{Path, PathBuf};

use histoscope_core::{SectionStack, Vec3};
use serde::{Deserialize, Serialize};

use crate::ServiceError;

pub const DATA_DIR_ENV: &str = "HISTOSCOPE_DATA_DIR";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProjectConfig {
    pub name: String,
    pub meshes: Vec<MeshEntry>,
    pub stack: StackConfig,
    #[serde(default = "default_journal")]
    pub journal_path: PathBuf,
    #[serde(default = "default_annotations")]
    pub annotation_path: PathBuf,
    /// Near clipping distance the viewer starts with, in world metres.
    #[serde(default = "default_clip")]
    pub default_clip_distance_m: f64,
    /// Viewer hint: world metres per millimetre of specimen.
    #[serde(default = "default_world_scale")]
    pub world_scale_m_per_mm: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshEntry {
    pub id: String,
    pub path: PathBuf,
    #[serde(default)]
    pub display_name: Option<String>,
    #[serde(default = "yes")]
    pub initially_visible: bool,
}

/// Section images come from exactly one of `image_glob`, `images` or `blank`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StackConfig {
    #[serde(default)]
    pub image_glob: Option<String>,
    #[serde(default)]
    pub images: Vec<PathBuf>,
    /// Stack geometry without image files.
    #[serde(default)]
    pub blank: Option<BlankStack>,
    pub pixel_pitch_um: f64,
    pub thickness_um: f64,
    #[serde(default)]
    pub origin: [f64; 3],
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlankStack {
    pub count: usize,
    pub width: u32,
    pub height: u32,
}

fn default_journal() -> PathBuf {
    PathBuf::from("paint_journal.jsonl")
}

fn default_annotations() -> PathBuf {
    PathBuf::from("annotations.jsonl")
}

fn default_clip() -> f64 {
    0.6
}

fn default_world_scale() -> f64 {
    1.0
}

fn yes() -> bool {
    true
}

fn invalid(msg: impl Into<String>) -> ServiceError {
    ServiceError::ConfigInvalid(msg.into())
}

impl ProjectConfig {
    /// Reads a JSON or TOML project file (chosen by extension, JSON otherwise).
    pub fn load(path: impl AsRef<Path>) -> Result<ResolvedProject, ServiceError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| invalid(format!("cannot read {}: {e}", path.display())))?;
        let config: ProjectConfig = if path.extension().is_some_and(|e| e == "toml") {
            toml::from_str(&text).map_err(|e| invalid(format!("{}: {e}", path.display())))?
        } else {
            serde_json::from_str(&text).map_err(|e| invalid(format!("{}: {e}", path.display())))?
        };
        let base = match std::env::var_os(DATA_DIR_ENV) {
            Some(dir) if !dir.is_empty() => PathBuf::from(dir),
            _ => path.parent().map(Path::to_path_buf).unwrap_or_default(),
        };
        config.resolve(&base)
    }

    /// Checks the config and makes every path absolute against `base`.
    pub fn resolve(self, base: &Path) -> Result<ResolvedProject, ServiceError> {
        let at = |p: &Path| {
            if p.is_absolute() {
                p.to_path_buf()
            } else {
                base.join(p)
            }
        };
        if self.meshes.is_empty() {
            return Err(invalid("project lists no meshes"));
        }
        let mut seen = HashSet::new();
        let mut meshes = Vec::with_capacity(self.meshes.len());
        for m in &self.meshes {
            if m.id.is_empty()
                || !m
                    .id
                    .chars()
                    .all(|c| c.is_ascii_alphanumeric() || "-_.".contains(c))
            {
                return Err(invalid(format!(
                    "mesh id {:?} must be non-empty [A-Za-z0-9._-]",
                    m.id
                )));
            }
            if !seen.insert(m.id.clone()) {
                return Err(invalid(format!("duplicate mesh id {:?}", m.id)));
            }
            let path = at(&m.path);
            if !path.is_file() {
                return Err(invalid(format!(
                    "mesh {:?}: file {} not found",
                    m.id,
                    path.display()
                )));
            }
            meshes.push(MeshEntry { path, ..m.clone() });
        }
        if !(self.default_clip_distance_m > 0.0) || !(self.world_scale_m_per_mm > 0.0) {
            return Err(invalid("clip distance and world scale must be > 0"));
        }
        let s = &self.stack;
        let origin = Vec3::new(s.origin[0], s.origin[1], s.origin[2]);
        let sources =
            s.image_glob.is_some() as u8 + !s.images.is_empty() as u8 + s.blank.is_some() as u8;
        if sources != 1 {
            return Err(invalid(
                "stack needs exactly one of image_glob, images, blank",
            ));
        }
        let stack = if let Some(b) = s.blank {
            SectionStack::from_dims(
                b.count,
                b.width,
                b.height,
                s.pixel_pitch_um,
                s.thickness_um,
                s.origin,
            )
        } else {
            let paths: Vec<PathBuf> = match &s.image_glob {
                Some(pattern) => {
                    let full = at(Path::new(pattern));
                    let found: Result<Vec<PathBuf>, _> = glob::glob(&full.to_string_lossy())
                        .map_err(|e| invalid(format!("bad image glob {pattern:?}: {e}")))?
                        .collect();
                    let mut found = found.map_err(|e| invalid(e.to_string()))?;
                    found.sort();
                    if found.is_empty() {
                        return Err(invalid(format!(
                            "image glob {} matches no files",
                            full.display()
                        )));
                    }
                    found
                }
                None => s.images.iter().map(|p| at(p)).collect(),
            };
            for p in &paths {
                if !p.is_file() {
                    return Err(invalid(format!("section image {} not found", p.display())));
                }
            }
            SectionStack::from_paths(&paths, s.pixel_pitch_um, s.thickness_um, origin)
        }
        .map_err(|e| invalid(e.to_string()))?;
        Ok(ResolvedProject {
            journal_path: at(&self.journal_path),
            annotation_path: at(&self.annotation_path),
            meshes,
            stack,
            config: self,
        })
    }
}

/// A validated project with absolute paths.
#[derive(Clone, Debug)]
pub struct ResolvedProject {
    pub config: ProjectConfig,
    pub meshes: Vec<MeshEntry>,
    pub stack: SectionStack<f64>,
    pub journal_path: PathBuf,
    pub annotation_path: PathBuf,
}
