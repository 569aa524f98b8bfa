//! Reconstruction and inspection of serial-section histology volumes.
//!
//! A registered stack of sections becomes a scalar [`Volume`], is filtered,
//! interpolated along z and turned into an [`IndexedMesh`] by marching cubes.
//! Meshes are coloured per connected component or by shape diameter, painted
//! along geodesics and annotated; the paint journal and annotation store are
//! append-only files that reproduce the state after a restart.
//!
//! Geometry is generic over [`Real`] (`f32` or `f64`). The aliases below fix
//! the common choices: `f32` meshes and volumes for storage and serving,
//! `f64` where accumulated error matters.

pub mod analytics;
pub mod geom;
pub mod isosurface;
pub mod mesh;
pub mod scalar;
pub mod section;
pub mod synth;
pub mod volume;

pub use analytics::AnalyticsError;
pub use geom::Vec3;
pub use isosurface::{extract_mesh, marching_cubes, IsoError, RawTriangleSoup};
pub use mesh::{IndexedMesh, MeshError, Rgb};
pub use scalar::Real;
pub use section::{step_section, SectionCuboid, SectionError, SectionStack};
pub use synth::{synthesize, SynthError, SyntheticKind, SyntheticSpec};
pub use volume::{Volume, VolumeError};

pub type Mesh = IndexedMesh<f32>;
pub type MeshF64 = IndexedMesh<f64>;
pub type Volume32 = Volume<f32>;
pub type VolumeF64 = Volume<f64>;
pub type Stack = SectionStack<f64>;

/// Leading name of an error message, e.g. `"NoSeedVertex"`. Every error in
/// the crate renders as `Name: details`.
pub fn error_name(err: &impl std::fmt::Display) -> String {
    let text = err.to_string();
    match text.split_once(':') {
        Some((name, _)) if !name.is_empty() && name.chars().all(|c| c.is_ascii_alphanumeric()) => {
            name.to_string()
        }
        _ => String::from("Error"),
    }
}
