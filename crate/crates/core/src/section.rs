//! The original serial sections as a positioned image stack, and the
//! one-section-thick cuboid used to overlay a section on the meshes.
//!
//! Volume, meshes and stack share one world frame in µm. Section `k` occupies
//! the half-open slab `[origin.z + k·t, origin.z + (k+1)·t)`.

use std::io::Cursor;
use std::path::{Path, PathBuf};

use image::imageops::FilterType;
use image::{DynamicImage, ImageFormat};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::Vec3;
use crate::scalar::Real;

#[derive(Debug, Error)]
pub enum SectionError {
    #[error("IndexOutOfRange: section {index} requested, stack has {count}")]
    IndexOutOfRange { index: i64, count: usize },
    #[error("InvalidStack: {0}")]
    Invalid(String),
    #[error("MixedDimensions: {path} is {got:?} px, expected {expected:?}")]
    MixedDimensions {
        path: PathBuf,
        got: (u32, u32),
        expected: (u32, u32),
    },
    #[error("UnreadableImage: {path}: {reason}")]
    UnreadableImage { path: PathBuf, reason: String },
    #[error("MipOutOfRange: level {level} requested, deepest is {max}")]
    MipOutOfRange { level: u32, max: u32 },
    #[error("NoPixelData: section {0} has no image file")]
    NoPixelData(usize),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SectionImage {
    pub path: Option<PathBuf>,
    pub width: u32,
    pub height: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SectionStack<T> {
    images: Vec<SectionImage>,
    pixel_pitch_um: T,
    thickness_um: T,
    origin: Vec3<T>,
}

/// Axis-aligned box of one section, in µm.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SectionCuboid<T> {
    pub section_index: usize,
    pub lo: Vec3<T>,
    pub hi: Vec3<T>,
    /// Edge lengths `[w·pitch, h·pitch, thickness]`. The z entry is the
    /// stack thickness itself, not `hi.z - lo.z`, so it carries no rounding.
    pub size: [T; 3],
    pub texture: Option<PathBuf>,
    pub front_face_culling: bool,
}

impl<T: Real> SectionCuboid<T> {
    /// Whether `z` lies in the half-open z span of this cuboid.
    pub fn contains_z(&self, z: T) -> bool {
        self.lo.z <= z && z < self.hi.z
    }
}

fn check_scales<T: Real>(pitch: T, thickness: T) -> Result<(), SectionError> {
    if !(pitch > T::zero()) || !pitch.is_finite() {
        return Err(SectionError::Invalid(format!(
            "pixel pitch must be > 0, got {pitch}"
        )));
    }
    if !(thickness > T::zero()) || !thickness.is_finite() {
        return Err(SectionError::Invalid(format!(
            "thickness must be > 0, got {thickness}"
        )));
    }
    Ok(())
}

impl<T: Real> SectionStack<T> {
    /// Reads image headers only; all sections must share one size.
    pub fn from_paths<P: AsRef<Path>>(
        paths: &[P],
        pixel_pitch_um: T,
        thickness_um: T,
        origin: Vec3<T>,
    ) -> Result<Self, SectionError> {
        check_scales(pixel_pitch_um, thickness_um)?;
        if paths.is_empty() {
            return Err(SectionError::Invalid("no section images given".into()));
        }
        let mut images = Vec::with_capacity(paths.len());
        let mut expected = None;
        for p in paths {
            let path = p.as_ref().to_path_buf();
            let (w, h) =
                image::image_dimensions(&path).map_err(|e| SectionError::UnreadableImage {
                    path: path.clone(),
                    reason: e.to_string(),
                })?;
            match expected {
                None => expected = Some((w, h)),
                Some(e) if e != (w, h) => {
                    return Err(SectionError::MixedDimensions {
                        path,
                        got: (w, h),
                        expected: e,
                    })
                }
                _ => {}
            }
            images.push(SectionImage {
                path: Some(path),
                width: w,
                height: h,
            });
        }
        Ok(Self {
            images,
            pixel_pitch_um,
            thickness_um,
            origin,
        })
    }

    /// A stack of known geometry without image files.
    pub fn from_dims(
        count: usize,
        width: u32,
        height: u32,
        pixel_pitch_um: T,
        thickness_um: T,
        origin: [T; 3],
    ) -> Result<Self, SectionError> {
        check_scales(pixel_pitch_um, thickness_um)?;
        if count == 0 || width == 0 || height == 0 {
            return Err(SectionError::Invalid(format!(
                "stack needs at least one non-empty section, got {count} x {width}x{height}"
            )));
        }
        Ok(Self {
            images: vec![
                SectionImage {
                    path: None,
                    width,
                    height,
                };
                count
            ],
            pixel_pitch_um,
            thickness_um,
            origin: Vec3::new(origin[0], origin[1], origin[2]),
        })
    }

    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    pub fn images(&self) -> &[SectionImage] {
        &self.images
    }

    pub fn pixel_pitch_um(&self) -> T {
        self.pixel_pitch_um
    }

    pub fn thickness_um(&self) -> T {
        self.thickness_um
    }

    pub fn origin(&self) -> Vec3<T> {
        self.origin
    }

    /// Lower z bound of section `k`.
    pub fn section_floor(&self, k: usize) -> T {
        self.origin.z + T::of_usize(k) * self.thickness_um
    }

    /// Index of the section whose slab contains `z`, clamped to the stack.
    ///
    /// The estimate `floor((z - origin.z) / t)` can be off by one near a
    /// boundary, so it is corrected against the same slab bounds that
    /// [`Self::cuboid_for`] reports.
    pub fn section_index_for_z(&self, z: T) -> usize {
        let last = self.len() - 1;
        if z.is_nan() || z < self.section_floor(0) {
            return 0;
        }
        let est = ((z - self.origin.z) / self.thickness_um).floor();
        let mut k = match est.to_f64() {
            Some(e) if e >= last as f64 => return self.clamp_high(z, last),
            Some(e) if e > 0.0 => e as usize,
            _ => 0,
        };
        while k > 0 && self.section_floor(k) > z {
            k -= 1;
        }
        while k < last && self.section_floor(k + 1) <= z {
            k += 1;
        }
        k
    }

    fn clamp_high(&self, z: T, last: usize) -> usize {
        let mut k = last;
        while k > 0 && self.section_floor(k) > z {
            k -= 1;
        }
        k
    }

    pub fn cuboid_for(
        &self,
        index: i64,
        front_face_culling: bool,
    ) -> Result<SectionCuboid<T>, SectionError> {
        if index < 0 || index as u64 >= self.len() as u64 {
            return Err(SectionError::IndexOutOfRange {
                index,
                count: self.len(),
            });
        }
        let k = index as usize;
        let img = &self.images[k];
        let w = T::of(img.width as f64) * self.pixel_pitch_um;
        let h = T::of(img.height as f64) * self.pixel_pitch_um;
        Ok(SectionCuboid {
            section_index: k,
            lo: Vec3::new(self.origin.x, self.origin.y, self.section_floor(k)),
            hi: Vec3::new(
                self.origin.x + w,
                self.origin.y + h,
                self.section_floor(k + 1),
            ),
            size: [w, h, self.thickness_um],
            texture: img.path.clone(),
            front_face_culling,
        })
    }

    /// Deepest mip level: the one where the longer side reaches 1 px.
    pub fn max_mip(&self) -> u32 {
        let img = &self.images[0];
        31 - img.width.max(img.height).leading_zeros()
    }

    /// Section `k` at mip level `mip` (each level halves both sides, rounding
    /// down, minimum 1 px), encoded as PNG.
    pub fn section_png(&self, k: usize, mip: u32) -> Result<Vec<u8>, SectionError> {
        let img = self.images.get(k).ok_or(SectionError::IndexOutOfRange {
            index: k as i64,
            count: self.len(),
        })?;
        let max = self.max_mip();
        if mip > max {
            return Err(SectionError::MipOutOfRange { level: mip, max });
        }
        let path = img.path.as_ref().ok_or(SectionError::NoPixelData(k))?;
        let unreadable = |reason: String| SectionError::UnreadableImage {
            path: path.clone(),
            reason,
        };
        let mut pixels = image::open(path).map_err(|e| unreadable(e.to_string()))?;
        if mip > 0 {
            let (w, h) = mip_dims(img.width, img.height, mip);
            pixels = pixels.resize_exact(w, h, FilterType::Triangle);
        }
        let pixels = match pixels {
            DynamicImage::ImageLuma8(_)
            | DynamicImage::ImageRgb8(_)
            | DynamicImage::ImageRgba8(_) => pixels,
            DynamicImage::ImageLuma16(_)
            | DynamicImage::ImageRgb16(_)
            | DynamicImage::ImageRgba16(_) => pixels,
            other => DynamicImage::ImageRgba8(other.to_rgba8()),
        };
        let mut out = Vec::new();
        pixels
            .write_to(&mut Cursor::new(&mut out), ImageFormat::Png)
            .map_err(|e| unreadable(e.to_string()))?;
        Ok(out)
    }
}

/// Pixel size of mip level `mip`.
pub fn mip_dims(width: u32, height: u32, mip: u32) -> (u32, u32) {
    ((width >> mip).max(1), (height >> mip).max(1))
}

/// Section shown after stepping `delta` from `current`, clamped to the stack.
pub fn step_section(current: i64, delta: i64, count: usize) -> usize {
    let last = count.saturating_sub(1) as i64;
    current.saturating_add(delta).clamp(0, last) as usize
}
