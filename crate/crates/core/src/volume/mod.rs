//! Scalar voxel volumes built from registered section stacks, and the
//! filters applied before meshing.
//!
//! Values are normalized intensities in `[0, 1]`, stored x-fastest:
//! `data[x + nx * (y + ny * z)]`. Spacing is in µm per voxel.

mod filter;
mod io;

pub use filter::{apply_filter, FilterSpec};
pub use io::{load_stack, read_hvol, write_hvol, Channel, HVOL_MAGIC, HVOL_VERSION};

use std::path::PathBuf;

use thiserror::Error;

use crate::scalar::Real;

#[derive(Debug, Error)]
pub enum VolumeError {
    #[error("EmptyStack: no section images given")]
    EmptyStack,
    #[error("MixedDimensions: {path} is {got:?} px, expected {expected:?}")]
    MixedDimensions {
        path: PathBuf,
        got: (u32, u32),
        expected: (u32, u32),
    },
    #[error("UnreadableImage: {path}: {reason}")]
    UnreadableImage { path: PathBuf, reason: String },
    #[error("InvalidVolume: {0}")]
    Invalid(String),
    #[error(
        "RadiusExceedsVolume: structuring element {extent} voxels exceeds volume dims {dims:?}"
    )]
    RadiusExceedsVolume { extent: usize, dims: [usize; 3] },
    #[error("MalformedVolumeFile: {0}")]
    MalformedFile(String),
    #[error("IoFailure: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Volume<T> {
    dims: [usize; 3],
    spacing: [T; 3],
    data: Vec<T>,
    pub provenance: String,
}

impl<T: Real> Volume<T> {
    /// Builds a volume, checking shape, spacing and the `[0, 1]` value range.
    pub fn new(dims: [usize; 3], spacing: [T; 3], data: Vec<T>) -> Result<Self, VolumeError> {
        if dims.iter().any(|&d| d == 0) {
            return Err(VolumeError::Invalid(format!(
                "dims must be >= 1, got {dims:?}"
            )));
        }
        if spacing.iter().any(|&s| !(s > T::zero()) || !s.is_finite()) {
            return Err(VolumeError::Invalid(format!(
                "spacing must be positive, got {spacing:?}"
            )));
        }
        let expected = dims[0] * dims[1] * dims[2];
        if data.len() != expected {
            return Err(VolumeError::Invalid(format!(
                "data length {} != {} voxels",
                data.len(),
                expected
            )));
        }
        if let Some(i) = data
            .iter()
            .position(|&v| !(v >= T::zero() && v <= T::one()))
        {
            return Err(VolumeError::Invalid(format!(
                "value {} at voxel {} outside [0,1]",
                data[i], i
            )));
        }
        Ok(Self {
            dims,
            spacing,
            data,
            provenance: String::new(),
        })
    }

    /// Volume filled with one value.
    pub fn filled(dims: [usize; 3], spacing: [T; 3], value: T) -> Result<Self, VolumeError> {
        let n = dims.iter().product();
        Self::new(dims, spacing, vec![value; n])
    }

    /// Samples `f(x, y, z)` at every voxel (voxel indices, not µm); results are clamped to `[0, 1]`.
    pub fn from_fn(
        dims: [usize; 3],
        spacing: [T; 3],
        mut f: impl FnMut(usize, usize, usize) -> T,
    ) -> Result<Self, VolumeError> {
        let mut data = Vec::with_capacity(dims.iter().product());
        for z in 0..dims[2] {
            for y in 0..dims[1] {
                for x in 0..dims[0] {
                    data.push(clamp_unit(f(x, y, z)));
                }
            }
        }
        Self::new(dims, spacing, data)
    }

    pub(crate) fn from_parts_unchecked(dims: [usize; 3], spacing: [T; 3], data: Vec<T>) -> Self {
        debug_assert_eq!(data.len(), dims.iter().product::<usize>());
        Self {
            dims,
            spacing,
            data,
            provenance: String::new(),
        }
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn spacing(&self) -> [T; 3] {
        self.spacing
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn into_data(self) -> Vec<T> {
        self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn index(&self, x: usize, y: usize, z: usize) -> usize {
        x + self.dims[0] * (y + self.dims[1] * z)
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize, z: usize) -> T {
        self.data[self.index(x, y, z)]
    }

    /// Ratio of z spacing to the in-plane spacing.
    pub fn anisotropy(&self) -> T {
        self.spacing[2] / self.spacing[0].min(self.spacing[1])
    }

    pub fn with_provenance(mut self, provenance: impl Into<String>) -> Self {
        self.provenance = provenance.into();
        self
    }

    /// Inserts `factor - 1` linearly blended planes between each pair of
    /// sections. Original planes are copied unchanged.
    pub fn interpolate_z(&self, factor: usize) -> Result<Self, VolumeError> {
        if factor == 0 {
            return Err(VolumeError::Invalid(
                "z interpolation factor must be >= 1".into(),
            ));
        }
        if factor == 1 || self.dims[2] == 1 {
            let mut out = self.clone();
            out.spacing[2] = self.spacing[2] / T::of_usize(factor);
            return Ok(out);
        }
        let [nx, ny, nz] = self.dims;
        let plane = nx * ny;
        let nz_out = (nz - 1) * factor + 1;
        let mut data = Vec::with_capacity(plane * nz_out);
        let k = T::of_usize(factor);
        for z in 0..nz - 1 {
            let lo = &self.data[z * plane..(z + 1) * plane];
            let hi = &self.data[(z + 1) * plane..(z + 2) * plane];
            data.extend_from_slice(lo);
            for step in 1..factor {
                let t = T::of_usize(step) / k;
                data.extend(
                    lo.iter()
                        .zip(hi)
                        .map(|(&a, &b)| clamp_unit((T::one() - t) * a + t * b)),
                );
            }
        }
        data.extend_from_slice(&self.data[(nz - 1) * plane..]);
        let mut spacing = self.spacing;
        spacing[2] = spacing[2] / k;
        let mut out = Self::from_parts_unchecked([nx, ny, nz_out], spacing, data);
        out.provenance = format!("{} | z-interpolated x{}", self.provenance, factor);
        Ok(out)
    }

    /// Converts the scalar type of the volume.
    pub fn cast<U: Real>(&self) -> Volume<U> {
        Volume {
            dims: self.dims,
            spacing: self.spacing.map(|s| U::of(s.as_f64())),
            data: self.data.iter().map(|&v| U::of(v.as_f64())).collect(),
            provenance: self.provenance.clone(),
        }
    }
}

#[inline]
pub(crate) fn clamp_unit<T: Real>(v: T) -> T {
    if v.is_nan() {
        T::zero()
    } else {
        v.max(T::zero()).min(T::one())
    }
}
