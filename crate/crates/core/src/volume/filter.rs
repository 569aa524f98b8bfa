use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{clamp_unit, Volume, VolumeError};
use crate::scalar::Real;

/// Pre-meshing volume filter.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FilterSpec {
    /// Greyscale closing (dilation then erosion) with a cubic structuring
    /// element of edge `2 * radius_vox + 1`.
    Close { radius_vox: usize },
    /// Separable Gaussian blur; the kernel is truncated at `ceil(3 sigma)`.
    Blur { sigma_vox: f64 },
}

impl FilterSpec {
    pub fn validate(&self) -> Result<(), VolumeError> {
        match *self {
            FilterSpec::Close { radius_vox } if radius_vox == 0 => {
                Err(VolumeError::Invalid("closing radius must be >= 1".into()))
            }
            FilterSpec::Blur { sigma_vox } if !(sigma_vox > 0.0) || !sigma_vox.is_finite() => Err(
                VolumeError::Invalid(format!("blur sigma must be > 0, got {sigma_vox}")),
            ),
            _ => Ok(()),
        }
    }
}

/// Applies `spec` to `v`. Borders are handled by clamping coordinates to the
/// nearest edge voxel; outputs are clamped to `[0, 1]`.
pub fn apply_filter<T: Real>(v: &Volume<T>, spec: FilterSpec) -> Result<Volume<T>, VolumeError> {
    spec.validate()?;
    let dims = v.dims();
    let data = match spec {
        FilterSpec::Close { radius_vox } => {
            let extent = 2 * radius_vox + 1;
            if extent > dims.iter().copied().max().unwrap_or(0) {
                return Err(VolumeError::RadiusExceedsVolume { extent, dims });
            }
            let r = radius_vox as isize;
            let mut cur = v.data().to_vec();
            for axis in 0..3 {
                cur = window_pass(&cur, dims, axis, r, T::neg_infinity(), |acc, _, x| {
                    acc.max(x)
                });
            }
            for axis in 0..3 {
                cur = window_pass(&cur, dims, axis, r, T::infinity(), |acc, _, x| acc.min(x));
            }
            cur
        }
        FilterSpec::Blur { sigma_vox } => {
            let kernel: Vec<T> = gaussian_kernel(sigma_vox).into_iter().map(T::of).collect();
            let r = (kernel.len() / 2) as isize;
            let mut cur = v.data().to_vec();
            for axis in 0..3 {
                cur = window_pass(&cur, dims, axis, r, T::zero(), |acc, d, x| {
                    acc + kernel[(d + r) as usize] * x
                });
            }
            cur
        }
    };
    let data = data.into_iter().map(clamp_unit).collect();
    let mut out = Volume::from_parts_unchecked(dims, v.spacing(), data);
    out.provenance = format!("{} | {:?}", v.provenance, spec);
    Ok(out)
}

/// Normalized Gaussian weights for offsets `-r..=r`, `r = max(1, ceil(3 sigma))`.
pub(crate) fn gaussian_kernel(sigma: f64) -> Vec<f64> {
    let r = ((3.0 * sigma).ceil() as isize).max(1);
    let w: Vec<f64> = (-r..=r)
        .map(|d| (-((d * d) as f64) / (2.0 * sigma * sigma)).exp())
        .collect();
    let sum: f64 = w.iter().sum();
    w.into_iter().map(|x| x / sum).collect()
}

/// One-dimensional window reduction along `axis` with edge clamping:
/// `out[i] = fold(init, (d, src[clamp(i + d)]) for d in -r..=r)`.
fn window_pass<T, F>(src: &[T], dims: [usize; 3], axis: usize, r: isize, init: T, fold: F) -> Vec<T>
where
    T: Real,
    F: Fn(T, isize, T) -> T + Sync,
{
    let [nx, ny, nz] = dims;
    let plane = nx * ny;
    let stride = [1, nx, plane][axis];
    let len = dims[axis] as isize;
    let mut out = vec![T::zero(); src.len()];
    out.par_chunks_mut(plane).enumerate().for_each(|(z, slab)| {
        for y in 0..ny {
            for x in 0..nx {
                let pos = [x, y, z][axis] as isize;
                let base = x + nx * (y + ny * z) - pos as usize * stride;
                let mut acc = init;
                for d in -r..=r {
                    let c = (pos + d).clamp(0, len - 1) as usize;
                    acc = fold(acc, d, src[base + c * stride]);
                }
                slab[x + nx * y] = acc;
            }
        }
    });
    debug_assert_eq!(nz * plane, src.len());
    out
}
