use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use image::DynamicImage;
use serde::{Deserialize, Serialize};

use super::{Volume, VolumeError};
use crate::scalar::Real;

pub const HVOL_MAGIC: &[u8; 4] = b"HVOL";
pub const HVOL_VERSION: u32 = 1;

/// How a scalar intensity is extracted from a section image.
///
/// Every mode maps dark (stained) pixels to high values.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Channel {
    #[default]
    LuminanceInverted,
    R,
    G,
    B,
}

impl FromStr for Channel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "luminance-inverted" | "luminance" => Ok(Channel::LuminanceInverted),
            "r" => Ok(Channel::R),
            "g" => Ok(Channel::G),
            "b" => Ok(Channel::B),
            other => Err(format!(
                "unknown channel {other:?}; expected luminance-inverted, r, g or b"
            )),
        }
    }
}

fn open_image(path: &Path) -> Result<DynamicImage, VolumeError> {
    image::ImageReader::open(path)
        .and_then(|r| r.with_guessed_format())
        .map_err(|e| VolumeError::UnreadableImage {
            path: path.to_path_buf(),
            reason: e.to_string(),
        })?
        .decode()
        .map_err(|e| VolumeError::UnreadableImage {
            path: path.to_path_buf(),
            reason: e.to_string(),
        })
}

/// Reads 16-bit samples of the requested channel, `0..=65535`, row-major.
fn channel_samples(img: &DynamicImage, channel: Channel) -> Vec<u16> {
    match channel {
        Channel::LuminanceInverted => img.to_luma16().into_raw(),
        Channel::R | Channel::G | Channel::B => {
            let c = match channel {
                Channel::R => 0,
                Channel::G => 1,
                _ => 2,
            };
            img.to_rgb16().pixels().map(|p| p.0[c]).collect()
        }
    }
}

/// Stacks section images into a volume: `sx = sy = pixel_pitch_um`,
/// `sz = section_thickness_um`, one z-plane per image in the given order.
pub fn load_stack<T: Real, P: AsRef<Path>>(
    image_paths: &[P],
    pixel_pitch_um: f64,
    section_thickness_um: f64,
    channel: Channel,
) -> Result<Volume<T>, VolumeError> {
    if image_paths.is_empty() {
        return Err(VolumeError::EmptyStack);
    }
    if !(pixel_pitch_um > 0.0) || !(section_thickness_um > 0.0) {
        return Err(VolumeError::Invalid(format!(
            "pixel pitch ({pixel_pitch_um}) and section thickness ({section_thickness_um}) must be > 0"
        )));
    }
    let mut expected: Option<(u32, u32)> = None;
    let mut data: Vec<T> = Vec::new();
    let full = T::of(65535.0);
    for path in image_paths {
        let path = path.as_ref();
        let img = open_image(path)?;
        let got = (img.width(), img.height());
        match expected {
            None => {
                expected = Some(got);
                data.reserve(got.0 as usize * got.1 as usize * image_paths.len());
            }
            Some(e) if e != got => {
                return Err(VolumeError::MixedDimensions {
                    path: path.to_path_buf(),
                    got,
                    expected: e,
                })
            }
            _ => {}
        }
        data.extend(
            channel_samples(&img, channel)
                .into_iter()
                .map(|s| T::one() - T::of(f64::from(s)) / full),
        );
    }
    let (w, h) = expected.expect("non-empty stack");
    let spacing = [
        T::of(pixel_pitch_um),
        T::of(pixel_pitch_um),
        T::of(section_thickness_um),
    ];
    let vol = Volume::new([w as usize, h as usize, image_paths.len()], spacing, data)?;
    Ok(vol.with_provenance(format!(
        "{} sections from {} ({:?})",
        image_paths.len(),
        first_parent(image_paths[0].as_ref()).display(),
        channel
    )))
}

fn first_parent(p: &Path) -> PathBuf {
    p.parent().map(Path::to_path_buf).unwrap_or_default()
}

/// Writes the volume cache format: `HVOL`, version, dims, spacing, f32 data.
pub fn write_hvol<T: Real>(v: &Volume<T>, path: impl AsRef<Path>) -> Result<(), VolumeError> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(HVOL_MAGIC)?;
    w.write_all(&HVOL_VERSION.to_le_bytes())?;
    for d in v.dims() {
        w.write_all(&(d as u64).to_le_bytes())?;
    }
    for s in v.spacing() {
        w.write_all(&s.as_f64().to_le_bytes())?;
    }
    for &x in v.data() {
        w.write_all(&x.as_f32().to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_hvol<T: Real>(path: impl AsRef<Path>) -> Result<Volume<T>, VolumeError> {
    let path = path.as_ref();
    let mut r = BufReader::new(File::open(path)?);
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != HVOL_MAGIC {
        return Err(VolumeError::MalformedFile(format!("bad magic {magic:?}")));
    }
    let mut b4 = [0u8; 4];
    let mut b8 = [0u8; 8];
    r.read_exact(&mut b4)?;
    let version = u32::from_le_bytes(b4);
    if version != HVOL_VERSION {
        return Err(VolumeError::MalformedFile(format!(
            "unsupported version {version}"
        )));
    }
    let mut dims = [0usize; 3];
    for d in &mut dims {
        r.read_exact(&mut b8)?;
        *d = usize::try_from(u64::from_le_bytes(b8))
            .map_err(|_| VolumeError::MalformedFile("dimension overflows usize".into()))?;
    }
    let mut spacing = [T::zero(); 3];
    for s in &mut spacing {
        r.read_exact(&mut b8)?;
        *s = T::of(f64::from_le_bytes(b8));
    }
    let n = dims
        .iter()
        .try_fold(1usize, |acc, &d| acc.checked_mul(d))
        .ok_or_else(|| VolumeError::MalformedFile("voxel count overflows".into()))?;
    let mut raw = Vec::new();
    r.read_to_end(&mut raw)?;
    if raw.len() != n * 4 {
        return Err(VolumeError::MalformedFile(format!(
            "expected {} data bytes, found {}",
            n * 4,
            raw.len()
        )));
    }
    let data = raw
        .chunks_exact(4)
        .map(|c| T::of(f64::from(f32::from_le_bytes([c[0], c[1], c[2], c[3]]))))
        .collect();
    Ok(Volume::new(dims, spacing, data)?.with_provenance(path.display().to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use image::{ImageBuffer, Luma, Rgb};

    fn save_gray(dir: &Path, name: &str, w: u32, h: u32, f: impl Fn(u32, u32) -> u8) -> PathBuf {
        let img: ImageBuffer<Luma<u8>, Vec<u8>> =
            ImageBuffer::from_fn(w, h, |x, y| Luma([f(x, y)]));
        let p = dir.join(name);
        img.save(&p).unwrap();
        p
    }

    #[test]
    fn blank_section_is_all_zero() {
        let dir = tempfile::tempdir().unwrap();
        let p = save_gray(dir.path(), "a.png", 5, 3, |_, _| 255);
        let v: Volume<f32> = load_stack(&[p], 0.5, 7.0, Channel::LuminanceInverted).unwrap();
        assert_eq!(v.dims(), [5, 3, 1]);
        assert_eq!(v.spacing(), [0.5, 0.5, 7.0]);
        assert!(v.data().iter().all(|&x| x == 0.0));
    }

    #[test]
    fn dark_pixel_maps_to_one() {
        let dir = tempfile::tempdir().unwrap();
        let paths: Vec<_> = (0..3)
            .map(|i| {
                save_gray(dir.path(), &format!("s{i}.png"), 4, 4, |x, y| {
                    if i == 1 && (x, y) == (1, 1) {
                        0
                    } else {
                        255
                    }
                })
            })
            .collect();
        let v: Volume<f64> = load_stack(&paths, 0.5, 7.0, Channel::LuminanceInverted).unwrap();
        assert_eq!(v.dims(), [4, 4, 3]);
        for z in 0..3 {
            for y in 0..4 {
                for x in 0..4 {
                    let want = if (x, y, z) == (1, 1, 1) { 1.0 } else { 0.0 };
                    assert_eq!(v.get(x, y, z), want, "voxel {x},{y},{z}");
                }
            }
        }
    }

    #[test]
    fn channel_selection_reads_one_component() {
        let dir = tempfile::tempdir().unwrap();
        let img: ImageBuffer<Rgb<u8>, Vec<u8>> = ImageBuffer::from_fn(2, 1, |x, _| {
            if x == 0 {
                Rgb([0, 255, 255])
            } else {
                Rgb([255, 0, 255])
            }
        });
        let p = dir.path().join("rgb.png");
        img.save(&p).unwrap();
        let r: Volume<f32> = load_stack(&[&p], 1.0, 1.0, Channel::R).unwrap();
        assert_eq!(r.data(), &[1.0, 0.0]);
        let g: Volume<f32> = load_stack(&[&p], 1.0, 1.0, Channel::G).unwrap();
        assert_eq!(g.data(), &[0.0, 1.0]);
    }

    #[test]
    fn stack_errors() {
        let dir = tempfile::tempdir().unwrap();
        let empty: [PathBuf; 0] = [];
        assert!(matches!(
            load_stack::<f32, _>(&empty, 1.0, 1.0, Channel::default()),
            Err(VolumeError::EmptyStack)
        ));
        let a = save_gray(dir.path(), "a.png", 4, 4, |_, _| 0);
        let b = save_gray(dir.path(), "b.png", 4, 5, |_, _| 0);
        assert!(matches!(
            load_stack::<f32, _>(&[&a, &b], 1.0, 1.0, Channel::default()),
            Err(VolumeError::MixedDimensions { got: (4, 5), .. })
        ));
        let missing = dir.path().join("nope.png");
        assert!(matches!(
            load_stack::<f32, _>(&[&missing], 1.0, 1.0, Channel::default()),
            Err(VolumeError::UnreadableImage { .. })
        ));
    }

    #[test]
    fn sixteen_bit_tiff_is_accepted() {
        let dir = tempfile::tempdir().unwrap();
        let img: ImageBuffer<Luma<u16>, Vec<u16>> =
            ImageBuffer::from_fn(3, 2, |x, _| Luma([if x == 0 { 0 } else { 65535 }]));
        let p = dir.path().join("s.tif");
        img.save(&p).unwrap();
        let v: Volume<f32> = load_stack(&[p], 0.3, 7.0, Channel::LuminanceInverted).unwrap();
        assert_eq!(v.data(), &[1.0, 0.0, 0.0, 1.0, 0.0, 0.0]);
    }

    #[test]
    fn hvol_layout_and_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let v = Volume::<f32>::from_fn([3, 2, 2], [0.5, 0.25, 7.0], |x, y, z| {
            (x * 4 + y * 2 + z) as f32 / 16.0
        })
        .unwrap();
        let p = dir.path().join("v.hvol");
        write_hvol(&v, &p).unwrap();
        let bytes = std::fs::read(&p).unwrap();
        assert_eq!(&bytes[..4], b"HVOL");
        assert_eq!(u32::from_le_bytes(bytes[4..8].try_into().unwrap()), 1);
        assert_eq!(u64::from_le_bytes(bytes[8..16].try_into().unwrap()), 3);
        assert_eq!(f64::from_le_bytes(bytes[32..40].try_into().unwrap()), 0.5);
        assert_eq!(bytes.len(), 4 + 4 + 24 + 24 + 12 * 4);
        let back: Volume<f32> = read_hvol(&p).unwrap();
        assert_eq!(back.data(), v.data());
        assert_eq!(back.dims(), v.dims());
        assert_eq!(back.spacing(), v.spacing());

        std::fs::write(&p, b"NOPE").unwrap();
        assert!(read_hvol::<f32>(&p).is_err());
    }
}
