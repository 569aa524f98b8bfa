use super::{ComponentLabeling, IndexedMesh, MeshError, Rgb};
use crate::scalar::Real;

pub const GOLDEN_ANGLE_DEG: f64 = 137.508;
const PALETTE_SATURATION: f64 = 0.75;
const PALETTE_VALUE: f64 = 0.95;

/// HSV (hue in degrees, s and v in `[0, 1]`) to 8-bit RGB.
pub fn hsv_to_rgb(hue_deg: f64, s: f64, v: f64) -> Rgb {
    let h = hue_deg.rem_euclid(360.0) / 60.0;
    let c = v * s;
    let x = c * (1.0 - ((h % 2.0) - 1.0).abs());
    let (r, g, b) = match h as u32 {
        0 => (c, x, 0.0),
        1 => (x, c, 0.0),
        2 => (0.0, c, x),
        3 => (0.0, x, c),
        4 => (x, 0.0, c),
        _ => (c, 0.0, x),
    };
    let m = v - c;
    let q = |u: f64| ((u + m) * 255.0).round().clamp(0.0, 255.0) as u8;
    [q(r), q(g), q(b)]
}

/// Hue of component `k` under the default palette.
pub fn golden_angle_hue(k: usize) -> f64 {
    (k as f64 * GOLDEN_ANGLE_DEG).rem_euclid(360.0)
}

pub fn golden_angle_palette(n: usize) -> Vec<Rgb> {
    (0..n)
        .map(|k| hsv_to_rgb(golden_angle_hue(k), PALETTE_SATURATION, PALETTE_VALUE))
        .collect()
}

/// Gives every component one colour. Only `colors` changes.
pub fn color_components<T: Real>(
    m: &IndexedMesh<T>,
    labeling: &ComponentLabeling,
    palette: Option<&[Rgb]>,
) -> Result<IndexedMesh<T>, MeshError> {
    if labeling.labels.len() != m.vertex_count() {
        return Err(MeshError::LabelingMismatch {
            labels: labeling.labels.len(),
            vertices: m.vertex_count(),
        });
    }
    let generated;
    let palette = match palette {
        Some(p) if p.len() < labeling.count() => {
            return Err(MeshError::PaletteTooShort {
                components: labeling.count(),
                palette: p.len(),
            })
        }
        Some(p) => p,
        None => {
            generated = golden_angle_palette(labeling.count());
            &generated
        }
    };
    let mut out = m.clone();
    out.colors = labeling
        .labels
        .iter()
        .map(|&l| palette[l as usize])
        .collect();
    Ok(out)
}
