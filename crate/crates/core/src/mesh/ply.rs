//! PLY storage for coloured meshes.
//!
//! Written files are binary little-endian with per-vertex `x y z` (float),
//! optional `nx ny nz` (float) and `red green blue` (uchar), and faces as
//! `list uchar int vertex_indices`. The reader also accepts ASCII files and
//! the common scalar type aliases.

use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::Path;

use thiserror::Error;

use super::{IndexedMesh, Rgb, DEFAULT_GREY};
use crate::geom::Vec3;
use crate::scalar::Real;

#[derive(Debug, Error)]
pub enum PlyError {
    #[error("MalformedPly: {0}")]
    Malformed(String),
    #[error("UnsupportedElement: {0}")]
    UnsupportedElement(String),
    #[error("IoFailure: {0}")]
    Io(#[from] io::Error),
}

fn malformed<T>(msg: impl Into<String>) -> Result<T, PlyError> {
    Err(PlyError::Malformed(msg.into()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PlyFormat {
    Ascii,
    BinaryLittleEndian,
}

/// Serializes `m` to PLY bytes.
pub fn write_ply<T: Real, W: Write>(
    m: &IndexedMesh<T>,
    format: PlyFormat,
    mut out: W,
) -> io::Result<()> {
    let normals = m.normals.as_deref();
    let mut header = String::from("ply\n");
    header.push_str(match format {
        PlyFormat::Ascii => "format ascii 1.0\n",
        PlyFormat::BinaryLittleEndian => "format binary_little_endian 1.0\n",
    });
    let _ = writeln!(header, "element vertex {}", m.vertex_count());
    header.push_str("property float x\nproperty float y\nproperty float z\n");
    if normals.is_some() {
        header.push_str("property float nx\nproperty float ny\nproperty float nz\n");
    }
    header.push_str("property uchar red\nproperty uchar green\nproperty uchar blue\n");
    let _ = writeln!(header, "element face {}", m.face_count());
    header.push_str("property list uchar int vertex_indices\nend_header\n");
    out.write_all(header.as_bytes())?;

    match format {
        PlyFormat::BinaryLittleEndian => {
            let stride = if normals.is_some() { 27 } else { 15 };
            let mut buf = Vec::with_capacity(m.vertex_count() * stride + m.face_count() * 13);
            for (i, p) in m.positions.iter().enumerate() {
                for c in [p.x, p.y, p.z] {
                    buf.extend_from_slice(&c.as_f32().to_le_bytes());
                }
                if let Some(n) = normals {
                    for c in [n[i].x, n[i].y, n[i].z] {
                        buf.extend_from_slice(&c.as_f32().to_le_bytes());
                    }
                }
                buf.extend_from_slice(&m.colors[i]);
            }
            for f in &m.faces {
                buf.push(3);
                for &v in f {
                    buf.extend_from_slice(&(v as i32).to_le_bytes());
                }
            }
            out.write_all(&buf)?;
        }
        PlyFormat::Ascii => {
            let mut s = String::new();
            for (i, p) in m.positions.iter().enumerate() {
                let _ = write!(s, "{} {} {}", p.x.as_f32(), p.y.as_f32(), p.z.as_f32());
                if let Some(n) = normals {
                    let _ = write!(
                        s,
                        " {} {} {}",
                        n[i].x.as_f32(),
                        n[i].y.as_f32(),
                        n[i].z.as_f32()
                    );
                }
                let [r, g, b] = m.colors[i];
                let _ = writeln!(s, " {r} {g} {b}");
            }
            for f in &m.faces {
                let _ = writeln!(s, "3 {} {} {}", f[0], f[1], f[2]);
            }
            out.write_all(s.as_bytes())?;
        }
    }
    out.flush()
}

/// Binary little-endian PLY bytes of `m`.
pub fn to_ply_bytes<T: Real>(m: &IndexedMesh<T>) -> Vec<u8> {
    let mut buf = Vec::new();
    write_ply(m, PlyFormat::BinaryLittleEndian, &mut buf).expect("writing to a Vec cannot fail");
    buf
}

pub fn save_mesh<T: Real>(m: &IndexedMesh<T>, path: impl AsRef<Path>) -> Result<(), PlyError> {
    fs::write(path, to_ply_bytes(m))?;
    Ok(())
}

pub fn load_mesh<T: Real>(path: impl AsRef<Path>) -> Result<IndexedMesh<T>, PlyError> {
    let bytes = fs::read(path)?;
    read_ply(&bytes)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Scalar {
    I8,
    U8,
    I16,
    U16,
    I32,
    U32,
    F32,
    F64,
}

impl Scalar {
    fn parse(s: &str) -> Result<Self, PlyError> {
        Ok(match s {
            "char" | "int8" => Scalar::I8,
            "uchar" | "uint8" => Scalar::U8,
            "short" | "int16" => Scalar::I16,
            "ushort" | "uint16" => Scalar::U16,
            "int" | "int32" => Scalar::I32,
            "uint" | "uint32" => Scalar::U32,
            "float" | "float32" => Scalar::F32,
            "double" | "float64" => Scalar::F64,
            other => return malformed(format!("unknown scalar type {other:?}")),
        })
    }

    fn size(self) -> usize {
        match self {
            Scalar::I8 | Scalar::U8 => 1,
            Scalar::I16 | Scalar::U16 => 2,
            Scalar::I32 | Scalar::U32 | Scalar::F32 => 4,
            Scalar::F64 => 8,
        }
    }

    fn is_float(self) -> bool {
        matches!(self, Scalar::F32 | Scalar::F64)
    }
}

#[derive(Clone, Debug)]
enum Property {
    Scalar(Scalar, String),
    List(Scalar, Scalar, String),
}

#[derive(Clone, Debug)]
struct Element {
    name: String,
    count: usize,
    props: Vec<Property>,
}

struct Header {
    binary: bool,
    elements: Vec<Element>,
    body_offset: usize,
}

fn parse_header(bytes: &[u8]) -> Result<Header, PlyError> {
    let mut pos = 0;
    let mut next_line = || -> Result<&str, PlyError> {
        let rest = &bytes[pos..];
        let end = rest
            .iter()
            .position(|&b| b == b'\n')
            .ok_or_else(|| PlyError::Malformed("header not terminated by end_header".into()))?;
        pos += end + 1;
        std::str::from_utf8(&rest[..end])
            .map(|s| s.trim_end_matches('\r'))
            .map_err(|_| PlyError::Malformed("header is not UTF-8".into()))
    };
    if next_line()?.trim() != "ply" {
        return malformed("missing 'ply' magic");
    }
    let mut binary = None;
    let mut elements: Vec<Element> = Vec::new();
    loop {
        let line = next_line()?;
        let tok: Vec<&str> = line.split_whitespace().collect();
        match tok.as_slice() {
            [] => {}
            ["end_header"] => break,
            ["comment", ..] | ["obj_info", ..] => {}
            ["format", fmt, _version] => {
                binary = Some(match *fmt {
                    "ascii" => false,
                    "binary_little_endian" => true,
                    "binary_big_endian" => return malformed("binary_big_endian is not supported"),
                    other => return malformed(format!("unknown format {other:?}")),
                })
            }
            ["element", name, count] => elements.push(Element {
                name: (*name).to_string(),
                count: count
                    .parse()
                    .map_err(|_| PlyError::Malformed(format!("bad element count {count:?}")))?,
                props: Vec::new(),
            }),
            ["property", "list", count_ty, item_ty, name] => elements
                .last_mut()
                .ok_or_else(|| PlyError::Malformed("property before element".into()))?
                .props
                .push(Property::List(
                    Scalar::parse(count_ty)?,
                    Scalar::parse(item_ty)?,
                    (*name).to_string(),
                )),
            ["property", ty, name] => elements
                .last_mut()
                .ok_or_else(|| PlyError::Malformed("property before element".into()))?
                .props
                .push(Property::Scalar(Scalar::parse(ty)?, (*name).to_string())),
            _ => return malformed(format!("unexpected header line {line:?}")),
        }
    }
    let binary = binary.ok_or_else(|| PlyError::Malformed("missing format line".into()))?;
    Ok(Header {
        binary,
        elements,
        body_offset: pos,
    })
}

/// Sequential value source over either body encoding.
trait Values {
    fn next(&mut self, ty: Scalar) -> Result<f64, PlyError>;
}

struct BinaryValues<'a> {
    data: &'a [u8],
    pos: usize,
}

impl Values for BinaryValues<'_> {
    #[inline]
    fn next(&mut self, ty: Scalar) -> Result<f64, PlyError> {
        let n = ty.size();
        let b = self
            .data
            .get(self.pos..self.pos + n)
            .ok_or_else(|| PlyError::Malformed("unexpected end of binary body".into()))?;
        self.pos += n;
        Ok(match ty {
            Scalar::I8 => f64::from(b[0] as i8),
            Scalar::U8 => f64::from(b[0]),
            Scalar::I16 => f64::from(i16::from_le_bytes([b[0], b[1]])),
            Scalar::U16 => f64::from(u16::from_le_bytes([b[0], b[1]])),
            Scalar::I32 => f64::from(i32::from_le_bytes([b[0], b[1], b[2], b[3]])),
            Scalar::U32 => f64::from(u32::from_le_bytes([b[0], b[1], b[2], b[3]])),
            Scalar::F32 => f64::from(f32::from_le_bytes([b[0], b[1], b[2], b[3]])),
            Scalar::F64 => f64::from_le_bytes(b.try_into().expect("8 bytes")),
        })
    }
}

struct AsciiValues<'a> {
    tokens: std::str::SplitAsciiWhitespace<'a>,
}

impl Values for AsciiValues<'_> {
    fn next(&mut self, ty: Scalar) -> Result<f64, PlyError> {
        let t = self
            .tokens
            .next()
            .ok_or_else(|| PlyError::Malformed("unexpected end of ASCII body".into()))?;
        // Parse floats at their declared width so f32 text round-trips exactly.
        let v = match ty {
            Scalar::F32 => t.parse::<f32>().map(f64::from).ok(),
            Scalar::F64 => t.parse::<f64>().ok(),
            _ => t.parse::<i64>().ok().map(|i| i as f64),
        };
        v.ok_or_else(|| PlyError::Malformed(format!("bad {ty:?} value {t:?}")))
    }
}

#[derive(Clone, Copy)]
enum VertexSlot {
    Pos(usize),
    Normal(usize),
    Color(usize),
    Ignore,
}

fn color_component(ty: Scalar, v: f64) -> u8 {
    if ty.is_float() {
        (v * 255.0).round().clamp(0.0, 255.0) as u8
    } else {
        v.clamp(0.0, 255.0) as u8
    }
}

/// Parses ASCII or binary little-endian PLY bytes. Missing colours default to
/// [`DEFAULT_GREY`]; polygons are fan-triangulated; faces repeating a vertex
/// are dropped.
pub fn read_ply<T: Real>(bytes: &[u8]) -> Result<IndexedMesh<T>, PlyError> {
    let header = parse_header(bytes)?;
    let body = &bytes[header.body_offset..];
    if header.binary {
        read_body(&header, &mut BinaryValues { data: body, pos: 0 })
    } else {
        let text = std::str::from_utf8(body)
            .map_err(|_| PlyError::Malformed("ASCII body is not UTF-8".into()))?;
        read_body(
            &header,
            &mut AsciiValues {
                tokens: text.split_ascii_whitespace(),
            },
        )
    }
}

fn read_body<T: Real>(header: &Header, src: &mut dyn Values) -> Result<IndexedMesh<T>, PlyError> {
    let mut positions: Vec<Vec3<T>> = Vec::new();
    let mut colors: Vec<Rgb> = Vec::new();
    let mut normals: Vec<Vec3<T>> = Vec::new();
    let mut faces: Vec<[u32; 3]> = Vec::new();
    let mut has_vertex = false;

    for el in &header.elements {
        match el.name.as_str() {
            "vertex" => {
                has_vertex = true;
                let mut slots = Vec::with_capacity(el.props.len());
                let mut seen_pos = [false; 3];
                let mut seen_n = [false; 3];
                let mut seen_c = [false; 3];
                for p in &el.props {
                    let slot = match p {
                        Property::Scalar(_, name) => match name.as_str() {
                            "x" => Some(VertexSlot::Pos(0)),
                            "y" => Some(VertexSlot::Pos(1)),
                            "z" => Some(VertexSlot::Pos(2)),
                            "nx" => Some(VertexSlot::Normal(0)),
                            "ny" => Some(VertexSlot::Normal(1)),
                            "nz" => Some(VertexSlot::Normal(2)),
                            "red" | "r" | "diffuse_red" => Some(VertexSlot::Color(0)),
                            "green" | "g" | "diffuse_green" => Some(VertexSlot::Color(1)),
                            "blue" | "b" | "diffuse_blue" => Some(VertexSlot::Color(2)),
                            _ => None,
                        },
                        Property::List(..) => None,
                    };
                    match slot {
                        Some(VertexSlot::Pos(i)) => seen_pos[i] = true,
                        Some(VertexSlot::Normal(i)) => seen_n[i] = true,
                        Some(VertexSlot::Color(i)) => seen_c[i] = true,
                        _ => {}
                    }
                    slots.push(slot.unwrap_or(VertexSlot::Ignore));
                }
                if seen_pos != [true; 3] {
                    return malformed("vertex element lacks x, y or z");
                }
                let with_normals = seen_n == [true; 3];
                let with_colors = seen_c == [true; 3];
                positions.reserve(el.count);
                colors.reserve(el.count);
                for _ in 0..el.count {
                    let mut p = [0f64; 3];
                    let mut n = [0f64; 3];
                    let mut c = DEFAULT_GREY;
                    for (prop, slot) in el.props.iter().zip(&slots) {
                        match prop {
                            Property::Scalar(ty, _) => {
                                let v = src.next(*ty)?;
                                match *slot {
                                    VertexSlot::Pos(i) => p[i] = v,
                                    VertexSlot::Normal(i) => n[i] = v,
                                    VertexSlot::Color(i) if with_colors => {
                                        c[i] = color_component(*ty, v)
                                    }
                                    _ => {}
                                }
                            }
                            Property::List(cty, ity, _) => skip_list(src, *cty, *ity)?,
                        }
                    }
                    positions.push(Vec3::from_f64(p));
                    if with_normals {
                        normals.push(Vec3::from_f64(n));
                    }
                    colors.push(c);
                }
            }
            "face" => {
                let idx_prop = el.props.iter().position(|p| {
                    matches!(p, Property::List(_, _, n) if n == "vertex_indices" || n == "vertex_index")
                });
                let Some(idx_prop) = idx_prop else {
                    return malformed("face element lacks a vertex_indices list");
                };
                faces.reserve(el.count);
                let mut poly: Vec<u32> = Vec::with_capacity(4);
                for _ in 0..el.count {
                    for (k, prop) in el.props.iter().enumerate() {
                        match prop {
                            Property::List(cty, ity, _) if k == idx_prop => {
                                let len = src.next(*cty)?;
                                if !(3.0..=1e6).contains(&len) {
                                    return malformed(format!("face with {len} vertices"));
                                }
                                poly.clear();
                                for _ in 0..len as usize {
                                    let v = src.next(*ity)?;
                                    if v < 0.0 || v > u32::MAX as f64 {
                                        return malformed(format!("face index {v} out of range"));
                                    }
                                    poly.push(v as u32);
                                }
                                for j in 1..poly.len() - 1 {
                                    let f = [poly[0], poly[j], poly[j + 1]];
                                    if f[0] != f[1] && f[1] != f[2] && f[0] != f[2] {
                                        faces.push(f);
                                    }
                                }
                            }
                            Property::List(cty, ity, _) => skip_list(src, *cty, *ity)?,
                            Property::Scalar(ty, _) => {
                                src.next(*ty)?;
                            }
                        }
                    }
                }
            }
            other => return Err(PlyError::UnsupportedElement(other.to_string())),
        }
    }
    if !has_vertex {
        return malformed("no vertex element");
    }
    let n = positions.len();
    if let Some(f) = faces.iter().find(|f| f.iter().any(|&v| v as usize >= n)) {
        return malformed(format!("face {f:?} indexes past {n} vertices"));
    }
    Ok(IndexedMesh {
        normals: (normals.len() == n && n > 0).then_some(normals),
        positions,
        faces,
        colors,
    })
}

fn skip_list(src: &mut dyn Values, cty: Scalar, ity: Scalar) -> Result<(), PlyError> {
    let len = src.next(cty)?;
    if !(0.0..=1e6).contains(&len) {
        return malformed(format!("list length {len}"));
    }
    for _ in 0..len as usize {
        src.next(ity)?;
    }
    Ok(())
}
