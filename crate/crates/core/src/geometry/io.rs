//! Mesh loaders for Wavefront OBJ, STL (ASCII and binary) and PLY (ASCII and
//! binary, either endianness). Only geometry is read; units are taken as meters.

use std::collections::HashMap;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::mesh::{LoadReport, TriangleMesh};
use crate::error::{Error, Result};
use crate::Point3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MeshFormat {
    Obj,
    Stl,
    Ply,
}

impl MeshFormat {
    pub fn from_extension(path: &Path) -> Option<Self> {
        let ext = path.extension()?.to_str()?.to_ascii_lowercase();
        match ext.as_str() {
            "obj" => Some(MeshFormat::Obj),
            "stl" => Some(MeshFormat::Stl),
            "ply" => Some(MeshFormat::Ply),
            _ => None,
        }
    }
}

impl FromStr for MeshFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "obj" => Ok(MeshFormat::Obj),
            "stl" => Ok(MeshFormat::Stl),
            "ply" => Ok(MeshFormat::Ply),
            other => Err(Error::invalid(format!("unknown mesh format `{other}`"))),
        }
    }
}

pub fn load_mesh(path: impl AsRef<Path>, format: MeshFormat) -> Result<(TriangleMesh, LoadReport)> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    let (mesh, report) = parse_mesh(&bytes, format)?;
    log::info!(
        "loaded {}: {} triangles, {} degenerate dropped, bounds {:?}..{:?}",
        path.display(),
        report.triangles,
        report.dropped_degenerate,
        report.bounds.min,
        report.bounds.max
    );
    Ok((mesh, report))
}

pub fn parse_mesh(bytes: &[u8], format: MeshFormat) -> Result<(TriangleMesh, LoadReport)> {
    match format {
        MeshFormat::Obj => parse_obj(bytes),
        MeshFormat::Stl => parse_stl(bytes),
        MeshFormat::Ply => parse_ply(bytes),
    }
}

fn parse_err(format: &'static str, location: impl ToString, message: impl ToString) -> Error {
    Error::Parse { format, location: location.to_string(), message: message.to_string() }
}

fn parse_f64(format: &'static str, line: usize, tok: Option<&str>) -> Result<f64> {
    let tok = tok.ok_or_else(|| parse_err(format, format!("line {line}"), "missing coordinate"))?;
    tok.parse::<f64>().map_err(|_| parse_err(format, format!("line {line}"), format!("bad number `{tok}`")))
}

// ---------------------------------------------------------------------------
// OBJ

fn parse_obj(bytes: &[u8]) -> Result<(TriangleMesh, LoadReport)> {
    const F: &str = "OBJ";
    let text = std::str::from_utf8(bytes).map_err(|e| parse_err(F, "file", e))?;
    let mut vertices = Vec::new();
    let mut triangles = Vec::new();
    let mut labels = Vec::new();
    let mut names: Vec<String> = Vec::new();
    let mut current_label: Option<u32> = None;

    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        let mut toks = content.split_whitespace();
        match toks.next() {
            Some("v") => {
                let x = parse_f64(F, line, toks.next())?;
                let y = parse_f64(F, line, toks.next())?;
                let z = parse_f64(F, line, toks.next())?;
                vertices.push(Point3::new(x, y, z));
            }
            Some("f") => {
                let mut poly = Vec::with_capacity(4);
                for tok in toks {
                    let idx_str = tok.split('/').next().unwrap_or("");
                    let idx: i64 = idx_str
                        .parse()
                        .map_err(|_| parse_err(F, format!("line {line}"), format!("bad index `{tok}`")))?;
                    let resolved = if idx > 0 {
                        idx - 1
                    } else if idx < 0 {
                        vertices.len() as i64 + idx
                    } else {
                        return Err(parse_err(F, format!("line {line}"), "index 0 is invalid"));
                    };
                    if resolved < 0 || resolved as usize >= vertices.len() {
                        return Err(parse_err(
                            F,
                            format!("line {line}"),
                            format!("index {idx} refers to a missing vertex"),
                        ));
                    }
                    poly.push(resolved as u32);
                }
                if poly.len() < 3 {
                    return Err(parse_err(F, format!("line {line}"), "face with fewer than 3 vertices"));
                }
                for i in 1..poly.len() - 1 {
                    triangles.push([poly[0], poly[i], poly[i + 1]]);
                    labels.push(current_label.unwrap_or(0));
                }
            }
            Some("o") | Some("g") => {
                let name = toks.collect::<Vec<_>>().join(" ");
                let id = match names.iter().position(|n| *n == name) {
                    Some(p) => p,
                    None => {
                        names.push(name);
                        names.len() - 1
                    }
                };
                current_label = Some(id as u32);
            }
            _ => {}
        }
    }
    let has_labels = !names.is_empty();
    // Faces before the first group fall into label 0 alongside the first named group.
    let (labels, names) = if has_labels { (Some(labels), names) } else { (None, Vec::new()) };
    TriangleMesh::with_labels(vertices, triangles, labels, names)
}

// ---------------------------------------------------------------------------
// STL

fn parse_stl(bytes: &[u8]) -> Result<(TriangleMesh, LoadReport)> {
    let looks_binary = bytes.len() >= 84 && {
        let n = u32::from_le_bytes([bytes[80], bytes[81], bytes[82], bytes[83]]) as u64;
        84 + 50 * n == bytes.len() as u64
    };
    if looks_binary {
        parse_stl_binary(bytes)
    } else if bytes.trim_ascii_start().starts_with(b"solid") {
        parse_stl_ascii(bytes)
    } else {
        Err(parse_err("STL", "header", "neither ASCII `solid` nor a consistent binary length"))
    }
}

fn parse_stl_binary(bytes: &[u8]) -> Result<(TriangleMesh, LoadReport)> {
    let n = u32::from_le_bytes([bytes[80], bytes[81], bytes[82], bytes[83]]) as usize;
    let mut vertices = Vec::with_capacity(3 * n);
    let mut triangles = Vec::with_capacity(n);
    for i in 0..n {
        let rec = &bytes[84 + 50 * i..84 + 50 * (i + 1)];
        // 12 bytes normal, then three vertices.
        for v in 0..3 {
            let off = 12 + 12 * v;
            let c = |k: usize| {
                let s = off + 4 * k;
                f32::from_le_bytes([rec[s], rec[s + 1], rec[s + 2], rec[s + 3]]) as f64
            };
            vertices.push(Point3::new(c(0), c(1), c(2)));
        }
        let base = (3 * i) as u32;
        triangles.push([base, base + 1, base + 2]);
    }
    TriangleMesh::new(vertices, triangles)
}

fn parse_stl_ascii(bytes: &[u8]) -> Result<(TriangleMesh, LoadReport)> {
    const F: &str = "STL";
    let text = std::str::from_utf8(bytes).map_err(|e| parse_err(F, "file", e))?;
    let mut vertices = Vec::new();
    let mut triangles = Vec::new();
    let mut in_facet = 0usize;
    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        let mut toks = raw.split_whitespace();
        match toks.next() {
            Some("vertex") => {
                let x = parse_f64(F, line, toks.next())?;
                let y = parse_f64(F, line, toks.next())?;
                let z = parse_f64(F, line, toks.next())?;
                vertices.push(Point3::new(x, y, z));
                in_facet += 1;
            }
            Some("endfacet") => {
                if in_facet != 3 {
                    return Err(parse_err(F, format!("line {line}"), format!("facet with {in_facet} vertices")));
                }
                let base = (vertices.len() - 3) as u32;
                triangles.push([base, base + 1, base + 2]);
                in_facet = 0;
            }
            _ => {}
        }
    }
    TriangleMesh::new(vertices, triangles)
}

// ---------------------------------------------------------------------------
// PLY

#[derive(Debug, Clone, Copy, PartialEq)]
enum PlyEncoding {
    Ascii,
    BinaryLe,
    BinaryBe,
}

#[derive(Debug, Clone, Copy)]
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
    fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "char" | "int8" => Scalar::I8,
            "uchar" | "uint8" => Scalar::U8,
            "short" | "int16" => Scalar::I16,
            "ushort" | "uint16" => Scalar::U16,
            "int" | "int32" => Scalar::I32,
            "uint" | "uint32" => Scalar::U32,
            "float" | "float32" => Scalar::F32,
            "double" | "float64" => Scalar::F64,
            _ => return None,
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

    fn read(self, b: &[u8], big: bool) -> f64 {
        macro_rules! rd {
            ($t:ty, $n:expr) => {{
                let mut a = [0u8; $n];
                a.copy_from_slice(&b[..$n]);
                (if big { <$t>::from_be_bytes(a) } else { <$t>::from_le_bytes(a) }) as f64
            }};
        }
        match self {
            Scalar::I8 => b[0] as i8 as f64,
            Scalar::U8 => b[0] as f64,
            Scalar::I16 => rd!(i16, 2),
            Scalar::U16 => rd!(u16, 2),
            Scalar::I32 => rd!(i32, 4),
            Scalar::U32 => rd!(u32, 4),
            Scalar::F32 => rd!(f32, 4),
            Scalar::F64 => rd!(f64, 8),
        }
    }
}

#[derive(Debug, Clone)]
enum Property {
    Scalar(String, Scalar),
    List(String, Scalar, Scalar),
}

impl Property {
    fn name(&self) -> &str {
        match self {
            Property::Scalar(n, _) | Property::List(n, _, _) => n,
        }
    }
}

#[derive(Debug, Clone)]
struct Element {
    name: String,
    count: usize,
    props: Vec<Property>,
}

/// Cursor over the PLY body that yields numbers regardless of encoding.
struct PlyBody<'a> {
    bytes: &'a [u8],
    pos: usize,
    encoding: PlyEncoding,
    tokens: Option<std::str::SplitAsciiWhitespace<'a>>,
}

impl<'a> PlyBody<'a> {
    fn next(&mut self, ty: Scalar) -> Result<f64> {
        match self.encoding {
            PlyEncoding::Ascii => {
                let tok = self
                    .tokens
                    .as_mut()
                    .and_then(|t| t.next())
                    .ok_or_else(|| parse_err("PLY", "body", "unexpected end of data"))?;
                tok.parse::<f64>().map_err(|_| parse_err("PLY", "body", format!("bad number `{tok}`")))
            }
            enc => {
                let n = ty.size();
                if self.pos + n > self.bytes.len() {
                    return Err(parse_err("PLY", format!("byte {}", self.pos), "unexpected end of data"));
                }
                let v = ty.read(&self.bytes[self.pos..], enc == PlyEncoding::BinaryBe);
                self.pos += n;
                Ok(v)
            }
        }
    }
}

fn parse_ply(bytes: &[u8]) -> Result<(TriangleMesh, LoadReport)> {
    const F: &str = "PLY";
    let header_end = find_subslice(bytes, b"end_header").ok_or_else(|| parse_err(F, "header", "missing end_header"))?;
    let mut body_start = header_end + b"end_header".len();
    // The header ends at the first newline after the keyword (\n or \r\n).
    while body_start < bytes.len() && bytes[body_start] != b'\n' {
        body_start += 1;
    }
    body_start = (body_start + 1).min(bytes.len());
    let header = std::str::from_utf8(&bytes[..header_end]).map_err(|e| parse_err(F, "header", e))?;

    let mut lines = header.lines();
    if lines.next().map(str::trim) != Some("ply") {
        return Err(parse_err(F, "line 1", "missing `ply` magic"));
    }
    let mut encoding = None;
    let mut elements: Vec<Element> = Vec::new();
    for (i, line) in lines.enumerate() {
        let loc = format!("header line {}", i + 2);
        let toks: Vec<&str> = line.split_whitespace().collect();
        match toks.as_slice() {
            ["format", fmt, _version] => {
                encoding = Some(match *fmt {
                    "ascii" => PlyEncoding::Ascii,
                    "binary_little_endian" => PlyEncoding::BinaryLe,
                    "binary_big_endian" => PlyEncoding::BinaryBe,
                    other => return Err(parse_err(F, loc, format!("unknown format `{other}`"))),
                })
            }
            ["element", name, count] => elements.push(Element {
                name: name.to_string(),
                count: count.parse().map_err(|_| parse_err(F, &loc, "bad element count"))?,
                props: Vec::new(),
            }),
            ["property", "list", cnt, item, name] => {
                let el = elements.last_mut().ok_or_else(|| parse_err(F, &loc, "property before element"))?;
                let c = Scalar::parse(cnt).ok_or_else(|| parse_err(F, &loc, "bad list count type"))?;
                let t = Scalar::parse(item).ok_or_else(|| parse_err(F, &loc, "bad list item type"))?;
                el.props.push(Property::List(name.to_string(), c, t));
            }
            ["property", ty, name] => {
                let el = elements.last_mut().ok_or_else(|| parse_err(F, &loc, "property before element"))?;
                let t = Scalar::parse(ty).ok_or_else(|| parse_err(F, &loc, format!("bad type `{ty}`")))?;
                el.props.push(Property::Scalar(name.to_string(), t));
            }
            ["comment", ..] | ["obj_info", ..] | [] => {}
            _ => return Err(parse_err(F, loc, format!("unrecognized header line `{line}`"))),
        }
    }
    let encoding = encoding.ok_or_else(|| parse_err(F, "header", "missing format line"))?;

    let body = &bytes[body_start..];
    let mut cursor = PlyBody {
        bytes: body,
        pos: 0,
        encoding,
        tokens: if encoding == PlyEncoding::Ascii {
            Some(std::str::from_utf8(body).map_err(|e| parse_err(F, "body", e))?.split_ascii_whitespace())
        } else {
            None
        },
    };

    let mut vertices = Vec::new();
    let mut triangles = Vec::new();
    for el in &elements {
        let index: HashMap<&str, usize> = el.props.iter().enumerate().map(|(i, p)| (p.name(), i)).collect();
        let is_vertex = el.name == "vertex";
        let is_face = el.name == "face";
        if is_vertex && !(index.contains_key("x") && index.contains_key("y") && index.contains_key("z")) {
            return Err(parse_err(F, "header", "vertex element lacks x/y/z"));
        }
        let face_prop = ["vertex_indices", "vertex_index"].iter().find_map(|n| index.get(n).copied());
        for row in 0..el.count {
            let mut xyz = [0.0; 3];
            for (pi, prop) in el.props.iter().enumerate() {
                match prop {
                    Property::Scalar(name, ty) => {
                        let v = cursor.next(*ty)?;
                        if is_vertex {
                            match name.as_str() {
                                "x" => xyz[0] = v,
                                "y" => xyz[1] = v,
                                "z" => xyz[2] = v,
                                _ => {}
                            }
                        }
                    }
                    Property::List(_, cty, ity) => {
                        let n = cursor.next(*cty)? as usize;
                        let mut poly = Vec::with_capacity(n);
                        for _ in 0..n {
                            poly.push(cursor.next(*ity)?);
                        }
                        if is_face && Some(pi) == face_prop {
                            if n < 3 {
                                return Err(parse_err(F, format!("face {row}"), "fewer than 3 indices"));
                            }
                            let poly: Vec<u32> = poly.into_iter().map(|x| x as u32).collect();
                            for i in 1..n - 1 {
                                triangles.push([poly[0], poly[i], poly[i + 1]]);
                            }
                        }
                    }
                }
            }
            if is_vertex {
                vertices.push(Point3::new(xyz[0], xyz[1], xyz[2]));
            }
        }
    }
    TriangleMesh::new(vertices, triangles)
}

fn find_subslice(hay: &[u8], needle: &[u8]) -> Option<usize> {
    hay.windows(needle.len()).position(|w| w == needle)
}
