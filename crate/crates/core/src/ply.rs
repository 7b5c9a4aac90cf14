//! PLY reading and writing.
//!
//! Only the `vertex` element is interpreted: `x`, `y`, `z` are required and
//! `nx`, `ny`, `nz` become normals when all three are present. Every other
//! property and element is skipped. ASCII and binary little-endian bodies are
//! supported.

use std::fmt;
use std::io::{Read, Write};

use thiserror::Error;

use crate::cloud::PointCloud;
use crate::Point3;

/// PLY body encoding.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlyFormat {
    Ascii,
    BinaryLittleEndian,
}

impl PlyFormat {
    fn header_token(self) -> &'static str {
        match self {
            PlyFormat::Ascii => "ascii",
            PlyFormat::BinaryLittleEndian => "binary_little_endian",
        }
    }
}

/// Where in the input a parse error was detected.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Position {
    /// 1-based line number (header and ASCII bodies).
    Line(usize),
    /// Byte offset from the start of the stream (binary bodies).
    Byte(usize),
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Position::Line(l) => write!(f, "line {l}"),
            Position::Byte(b) => write!(f, "byte {b}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PlyErrorKind {
    MalformedHeader(String),
    MissingCoordinate(&'static str),
    MissingVertexElement,
    UnsupportedFormat(String),
    UnsupportedType(String),
    Truncated,
    InvalidValue(String),
    DegenerateNormal(usize),
}

impl fmt::Display for PlyErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PlyErrorKind::MalformedHeader(s) => write!(f, "malformed header: {s}"),
            PlyErrorKind::MissingCoordinate(p) => write!(f, "vertex element lacks property {p}"),
            PlyErrorKind::MissingVertexElement => write!(f, "no vertex element"),
            PlyErrorKind::UnsupportedFormat(s) => write!(f, "unsupported format {s}"),
            PlyErrorKind::UnsupportedType(s) => write!(f, "unsupported property type {s}"),
            PlyErrorKind::Truncated => write!(f, "truncated body"),
            PlyErrorKind::InvalidValue(s) => write!(f, "invalid value {s}"),
            PlyErrorKind::DegenerateNormal(i) => write!(f, "zero-length normal at vertex {i}"),
        }
    }
}

#[derive(Debug, Error)]
pub enum PlyError {
    #[error("{kind} at {position}")]
    Parse {
        kind: PlyErrorKind,
        position: Position,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl PlyError {
    fn at(kind: PlyErrorKind, position: Position) -> Self {
        PlyError::Parse { kind, position }
    }

    pub fn kind(&self) -> Option<&PlyErrorKind> {
        match self {
            PlyError::Parse { kind, .. } => Some(kind),
            PlyError::Io(_) => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
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
    fn parse(name: &str) -> Option<Self> {
        Some(match name {
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

    fn decode_le(self, b: &[u8]) -> f64 {
        match self {
            Scalar::I8 => b[0] as i8 as f64,
            Scalar::U8 => b[0] as f64,
            Scalar::I16 => i16::from_le_bytes([b[0], b[1]]) as f64,
            Scalar::U16 => u16::from_le_bytes([b[0], b[1]]) as f64,
            Scalar::I32 => i32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64,
            Scalar::U32 => u32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64,
            Scalar::F32 => f32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64,
            Scalar::F64 => f64::from_le_bytes(b[..8].try_into().expect("8 bytes")),
        }
    }
}

#[derive(Debug, Clone)]
enum Property {
    Scalar { name: String, ty: Scalar },
    List { count: Scalar, item: Scalar },
}

#[derive(Debug, Clone)]
struct Element {
    name: String,
    count: usize,
    properties: Vec<Property>,
}

struct Header {
    format: PlyFormat,
    elements: Vec<Element>,
    body_offset: usize,
    body_line: usize,
}

/// Column indices of the vertex properties the reader cares about.
struct VertexLayout {
    xyz: [usize; 3],
    normals: Option<[usize; 3]>,
}

impl VertexLayout {
    fn from_element(el: &Element, line: usize) -> Result<Self, PlyError> {
        let find = |n: &str| {
            el.properties
                .iter()
                .position(|p| matches!(p, Property::Scalar { name, .. } if name == n))
        };
        let mut xyz = [0; 3];
        for (slot, name) in xyz.iter_mut().zip(["x", "y", "z"]) {
            *slot = find(name).ok_or_else(|| {
                PlyError::at(PlyErrorKind::MissingCoordinate(name), Position::Line(line))
            })?;
        }
        let normals = match (find("nx"), find("ny"), find("nz")) {
            (Some(a), Some(b), Some(c)) => Some([a, b, c]),
            _ => None,
        };
        Ok(Self { xyz, normals })
    }
}

/// Reads a PLY stream (ASCII or binary little-endian, detected from the
/// header). The returned cloud has no bit depth set.
pub fn read_ply<R: Read>(mut reader: R) -> Result<PointCloud, PlyError> {
    let mut bytes = Vec::new();
    reader.read_to_end(&mut bytes)?;
    parse_ply(&bytes)
}

/// Reads a PLY stream and checks that its body uses `format`.
pub fn load_point_cloud<R: Read>(reader: R, format: PlyFormat) -> Result<PointCloud, PlyError> {
    let mut bytes = Vec::new();
    let mut reader = reader;
    reader.read_to_end(&mut bytes)?;
    let header = parse_header(&bytes)?;
    if header.format != format {
        return Err(PlyError::at(
            PlyErrorKind::UnsupportedFormat(format!(
                "{} (expected {})",
                header.format.header_token(),
                format.header_token()
            )),
            Position::Line(2),
        ));
    }
    parse_body(&bytes, &header)
}

pub fn parse_ply(bytes: &[u8]) -> Result<PointCloud, PlyError> {
    let header = parse_header(bytes)?;
    parse_body(bytes, &header)
}

fn parse_body(bytes: &[u8], header: &Header) -> Result<PointCloud, PlyError> {
    let (vertex_pos, vertex) = header
        .elements
        .iter()
        .enumerate()
        .find(|(_, e)| e.name == "vertex")
        .ok_or_else(|| {
            PlyError::at(
                PlyErrorKind::MissingVertexElement,
                Position::Line(header.body_line - 1),
            )
        })?;
    let layout = VertexLayout::from_element(vertex, header.body_line - 1)?;
    let rows = match header.format {
        PlyFormat::Ascii => read_ascii(bytes, header, vertex_pos, &layout)?,
        PlyFormat::BinaryLittleEndian => read_binary(bytes, header, vertex_pos, &layout)?,
    };

    let mut points = Vec::with_capacity(rows.len());
    let mut normals = layout.normals.map(|_| Vec::with_capacity(rows.len()));
    for (i, (p, n, pos)) in rows.into_iter().enumerate() {
        points.push(p);
        if let (Some(ns), Some(n)) = (normals.as_mut(), n) {
            let len = crate::geom::norm(n);
            if len == 0.0 || !len.is_finite() {
                return Err(PlyError::at(PlyErrorKind::DegenerateNormal(i), pos));
            }
            ns.push([n[0] / len, n[1] / len, n[2] / len]);
        }
    }
    let cloud = PointCloud::new(points);
    Ok(match normals {
        Some(ns) => cloud
            .with_normals(ns)
            .expect("renormalized normals are unit length"),
        None => cloud,
    })
}

type Row = (Point3, Option<Point3>, Position);

fn parse_header(bytes: &[u8]) -> Result<Header, PlyError> {
    let mut offset = 0usize;
    let mut line_no = 0usize;
    let mut format = None;
    let mut elements: Vec<Element> = Vec::new();
    loop {
        let end = bytes[offset..]
            .iter()
            .position(|&b| b == b'\n')
            .ok_or_else(|| {
                PlyError::at(
                    PlyErrorKind::MalformedHeader("missing end_header".into()),
                    Position::Line(line_no + 1),
                )
            })?;
        line_no += 1;
        let raw = &bytes[offset..offset + end];
        offset += end + 1;
        let line = std::str::from_utf8(raw)
            .map_err(|_| {
                PlyError::at(
                    PlyErrorKind::MalformedHeader("non UTF-8 header line".into()),
                    Position::Line(line_no),
                )
            })?
            .trim_end_matches('\r')
            .trim();
        let here = Position::Line(line_no);
        let malformed =
            |msg: &str| PlyError::at(PlyErrorKind::MalformedHeader(msg.to_string()), here);
        if line_no == 1 {
            if line != "ply" {
                return Err(malformed("first line must be `ply`"));
            }
            continue;
        }
        let mut tokens = line.split_whitespace();
        match tokens.next() {
            None | Some("comment") | Some("obj_info") => {}
            Some("format") => {
                let kind = tokens
                    .next()
                    .ok_or_else(|| malformed("format without type"))?;
                format = Some(match kind {
                    "ascii" => PlyFormat::Ascii,
                    "binary_little_endian" => PlyFormat::BinaryLittleEndian,
                    other => {
                        return Err(PlyError::at(
                            PlyErrorKind::UnsupportedFormat(other.into()),
                            here,
                        ))
                    }
                });
            }
            Some("element") => {
                let name = tokens
                    .next()
                    .ok_or_else(|| malformed("element without name"))?;
                let count = tokens
                    .next()
                    .and_then(|c| c.parse::<usize>().ok())
                    .ok_or_else(|| malformed("element count is not a non-negative integer"))?;
                elements.push(Element {
                    name: name.to_string(),
                    count,
                    properties: Vec::new(),
                });
            }
            Some("property") => {
                let element = elements
                    .last_mut()
                    .ok_or_else(|| malformed("property before any element"))?;
                let ty = tokens
                    .next()
                    .ok_or_else(|| malformed("property without type"))?;
                let scalar = |t: &str| {
                    Scalar::parse(t).ok_or_else(|| {
                        PlyError::at(PlyErrorKind::UnsupportedType(t.to_string()), here)
                    })
                };
                let property = if ty == "list" {
                    let count = scalar(
                        tokens
                            .next()
                            .ok_or_else(|| malformed("list without count type"))?,
                    )?;
                    let item = scalar(
                        tokens
                            .next()
                            .ok_or_else(|| malformed("list without item type"))?,
                    )?;
                    if matches!(count, Scalar::F32 | Scalar::F64) {
                        return Err(malformed("list count type must be an integer"));
                    }
                    Property::List { count, item }
                } else {
                    Property::Scalar {
                        ty: scalar(ty)?,
                        name: tokens
                            .next()
                            .ok_or_else(|| malformed("property without name"))?
                            .to_string(),
                    }
                };
                element.properties.push(property);
            }
            Some("end_header") => break,
            Some(other) => return Err(malformed(&format!("unknown keyword `{other}`"))),
        }
    }
    let format = format.ok_or_else(|| {
        PlyError::at(
            PlyErrorKind::MalformedHeader("missing format line".into()),
            Position::Line(line_no),
        )
    })?;
    Ok(Header {
        format,
        elements,
        body_offset: offset,
        body_line: line_no + 1,
    })
}

fn read_ascii(
    bytes: &[u8],
    header: &Header,
    vertex_pos: usize,
    layout: &VertexLayout,
) -> Result<Vec<Row>, PlyError> {
    let body = std::str::from_utf8(&bytes[header.body_offset..]).map_err(|e| {
        PlyError::at(
            PlyErrorKind::InvalidValue("non UTF-8 ASCII body".into()),
            Position::Byte(header.body_offset + e.valid_up_to()),
        )
    })?;
    let mut lines = body
        .lines()
        .enumerate()
        .map(|(i, l)| (header.body_line + i, l.trim()))
        .filter(|(_, l)| !l.is_empty());
    let mut last_line = header.body_line;
    let mut rows = Vec::new();
    for (ei, element) in header.elements.iter().enumerate().take(vertex_pos + 1) {
        for _ in 0..element.count {
            let (line_no, line) = lines.next().ok_or_else(|| {
                PlyError::at(PlyErrorKind::Truncated, Position::Line(last_line + 1))
            })?;
            last_line = line_no;
            if ei != vertex_pos {
                continue;
            }
            let here = Position::Line(line_no);
            let mut tokens = line.split_whitespace();
            let mut next = || -> Result<f64, PlyError> {
                let t = tokens
                    .next()
                    .ok_or_else(|| PlyError::at(PlyErrorKind::Truncated, here))?;
                t.parse::<f64>()
                    .map_err(|_| PlyError::at(PlyErrorKind::InvalidValue(t.to_string()), here))
            };
            let mut values = Vec::with_capacity(element.properties.len());
            for property in &element.properties {
                match property {
                    Property::Scalar { .. } => values.push(next()?),
                    Property::List { .. } => {
                        let n = next()?;
                        if n < 0.0 || n.fract() != 0.0 {
                            return Err(PlyError::at(
                                PlyErrorKind::InvalidValue(format!("list length {n}")),
                                here,
                            ));
                        }
                        for _ in 0..n as usize {
                            next()?;
                        }
                        values.push(f64::NAN);
                    }
                }
            }
            rows.push(row_from_values(&values, layout, here));
        }
    }
    Ok(rows)
}

fn read_binary(
    bytes: &[u8],
    header: &Header,
    vertex_pos: usize,
    layout: &VertexLayout,
) -> Result<Vec<Row>, PlyError> {
    let mut offset = header.body_offset;
    let take = |offset: &mut usize, n: usize| -> Result<&[u8], PlyError> {
        let end = *offset + n;
        if end > bytes.len() {
            return Err(PlyError::at(
                PlyErrorKind::Truncated,
                Position::Byte(bytes.len()),
            ));
        }
        let s = &bytes[*offset..end];
        *offset = end;
        Ok(s)
    };
    let mut rows = Vec::new();
    for (ei, element) in header.elements.iter().enumerate().take(vertex_pos + 1) {
        for _ in 0..element.count {
            let row_start = offset;
            let mut values = Vec::with_capacity(element.properties.len());
            for property in &element.properties {
                match *property {
                    Property::Scalar { ty, .. } => {
                        values.push(ty.decode_le(take(&mut offset, ty.size())?));
                    }
                    Property::List { count, item } => {
                        let n = count.decode_le(take(&mut offset, count.size())?);
                        if n < 0.0 {
                            return Err(PlyError::at(
                                PlyErrorKind::InvalidValue(format!("list length {n}")),
                                Position::Byte(offset - count.size()),
                            ));
                        }
                        take(&mut offset, n as usize * item.size())?;
                        values.push(f64::NAN);
                    }
                }
            }
            if ei == vertex_pos {
                rows.push(row_from_values(&values, layout, Position::Byte(row_start)));
            }
        }
    }
    Ok(rows)
}

fn row_from_values(values: &[f64], layout: &VertexLayout, pos: Position) -> Row {
    let pick = |idx: [usize; 3]| [values[idx[0]], values[idx[1]], values[idx[2]]];
    (pick(layout.xyz), layout.normals.map(pick), pos)
}

/// Writes `cloud` with double-precision `x y z` (and `nx ny nz` when the
/// cloud has normals).
pub fn write_ply<W: Write>(cloud: &PointCloud, format: PlyFormat, mut w: W) -> std::io::Result<()> {
    let normals = cloud.normals();
    let mut header = format!(
        "ply\nformat {} 1.0\nelement vertex {}\nproperty double x\nproperty double y\nproperty double z\n",
        format.header_token(),
        cloud.len()
    );
    if normals.is_some() {
        header.push_str("property double nx\nproperty double ny\nproperty double nz\n");
    }
    header.push_str("end_header\n");
    w.write_all(header.as_bytes())?;

    let mut buf = Vec::with_capacity(cloud.len() * 48);
    for (i, p) in cloud.points().iter().enumerate() {
        let n = normals.map(|ns| ns[i]);
        let values = p.iter().chain(n.iter().flatten());
        match format {
            PlyFormat::Ascii => {
                let line: Vec<String> = values.map(|v| v.to_string()).collect();
                buf.extend_from_slice(line.join(" ").as_bytes());
                buf.push(b'\n');
            }
            PlyFormat::BinaryLittleEndian => {
                for v in values {
                    buf.extend_from_slice(&v.to_le_bytes());
                }
            }
        }
    }
    w.write_all(&buf)?;
    w.flush()
}
