//! ASCII OFF and OBJ meshes.
//!
//! Both readers accept triangle faces and two-index polyline elements (OFF
//! faces of size 2, OBJ `l` records). A polyline whose vertices all have
//! `z == 0` becomes a plane curve, otherwise a space curve.

use std::fs;
use std::io::Write;
use std::path::Path;

use nlcurv_core::{DiscreteHypersurface, Embedding};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Mesh(#[from] nlcurv_core::Error),
}

impl LoadError {
    pub fn kind(&self) -> &'static str {
        match self {
            LoadError::Io { .. } => "IoError",
            LoadError::Parse { .. } => "ParseError",
            LoadError::Mesh(e) => e.kind(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Off,
    Obj,
}

impl Format {
    pub fn from_path(path: &Path) -> Option<Format> {
        match path.extension()?.to_str()?.to_ascii_lowercase().as_str() {
            "off" => Some(Format::Off),
            "obj" => Some(Format::Obj),
            _ => None,
        }
    }
}

fn parse_err(line: usize, msg: impl Into<String>) -> LoadError {
    LoadError::Parse { line, msg: msg.into() }
}

/// Read a mesh, picking the format from the file extension.
pub fn load_mesh(path: &Path) -> Result<DiscreteHypersurface, LoadError> {
    let text = fs::read_to_string(path).map_err(|source| LoadError::Io {
        path: path.display().to_string(),
        source,
    })?;
    match Format::from_path(path) {
        Some(Format::Off) => parse_off(&text),
        Some(Format::Obj) => parse_obj(&text),
        None => Err(parse_err(0, format!("unknown mesh extension on {}", path.display()))),
    }
}

#[derive(Default)]
struct Raw {
    vertices: Vec<[f64; 3]>,
    triangles: Vec<[usize; 3]>,
    segments: Vec<[usize; 2]>,
}

impl Raw {
    fn finish(self) -> Result<DiscreteHypersurface, LoadError> {
        let Raw { vertices, triangles, segments } = self;
        match (triangles.is_empty(), segments.is_empty()) {
            (false, true) => Ok(DiscreteHypersurface::from_triangles(vertices, triangles)?),
            (true, false) => {
                let embedding = if vertices.iter().all(|v| v[2] == 0.0) {
                    Embedding::PlaneCurve
                } else {
                    Embedding::SpaceCurve
                };
                Ok(DiscreteHypersurface::from_segments(embedding, vertices, segments)?)
            }
            (false, false) => Err(parse_err(0, "file mixes triangles and polyline segments")),
            (true, true) => Err(parse_err(0, "file has no elements")),
        }
    }
}

fn parse_f64(tok: &str, line: usize) -> Result<f64, LoadError> {
    tok.parse::<f64>().map_err(|_| parse_err(line, format!("bad number {tok:?}")))
}

/// Meaningful lines with comments stripped, numbered from 1.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, l)| {
        let l = l.split('#').next().unwrap_or("").trim();
        (!l.is_empty()).then_some((i + 1, l))
    })
}

pub fn parse_off(text: &str) -> Result<DiscreteHypersurface, LoadError> {
    let mut lines = content_lines(text);
    let (hl, header) = lines.next().ok_or_else(|| parse_err(1, "empty file"))?;
    // the counts may share the header line ("OFF 12 20 30")
    let mut toks: Vec<&str> = header.split_whitespace().collect();
    if toks.first() != Some(&"OFF") {
        return Err(parse_err(hl, "missing OFF header"));
    }
    toks.remove(0);
    let mut cl = hl;
    if toks.is_empty() {
        let (l, next) = lines.next().ok_or_else(|| parse_err(hl, "missing counts"))?;
        toks = next.split_whitespace().collect();
        cl = l;
    }
    if toks.len() < 2 {
        return Err(parse_err(cl, "expected vertex and face counts"));
    }
    let count = |t: &str| t.parse::<usize>().map_err(|_| parse_err(cl, format!("bad count {t:?}")));
    let (nv, nf) = (count(toks[0])?, count(toks[1])?);

    let mut raw = Raw::default();
    for _ in 0..nv {
        let (l, line) = lines.next().ok_or_else(|| parse_err(cl, "file ends inside the vertex list"))?;
        let t: Vec<&str> = line.split_whitespace().collect();
        if t.len() < 2 {
            return Err(parse_err(l, "vertex needs at least two coordinates"));
        }
        let z = if t.len() >= 3 { parse_f64(t[2], l)? } else { 0.0 };
        raw.vertices.push([parse_f64(t[0], l)?, parse_f64(t[1], l)?, z]);
    }
    for _ in 0..nf {
        let (l, line) = lines.next().ok_or_else(|| parse_err(cl, "file ends inside the face list"))?;
        let t: Vec<usize> = line
            .split_whitespace()
            .map(|x| x.parse::<usize>().map_err(|_| parse_err(l, format!("bad index {x:?}"))))
            .collect::<Result<_, _>>()?;
        let (&k, idx) = t.split_first().ok_or_else(|| parse_err(l, "empty face"))?;
        // trailing colour values are allowed
        if idx.len() < k {
            return Err(parse_err(l, format!("face declares {k} vertices but lists {}", idx.len())));
        }
        if let Some(&bad) = idx[..k].iter().find(|&&i| i >= nv) {
            return Err(parse_err(l, format!("vertex index {bad} out of range")));
        }
        match k {
            2 => raw.segments.push([idx[0], idx[1]]),
            3 => raw.triangles.push([idx[0], idx[1], idx[2]]),
            _ => return Err(parse_err(l, format!("{k}-gon faces are not supported"))),
        }
    }
    raw.finish()
}

pub fn parse_obj(text: &str) -> Result<DiscreteHypersurface, LoadError> {
    let mut raw = Raw::default();
    // indices are resolved against the vertices read so far
    let index = |tok: &str, l: usize, nv: usize| -> Result<usize, LoadError> {
        let head = tok.split('/').next().unwrap_or("");
        let i: i64 = head.parse().map_err(|_| parse_err(l, format!("bad index {tok:?}")))?;
        let resolved = if i < 0 { nv as i64 + i } else { i - 1 };
        if resolved < 0 || resolved >= nv as i64 {
            return Err(parse_err(l, format!("vertex index {i} out of range")));
        }
        Ok(resolved as usize)
    };
    for (l, line) in content_lines(text) {
        let mut t = line.split_whitespace();
        let tag = t.next().unwrap_or("");
        let rest: Vec<&str> = t.collect();
        match tag {
            "v" => {
                if rest.len() < 3 {
                    return Err(parse_err(l, "vertex needs three coordinates"));
                }
                raw.vertices.push([parse_f64(rest[0], l)?, parse_f64(rest[1], l)?, parse_f64(rest[2], l)?]);
            }
            "f" => {
                let nv = raw.vertices.len();
                let idx: Vec<usize> = rest.iter().map(|x| index(x, l, nv)).collect::<Result<_, _>>()?;
                if idx.len() != 3 {
                    return Err(parse_err(l, format!("{}-gon faces are not supported", idx.len())));
                }
                raw.triangles.push([idx[0], idx[1], idx[2]]);
            }
            "l" => {
                let nv = raw.vertices.len();
                let idx: Vec<usize> = rest.iter().map(|x| index(x, l, nv)).collect::<Result<_, _>>()?;
                if idx.len() < 2 {
                    return Err(parse_err(l, "polyline needs two vertices"));
                }
                raw.segments.extend(idx.windows(2).map(|w| [w[0], w[1]]));
            }
            // normals, texture coordinates, groups and materials carry nothing we use
            "vn" | "vt" | "vp" | "g" | "o" | "s" | "usemtl" | "mtllib" => {}
            other => return Err(parse_err(l, format!("unknown record {other:?}"))),
        }
    }
    raw.finish()
}

/// Write `mesh` as ASCII OFF. Curves are written as two-index faces.
pub fn write_off(mesh: &DiscreteHypersurface, mut out: impl Write) -> std::io::Result<()> {
    writeln!(out, "OFF")?;
    writeln!(out, "{} {} 0", mesh.num_vertices(), mesh.num_elements())?;
    for v in mesh.vertices() {
        // `{:?}` prints the shortest string that round-trips
        writeln!(out, "{:?} {:?} {:?}", v[0], v[1], v[2])?;
    }
    for e in mesh.elements() {
        let idx: Vec<String> = e.iter().map(|i| i.to_string()).collect();
        writeln!(out, "{} {}", e.len(), idx.join(" "))?;
    }
    Ok(())
}

pub fn save_off(mesh: &DiscreteHypersurface, path: &Path) -> std::io::Result<()> {
    let mut buf = Vec::new();
    write_off(mesh, &mut buf)?;
    fs::write(path, buf)
}
