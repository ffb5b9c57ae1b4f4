use std::fmt::Write as _;
use std::path::Path;

use thiserror::Error;

use crate::geometry::Point3;
use crate::mesh::{validate, TriMesh, Violation};

#[derive(Debug, Error)]
pub enum ObjError {
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("line {line}: face with {count} vertices; only triangles are supported")]
    NotTriangle { line: usize, count: usize },
    #[error("mesh: {0}")]
    Mesh(String),
    #[error("mesh fails validation: {} violation(s), first {:?}", .0.len(), .0.first())]
    Invalid(Vec<Violation>),
}

/// OBJ text of the live part of `mesh`; coordinates carry 17 significant digits.
pub fn obj_string(mesh: &TriMesh) -> String {
    let mut out = String::new();
    let mut index = vec![0usize; mesh.vertex_capacity()];
    for (i, v) in mesh.vertex_ids().enumerate() {
        index[v] = i + 1;
        let p = mesh.position(v);
        writeln!(out, "v {:.16e} {:.16e} {:.16e}", p.x, p.y, p.z).unwrap();
    }
    for t in mesh.triangle_ids() {
        let [a, b, c] = mesh.triangle(t);
        writeln!(out, "f {} {} {}", index[a], index[b], index[c]).unwrap();
    }
    out
}

/// Parses OBJ text without checking manifoldness. Texture and normal indices
/// in face records are ignored; records other than `v` and `f` are skipped.
pub fn parse_obj(text: &str) -> Result<TriMesh, ObjError> {
    let mut pos = Vec::new();
    let mut tris = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let mut it = raw.split_whitespace();
        match it.next() {
            Some("v") => {
                let c: Vec<f64> = it
                    .take(3)
                    .map(|s| s.parse::<f64>())
                    .collect::<Result<_, _>>()
                    .map_err(|e| ObjError::Parse { line, msg: e.to_string() })?;
                if c.len() != 3 {
                    return Err(ObjError::Parse { line, msg: "vertex needs three coordinates".into() });
                }
                pos.push(Point3::new(c[0], c[1], c[2]));
            }
            Some("f") => {
                let idx: Vec<usize> = it
                    .map(|s| {
                        let head = s.split('/').next().unwrap_or("");
                        match head.parse::<usize>() {
                            Ok(k) if k >= 1 => Ok(k - 1),
                            _ => Err(ObjError::Parse { line, msg: format!("bad face index {s:?}") }),
                        }
                    })
                    .collect::<Result<_, _>>()?;
                if idx.len() != 3 {
                    return Err(ObjError::NotTriangle { line, count: idx.len() });
                }
                tris.push([idx[0], idx[1], idx[2]]);
            }
            _ => {}
        }
    }
    TriMesh::from_triangles(pos, &tris).map_err(|e| ObjError::Mesh(e.to_string()))
}

/// Reads a triangle-only OBJ file and rejects meshes that fail [`validate`].
pub fn read_obj(path: impl AsRef<Path>) -> Result<TriMesh, ObjError> {
    let mesh = parse_obj(&std::fs::read_to_string(path)?)?;
    let v = validate(&mesh);
    if v.is_empty() {
        Ok(mesh)
    } else {
        Err(ObjError::Invalid(v))
    }
}

pub fn write_obj(mesh: &TriMesh, path: impl AsRef<Path>) -> Result<(), ObjError> {
    std::fs::write(path, obj_string(mesh))?;
    Ok(())
}
