use rustc_hash::FxHashMap;
use serde::Serialize;

use super::{star_link, Edge, MeshError, TriMesh, VertexId};

/// A failure of the simplicial-complex or manifold conditions.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum Violation {
    /// Triangle references a vertex that is not in the vertex set.
    MissingVertex {
        tri: usize,
        vertex: usize,
    },
    /// Edge endpoint is not in the vertex set.
    EdgeEndpointMissing {
        edge: (usize, usize),
    },
    /// A triangle side is absent from the edge set.
    TriangleEdgeMissing {
        tri: usize,
        edge: (usize, usize),
    },
    RepeatedVertex {
        tri: usize,
    },
    DuplicateTriangle {
        first: usize,
        second: usize,
    },
    NonManifoldEdge {
        edge: (usize, usize),
        triangles: usize,
    },
    InconsistentOrientation {
        edge: (usize, usize),
    },
    NonManifoldVertex {
        vertex: usize,
    },
}

/// Checks raw `(V, E, T)` data. When `edges` is `None` the edge set is taken
/// to be the triangle sides, so closure can only fail on vertex indices.
pub fn validate_raw(num_vertices: usize, edges: Option<&[(usize, usize)]>, triangles: &[[usize; 3]]) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut usable = Vec::with_capacity(triangles.len());
    for (i, t) in triangles.iter().enumerate() {
        let mut ok = true;
        for &v in t {
            if v >= num_vertices {
                out.push(Violation::MissingVertex { tri: i, vertex: v });
                ok = false;
            }
        }
        if t[0] == t[1] || t[1] == t[2] || t[0] == t[2] {
            out.push(Violation::RepeatedVertex { tri: i });
            ok = false;
        }
        if ok {
            usable.push(i);
        }
    }
    if let Some(edges) = edges {
        let mut set = rustc_hash::FxHashSet::default();
        for &(a, b) in edges {
            if a >= num_vertices || b >= num_vertices {
                out.push(Violation::EdgeEndpointMissing { edge: (a, b) });
            }
            set.insert(Edge::new(a, b));
        }
        for &i in &usable {
            let t = triangles[i];
            for k in 0..3 {
                let e = Edge::new(t[k], t[(k + 1) % 3]);
                if !set.contains(&e) {
                    out.push(Violation::TriangleEdgeMissing { tri: i, edge: (e.a(), e.b()) });
                }
            }
        }
    }

    let mut seen: FxHashMap<[usize; 3], usize> = FxHashMap::default();
    for &i in &usable {
        let mut key = triangles[i];
        key.sort_unstable();
        if let Some(&first) = seen.get(&key) {
            out.push(Violation::DuplicateTriangle { first, second: i });
        } else {
            seen.insert(key, i);
        }
    }

    // directed half-edge bookkeeping in first-seen order
    let mut order: Vec<Edge> = Vec::new();
    let mut half: FxHashMap<Edge, Vec<(usize, usize)>> = FxHashMap::default();
    for &i in &usable {
        let t = triangles[i];
        for k in 0..3 {
            let (a, b) = (t[k], t[(k + 1) % 3]);
            let e = Edge::new(a, b);
            let entry = half.entry(e).or_insert_with(|| {
                order.push(e);
                Vec::new()
            });
            entry.push((a, b));
        }
    }
    for e in order {
        let uses = &half[&e];
        if uses.len() > 2 {
            out.push(Violation::NonManifoldEdge { edge: (e.a(), e.b()), triangles: uses.len() });
        } else if uses.len() == 2 && uses[0] == uses[1] {
            out.push(Violation::InconsistentOrientation { edge: (e.a(), e.b()) });
        }
    }

    if out.is_empty() {
        let positions = vec![crate::geometry::Point3::zeros(); num_vertices];
        let tris: Vec<[usize; 3]> = usable.iter().map(|&i| triangles[i]).collect();
        if let Ok(mesh) = TriMesh::from_triangles(positions, &tris) {
            for v in 0..num_vertices {
                if mesh.vertex_triangles(v).is_empty() {
                    continue;
                }
                if let Err(MeshError::NonManifold(_)) = star_link(&mesh, v) {
                    out.push(Violation::NonManifoldVertex { vertex: v });
                }
            }
        }
    }
    out
}

pub fn validate(mesh: &TriMesh) -> Vec<Violation> {
    // work on compact indices so that dead slots never show up
    let mut local = vec![usize::MAX; mesh.vertex_capacity()];
    let mut n = 0;
    for v in mesh.vertex_ids() {
        local[v] = n;
        n += 1;
    }
    let mut missing = Vec::new();
    let tris: Vec<[usize; 3]> = mesh
        .triangle_ids()
        .map(|t| {
            mesh.triangle(t).map(|v: VertexId| {
                if local[v] == usize::MAX {
                    missing.push(Violation::MissingVertex { tri: t, vertex: v });
                }
                local[v]
            })
        })
        .collect();
    if !missing.is_empty() {
        return missing;
    }
    validate_raw(n, None, &tris)
}
