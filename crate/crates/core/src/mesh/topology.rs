use rustc_hash::{FxHashMap, FxHashSet};

use super::{Edge, MeshError, TriId, TriMesh, VertexId};

/// Partition of edges and vertices into boundary and interior sets.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MeshClassification {
    pub boundary_edges: Vec<Edge>,
    pub interior_edges: Vec<Edge>,
    pub boundary_vertices: Vec<VertexId>,
    pub interior_vertices: Vec<VertexId>,
}

impl MeshClassification {
    pub fn is_boundary_vertex(&self, v: VertexId) -> bool {
        self.boundary_vertices.binary_search(&v).is_ok()
    }
}

/// An edge bounding one triangle is a boundary edge; a vertex touching a
/// boundary edge is a boundary vertex. Vertex lists come out sorted.
pub fn classify(mesh: &TriMesh) -> MeshClassification {
    let mut out = MeshClassification::default();
    let mut on_boundary = vec![false; mesh.vertex_capacity()];
    for e in mesh.edges() {
        if mesh.edge_triangles(e).len() == 1 {
            on_boundary[e.a()] = true;
            on_boundary[e.b()] = true;
            out.boundary_edges.push(e);
        } else {
            out.interior_edges.push(e);
        }
    }
    for v in mesh.vertex_ids() {
        if on_boundary[v] {
            out.boundary_vertices.push(v);
        } else {
            out.interior_vertices.push(v);
        }
    }
    out
}

/// Closed star and link of a vertex.
///
/// `link` lists the link vertices in traversal order; consecutive entries
/// (wrapping around when `closed`) are the link edges.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StarLink {
    pub vertex: VertexId,
    pub star: Vec<TriId>,
    pub link: Vec<VertexId>,
    pub closed: bool,
}

impl StarLink {
    pub fn link_edges(&self) -> Vec<Edge> {
        let n = self.link.len();
        let count = if self.closed { n } else { n.saturating_sub(1) };
        (0..count).map(|i| Edge::new(self.link[i], self.link[(i + 1) % n])).collect()
    }
}

pub fn star_link(mesh: &TriMesh, v: VertexId) -> Result<StarLink, MeshError> {
    if !mesh.is_vertex_alive(v) {
        return Err(MeshError::NoSuchVertex(v));
    }
    let star: Vec<TriId> = mesh.vertex_triangles(v).to_vec();
    if star.is_empty() {
        return Err(MeshError::IsolatedVertex(v));
    }
    // each star triangle (v, b, c) contributes the directed link edge b -> c
    let mut next: FxHashMap<VertexId, VertexId> = FxHashMap::default();
    let mut has_incoming: FxHashSet<VertexId> = FxHashSet::default();
    for &t in &star {
        let tri = mesh.triangle(t);
        let k = tri.iter().position(|&w| w == v).expect("star triangle contains vertex");
        let b = tri[(k + 1) % 3];
        let c = tri[(k + 2) % 3];
        if next.insert(b, c).is_some() || !has_incoming.insert(c) {
            return Err(MeshError::NonManifold(v));
        }
    }
    let starts: Vec<VertexId> = {
        let mut s: Vec<VertexId> = next.keys().copied().filter(|b| !has_incoming.contains(b)).collect();
        s.sort_unstable();
        s
    };
    let (start, closed) = match starts.len() {
        0 => (*next.keys().min().expect("non-empty star"), true),
        1 => (starts[0], false),
        _ => return Err(MeshError::NonManifold(v)),
    };
    let mut link = vec![start];
    let mut cur = start;
    while let Some(&n) = next.get(&cur) {
        if n == start {
            break;
        }
        link.push(n);
        cur = n;
        if link.len() > star.len() + 1 {
            return Err(MeshError::NonManifold(v));
        }
    }
    let expected = if closed { star.len() } else { star.len() + 1 };
    if link.len() != expected {
        return Err(MeshError::NonManifold(v));
    }
    Ok(StarLink { vertex: v, star, link, closed })
}

/// Triangles incident to any seed vertex, as a sorted list of triangle ids.
///
/// Feeding the vertex set of the result back in gives the next BFS ring.
pub fn bfs_triangles(mesh: &TriMesh, seeds: &[VertexId]) -> Vec<TriId> {
    let mut tris: Vec<TriId> = seeds
        .iter()
        .filter(|&&v| mesh.is_vertex_alive(v))
        .flat_map(|&v| mesh.vertex_triangles(v).iter().copied())
        .collect();
    tris.sort_unstable();
    tris.dedup();
    tris
}

/// Submesh of all triangles incident to a seed vertex, with its local-to-global vertex map.
pub fn bfs_expand(mesh: &TriMesh, seeds: &[VertexId]) -> (TriMesh, Vec<VertexId>) {
    mesh.submesh(&bfs_triangles(mesh, seeds))
}

/// Sorted vertex set of a list of triangles.
pub fn triangle_vertices(mesh: &TriMesh, tris: &[TriId]) -> Vec<VertexId> {
    let mut vs: Vec<VertexId> = tris.iter().flat_map(|&t| mesh.triangle(t)).collect();
    vs.sort_unstable();
    vs.dedup();
    vs
}
