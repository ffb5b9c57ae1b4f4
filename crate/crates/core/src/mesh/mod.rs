//! Indexed triangular 2-complex `(V, E, T)` with incrementally maintained adjacency.
//!
//! Vertices and triangles are addressed by stable slot indices. Removal
//! leaves a dead slot behind so that local operations never renumber the
//! mesh; [`TriMesh::compact`] drops dead slots when a consistent numbering
//! is wanted again.

pub(crate) mod quality;
pub(crate) mod topology;
mod validate;

pub use quality::{check_regularity, QualityReport, RegularityParams};
pub use topology::{bfs_expand, bfs_triangles, classify, star_link, triangle_vertices, MeshClassification, StarLink};
pub use validate::{validate, validate_raw, Violation};

use rustc_hash::FxHashMap;
use smallvec::SmallVec;
use thiserror::Error;

use crate::geometry::{self, Point3};

pub type VertexId = usize;
pub type TriId = usize;

/// Unordered vertex pair stored as `(min, max)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
pub struct Edge(VertexId, VertexId);

impl Edge {
    pub fn new(a: VertexId, b: VertexId) -> Self {
        if a <= b {
            Edge(a, b)
        } else {
            Edge(b, a)
        }
    }

    pub fn a(&self) -> VertexId {
        self.0
    }

    pub fn b(&self) -> VertexId {
        self.1
    }

    pub fn contains(&self, v: VertexId) -> bool {
        self.0 == v || self.1 == v
    }

    pub fn other(&self, v: VertexId) -> VertexId {
        if self.0 == v {
            self.1
        } else {
            self.0
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MeshError {
    #[error("triangle {tri} references missing vertex {vertex}")]
    MissingVertex { tri: usize, vertex: usize },
    #[error("triangle {0} repeats a vertex")]
    RepeatedVertex(usize),
    #[error("vertex {0} has no incident triangle")]
    IsolatedVertex(VertexId),
    #[error("vertex {0} does not exist")]
    NoSuchVertex(VertexId),
    #[error("non-manifold neighbourhood at vertex {0}")]
    NonManifold(VertexId),
}

#[derive(Clone, Debug, Default)]
pub struct TriMesh {
    positions: Vec<Point3>,
    vertex_alive: Vec<bool>,
    triangles: Vec<[VertexId; 3]>,
    triangle_alive: Vec<bool>,
    vertex_tris: Vec<SmallVec<[TriId; 8]>>,
    edge_tris: FxHashMap<Edge, SmallVec<[TriId; 2]>>,
    live_vertices: usize,
    live_triangles: usize,
}

impl TriMesh {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a mesh from vertex positions and oriented triangles.
    ///
    /// Only index errors are rejected here; manifoldness and orientation are
    /// reported by [`validate`].
    pub fn from_triangles(positions: Vec<Point3>, triangles: &[[VertexId; 3]]) -> Result<Self, MeshError> {
        let mut mesh = TriMesh::new();
        for p in positions {
            mesh.add_vertex(p);
        }
        for (i, t) in triangles.iter().enumerate() {
            for &v in t {
                if v >= mesh.positions.len() {
                    return Err(MeshError::MissingVertex { tri: i, vertex: v });
                }
            }
            if t[0] == t[1] || t[1] == t[2] || t[0] == t[2] {
                return Err(MeshError::RepeatedVertex(i));
            }
            mesh.add_triangle(*t);
        }
        Ok(mesh)
    }

    pub fn num_vertices(&self) -> usize {
        self.live_vertices
    }

    pub fn num_triangles(&self) -> usize {
        self.live_triangles
    }

    pub fn num_edges(&self) -> usize {
        self.edge_tris.len()
    }

    /// One past the largest vertex slot ever allocated.
    pub fn vertex_capacity(&self) -> usize {
        self.positions.len()
    }

    pub fn triangle_capacity(&self) -> usize {
        self.triangles.len()
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.live_vertices as i64 - self.edge_tris.len() as i64 + self.live_triangles as i64
    }

    pub fn is_vertex_alive(&self, v: VertexId) -> bool {
        v < self.vertex_alive.len() && self.vertex_alive[v]
    }

    pub fn is_triangle_alive(&self, t: TriId) -> bool {
        t < self.triangle_alive.len() && self.triangle_alive[t]
    }

    pub fn position(&self, v: VertexId) -> &Point3 {
        &self.positions[v]
    }

    /// Positions by vertex slot, dead slots included.
    pub fn positions(&self) -> &[Point3] {
        &self.positions
    }

    /// Mutable positions by vertex slot; connectivity is untouched.
    pub fn positions_mut(&mut self) -> &mut [Point3] {
        &mut self.positions
    }

    pub fn set_position(&mut self, v: VertexId, p: Point3) {
        self.positions[v] = p;
    }

    pub fn triangle(&self, t: TriId) -> [VertexId; 3] {
        self.triangles[t]
    }

    pub fn triangle_points(&self, t: TriId) -> [Point3; 3] {
        let [a, b, c] = self.triangles[t];
        [self.positions[a], self.positions[b], self.positions[c]]
    }

    pub fn vertex_ids(&self) -> impl Iterator<Item = VertexId> + '_ {
        (0..self.positions.len()).filter(move |&v| self.vertex_alive[v])
    }

    pub fn triangle_ids(&self) -> impl Iterator<Item = TriId> + '_ {
        (0..self.triangles.len()).filter(move |&t| self.triangle_alive[t])
    }

    /// All edges in a deterministic order (first appearance in triangle order).
    pub fn edges(&self) -> Vec<Edge> {
        let mut out = Vec::with_capacity(self.edge_tris.len());
        for t in self.triangle_ids() {
            let tri = self.triangles[t];
            for k in 0..3 {
                let e = Edge::new(tri[k], tri[(k + 1) % 3]);
                if self.edge_tris[&e][0] == t {
                    out.push(e);
                }
            }
        }
        out
    }

    pub fn has_edge(&self, e: Edge) -> bool {
        self.edge_tris.contains_key(&e)
    }

    pub fn edge_triangles(&self, e: Edge) -> &[TriId] {
        self.edge_tris.get(&e).map(|s| s.as_slice()).unwrap_or(&[])
    }

    pub fn vertex_triangles(&self, v: VertexId) -> &[TriId] {
        &self.vertex_tris[v]
    }

    /// Sorted, de-duplicated vertices sharing an edge with `v`.
    pub fn neighbors(&self, v: VertexId) -> Vec<VertexId> {
        let mut out: Vec<VertexId> = Vec::with_capacity(8);
        for &t in &self.vertex_tris[v] {
            for &w in &self.triangles[t] {
                if w != v {
                    out.push(w);
                }
            }
        }
        out.sort_unstable();
        out.dedup();
        out
    }

    pub fn is_boundary_edge(&self, e: Edge) -> bool {
        self.edge_triangles(e).len() == 1
    }

    pub fn is_boundary_vertex(&self, v: VertexId) -> bool {
        self.vertex_tris[v].iter().any(|&t| {
            let tri = self.triangles[t];
            tri.iter().filter(|&&w| w != v).any(|&w| self.is_boundary_edge(Edge::new(v, w)))
        })
    }

    pub fn edge_length(&self, e: Edge) -> f64 {
        (self.positions[e.a()] - self.positions[e.b()]).norm()
    }

    pub fn triangle_angles(&self, t: TriId) -> [f64; 3] {
        let [a, b, c] = self.triangle_points(t);
        geometry::triangle_angles(&a, &b, &c)
    }

    pub fn min_angle(&self, t: TriId) -> f64 {
        let [a, b, c] = self.triangle_points(t);
        geometry::min_angle(&a, &b, &c)
    }

    /// Unnormalised right-hand-rule normal of triangle `t`.
    pub fn triangle_normal(&self, t: TriId) -> Point3 {
        let [a, b, c] = self.triangle_points(t);
        geometry::triangle_normal(&a, &b, &c)
    }

    pub fn add_vertex(&mut self, p: Point3) -> VertexId {
        self.positions.push(p);
        self.vertex_alive.push(true);
        self.vertex_tris.push(SmallVec::new());
        self.live_vertices += 1;
        self.positions.len() - 1
    }

    /// Removes an isolated vertex.
    pub fn remove_vertex(&mut self, v: VertexId) {
        assert!(self.vertex_tris[v].is_empty(), "vertex {v} still has incident triangles");
        if self.vertex_alive[v] {
            self.vertex_alive[v] = false;
            self.live_vertices -= 1;
        }
    }

    pub fn add_triangle(&mut self, tri: [VertexId; 3]) -> TriId {
        let t = self.triangles.len();
        self.triangles.push(tri);
        self.triangle_alive.push(true);
        self.live_triangles += 1;
        for k in 0..3 {
            self.vertex_tris[tri[k]].push(t);
            self.edge_tris.entry(Edge::new(tri[k], tri[(k + 1) % 3])).or_default().push(t);
        }
        t
    }

    pub fn remove_triangle(&mut self, t: TriId) {
        if !self.triangle_alive[t] {
            return;
        }
        self.triangle_alive[t] = false;
        self.live_triangles -= 1;
        let tri = self.triangles[t];
        for k in 0..3 {
            self.vertex_tris[tri[k]].retain(|x| *x != t);
            let e = Edge::new(tri[k], tri[(k + 1) % 3]);
            if let Some(list) = self.edge_tris.get_mut(&e) {
                list.retain(|x| *x != t);
                if list.is_empty() {
                    self.edge_tris.remove(&e);
                }
            }
        }
    }

    /// Removes `t` and inserts `tri` in a fresh slot.
    pub fn replace_triangle(&mut self, t: TriId, tri: [VertexId; 3]) -> TriId {
        self.remove_triangle(t);
        self.add_triangle(tri)
    }

    /// The triangle id and local corner of the directed half-edge `a -> b`, if present.
    pub fn directed_edge_triangle(&self, a: VertexId, b: VertexId) -> Option<(TriId, usize)> {
        for &t in self.edge_triangles(Edge::new(a, b)) {
            let tri = self.triangles[t];
            for k in 0..3 {
                if tri[k] == a && tri[(k + 1) % 3] == b {
                    return Some((t, k));
                }
            }
        }
        None
    }

    /// Drops dead slots. Returns the old-to-new vertex map (`None` for removed vertices).
    pub fn compact(&mut self) -> Vec<Option<VertexId>> {
        let mut remap = vec![None; self.positions.len()];
        let mut positions = Vec::with_capacity(self.live_vertices);
        for v in 0..self.positions.len() {
            if self.vertex_alive[v] {
                remap[v] = Some(positions.len());
                positions.push(self.positions[v]);
            }
        }
        let tris: Vec<[VertexId; 3]> = self
            .triangle_ids()
            .map(|t| self.triangles[t].map(|v| remap[v].expect("live triangle on dead vertex")))
            .collect();
        *self = TriMesh::from_triangles(positions, &tris).expect("compaction preserves indices");
        remap
    }

    /// Copies the given triangles into a standalone mesh.
    ///
    /// Returns the submesh and its local-to-global vertex map; local ids follow
    /// the order in which vertices are first met in `tris`.
    pub fn submesh(&self, tris: &[TriId]) -> (TriMesh, Vec<VertexId>) {
        let mut local: FxHashMap<VertexId, VertexId> = FxHashMap::default();
        let mut global = Vec::new();
        let mut out = TriMesh::new();
        let mut local_tris = Vec::with_capacity(tris.len());
        for &t in tris {
            let tri = self.triangles[t];
            let mut lt = [0; 3];
            for k in 0..3 {
                let v = tri[k];
                lt[k] = *local.entry(v).or_insert_with(|| {
                    global.push(v);
                    out.add_vertex(self.positions[v])
                });
            }
            local_tris.push(lt);
        }
        for lt in local_tris {
            out.add_triangle(lt);
        }
        (out, global)
    }

    /// Longest distance between two vertex positions along each axis, combined.
    pub fn diameter(&self) -> f64 {
        let mut lo = Point3::repeat(f64::INFINITY);
        let mut hi = Point3::repeat(f64::NEG_INFINITY);
        for v in self.vertex_ids() {
            lo = lo.inf(&self.positions[v]);
            hi = hi.sup(&self.positions[v]);
        }
        if self.live_vertices == 0 {
            0.0
        } else {
            (hi - lo).norm()
        }
    }
}


#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;

    #[test]
    fn tetrahedron_counts() {
        let m = tetrahedron();
        assert_eq!((m.num_vertices(), m.num_edges(), m.num_triangles()), (4, 6, 4));
        assert_eq!(m.euler_characteristic(), 2);
        assert_eq!(m.edges().len(), 6);
    }

    #[test]
    fn remove_and_compact() {
        let mut m = two_triangles();
        m.remove_triangle(1);
        m.remove_vertex(3);
        assert_eq!(m.num_edges(), 3);
        let remap = m.compact();
        assert_eq!(remap, vec![Some(0), Some(1), Some(2), None]);
        assert_eq!(m.num_vertices(), 3);
        assert_eq!(m.triangle(0), [0, 1, 2]);
    }

    #[test]
    fn from_triangles_rejects_bad_index() {
        let p = vec![Point3::zeros(); 3];
        assert!(matches!(TriMesh::from_triangles(p.clone(), &[[0, 1, 5]]), Err(MeshError::MissingVertex { .. })));
        assert!(matches!(TriMesh::from_triangles(p, &[[0, 1, 1]]), Err(MeshError::RepeatedVertex(0))));
    }

    #[test]
    fn submesh_maps_back() {
        let m = hex_fan(1.0);
        let (sub, global) = m.submesh(&[0, 1]);
        assert_eq!(sub.num_triangles(), 2);
        assert_eq!(global, vec![0, 1, 2, 3]);
        for (l, &g) in global.iter().enumerate() {
            assert_eq!(sub.position(l), m.position(g));
        }
    }

    #[test]
    fn lattice_is_valid() {
        let m = lattice(6, 1.0);
        assert!(validate(&m).is_empty());
        assert_eq!(m.euler_characteristic(), 1);
    }
}
