//! Elementary mesh adjustments: edge split, edge collapse and edge flip.

use std::f64::consts::PI;

use serde::Serialize;
use thiserror::Error;

use crate::geometry::{self, Point2, Point3};
use crate::mesh::{Edge, RegularityParams, TriId, TriMesh, VertexId};
use crate::vrem::fit_plane;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EmaError {
    #[error("edge ({}, {}) is not in the mesh", .0.a(), .0.b())]
    NoSuchEdge(Edge),
    #[error("collapse of ({}, {}) violates the link condition", .0.a(), .0.b())]
    LinkCondition(Edge),
    #[error("collapse of ({}, {}) would flip a triangle", .0.a(), .0.b())]
    NormalFlip(Edge),
    #[error("collapse of ({}, {}) would create an edge longer than the bound", .0.a(), .0.b())]
    TooLong(Edge),
    #[error("collapse of ({}, {}) would leave a degenerate closed surface", .0.a(), .0.b())]
    TooSmall(Edge),
    #[error("edge ({}, {}) cannot be flipped", .0.a(), .0.b())]
    NotFlippable(Edge),
}

/// Splits `e` into `n_sub` equal subedges and fans each incident triangle
/// from its opposite vertex. Returns the new vertices ordered from `e.a()` to `e.b()`.
pub fn edge_split(mesh: &mut TriMesh, e: Edge, n_sub: usize) -> Result<Vec<VertexId>, EmaError> {
    assert!(n_sub >= 1, "n_sub must be positive");
    let (pa, pb) = (*mesh.position(e.a()), *mesh.position(e.b()));
    let points: Vec<Point3> = (1..n_sub).map(|i| pa + (pb - pa) * (i as f64 / n_sub as f64)).collect();
    edge_split_at(mesh, e, &points)
}

/// Like [`edge_split`] but with caller-supplied positions for the new
/// vertices, listed from `e.a()` to `e.b()`.
pub fn edge_split_at(mesh: &mut TriMesh, e: Edge, points: &[Point3]) -> Result<Vec<VertexId>, EmaError> {
    if !mesh.has_edge(e) {
        return Err(EmaError::NoSuchEdge(e));
    }
    if points.is_empty() {
        return Ok(Vec::new());
    }
    let new: Vec<VertexId> = points.iter().map(|p| mesh.add_vertex(*p)).collect();
    let mut chain = Vec::with_capacity(new.len() + 2);
    chain.push(e.a());
    chain.extend_from_slice(&new);
    chain.push(e.b());

    let incident: Vec<TriId> = mesh.edge_triangles(e).to_vec();
    for t in incident {
        let tri = mesh.triangle(t);
        let k = (0..3).find(|&k| Edge::new(tri[k], tri[(k + 1) % 3]) == e).expect("incident triangle holds the edge");
        let (from, opp) = (tri[k], tri[(k + 2) % 3]);
        mesh.remove_triangle(t);
        let forward: Vec<VertexId> = if from == e.a() { chain.clone() } else { chain.iter().rev().copied().collect() };
        for w in forward.windows(2) {
            mesh.add_triangle([w[0], w[1], opp]);
        }
    }
    Ok(new)
}

/// Which endpoint survives a collapse.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Keep {
    A,
    B,
    /// Boundary endpoint if exactly one is on the boundary, else the lower index.
    Auto,
}

/// Endpoint kept by [`Keep::Auto`].
pub fn preferred_endpoint(mesh: &TriMesh, e: Edge) -> VertexId {
    match (mesh.is_boundary_vertex(e.a()), mesh.is_boundary_vertex(e.b())) {
        (false, true) => e.b(),
        _ => e.a(),
    }
}

/// Whether merging `remove` into `keep` makes two adjacent triangles face
/// opposite ways where they did not before.
fn creates_fold(mesh: &TriMesh, keep: VertexId, remove: VertexId, pk: Point3, incident: &[TriId]) -> bool {
    let mut star: Vec<TriId> = mesh.vertex_triangles(remove).to_vec();
    star.extend_from_slice(mesh.vertex_triangles(keep));
    star.sort_unstable();
    star.dedup();
    star.retain(|t| !incident.contains(t));
    let after: Vec<([VertexId; 3], Point3)> = star
        .iter()
        .map(|&t| {
            let tri = mesh.triangle(t).map(|v| if v == remove { keep } else { v });
            let q = tri.map(|v| if v == keep { pk } else { *mesh.position(v) });
            (tri, geometry::triangle_normal(&q[0], &q[1], &q[2]))
        })
        .collect();
    for (i, &t) in star.iter().enumerate() {
        let (tri, n) = after[i];
        let n_before = mesh.triangle_normal(t);
        for k in 0..3 {
            let (x, y) = (tri[k], tri[(k + 1) % 3]);
            let inner = after.iter().enumerate().find(|&(j, (o, _))| j != i && o.contains(&x) && o.contains(&y)).map(
                |(j, &(_, m))| {
                    let old = mesh.triangle(star[j]);
                    let shared = mesh.triangle(t).iter().filter(|v| old.contains(v)).count();
                    // pairs that only meet after the collapse must agree
                    let before = if shared >= 2 { mesh.triangle_normal(star[j]) } else { n_before };
                    (m, before)
                },
            );
            let pair = inner.or_else(|| {
                mesh.edge_triangles(Edge::new(x, y))
                    .iter()
                    .find(|o| !star.contains(o) && !incident.contains(o))
                    .map(|&o| (mesh.triangle_normal(o), mesh.triangle_normal(o)))
            });
            if let Some((m_after, m_before)) = pair {
                if n.dot(&m_after) <= 0.0 && n_before.dot(&m_before) > 0.0 {
                    return true;
                }
            }
        }
    }
    false
}

/// Checks whether merging `remove` into `keep` is legal without touching the mesh.
pub fn collapse_check(mesh: &TriMesh, keep: VertexId, remove: VertexId, max_len: Option<f64>) -> Result<(), EmaError> {
    collapse_check_at(mesh, keep, remove, *mesh.position(keep), max_len)
}

/// [`collapse_check`] with the surviving vertex moved to `pk`.
pub fn collapse_check_at(
    mesh: &TriMesh,
    keep: VertexId,
    remove: VertexId,
    pk: Point3,
    max_len: Option<f64>,
) -> Result<(), EmaError> {
    let e = Edge::new(keep, remove);
    let incident = mesh.edge_triangles(e);
    if incident.is_empty() {
        return Err(EmaError::NoSuchEdge(e));
    }
    let opposite: Vec<VertexId> = incident
        .iter()
        .map(|&t| *mesh.triangle(t).iter().find(|&&v| v != keep && v != remove).expect("triangle has a third vertex"))
        .collect();

    let nk = mesh.neighbors(keep);
    let nr = mesh.neighbors(remove);
    let common = nk.iter().filter(|v| nr.binary_search(v).is_ok()).count();
    if common != opposite.len() || !opposite.iter().all(|v| nk.binary_search(v).is_ok()) {
        return Err(EmaError::LinkCondition(e));
    }
    let boundary_edge = incident.len() == 1;
    if !boundary_edge && mesh.is_boundary_vertex(keep) && mesh.is_boundary_vertex(remove) {
        // an interior edge joining two boundary vertices would pinch the surface
        return Err(EmaError::LinkCondition(e));
    }
    if boundary_edge {
        // the kept endpoint would otherwise lose its boundary status mid-surface
        let removed_boundary = mesh.is_boundary_vertex(remove);
        if removed_boundary && !mesh.is_boundary_vertex(keep) {
            return Err(EmaError::LinkCondition(e));
        }
    }
    // a closed tetrahedron has no legal collapse
    if mesh.num_vertices() <= 4 && !mesh.vertex_ids().any(|v| mesh.is_boundary_vertex(v)) {
        return Err(EmaError::TooSmall(e));
    }

    for &t in mesh.vertex_triangles(remove).iter().chain(mesh.vertex_triangles(keep)) {
        if incident.contains(&t) {
            continue;
        }
        let tri = mesh.triangle(t);
        let old = mesh.triangle_normal(t);
        let moved = tri.map(|v| if v == remove || v == keep { pk } else { *mesh.position(v) });
        let new = geometry::triangle_normal(&moved[0], &moved[1], &moved[2]);
        if new.norm() == 0.0 || old.dot(&new) < 0.0 {
            return Err(EmaError::NormalFlip(e));
        }
    }
    if creates_fold(mesh, keep, remove, pk, incident) {
        return Err(EmaError::NormalFlip(e));
    }
    if let Some(limit) = max_len {
        for &w in nr.iter().chain(&nk) {
            if w != keep && w != remove && (mesh.position(w) - pk).norm() > limit {
                return Err(EmaError::TooLong(e));
            }
        }
    }
    Ok(())
}

/// Collapses `e` into one endpoint. Returns the surviving vertex.
///
/// An illegal collapse leaves the mesh unchanged. With `max_len` set, the
/// collapse is also rejected if any re-homed edge would exceed that length.
pub fn edge_collapse(mesh: &mut TriMesh, e: Edge, keep: Keep, max_len: Option<f64>) -> Result<VertexId, EmaError> {
    if !mesh.has_edge(e) {
        return Err(EmaError::NoSuchEdge(e));
    }
    let k = match keep {
        Keep::A => e.a(),
        Keep::B => e.b(),
        Keep::Auto => preferred_endpoint(mesh, e),
    };
    let pk = *mesh.position(k);
    edge_collapse_at(mesh, e, k, pk, max_len)
}

/// Collapses `e` into `keep`, which then moves to `pk`.
pub fn edge_collapse_at(
    mesh: &mut TriMesh,
    e: Edge,
    keep: VertexId,
    pk: Point3,
    max_len: Option<f64>,
) -> Result<VertexId, EmaError> {
    if !mesh.has_edge(e) {
        return Err(EmaError::NoSuchEdge(e));
    }
    let (k, r) = (keep, e.other(keep));
    collapse_check_at(mesh, k, r, pk, max_len)?;

    let incident: Vec<TriId> = mesh.edge_triangles(e).to_vec();
    for t in incident {
        mesh.remove_triangle(t);
    }
    let rehome: Vec<TriId> = mesh.vertex_triangles(r).to_vec();
    for t in rehome {
        let tri = mesh.triangle(t).map(|v| if v == r { k } else { v });
        mesh.replace_triangle(t, tri);
    }
    mesh.remove_vertex(r);
    mesh.set_position(k, pk);
    Ok(k)
}

/// The two triangles on either side of an interior edge, as `(a, b, c)` and
/// `(b, a, d)` with `a -> b` the orientation in the first.
pub(crate) fn quad_around(mesh: &TriMesh, e: Edge) -> Option<([VertexId; 4], [TriId; 2])> {
    let tris = mesh.edge_triangles(e);
    if tris.len() != 2 {
        return None;
    }
    let t1 = tris[0];
    let tri = mesh.triangle(t1);
    let k = (0..3).find(|&k| Edge::new(tri[k], tri[(k + 1) % 3]) == e)?;
    let (a, b, c) = (tri[k], tri[(k + 1) % 3], tri[(k + 2) % 3]);
    let (t2, k2) = mesh.directed_edge_triangle(b, a)?;
    let d = mesh.triangle(t2)[(k2 + 2) % 3];
    Some(([a, b, c, d], [t1, t2]))
}

/// Replaces the diagonal `e` of its quadrilateral by the other diagonal.
/// Purely combinatorial; returns the two new triangles.
pub fn flip_edge(mesh: &mut TriMesh, e: Edge) -> Result<[TriId; 2], EmaError> {
    let ([a, b, c, d], [t1, t2]) = quad_around(mesh, e).ok_or(EmaError::NotFlippable(e))?;
    if c == d || mesh.has_edge(Edge::new(c, d)) {
        return Err(EmaError::NotFlippable(e));
    }
    mesh.remove_triangle(t1);
    mesh.remove_triangle(t2);
    let n1 = mesh.add_triangle([a, d, c]);
    let n2 = mesh.add_triangle([d, b, c]);
    Ok([n1, n2])
}

/// Outcome of a flip attempt on a θ-violating triangle.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FlipDecision {
    pub applicable: bool,
    pub old_min_angle: f64,
    pub new_min_angle: f64,
    /// Diagonal that was (or would have been) flipped.
    pub edge: Option<Edge>,
    /// New triangles when the flip was applied.
    pub new_triangles: Option<[TriId; 2]>,
}

impl FlipDecision {
    fn rejected(old: f64) -> Self {
        FlipDecision { applicable: false, old_min_angle: old, new_min_angle: old, edge: None, new_triangles: None }
    }
}

fn tri_min_angle(p: &[Point3; 4], t: [usize; 3]) -> f64 {
    geometry::min_angle(&p[t[0]], &p[t[1]], &p[t[2]])
}

/// Angle gain of flipping `e`, or `None` when the flip is not admissible.
///
/// The quadrilateral is projected to the least-squares plane of its four
/// corners and must be strictly convex there.
pub fn evaluate_flip(mesh: &TriMesh, e: Edge, params: &RegularityParams) -> Option<(f64, f64)> {
    let ([a, b, c, d], [t1, t2]) = quad_around(mesh, e)?;
    if c == d || mesh.has_edge(Edge::new(c, d)) {
        return None;
    }
    let p = [*mesh.position(a), *mesh.position(b), *mesh.position(c), *mesh.position(d)];
    let new_len = (p[2] - p[3]).norm();
    if !params.edge_ok(new_len) {
        return None;
    }
    let plane = fit_plane(&p).ok()?;
    let frame = plane.frame(&p);
    let q: Vec<Point2> = p.iter().map(|x| frame.to_2d(x)).collect();
    // boundary cycle a -> d -> b -> c, oriented like the triangles
    let cycle = [q[0], q[3], q[1], q[2]];
    let s: Vec<f64> = (0..4).map(|i| geometry::orient2d(&cycle[i], &cycle[(i + 1) % 4], &cycle[(i + 2) % 4])).collect();
    let convex = s.iter().all(|&x| x > 0.0) || s.iter().all(|&x| x < 0.0);
    if !convex {
        return None;
    }
    let old = tri_min_angle(&p, [0, 1, 2]).min(tri_min_angle(&p, [1, 0, 3]));
    let new = tri_min_angle(&p, [0, 3, 2]).min(tri_min_angle(&p, [3, 1, 2]));
    // the new pair must not fold over the old surface either
    let n_old = geometry::triangle_normal(&p[0], &p[1], &p[2]) + geometry::triangle_normal(&p[1], &p[0], &p[3]);
    for t in [[0, 3, 2], [3, 1, 2]] {
        if geometry::triangle_normal(&p[t[0]], &p[t[1]], &p[t[2]]).dot(&n_old) <= 0.0 {
            return None;
        }
    }
    // nor fold against each other or against a neighbour the old pair did not fold against
    let n1 = geometry::triangle_normal(&p[0], &p[3], &p[2]);
    let n2 = geometry::triangle_normal(&p[3], &p[1], &p[2]);
    if n1.dot(&n2) <= 0.0 {
        return None;
    }
    for (x, y, n_new, t_old) in [(a, d, n1, t2), (c, a, n1, t1), (d, b, n2, t2), (b, c, n2, t1)] {
        let n_old = mesh.triangle_normal(t_old);
        for &o in mesh.edge_triangles(Edge::new(x, y)).iter().filter(|&&o| o != t1 && o != t2) {
            let n_out = mesh.triangle_normal(o);
            if n_new.dot(&n_out) <= 0.0 && n_old.dot(&n_out) > 0.0 {
                return None;
            }
        }
    }
    Some((old, new))
}

/// Flips every non-Delaunay edge of the triangles around `verts` whose flip is
/// admissible and raises the smaller minimum angle of its pair. Returns the
/// number of flips.
pub fn delaunay_flips_near(
    mesh: &mut TriMesh,
    verts: &[VertexId],
    params: &RegularityParams,
    max_flips: usize,
) -> usize {
    let mut flips = 0;
    loop {
        let mut edges: Vec<Edge> = verts
            .iter()
            .filter(|&&v| mesh.is_vertex_alive(v))
            .flat_map(|&v| mesh.vertex_triangles(v).to_vec())
            .flat_map(|t| {
                let q = mesh.triangle(t);
                [Edge::new(q[0], q[1]), Edge::new(q[1], q[2]), Edge::new(q[2], q[0])]
            })
            .collect();
        edges.sort_unstable();
        edges.dedup();
        let mut changed = false;
        for e in edges {
            if flips == max_flips {
                return flips;
            }
            let Some(([a, b, c, d], _)) = quad_around(mesh, e) else { continue };
            let (pa, pb) = (mesh.position(a), mesh.position(b));
            let opposite = geometry::angle_between(&(pa - mesh.position(c)), &(pb - mesh.position(c)))
                + geometry::angle_between(&(pa - mesh.position(d)), &(pb - mesh.position(d)));
            if opposite <= PI {
                continue;
            }
            if let Some((old, new)) = evaluate_flip(mesh, e, params) {
                if new > old && flip_edge(mesh, e).is_ok() {
                    flips += 1;
                    changed = true;
                }
            }
        }
        if !changed {
            return flips;
        }
    }
}

/// Tries to raise the smallest angle of `t` by flipping one of the two edges
/// meeting at that angle. The better admissible candidate wins; the edge
/// opposite the largest angle is tried first so it takes ties.
pub fn edge_flip(mesh: &mut TriMesh, t: TriId, params: &RegularityParams) -> FlipDecision {
    let tri = mesh.triangle(t);
    let angles = mesh.triangle_angles(t);
    let old_min = angles.iter().copied().fold(f64::INFINITY, f64::min);
    let kmin = (0..3).min_by(|&i, &j| angles[i].total_cmp(&angles[j])).unwrap();
    let kmax = (0..3).max_by(|&i, &j| angles[i].total_cmp(&angles[j]).then(j.cmp(&i))).unwrap();
    let opposite_largest = Edge::new(tri[(kmax + 1) % 3], tri[(kmax + 2) % 3]);
    let mut candidates = vec![Edge::new(tri[kmin], tri[(kmin + 1) % 3]), Edge::new(tri[kmin], tri[(kmin + 2) % 3])];
    candidates.sort_by_key(|&c| c != opposite_largest);

    let mut best: Option<(Edge, f64, f64)> = None;
    for e in candidates {
        if let Some((old, new)) = evaluate_flip(mesh, e, params) {
            if new > old && best.is_none_or(|(_, _, bn)| new > bn) {
                best = Some((e, old, new));
            }
        }
    }
    match best {
        Some((e, old, new)) => {
            let tris = flip_edge(mesh, e).expect("admissible flip");
            FlipDecision {
                applicable: true,
                old_min_angle: old,
                new_min_angle: new,
                edge: Some(e),
                new_triangles: Some(tris),
            }
        }
        None => FlipDecision::rejected(old_min),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::fixtures::*;
    use crate::mesh::validate;
    use std::f64::consts::PI;

    fn params() -> RegularityParams {
        RegularityParams::new(0.1, 2.5, PI / 10.0).unwrap()
    }

    #[test]
    fn split_identity_and_midpoint() {
        let mut m = two_triangles();
        assert!(edge_split(&mut m, Edge::new(1, 2), 1).unwrap().is_empty());
        assert_eq!(m.num_triangles(), 2);
        let new = edge_split(&mut m, Edge::new(1, 2), 2).unwrap();
        assert_eq!(new.len(), 1);
        assert_eq!(m.num_triangles(), 4);
        assert!((m.position(new[0]) - Point3::new(0.5, 0.5, 0.0)).norm() < 1e-15);
        assert!(validate(&m).is_empty());
    }

    #[test]
    fn split_three_recount() {
        let mut m = two_triangles();
        let (v0, e0, f0) = (m.num_vertices(), m.num_edges(), m.num_triangles());
        edge_split(&mut m, Edge::new(1, 2), 3).unwrap();
        // brute-force recount from the triangle list
        let mut edges: Vec<Edge> = m
            .triangle_ids()
            .flat_map(|t| {
                let x = m.triangle(t);
                (0..3).map(move |k| Edge::new(x[k], x[(k + 1) % 3]))
            })
            .collect();
        edges.sort_unstable();
        edges.dedup();
        assert_eq!((m.num_vertices(), m.num_triangles()), (v0 + 2, 6));
        assert_eq!(edges.len(), e0 + 2 + 4);
        assert_eq!(f0, 2);
        assert!(validate(&m).is_empty());
    }

    #[test]
    fn split_on_closed_mesh_keeps_euler() {
        let mut m = tetrahedron();
        edge_split(&mut m, Edge::new(0, 1), 4).unwrap();
        assert_eq!(m.euler_characteristic(), 2);
        assert!(validate(&m).is_empty());
    }

    fn octahedron() -> TriMesh {
        let p = vec![
            Point3::new(1.0, 0.0, 0.0),
            Point3::new(-1.0, 0.0, 0.0),
            Point3::new(0.0, 1.0, 0.0),
            Point3::new(0.0, -1.0, 0.0),
            Point3::new(0.0, 0.0, 1.0),
            Point3::new(0.0, 0.0, -1.0),
        ];
        let t = [[0, 2, 4], [2, 1, 4], [1, 3, 4], [3, 0, 4], [2, 0, 5], [1, 2, 5], [3, 1, 5], [0, 3, 5]];
        TriMesh::from_triangles(p, &t).unwrap()
    }

    #[test]
    fn collapse_closed_interior_edge() {
        let mut m = crate::io::icosphere(Point3::zeros(), 1.0, 2);
        let (v, e, f) = (m.num_vertices(), m.num_edges(), m.num_triangles());
        let edge = m.edges()[0];
        let kept = edge_collapse(&mut m, edge, Keep::A, None).unwrap();
        assert_eq!(kept, edge.a());
        assert_eq!((m.num_vertices(), m.num_edges(), m.num_triangles()), (v - 1, e - 3, f - 2));
        assert_eq!(m.euler_characteristic(), 2);
        assert!(validate(&m).is_empty());
    }

    #[test]
    fn collapse_rejects_fold() {
        // pulling an apex of the octahedron onto the equator bends two faces past a right angle
        let mut m = octahedron();
        assert!(matches!(edge_collapse(&mut m, Edge::new(0, 4), Keep::Auto, None), Err(EmaError::NormalFlip(_))));
        assert_eq!(m.num_vertices(), 6);
    }

    #[test]
    fn collapse_boundary_edge_on_patch() {
        let mut m = hex_fan(1.0);
        let f = m.num_triangles();
        edge_collapse(&mut m, Edge::new(1, 2), Keep::Auto, None).unwrap();
        assert_eq!(m.num_triangles(), f - 1);
        assert!(validate(&m).is_empty());
    }

    #[test]
    fn collapse_rejects_inversion() {
        // star-shaped around the hub but not around rim vertex 1, because of the dent at 2
        let p = vec![
            Point3::zeros(),
            Point3::new(1.0, 0.0, 0.0),
            Point3::new(0.15, 0.15, 0.0),
            Point3::new(0.0, 1.0, 0.0),
            Point3::new(-1.0, 0.0, 0.0),
            Point3::new(0.0, -1.0, 0.0),
        ];
        let mut m = TriMesh::from_triangles(p, &[[0, 1, 2], [0, 2, 3], [0, 3, 4], [0, 4, 5], [0, 5, 1]]).unwrap();
        assert!(m.triangle_ids().all(|t| m.triangle_normal(t).z > 0.0));
        let before: Vec<_> = m.triangle_ids().map(|t| m.triangle(t)).collect();
        let r = edge_collapse(&mut m, Edge::new(0, 1), Keep::B, None);
        assert_eq!(r, Err(EmaError::NormalFlip(Edge::new(0, 1))));
        let after: Vec<_> = m.triangle_ids().map(|t| m.triangle(t)).collect();
        assert_eq!(before, after);
        // the opposite rim vertex sees the whole rim
        assert!(edge_collapse(&mut m, Edge::new(0, 4), Keep::B, None).is_ok());
    }

    #[test]
    fn collapse_rejects_normal_flip_on_closed_mesh() {
        let mut m = octahedron();
        m.set_position(4, Point3::new(-0.9, 0.0, 0.3));
        assert!(validate(&m).is_empty());
        let r = edge_collapse(&mut m, Edge::new(0, 4), Keep::B, None);
        assert_eq!(r, Err(EmaError::NormalFlip(Edge::new(0, 4))));
    }

    #[test]
    fn collapse_rejects_tetrahedron() {
        let mut m = tetrahedron();
        assert_eq!(edge_collapse(&mut m, Edge::new(0, 1), Keep::Auto, None), Err(EmaError::TooSmall(Edge::new(0, 1))));
    }

    #[test]
    fn collapse_link_condition() {
        // annulus around the triangular hole (0, 1, 2): 0 and 1 also share neighbour 2
        let p = vec![
            Point3::new(0.0, 0.0, 0.0),
            Point3::new(1.0, 0.0, 0.0),
            Point3::new(0.5, 0.9, 0.0),
            Point3::new(0.5, -1.0, 0.0),
            Point3::new(1.5, 1.0, 0.0),
            Point3::new(-0.5, 1.0, 0.0),
        ];
        let t = [[1, 0, 3], [0, 5, 3], [0, 2, 5], [2, 4, 5], [2, 1, 4], [1, 3, 4]];
        let mut m = TriMesh::from_triangles(p, &t).unwrap();
        assert_eq!(
            edge_collapse(&mut m, Edge::new(0, 1), Keep::A, None),
            Err(EmaError::LinkCondition(Edge::new(0, 1)))
        );
        assert_eq!(m.num_triangles(), 6);
    }

    #[test]
    fn collapse_respects_length_guard() {
        let mut m = hex_fan(1.0);
        m.set_position(0, Point3::new(0.1, 0.0, 0.0));
        assert_eq!(edge_collapse(&mut m, Edge::new(0, 1), Keep::B, Some(1.5)), Err(EmaError::TooLong(Edge::new(0, 1))));
        // the longest re-homed edge is exactly 2
        assert!(edge_collapse(&mut m, Edge::new(0, 1), Keep::B, Some(2.0)).is_ok());
    }

    #[test]
    fn flip_twice_restores() {
        let mut m = two_triangles();
        let before = {
            let mut t: Vec<[usize; 3]> = m.triangle_ids().map(|t| norm_tri(m.triangle(t))).collect();
            t.sort();
            t
        };
        flip_edge(&mut m, Edge::new(1, 2)).unwrap();
        assert!(m.has_edge(Edge::new(0, 3)));
        assert!(validate(&m).is_empty());
        flip_edge(&mut m, Edge::new(0, 3)).unwrap();
        let mut after: Vec<[usize; 3]> = m.triangle_ids().map(|t| norm_tri(m.triangle(t))).collect();
        after.sort();
        assert_eq!(before, after);
    }

    fn norm_tri(t: [usize; 3]) -> [usize; 3] {
        let k = (0..3).min_by_key(|&k| t[k]).unwrap();
        [t[k], t[(k + 1) % 3], t[(k + 2) % 3]]
    }

    #[test]
    fn skinny_pair_is_flipped() {
        // long shared diagonal between two flat triangles
        let p = vec![
            Point3::new(-1.0, 0.0, 0.0),
            Point3::new(1.0, 0.0, 0.0),
            Point3::new(0.0, 0.15, 0.0),
            Point3::new(0.0, -0.15, 0.0),
        ];
        let mut m = TriMesh::from_triangles(p, &[[0, 1, 2], [1, 0, 3]]).unwrap();
        let d = edge_flip(&mut m, 0, &params());
        assert!(d.applicable);
        assert!(d.new_min_angle > d.old_min_angle);
        assert_eq!(d.edge, Some(Edge::new(0, 1)));
        assert!(m.has_edge(Edge::new(2, 3)));
        assert!(validate(&m).is_empty());
    }

    #[test]
    fn flip_that_does_not_help_is_rejected() {
        // both diagonals give equally bad triangles: a thin rhombus-like strip
        let p = vec![
            Point3::new(0.0, 0.0, 0.0),
            Point3::new(1.0, 0.0, 0.0),
            Point3::new(2.0, 0.1, 0.0),
            Point3::new(-1.0, -0.1, 0.0),
        ];
        let mut m = TriMesh::from_triangles(p, &[[0, 1, 2], [1, 0, 3]]).unwrap();
        let before = m.triangle_ids().count();
        let d = edge_flip(&mut m, 0, &params());
        assert!(!d.applicable);
        assert_eq!(m.triangle_ids().count(), before);
        assert!(m.has_edge(Edge::new(0, 1)));
    }

    #[test]
    fn reflex_quad_is_rejected() {
        // the corner at a is reflex in the cycle a-d-b-c
        let p = vec![
            Point3::new(0.0, 0.0, 0.0),
            Point3::new(2.0, 0.0, 0.0),
            Point3::new(-0.5, 0.05, 0.0),
            Point3::new(1.0, -1.0, 0.0),
        ];
        let m = TriMesh::from_triangles(p.clone(), &[[0, 1, 2], [1, 0, 3]]).unwrap();
        // signed-area oracle on the a-d-b-c cycle
        let q: Vec<Point2> = [0usize, 3, 1, 2].iter().map(|&i| Point2::new(p[i].x, p[i].y)).collect();
        let signs: Vec<bool> =
            (0..4).map(|i| geometry::orient2d(&q[i], &q[(i + 1) % 4], &q[(i + 2) % 4]) > 0.0).collect();
        assert!(signs.iter().any(|&s| s) && signs.iter().any(|&s| !s));
        assert!(evaluate_flip(&m, Edge::new(0, 1), &params()).is_none());
    }

    #[test]
    fn flip_on_boundary_edge_not_applicable() {
        let mut m = single_triangle();
        let d = edge_flip(&mut m, 0, &params());
        assert!(!d.applicable);
    }
}
