use rustc_hash::FxHashMap;

use crate::geometry::Point3;
use crate::mesh::{Edge, TriMesh};

/// Icosahedron subdivided `level` times with vertices pushed onto the sphere.
pub fn icosphere(center: Point3, radius: f64, level: usize) -> TriMesh {
    let g = (1.0 + 5f64.sqrt()) / 2.0;
    let mut pos: Vec<Point3> = [
        (-1.0, g, 0.0),
        (1.0, g, 0.0),
        (-1.0, -g, 0.0),
        (1.0, -g, 0.0),
        (0.0, -1.0, g),
        (0.0, 1.0, g),
        (0.0, -1.0, -g),
        (0.0, 1.0, -g),
        (g, 0.0, -1.0),
        (g, 0.0, 1.0),
        (-g, 0.0, -1.0),
        (-g, 0.0, 1.0),
    ]
    .iter()
    .map(|&(x, y, z)| Point3::new(x, y, z).normalize())
    .collect();
    let mut tris: Vec<[usize; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    for _ in 0..level {
        let mut mid: FxHashMap<Edge, usize> = FxHashMap::default();
        let mut next = Vec::with_capacity(4 * tris.len());
        for &[a, b, c] in &tris {
            let mut m = |u: usize, v: usize| {
                *mid.entry(Edge::new(u, v)).or_insert_with(|| {
                    pos.push(((pos[u] + pos[v]) * 0.5).normalize());
                    pos.len() - 1
                })
            };
            let (ab, bc, ca) = (m(a, b), m(b, c), m(c, a));
            next.extend([[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
        }
        tris = next;
    }
    let pos = pos.into_iter().map(|p| center + p * radius).collect();
    TriMesh::from_triangles(pos, &tris).expect("icosphere indices")
}

pub(crate) fn mean_edge_length(mesh: &TriMesh) -> f64 {
    let e = mesh.edges();
    e.iter().map(|&e| mesh.edge_length(e)).sum::<f64>() / e.len() as f64
}

/// Finest icosphere needed for a mean edge length at most `target`; returns
/// the mesh and its subdivision level.
pub fn gen_sphere(center: Point3, radius: f64, target_edge_length: f64) -> (TriMesh, usize) {
    assert!(radius > 0.0 && target_edge_length > 0.0);
    let mut level = 0;
    loop {
        let m = icosphere(center, radius, level);
        if mean_edge_length(&m) <= target_edge_length || level == 10 {
            return (m, level);
        }
        level += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::validate;

    #[test]
    fn icosahedron_counts() {
        let m = icosphere(Point3::zeros(), 1.0, 0);
        assert_eq!((m.num_vertices(), m.num_edges(), m.num_triangles()), (12, 30, 20));
        assert_eq!(m.euler_characteristic(), 2);
        assert!(validate(&m).is_empty());
    }

    #[test]
    fn subdivision_counts_and_radius() {
        let c = Point3::new(0.5, 0.75, 0.25);
        for s in 0..5 {
            let m = icosphere(c, 0.15, s);
            let p = 4usize.pow(s as u32);
            assert_eq!(m.num_vertices(), 10 * p + 2);
            assert_eq!(m.num_triangles(), 20 * p);
            assert_eq!(m.euler_characteristic(), 2);
            assert!(validate(&m).is_empty());
            for v in m.vertex_ids() {
                assert!(((m.position(v) - c).norm() - 0.15).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn outward_orientation() {
        let m = icosphere(Point3::zeros(), 1.0, 2);
        for t in m.triangle_ids() {
            let [a, b, c] = m.triangle_points(t);
            assert!(m.triangle_normal(t).dot(&((a + b + c) / 3.0)) > 0.0);
        }
    }

    #[test]
    fn benchmark_levels() {
        let c = Point3::new(0.35, 0.35, 0.35);
        assert_eq!(gen_sphere(c, 0.15, 0.25 / 32.0).1, 5);
        assert_eq!(gen_sphere(c, 0.15, 0.25 / 64.0).1, 6);
    }
}
