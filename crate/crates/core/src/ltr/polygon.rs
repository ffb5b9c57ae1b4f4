use crate::geometry::{point_in_polygon, point_segment_distance_2d, segments_intersect, Point2};
use crate::mesh::VertexId;

/// Closed planar polygon whose corners come from mesh vertices.
#[derive(Clone, Debug, PartialEq)]
pub struct PlanarPolygon {
    /// Corners in boundary-cycle order.
    pub points: Vec<Point2>,
    /// Mesh vertex behind each corner.
    pub vertices: Vec<VertexId>,
}

impl PlanarPolygon {
    pub fn new(points: Vec<Point2>, vertices: Vec<VertexId>) -> Self {
        assert_eq!(points.len(), vertices.len());
        PlanarPolygon { points, vertices }
    }

    /// Polygon without mesh back-references; corner `i` maps to vertex `i`.
    pub fn from_points(points: Vec<Point2>) -> Self {
        let n = points.len();
        PlanarPolygon { points, vertices: (0..n).collect() }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    fn edge(&self, i: usize) -> (&Point2, &Point2) {
        (&self.points[i], &self.points[(i + 1) % self.len()])
    }

    /// Shoelace sum; positive for counter-clockwise corners.
    pub fn signed_area(&self) -> f64 {
        let n = self.len();
        0.5 * (0..n)
            .map(|i| {
                let (p, q) = self.edge(i);
                (p.x + q.x) * (q.y - p.y)
            })
            .sum::<f64>()
    }

    pub fn mean_edge_length(&self) -> f64 {
        let n = self.len();
        (0..n)
            .map(|i| {
                let (p, q) = self.edge(i);
                (q - p).norm()
            })
            .sum::<f64>()
            / n as f64
    }

    /// No two non-adjacent edges meet and adjacent edges share only their corner.
    pub fn is_simple(&self) -> bool {
        let n = self.len();
        if n < 3 {
            return false;
        }
        for i in 0..n {
            let (a, b) = self.edge(i);
            if a == b {
                return false;
            }
            for j in i + 1..n {
                let (c, d) = self.edge(j);
                let adjacent = j == i + 1 || (i == 0 && j == n - 1);
                if adjacent {
                    // the corner they share must be the only contact
                    let (p, q, r) = if j == i + 1 { (a, b, d) } else { (c, a, b) };
                    let o = crate::geometry::orient2d(p, q, r);
                    if o == 0.0 && (r - q).dot(&(p - q)) > 0.0 {
                        return false;
                    }
                } else if segments_intersect(a, b, c, d) {
                    return false;
                }
            }
        }
        true
    }

    pub fn contains(&self, p: &Point2) -> bool {
        point_in_polygon(p, &self.points)
    }

    pub fn boundary_distance(&self, p: &Point2) -> f64 {
        (0..self.len())
            .map(|i| {
                let (a, b) = self.edge(i);
                point_segment_distance_2d(p, a, b)
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// Axis-aligned bounding box as `(min, max)`.
    pub fn bounds(&self) -> (Point2, Point2) {
        let mut lo = Point2::repeat(f64::INFINITY);
        let mut hi = Point2::repeat(f64::NEG_INFINITY);
        for p in &self.points {
            lo = lo.inf(p);
            hi = hi.sup(p);
        }
        (lo, hi)
    }
}

/// Enclosed area by Green's formula.
pub fn polygon_area(poly: &PlanarPolygon) -> f64 {
    poly.signed_area().abs()
}

/// Number of interior points for a near-equilateral triangulation of `poly`
/// with edge length `h_tri`.
pub fn estimate_points(poly: &PlanarPolygon, h_tri: f64) -> usize {
    assert!(h_tri > 0.0, "h_tri must be positive");
    let s = polygon_area(poly);
    let m = poly.len() as f64;
    let x = 2.0 * s / (3f64.sqrt() * h_tri * h_tri) - 0.5 * m;
    (1.0 + x.round()).max(0.0) as usize
}
