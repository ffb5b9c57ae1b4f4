//! Small vector-geometry helpers shared by the mesh and adjustment code.

use nalgebra::{Vector2, Vector3};

pub type Point3 = Vector3<f64>;
pub type Point2 = Vector2<f64>;

/// Absolute tolerance for geometric predicates, relative to the unit-cube domain.
pub const GEOM_EPS: f64 = 1e-12;

/// Angle between `u` and `v`; zero when either vector vanishes.
pub fn angle_between(u: &Point3, v: &Point3) -> f64 {
    let nu = u.norm();
    let nv = v.norm();
    if nu == 0.0 || nv == 0.0 {
        return 0.0;
    }
    (u.dot(v) / (nu * nv)).clamp(-1.0, 1.0).acos()
}

/// Interior angles of triangle `abc` at `a`, `b` and `c`.
pub fn triangle_angles(a: &Point3, b: &Point3, c: &Point3) -> [f64; 3] {
    let ab = b - a;
    let ac = c - a;
    let bc = c - b;
    let ta = angle_between(&ab, &ac);
    let tb = angle_between(&(-ab), &bc);
    let tc = angle_between(&(-ac), &(-bc));
    // a collapsed triangle counts as fully degenerate
    if (ab.cross(&ac)).norm() == 0.0 {
        return [0.0; 3];
    }
    [ta, tb, tc]
}

pub fn min_angle(a: &Point3, b: &Point3, c: &Point3) -> f64 {
    let [x, y, z] = triangle_angles(a, b, c);
    x.min(y).min(z)
}

/// Unnormalised normal `(b - a) x (c - a)`; its norm is twice the area.
pub fn triangle_normal(a: &Point3, b: &Point3, c: &Point3) -> Point3 {
    (b - a).cross(&(c - a))
}

pub fn triangle_area(a: &Point3, b: &Point3, c: &Point3) -> f64 {
    0.5 * triangle_normal(a, b, c).norm()
}

pub fn point_segment_distance(p: &Point3, a: &Point3, b: &Point3) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_squared();
    if len2 == 0.0 {
        return (p - a).norm();
    }
    let t = ((p - a).dot(&ab) / len2).clamp(0.0, 1.0);
    (p - (a + ab * t)).norm()
}

pub fn point_segment_distance_2d(p: &Point2, a: &Point2, b: &Point2) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_squared();
    if len2 == 0.0 {
        return (p - a).norm();
    }
    let t = ((p - a).dot(&ab) / len2).clamp(0.0, 1.0);
    (p - (a + ab * t)).norm()
}

/// Twice the signed area of the planar triangle `abc` (positive when counter-clockwise).
pub fn orient2d(a: &Point2, b: &Point2, c: &Point2) -> f64 {
    robust::orient2d(
        robust::Coord { x: a.x, y: a.y },
        robust::Coord { x: b.x, y: b.y },
        robust::Coord { x: c.x, y: c.y },
    )
}

/// Positive when `d` lies strictly inside the circumcircle of the counter-clockwise triangle `abc`.
pub fn incircle(a: &Point2, b: &Point2, c: &Point2, d: &Point2) -> f64 {
    robust::incircle(
        robust::Coord { x: a.x, y: a.y },
        robust::Coord { x: b.x, y: b.y },
        robust::Coord { x: c.x, y: c.y },
        robust::Coord { x: d.x, y: d.y },
    )
}

/// Barycentric coordinates of `p` with respect to the planar triangle `abc`.
pub fn barycentric_2d(p: &Point2, a: &Point2, b: &Point2, c: &Point2) -> Option<[f64; 3]> {
    let det = (b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y);
    if det == 0.0 {
        return None;
    }
    let l1 = ((p.x - a.x) * (c.y - a.y) - (c.x - a.x) * (p.y - a.y)) / det;
    let l2 = ((b.x - a.x) * (p.y - a.y) - (p.x - a.x) * (b.y - a.y)) / det;
    Some([1.0 - l1 - l2, l1, l2])
}

/// Proper or touching intersection between closed segments `ab` and `cd`.
pub fn segments_intersect(a: &Point2, b: &Point2, c: &Point2, d: &Point2) -> bool {
    let o1 = orient2d(a, b, c);
    let o2 = orient2d(a, b, d);
    let o3 = orient2d(c, d, a);
    let o4 = orient2d(c, d, b);
    if o1 * o2 < 0.0 && o3 * o4 < 0.0 {
        return true;
    }
    let on = |p: &Point2, q: &Point2, r: &Point2| {
        r.x >= p.x.min(q.x) && r.x <= p.x.max(q.x) && r.y >= p.y.min(q.y) && r.y <= p.y.max(q.y)
    };
    (o1 == 0.0 && on(a, b, c)) || (o2 == 0.0 && on(a, b, d)) || (o3 == 0.0 && on(c, d, a)) || (o4 == 0.0 && on(c, d, b))
}

/// Even-odd point-in-polygon test; points on the boundary may go either way.
pub fn point_in_polygon(p: &Point2, poly: &[Point2]) -> bool {
    let n = poly.len();
    let mut inside = false;
    let mut j = n - 1;
    for i in 0..n {
        let (pi, pj) = (&poly[i], &poly[j]);
        if (pi.y > p.y) != (pj.y > p.y) {
            let x = pj.x + (p.y - pj.y) * (pi.x - pj.x) / (pi.y - pj.y);
            if p.x < x {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn equilateral_angles() {
        let a = Point3::new(0.0, 0.0, 0.0);
        let b = Point3::new(1.0, 0.0, 0.0);
        let c = Point3::new(0.5, 3f64.sqrt() / 2.0, 0.0);
        for t in triangle_angles(&a, &b, &c) {
            assert_relative_eq!(t, PI / 3.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn degenerate_triangle_reports_zero() {
        let a = Point3::new(0.0, 0.0, 0.0);
        let b = Point3::new(1.0, 0.0, 0.0);
        assert_eq!(min_angle(&a, &b, &b), 0.0);
        assert_eq!(min_angle(&a, &b, &Point3::new(2.0, 0.0, 0.0)), 0.0);
    }

    #[test]
    fn crossings() {
        let p = |x, y| Point2::new(x, y);
        assert!(segments_intersect(&p(0., 0.), &p(1., 1.), &p(0., 1.), &p(1., 0.)));
        assert!(!segments_intersect(&p(0., 0.), &p(1., 0.), &p(0., 1.), &p(1., 1.)));
        assert!(segments_intersect(&p(0., 0.), &p(2., 0.), &p(1., 0.), &p(1., 1.)));
    }
}
