#![allow(dead_code)]

use std::f64::consts::PI;

use mars_core::flows::{time_grid, DiscreteFlowMap, Field};
use mars_core::geometry::{incircle, orient2d, Point2};
use mars_core::{Point3, TriMesh};

/// `n x n` lattice on the graph `z = a x^2 + b y^2`, interior points jittered by up to `jitter * h`.
pub fn patch(n: usize, a: f64, b: f64, jitter: &[(f64, f64)]) -> TriMesh {
    let h = 1.0 / (n - 1) as f64;
    let mut p = Vec::with_capacity(n * n);
    for j in 0..n {
        for i in 0..n {
            let (mut x, mut y) = (i as f64 * h, j as f64 * h);
            if i > 0 && j > 0 && i + 1 < n && j + 1 < n {
                let (dx, dy) = jitter[(j * n + i) % jitter.len()];
                x += dx * h;
                y += dy * h;
            }
            p.push(Point3::new(x, y, a * x * x + b * y * y));
        }
    }
    let mut t = Vec::new();
    for j in 0..n - 1 {
        for i in 0..n - 1 {
            let v = j * n + i;
            t.push([v, v + 1, v + n + 1]);
            t.push([v, v + n + 1, v + n]);
        }
    }
    TriMesh::from_triangles(p, &t).unwrap()
}

/// Fixed jitter used for the smooth convergence patch.
pub fn smooth_jitter() -> Vec<(f64, f64)> {
    (0..49).map(|k| (0.2 * (k as f64 * 1.3).sin(), 0.2 * (k as f64 * 0.7).cos())).collect()
}

/// Hub of valence 24 inside a ring of vertices on a wavy disk; every hub angle is below pi/10.
pub fn pathological_patch() -> TriMesh {
    let n = 24;
    let mut p = vec![Point3::zeros()];
    for k in 0..n {
        let a = 2.0 * PI * k as f64 / n as f64;
        p.push(Point3::new(a.cos(), a.sin(), 0.1 * (3.0 * a).sin()));
    }
    let t: Vec<[usize; 3]> = (0..n).map(|k| [0, 1 + k, 1 + (k + 1) % n]).collect();
    TriMesh::from_triangles(p, &t).unwrap()
}

/// First point found strictly inside the circumcircle of some triangle, as `(triangle, point)`.
pub fn circle_violation(points: &[Point2], tris: &[[usize; 3]]) -> Option<(usize, usize)> {
    for (ti, t) in tris.iter().enumerate() {
        let [a, b, c] = t.map(|i| points[i]);
        let ccw = orient2d(&a, &b, &c) > 0.0;
        for (i, p) in points.iter().enumerate() {
            if t.contains(&i) {
                continue;
            }
            let s = incircle(&a, &b, &c, p);
            if (ccw && s > 0.0) || (!ccw && s < 0.0) {
                return Some((ti, i));
            }
        }
    }
    None
}

/// Endpoint error of a rigid rotation through one full turn with `n` steps.
pub fn rotation_error(x0: Point3, n: usize) -> f64 {
    let flow = DiscreteFlowMap::new(Field::Rotation { omega: 2.0 * PI });
    let mut x = x0;
    for (t, k) in time_grid(1.0, 1.0 / n as f64) {
        x = flow.map(&x, t, k);
    }
    (x - x0).norm()
}
