use nalgebra::{DMatrix, DVector};
use serde::Serialize;
use thiserror::Error;

use crate::geometry::{Point2, Point3};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    fn index(self) -> usize {
        match self {
            Axis::X => 0,
            Axis::Y => 1,
            Axis::Z => 2,
        }
    }

    /// The two remaining coordinates, in the order used by the plane equation.
    fn kept(self) -> [usize; 2] {
        match self {
            Axis::X => [1, 2],
            Axis::Y => [0, 2],
            Axis::Z => [0, 1],
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PlaneError {
    #[error("need at least 3 points, got {0}")]
    TooFewPoints(usize),
    #[error("points are collinear or coincident")]
    RankDeficient,
}

/// Least-squares plane `w = A u + B v + C`, where `w` is the dropped axis and
/// `(u, v)` the other two coordinates in increasing axis order.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FittedPlane {
    pub dropped_axis: Axis,
    pub coefficients: [f64; 3],
}

pub fn fit_plane(points: &[Point3]) -> Result<FittedPlane, PlaneError> {
    let n = points.len();
    if n < 3 {
        return Err(PlaneError::TooFewPoints(n));
    }
    let mut lo = Point3::repeat(f64::INFINITY);
    let mut hi = Point3::repeat(f64::NEG_INFINITY);
    let mut mean = Point3::zeros();
    for p in points {
        lo = lo.inf(p);
        hi = hi.sup(p);
        mean += p;
    }
    mean /= n as f64;
    let span = hi - lo;
    let dropped_axis = if span.z <= span.x && span.z <= span.y {
        Axis::Z
    } else if span.x <= span.y {
        Axis::X
    } else {
        Axis::Y
    };
    let [iu, iv] = dropped_axis.kept();
    let iw = dropped_axis.index();

    // centring keeps the QR factorisation well conditioned far from the origin
    let m = DMatrix::from_fn(n, 3, |r, c| match c {
        0 => points[r][iu] - mean[iu],
        1 => points[r][iv] - mean[iv],
        _ => 1.0,
    });
    let rhs = DVector::from_fn(n, |r, _| points[r][iw] - mean[iw]);
    let qr = m.qr();
    let r = qr.r();
    let scale = span.max().max(f64::MIN_POSITIVE);
    let tol = 1e-10 * scale * (n as f64).sqrt();
    if (0..2).any(|i| r[(i, i)].abs() <= tol) || r[(2, 2)].abs() <= 1e-12 {
        return Err(PlaneError::RankDeficient);
    }
    let qtb = qr.q().transpose() * rhs;
    let sol = r.solve_upper_triangular(&qtb).ok_or(PlaneError::RankDeficient)?;
    let (a, b, c0) = (sol[0], sol[1], sol[2]);
    let c = c0 + mean[iw] - a * mean[iu] - b * mean[iv];
    Ok(FittedPlane { dropped_axis, coefficients: [a, b, c] })
}

impl FittedPlane {
    /// Unit normal with a positive component along the dropped axis.
    pub fn normal(&self) -> Point3 {
        let [a, b, _] = self.coefficients;
        let [iu, iv] = self.dropped_axis.kept();
        let mut n = Point3::zeros();
        n[iu] = -a;
        n[iv] = -b;
        n[self.dropped_axis.index()] = 1.0;
        n.normalize()
    }

    /// A point of the plane above the given coordinates.
    pub fn point_at(&self, u: f64, v: f64) -> Point3 {
        let [a, b, c] = self.coefficients;
        let [iu, iv] = self.dropped_axis.kept();
        let mut p = Point3::zeros();
        p[iu] = u;
        p[iv] = v;
        p[self.dropped_axis.index()] = a * u + b * v + c;
        p
    }

    /// Orthonormal frame on the plane centred over the mean of `points`.
    pub fn frame(&self, points: &[Point3]) -> PlaneFrame {
        let [iu, iv] = self.dropped_axis.kept();
        let mean = points.iter().fold(Point3::zeros(), |s, p| s + p) / points.len().max(1) as f64;
        PlaneFrame::new(self.point_at(mean[iu], mean[iv]), self.normal(), iu)
    }
}

/// Orthogonal projector onto a plane plus 2D coordinates in an orthonormal basis of it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PlaneFrame {
    pub origin: Point3,
    pub normal: Point3,
    pub e1: Point3,
    pub e2: Point3,
}

impl PlaneFrame {
    /// `first_axis` selects the coordinate axis whose projection becomes `e1`.
    pub fn new(origin: Point3, normal: Point3, first_axis: usize) -> Self {
        let n = normal.normalize();
        let mut axis = Point3::zeros();
        axis[first_axis] = 1.0;
        let mut e1 = axis - n * n.dot(&axis);
        if e1.norm() < 1e-8 {
            axis = Point3::zeros();
            axis[(first_axis + 1) % 3] = 1.0;
            e1 = axis - n * n.dot(&axis);
        }
        let e1 = e1.normalize();
        let e2 = n.cross(&e1);
        PlaneFrame { origin, normal: n, e1, e2 }
    }

    /// Same plane with the opposite normal, so 2D orientations are mirrored.
    pub fn flipped(&self) -> Self {
        PlaneFrame { origin: self.origin, normal: -self.normal, e1: self.e2, e2: self.e1 }
    }

    pub fn project(&self, q: &Point3) -> Point3 {
        q - self.normal * self.normal.dot(&(q - self.origin))
    }

    pub fn to_2d(&self, q: &Point3) -> Point2 {
        let d = q - self.origin;
        Point2::new(d.dot(&self.e1), d.dot(&self.e2))
    }

    pub fn to_3d(&self, p: &Point2) -> Point3 {
        self.origin + self.e1 * p.x + self.e2 * p.y
    }

    /// Signed distance of `q` from the plane.
    pub fn height(&self, q: &Point3) -> f64 {
        self.normal.dot(&(q - self.origin))
    }
}
