use thiserror::Error;

use super::polygon::PlanarPolygon;
use crate::geometry::{barycentric_2d, Point2, Point3};
use crate::mesh::TriMesh;
use crate::vrem::{LocalProjection, PlaneFrame};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LiftError {
    #[error("planar point {0} has no preimage on the patch")]
    Unreachable(usize),
    #[error("lifted triangulation is not a valid mesh: {0}")]
    Mesh(String),
}

/// Planar triangulation whose first `corners` points are the polygon corners in order.
#[derive(Clone, Debug, PartialEq)]
pub struct PlanarTriangulation {
    pub points: Vec<Point2>,
    pub triangles: Vec<[usize; 3]>,
    pub corners: usize,
}

/// Maps points of the fitted plane back onto a patch surface.
#[derive(Clone, Debug)]
pub struct SurfaceLift {
    frame: PlaneFrame,
    projections: Vec<LocalProjection>,
    /// Patch triangles in plane coordinates, for points no local projection reaches.
    flat: Vec<([Point2; 3], [Point3; 3])>,
}

impl SurfaceLift {
    pub fn new(patch: &TriMesh, frame: PlaneFrame) -> Self {
        let projections = patch.vertex_ids().filter_map(|v| LocalProjection::new(patch, v).ok()).collect();
        let flat = patch
            .triangle_ids()
            .map(|t| {
                let s = patch.triangle_points(t);
                (s.map(|x| frame.to_2d(&x)), s)
            })
            .collect();
        SurfaceLift { frame, projections, flat }
    }

    /// Image of a plane point under the local projection with the shortest
    /// projection distance; ties go to the lower vertex id.
    pub fn lift(&self, q: &Point2) -> Option<Point3> {
        let q3 = self.frame.to_3d(q);
        let best = self
            .projections
            .iter()
            .filter_map(|lp| lp.project(&q3).map(|x| ((x - q3).norm(), lp.vertex, x)))
            .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        if let Some((_, _, x)) = best {
            return Some(x);
        }
        // straight back along the plane normal onto the patch
        self.flat.iter().find_map(|(p, s)| {
            let b = barycentric_2d(q, &p[0], &p[1], &p[2])?;
            b.iter().all(|&l| l >= -1e-12).then(|| s[0] * b[0] + s[1] * b[1] + s[2] * b[2])
        })
    }
}

/// Lifts a planar triangulation of `poly` onto `patch`. Polygon corners keep
/// the 3D positions of their patch vertices; connectivity is unchanged.
pub fn lift_to_surface(
    planar: &PlanarTriangulation,
    poly: &PlanarPolygon,
    patch: &TriMesh,
    lift: &SurfaceLift,
) -> Result<TriMesh, LiftError> {
    let mut pos = Vec::with_capacity(planar.points.len());
    for (i, q) in planar.points.iter().enumerate() {
        if i < planar.corners {
            pos.push(*patch.position(poly.vertices[i]));
        } else {
            pos.push(lift.lift(q).ok_or(LiftError::Unreachable(i))?);
        }
    }
    TriMesh::from_triangles(pos, &planar.triangles).map_err(|e| LiftError::Mesh(e.to_string()))
}
