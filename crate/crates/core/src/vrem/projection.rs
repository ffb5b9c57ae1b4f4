use thiserror::Error;

use super::plane::{fit_plane, PlaneError, PlaneFrame};
use crate::geometry::{barycentric_2d, Point2, Point3};
use crate::mesh::{TriId, TriMesh, VertexId};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProjectionError {
    #[error("vertex {0} has no incident triangle")]
    EmptyStar(VertexId),
    #[error("cannot fit a plane at vertex {0}: {1}")]
    Plane(VertexId, PlaneError),
}

/// Barycentric slack accepted when locating a point in a planar star triangle.
const BARY_EPS: f64 = 1e-12;

#[derive(Clone, Debug)]
struct StarTriangle {
    id: TriId,
    space: [Point3; 3],
    plane: [Point2; 3],
}

/// Local projection at a vertex onto its closed star, frozen at construction time.
#[derive(Clone, Debug)]
pub struct LocalProjection {
    pub vertex: VertexId,
    pub frame: PlaneFrame,
    star: Vec<StarTriangle>,
}

impl LocalProjection {
    /// Fits the plane to the neighbours of `p` and projects its star onto it.
    pub fn new(mesh: &TriMesh, p: VertexId) -> Result<Self, ProjectionError> {
        let nbrs: Vec<Point3> = mesh.neighbors(p).iter().map(|&v| *mesh.position(v)).collect();
        let fitted = fit_plane(&nbrs)
            .or_else(|_| {
                // a degenerate link still spans a plane together with p
                let mut with_p = nbrs.clone();
                with_p.push(*mesh.position(p));
                fit_plane(&with_p)
            })
            .map_err(|e| ProjectionError::Plane(p, e))?;
        let frame = fitted.frame(&nbrs);
        Self::with_frame(mesh, p, frame)
    }

    /// Projection of the star of `p` onto a given plane.
    pub fn with_frame(mesh: &TriMesh, p: VertexId, frame: PlaneFrame) -> Result<Self, ProjectionError> {
        let mut ids: Vec<TriId> = mesh.vertex_triangles(p).to_vec();
        if ids.is_empty() {
            return Err(ProjectionError::EmptyStar(p));
        }
        ids.sort_unstable();
        let star = ids
            .into_iter()
            .map(|id| {
                let space = mesh.triangle_points(id);
                StarTriangle { id, space, plane: space.map(|x| frame.to_2d(&x)) }
            })
            .collect();
        Ok(LocalProjection { vertex: p, frame, star })
    }

    /// Star triangle containing the planar image of `q` and the barycentric
    /// coordinates there. Ties go to the lowest triangle id.
    pub fn locate(&self, q: &Point3) -> Option<(TriId, [f64; 3])> {
        let x = self.frame.to_2d(q);
        self.star.iter().find_map(|t| {
            let b = barycentric_2d(&x, &t.plane[0], &t.plane[1], &t.plane[2])?;
            b.iter().all(|&l| l >= -BARY_EPS).then_some((t.id, b))
        })
    }

    /// Image of `q` on the star, or `None` when `q` is outside the neighbourhood.
    pub fn project(&self, q: &Point3) -> Option<Point3> {
        let x = self.frame.to_2d(q);
        self.star.iter().find_map(|t| {
            let b = barycentric_2d(&x, &t.plane[0], &t.plane[1], &t.plane[2])?;
            if b.iter().all(|&l| l >= -BARY_EPS) {
                // clamp the slack so the result stays on the closed triangle
                let c = b.map(|l| l.max(0.0));
                let s = c[0] + c[1] + c[2];
                Some((t.space[0] * c[0] + t.space[1] * c[1] + t.space[2] * c[2]) / s)
            } else {
                None
            }
        })
    }

    /// Ids of the star triangles, sorted.
    pub fn star_ids(&self) -> impl Iterator<Item = TriId> + '_ {
        self.star.iter().map(|t| t.id)
    }
}
