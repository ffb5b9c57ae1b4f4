use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{Edge, TriId, TriMesh};

/// Admissibility bounds: edge lengths in `[r_tiny * h_l, h_l]`, interior angles at least `theta`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegularityParams {
    pub r_tiny: f64,
    pub h_l: f64,
    pub theta: f64,
}

#[derive(Debug, Error, PartialEq)]
#[error("invalid regularity parameters: {0}")]
pub struct InvalidParams(pub &'static str);

impl RegularityParams {
    pub fn new(r_tiny: f64, h_l: f64, theta: f64) -> Result<Self, InvalidParams> {
        if !(r_tiny > 0.0 && r_tiny < 1.0) {
            return Err(InvalidParams("r_tiny must lie in (0, 1)"));
        }
        if !(h_l > 0.0) {
            return Err(InvalidParams("h_L must be positive"));
        }
        if !(theta > 0.0 && theta < std::f64::consts::PI / 3.0) {
            return Err(InvalidParams("theta must lie in (0, pi/3)"));
        }
        Ok(Self { r_tiny, h_l, theta })
    }

    pub fn min_length(&self) -> f64 {
        self.r_tiny * self.h_l
    }

    pub fn edge_ok(&self, len: f64) -> bool {
        len >= self.min_length() && len <= self.h_l
    }
}

/// Violations and extremal statistics of one regularity scan.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct QualityReport {
    pub long_edges: Vec<(Edge, f64)>,
    pub tiny_edges: Vec<(Edge, f64)>,
    pub small_angle_triangles: Vec<(TriId, f64)>,
    pub min_edge_length: f64,
    pub max_edge_length: f64,
    pub min_angle: f64,
}

impl QualityReport {
    pub fn is_regular(&self) -> bool {
        self.long_edges.is_empty() && self.tiny_edges.is_empty() && self.small_angle_triangles.is_empty()
    }

    pub fn violation_count(&self) -> usize {
        self.long_edges.len() + self.tiny_edges.len() + self.small_angle_triangles.len()
    }
}

pub fn check_regularity(mesh: &TriMesh, params: &RegularityParams) -> QualityReport {
    let mut r = QualityReport {
        min_edge_length: f64::INFINITY,
        max_edge_length: 0.0,
        min_angle: f64::INFINITY,
        ..Default::default()
    };
    let tiny = params.min_length();
    for e in mesh.edges() {
        let len = mesh.edge_length(e);
        r.min_edge_length = r.min_edge_length.min(len);
        r.max_edge_length = r.max_edge_length.max(len);
        if len > params.h_l {
            r.long_edges.push((e, len));
        } else if len < tiny {
            r.tiny_edges.push((e, len));
        }
    }
    for t in mesh.triangle_ids() {
        let a = mesh.min_angle(t);
        r.min_angle = r.min_angle.min(a);
        if a < params.theta {
            r.small_angle_triangles.push((t, a));
        }
    }
    r
}

/// Whether every listed triangle and each of its edges satisfies the bounds.
pub(crate) fn triangles_regular(mesh: &TriMesh, tris: &[TriId], params: &RegularityParams) -> bool {
    tris.iter().all(|&t| {
        let tri = mesh.triangle(t);
        mesh.min_angle(t) >= params.theta
            && (0..3).all(|k| params.edge_ok(mesh.edge_length(Edge::new(tri[k], tri[(k + 1) % 3]))))
    })
}

impl TriMesh {
    pub fn is_regular(&self, params: &RegularityParams) -> bool {
        let tris: Vec<TriId> = self.triangle_ids().collect();
        triangles_regular(self, &tris, params)
    }

    /// Whether triangle `t` or one of its edges breaks the bounds.
    pub fn triangle_violates(&self, t: TriId, params: &RegularityParams) -> bool {
        !triangles_regular(self, &[t], params)
    }
}
