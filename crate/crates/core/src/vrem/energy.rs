use thiserror::Error;

use crate::geometry::Point3;
use crate::mesh::{classify, TriMesh, VertexId};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EnergyError {
    #[error("mesh has no interior edge")]
    NoInteriorEdges,
    #[error("vertices {0} and {1} coincide")]
    Coincident(VertexId, VertexId),
}

/// Which edges enter the resting-length average.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum RestLengthRule {
    /// Mean over interior edges only.
    #[default]
    InteriorEdges,
    /// Mean over every edge of the patch.
    AllEdges,
}

/// Force that spring `p_i p_j` with natural length `rest` exerts on `p_i`.
pub fn spring_force(pi: &Point3, pj: &Point3, rest: f64) -> Result<Point3, EnergyError> {
    let d = pj - pi;
    let len = d.norm();
    if len == 0.0 {
        return Err(EnergyError::Coincident(0, 1));
    }
    Ok(d * ((len - rest) / len))
}

/// Mean edge length under `rule`; fails when the mesh has no interior edge.
pub fn resting_length(mesh: &TriMesh, rule: RestLengthRule) -> Result<f64, EnergyError> {
    let c = classify(mesh);
    if c.interior_edges.is_empty() {
        return Err(EnergyError::NoInteriorEdges);
    }
    let mut edges = c.interior_edges;
    if rule == RestLengthRule::AllEdges {
        edges.extend(c.boundary_edges);
    }
    Ok(edges.iter().map(|&e| mesh.edge_length(e)).sum::<f64>() / edges.len() as f64)
}

/// Springs on the interior edges of a mesh whose boundary vertices are fixed.
///
/// Free vertices are the interior vertices, enumerated in increasing id; the
/// stacked unknown vector lists their positions in that order.
#[derive(Clone, Debug, PartialEq)]
pub struct SpringSystem {
    pub rest_length: f64,
    /// Interior edges as endpoint pairs.
    pub springs: Vec<(VertexId, VertexId)>,
    pub free: Vec<VertexId>,
    /// `slot[v]` is the index of `v` in `free`, if free.
    pub slot: Vec<Option<usize>>,
}

impl SpringSystem {
    pub fn new(mesh: &TriMesh, rule: RestLengthRule) -> Result<Self, EnergyError> {
        let rest_length = resting_length(mesh, rule)?;
        Ok(Self::with_rest_length(mesh, rest_length))
    }

    pub fn with_rest_length(mesh: &TriMesh, rest_length: f64) -> Self {
        let c = classify(mesh);
        let mut slot = vec![None; mesh.vertex_capacity()];
        for (i, &v) in c.interior_vertices.iter().enumerate() {
            slot[v] = Some(i);
        }
        SpringSystem {
            rest_length,
            springs: c.interior_edges.iter().map(|e| (e.a(), e.b())).collect(),
            free: c.interior_vertices,
            slot,
        }
    }

    pub fn num_free(&self) -> usize {
        self.free.len()
    }

    /// Total energy with positions read through `pos`.
    pub fn energy_with(&self, pos: impl Fn(VertexId) -> Point3) -> f64 {
        self.springs
            .iter()
            .map(|&(a, b)| {
                let s = (pos(b) - pos(a)).norm() - self.rest_length;
                0.5 * s * s
            })
            .sum()
    }

    pub fn total_energy(&self, mesh: &TriMesh) -> f64 {
        self.energy_with(|v| *mesh.position(v))
    }

    /// Net spring force on every free vertex, in `free` order.
    pub fn forces_with(&self, pos: impl Fn(VertexId) -> Point3) -> Result<Vec<Point3>, EnergyError> {
        let mut f = vec![Point3::zeros(); self.free.len()];
        for &(a, b) in &self.springs {
            let (pa, pb) = (pos(a), pos(b));
            let fa = spring_force(&pa, &pb, self.rest_length).map_err(|_| EnergyError::Coincident(a, b))?;
            if let Some(i) = self.slot[a] {
                f[i] += fa;
            }
            if let Some(j) = self.slot[b] {
                f[j] -= fa;
            }
        }
        Ok(f)
    }

    pub fn forces(&self, mesh: &TriMesh) -> Result<Vec<Point3>, EnergyError> {
        self.forces_with(|v| *mesh.position(v))
    }

    /// Stacked gradient `dU/dp`, which is minus the net forces.
    pub fn energy_gradient(&self, mesh: &TriMesh) -> Result<Vec<f64>, EnergyError> {
        Ok(self.forces(mesh)?.iter().flat_map(|f| [-f.x, -f.y, -f.z]).collect())
    }
}
