use serde::Serialize;

use super::energy::{EnergyError, RestLengthRule, SpringSystem};
use super::projection::{LocalProjection, ProjectionError};
use crate::geometry::{point_segment_distance, Point3};
use crate::mesh::quality::triangles_regular;
use crate::mesh::{bfs_triangles, triangle_vertices};
use crate::mesh::{Edge, RegularityParams, TriId, TriMesh, VertexId};

/// Armijo backtracking constants.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, serde::Deserialize)]
pub struct LineSearchParams {
    pub c: f64,
    pub rho: f64,
    pub max_backtracks: usize,
}

impl Default for LineSearchParams {
    fn default() -> Self {
        LineSearchParams { c: 1e-4, rho: 0.8, max_backtracks: 200 }
    }
}

/// One accepted relocation iteration.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VremState {
    /// Index `s` of the iterate this step started from.
    pub iteration: usize,
    pub energy_before: f64,
    pub energy: f64,
    /// `||grad U(p^(s))||`.
    pub gradient_norm: f64,
    pub alpha0: f64,
    pub alpha: f64,
    pub backtracks: usize,
    /// `grad U(p^(s))^T d^(s)`.
    pub directional_derivative: f64,
    /// Largest ratio of pre-projection offset to the distance from the vertex to its link.
    pub max_offset_ratio: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum StepOutcome {
    Accepted(VremState),
    /// Every net force vanishes.
    Converged,
    /// No step length passed the line search.
    Stalled,
}

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum VremError {
    #[error(transparent)]
    Energy(#[from] EnergyError),
    #[error(transparent)]
    Projection(#[from] ProjectionError),
}

/// Relocation driver for one patch: springs, frozen local projections at the
/// starting positions, and the link segments used for the offset bound.
#[derive(Clone, Debug)]
pub struct Relocator {
    pub system: SpringSystem,
    pub params: LineSearchParams,
    anchors: Vec<LocalProjection>,
    links: Vec<Vec<(VertexId, VertexId)>>,
    iteration: usize,
}

impl Relocator {
    pub fn new(mesh: &TriMesh, system: SpringSystem, params: LineSearchParams) -> Result<Self, VremError> {
        let mut anchors = Vec::with_capacity(system.free.len());
        let mut links = Vec::with_capacity(system.free.len());
        for &v in &system.free {
            anchors.push(LocalProjection::new(mesh, v)?);
            links.push(
                mesh.vertex_triangles(v)
                    .iter()
                    .map(|&t| {
                        let tri = mesh.triangle(t);
                        let k = tri.iter().position(|&w| w == v).expect("star triangle");
                        (tri[(k + 1) % 3], tri[(k + 2) % 3])
                    })
                    .collect(),
            );
        }
        Ok(Relocator { system, params, anchors, links, iteration: 0 })
    }

    fn link_distance(&self, mesh: &TriMesh, i: usize) -> f64 {
        let p = mesh.position(self.system.free[i]);
        self.links[i]
            .iter()
            .map(|&(a, b)| point_segment_distance(p, mesh.position(a), mesh.position(b)))
            .fold(f64::INFINITY, f64::min)
    }

    /// Trial positions `P(p + alpha F)`; a vertex whose image leaves its anchor
    /// neighbourhood stays where it is.
    fn trial(&self, mesh: &TriMesh, forces: &[Point3], alpha: f64) -> Vec<Point3> {
        self.system
            .free
            .iter()
            .enumerate()
            .map(|(i, &v)| {
                let p = mesh.position(v);
                self.anchors[i].project(&(p + forces[i] * alpha)).unwrap_or(*p)
            })
            .collect()
    }

    fn energy_at(&self, mesh: &TriMesh, trial: &[Point3]) -> f64 {
        let s = &self.system;
        s.energy_with(|v| match s.slot[v] {
            Some(i) => trial[i],
            None => *mesh.position(v),
        })
    }

    /// One relocation iteration; moves the free vertices of `mesh` on acceptance.
    pub fn step(&mut self, mesh: &mut TriMesh) -> Result<StepOutcome, VremError> {
        let s = self.iteration;
        let forces = self.system.forces(mesh)?;
        let fnorm2: f64 = forces.iter().map(|f| f.norm_squared()).sum();
        if fnorm2 == 0.0 || self.system.free.is_empty() {
            return Ok(StepOutcome::Converged);
        }
        let ell: Vec<f64> = (0..forces.len()).map(|i| self.link_distance(mesh, i)).collect();
        let alpha0 = forces
            .iter()
            .zip(&ell)
            .filter(|(f, _)| f.norm() > 0.0)
            .map(|(f, &l)| 2.0 * l / (5.0 * f.norm()))
            .fold(f64::INFINITY, f64::min);
        if !(alpha0 > 0.0 && alpha0.is_finite()) {
            return Ok(StepOutcome::Stalled);
        }

        let probe = self.trial(mesh, &forces, alpha0);
        let gd: f64 = self
            .system
            .free
            .iter()
            .enumerate()
            .map(|(i, &v)| -forces[i].dot(&((probe[i] - mesh.position(v)) / alpha0)))
            .sum();

        let u0 = self.system.total_energy(mesh);
        let mut alpha = alpha0;
        for b in 0..=self.params.max_backtracks {
            let cand = if b == 0 { probe.clone() } else { self.trial(mesh, &forces, alpha) };
            let u1 = self.energy_at(mesh, &cand);
            let ok = if gd < 0.0 { u1 <= u0 + self.params.c * alpha * gd } else { u1 <= u0 };
            if ok {
                let ratio = (0..forces.len())
                    .filter(|&i| ell[i] > 0.0)
                    .map(|i| alpha * forces[i].norm() / ell[i])
                    .fold(0.0, f64::max);
                for (i, &v) in self.system.free.iter().enumerate() {
                    mesh.set_position(v, cand[i]);
                }
                self.iteration += 1;
                return Ok(StepOutcome::Accepted(VremState {
                    iteration: s,
                    energy_before: u0,
                    energy: u1,
                    gradient_norm: fnorm2.sqrt(),
                    alpha0,
                    alpha,
                    backtracks: b,
                    directional_derivative: gd,
                    max_offset_ratio: ratio,
                }));
            }
            alpha *= self.params.rho;
        }
        Ok(StepOutcome::Stalled)
    }
}

/// Runs up to `max_iter` relocation iterations on a whole mesh with its
/// boundary fixed, anchoring projections at the current positions.
pub fn vrem_iterate(
    mesh: &mut TriMesh,
    system: &SpringSystem,
    params: &LineSearchParams,
    max_iter: usize,
) -> Result<Vec<VremState>, VremError> {
    let mut r = Relocator::new(mesh, system.clone(), *params)?;
    let mut out = Vec::new();
    for _ in 0..max_iter {
        match r.step(mesh)? {
            StepOutcome::Accepted(st) => out.push(st),
            StepOutcome::Converged | StepOutcome::Stalled => break,
        }
    }
    Ok(out)
}

/// Limits and switches of the relocation tier.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, serde::Deserialize)]
pub struct VremConfig {
    /// Maximum number of BFS rounds.
    pub mu: usize,
    /// Maximum relocation iterations per round.
    pub nu: usize,
    pub line_search: LineSearchParams,
    pub rest_length: RestLengthRule,
}

impl Default for VremConfig {
    fn default() -> Self {
        VremConfig {
            mu: 4,
            nu: 10,
            line_search: LineSearchParams::default(),
            rest_length: RestLengthRule::InteriorEdges,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VremOutcome {
    pub success: bool,
    pub rounds: usize,
    pub iterations: usize,
    /// Triangles of the last patch tried (all moved on success).
    pub patch: Vec<TriId>,
    pub history: Vec<VremState>,
}

/// Relocates the patch on `patch_tris` (a submesh copy) until it is regular.
/// Returns the states and whether regularity was reached; positions are written
/// back to `mesh` only on success.
pub(crate) fn relocate_patch(
    mesh: &mut TriMesh,
    patch_tris: &[TriId],
    params: &RegularityParams,
    cfg: &VremConfig,
) -> (bool, Vec<VremState>) {
    let (mut patch, global) = mesh.submesh(patch_tris);
    let Ok(system) = SpringSystem::new(&patch, cfg.rest_length) else {
        return (false, Vec::new());
    };
    if system.free.is_empty() {
        return (false, Vec::new());
    }
    let free = system.free.clone();
    let Ok(mut r) = Relocator::new(&patch, system, cfg.line_search) else {
        return (false, Vec::new());
    };
    let local_tris: Vec<TriId> = patch.triangle_ids().collect();
    let moved: Vec<VertexId> = free.iter().map(|&v| global[v]).collect();
    let guard = FoldGuard::new(mesh, &moved);
    let mut history = Vec::new();
    for _ in 0..cfg.nu {
        match r.step(&mut patch) {
            Ok(StepOutcome::Accepted(st)) => history.push(st),
            _ => break,
        }
        if triangles_regular(&patch, &local_tris, params) {
            let old: Vec<Point3> = free.iter().map(|&v| *mesh.position(global[v])).collect();
            for &v in &free {
                mesh.set_position(global[v], *patch.position(v));
            }
            if !guard.folded(mesh) {
                return (true, history);
            }
            for (&v, p) in free.iter().zip(old) {
                mesh.set_position(global[v], p);
            }
        }
    }
    (false, history)
}

/// Adjacent triangle pairs around moved vertices, to detect folds a move introduces.
struct FoldGuard {
    pairs: Vec<(TriId, TriId)>,
    folds: usize,
}

impl FoldGuard {
    fn new(mesh: &TriMesh, moved: &[VertexId]) -> Self {
        let mut pairs = Vec::new();
        for t in bfs_triangles(mesh, moved) {
            let x = mesh.triangle(t);
            for k in 0..3 {
                for &u in mesh.edge_triangles(Edge::new(x[k], x[(k + 1) % 3])).iter() {
                    if u != t {
                        pairs.push((t.min(u), t.max(u)));
                    }
                }
            }
        }
        pairs.sort_unstable();
        pairs.dedup();
        let folds = Self::count(mesh, &pairs);
        FoldGuard { pairs, folds }
    }

    fn count(mesh: &TriMesh, pairs: &[(TriId, TriId)]) -> usize {
        pairs.iter().filter(|&&(t, u)| mesh.triangle_normal(t).dot(&mesh.triangle_normal(u)) <= 0.0).count()
    }

    fn folded(&self, mesh: &TriMesh) -> bool {
        Self::count(mesh, &self.pairs) > self.folds
    }
}

/// Vertex with the largest interior angle of triangle `t`.
pub(crate) fn largest_angle_vertex(mesh: &TriMesh, t: TriId) -> VertexId {
    let angles = mesh.triangle_angles(t);
    let k = (0..3).max_by(|&i, &j| angles[i].total_cmp(&angles[j]).then(j.cmp(&i))).unwrap();
    mesh.triangle(t)[k]
}

/// BFS-grown relocation around a triangle violating regularity.
///
/// On failure the mesh is left exactly as it was.
pub fn vrem_run(mesh: &mut TriMesh, seed: TriId, params: &RegularityParams, cfg: &VremConfig) -> VremOutcome {
    let mut seeds = vec![largest_angle_vertex(mesh, seed)];
    let mut out = VremOutcome { success: false, rounds: 0, iterations: 0, patch: Vec::new(), history: Vec::new() };
    for round in 1..=cfg.mu {
        let tris = bfs_triangles(mesh, &seeds);
        seeds = triangle_vertices(mesh, &tris);
        let (ok, hist) = relocate_patch(mesh, &tris, params, cfg);
        out.rounds = round;
        out.iterations += hist.len();
        out.history.extend(hist);
        out.patch = tris;
        if ok {
            out.success = true;
            break;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::fixtures::*;
    use crate::mesh::validate;
    use std::f64::consts::PI;

    #[test]
    fn offset_bound_example() {
        // hub at distance 0.5 from the rim segment x = 0.5 with unit net force
        let p = vec![
            Point3::zeros(),
            Point3::new(0.5, -1.0, 0.0),
            Point3::new(0.5, 1.0, 0.0),
            Point3::new(-1.0, 1.0, 0.0),
            Point3::new(-1.0, -1.0, 0.0),
        ];
        let m = TriMesh::from_triangles(p, &[[0, 1, 2], [0, 2, 3], [0, 3, 4], [0, 4, 1]]).unwrap();
        let sys = SpringSystem::with_rest_length(&m, 1.0);
        let mut r = Relocator::new(&m, sys, LineSearchParams::default()).unwrap();
        assert!((r.link_distance(&m, 0) - 0.5).abs() < 1e-15);
        let f = r.system.forces(&m).unwrap()[0].norm();
        let mut m2 = m.clone();
        if let StepOutcome::Accepted(st) = r.step(&mut m2).unwrap() {
            assert!((st.alpha0 - 2.0 * 0.5 / (5.0 * f)).abs() < 1e-15);
            assert_eq!(st.backtracks, 0);
            assert_eq!(st.alpha, st.alpha0);
        } else {
            panic!("expected an accepted step");
        }
    }

    #[test]
    fn single_free_vertex_converges_to_balance() {
        // free hub between four fixed corners of a square: the energy minimum is the centre
        let p = vec![
            Point3::new(0.3, -0.2, 0.0),
            Point3::new(1.0, 0.0, 0.0),
            Point3::new(0.0, 1.0, 0.0),
            Point3::new(-1.0, 0.0, 0.0),
            Point3::new(0.0, -1.0, 0.0),
        ];
        let mut m = TriMesh::from_triangles(p, &[[0, 1, 2], [0, 2, 3], [0, 3, 4], [0, 4, 1]]).unwrap();
        let sys = SpringSystem::with_rest_length(&m, 0.8);
        let hist = vrem_iterate(&mut m, &sys, &LineSearchParams::default(), 300).unwrap();
        for st in &hist {
            assert!(st.energy <= st.energy_before);
        }
        assert!(m.position(0).norm() < 1e-6, "{:?}", m.position(0));
    }

    #[test]
    fn perturbed_fan_is_repaired() {
        let mut m = lattice(9, 1.0);
        let centre = 4 * 9 + 4;
        let p = *m.position(centre);
        m.set_position(centre, p + Point3::new(0.78, 0.05, 0.0));
        let params = RegularityParams::new(0.1, 1.5, PI / 10.0).unwrap();
        let bad =
            m.triangle_ids().find(|&t| m.triangle_violates(t, &params)).expect("perturbation creates a violation");
        let boundary_before: Vec<Point3> = [0usize, 8, 72, 80].iter().map(|&v| *m.position(v)).collect();
        let out = vrem_run(&mut m, bad, &params, &VremConfig::default());
        assert!(out.success);
        assert!(m.is_regular(&params));
        assert!(validate(&m).is_empty());
        let boundary_after: Vec<Point3> = [0usize, 8, 72, 80].iter().map(|&v| *m.position(v)).collect();
        assert_eq!(boundary_before, boundary_after);
    }
}
