use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rustc_hash::{FxHashMap, FxHashSet};
use serde::Serialize;

use super::delaunay::delaunay_2d;
use super::lift::{lift_to_surface, PlanarTriangulation, SurfaceLift};
use super::polygon::{estimate_points, PlanarPolygon};
use super::scatter::scatter_points;
use crate::geometry::Point3;
use crate::mesh::quality::triangles_regular;
use crate::mesh::{bfs_triangles, triangle_vertices, Edge, RegularityParams, TriId, TriMesh, VertexId};
use crate::vrem::{
    fit_plane, largest_angle_vertex, LineSearchParams, PlaneFrame, Relocator, RestLengthRule, SpringSystem, StepOutcome,
};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, serde::Deserialize)]
pub struct LtrConfig {
    /// Maximum number of BFS rounds.
    pub mu: usize,
    /// Maximum relocation iterations when polishing a candidate.
    pub nu: usize,
    /// Random trials per candidate point count.
    pub eta: usize,
    pub line_search: LineSearchParams,
    pub rest_length: RestLengthRule,
}

impl Default for LtrConfig {
    fn default() -> Self {
        LtrConfig {
            mu: 4,
            nu: 10,
            eta: 3,
            line_search: LineSearchParams::default(),
            rest_length: RestLengthRule::InteriorEdges,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum TrialResult {
    ScatterFailed,
    DelaunayFailed,
    LiftFailed,
    /// Some new interior edge would duplicate an edge outside the patch.
    ChordConflict,
    /// A lifted triangle faces away from the fitted plane.
    Folded,
    Irregular {
        min_angle: f64,
    },
    Regular {
        min_angle: f64,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrialRecord {
    pub round: usize,
    pub m_star: usize,
    pub trial: usize,
    pub result: TrialResult,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum RoundFailure {
    /// The patch is not a disk with one boundary cycle.
    NotDisk,
    /// The fitted plane could not be computed.
    Plane,
    /// The projected boundary is not a simple polygon of positive area.
    PolygonNotSimple,
    /// No candidate was regular and better than the patch.
    NoCandidate,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LtrOutcome {
    pub success: bool,
    pub seed: u64,
    pub rounds: usize,
    pub round_failures: Vec<RoundFailure>,
    pub trials: Vec<TrialRecord>,
    /// Estimated point count of the last round that reached the estimate.
    pub m_est: Option<usize>,
    pub chosen_min_angle: Option<f64>,
    pub patch_min_angle: Option<f64>,
    /// Triangles inserted by the splice.
    pub new_triangles: Vec<TriId>,
    pub removed_vertices: usize,
    pub added_vertices: usize,
    pub removed_triangles: usize,
}

/// Boundary of a disk-like patch as a vertex cycle oriented like its triangles.
pub(crate) fn boundary_cycle(patch: &TriMesh) -> Option<Vec<VertexId>> {
    if patch.euler_characteristic() != 1 {
        return None;
    }
    let mut directed: FxHashSet<(VertexId, VertexId)> = FxHashSet::default();
    for t in patch.triangle_ids() {
        let x = patch.triangle(t);
        for k in 0..3 {
            directed.insert((x[k], x[(k + 1) % 3]));
        }
    }
    let mut next: FxHashMap<VertexId, VertexId> = FxHashMap::default();
    for &(a, b) in &directed {
        if !directed.contains(&(b, a)) && next.insert(a, b).is_some() {
            return None;
        }
    }
    let start = *next.keys().min()?;
    let mut cycle = vec![start];
    let mut v = next[&start];
    while v != start {
        if cycle.len() > next.len() {
            return None;
        }
        cycle.push(v);
        v = *next.get(&v)?;
    }
    (cycle.len() == next.len()).then_some(cycle)
}

fn min_angle_of(mesh: &TriMesh, tris: impl Iterator<Item = TriId>) -> f64 {
    tris.map(|t| mesh.min_angle(t)).fold(f64::INFINITY, f64::min)
}

/// Best regenerated patch of one round, in patch-local vertex numbering.
struct Candidate {
    mesh: TriMesh,
    min_angle: f64,
}

struct Round<'a> {
    patch: &'a TriMesh,
    poly: PlanarPolygon,
    frame: PlaneFrame,
    lift: SurfaceLift,
    /// Chords that would clash with edges outside the patch, in patch numbering.
    blocked: FxHashSet<Edge>,
}

impl Round<'_> {
    fn candidate(
        &self,
        scattered: Vec<crate::geometry::Point2>,
        params: &RegularityParams,
        cfg: &LtrConfig,
    ) -> Result<Candidate, TrialResult> {
        let m = self.poly.len();
        let mut points = self.poly.points.clone();
        points.extend(scattered);
        let boundary: Vec<usize> = (0..m).collect();
        let triangles = delaunay_2d(&points, &boundary).map_err(|_| TrialResult::DelaunayFailed)?;
        let used: FxHashSet<usize> = triangles.iter().flatten().copied().collect();
        if used.len() != points.len() {
            return Err(TrialResult::DelaunayFailed);
        }
        for t in &triangles {
            for k in 0..3 {
                let (a, b) = (t[k], t[(k + 1) % 3]);
                if a < m && b < m && (b + m - a) % m != 1 && (a + m - b) % m != 1 {
                    let e = Edge::new(self.poly.vertices[a], self.poly.vertices[b]);
                    if self.blocked.contains(&e) {
                        return Err(TrialResult::ChordConflict);
                    }
                }
            }
        }
        let planar = PlanarTriangulation { points, triangles, corners: m };
        let mut cand =
            lift_to_surface(&planar, &self.poly, self.patch, &self.lift).map_err(|_| TrialResult::LiftFailed)?;
        polish(&mut cand, params, cfg);
        let ids: Vec<TriId> = cand.triangle_ids().collect();
        if ids.iter().any(|&t| cand.triangle_normal(t).dot(&self.frame.normal) <= 0.0) {
            return Err(TrialResult::Folded);
        }
        let min_angle = min_angle_of(&cand, ids.iter().copied());
        if !triangles_regular(&cand, &ids, params) {
            return Err(TrialResult::Irregular { min_angle });
        }
        Ok(Candidate { mesh: cand, min_angle })
    }
}

/// Relocation loop on a candidate with its own resting length.
fn polish(cand: &mut TriMesh, params: &RegularityParams, cfg: &LtrConfig) {
    let Ok(system) = SpringSystem::new(cand, cfg.rest_length) else { return };
    if system.free.is_empty() {
        return;
    }
    let Ok(mut r) = Relocator::new(cand, system, cfg.line_search) else { return };
    let ids: Vec<TriId> = cand.triangle_ids().collect();
    for _ in 0..cfg.nu {
        if triangles_regular(cand, &ids, params) {
            break;
        }
        match r.step(cand) {
            Ok(StepOutcome::Accepted(_)) => {}
            _ => break,
        }
    }
}

fn prepare_round<'a>(
    mesh: &TriMesh,
    tris: &[TriId],
    patch: &'a TriMesh,
    global: &[VertexId],
) -> Result<Round<'a>, RoundFailure> {
    let cycle = boundary_cycle(patch).ok_or(RoundFailure::NotDisk)?;
    let pts: Vec<Point3> = patch.vertex_ids().map(|v| *patch.position(v)).collect();
    let fitted = fit_plane(&pts).map_err(|_| RoundFailure::Plane)?;
    let mut frame = fitted.frame(&pts);
    let mut poly = PlanarPolygon::new(cycle.iter().map(|&v| frame.to_2d(patch.position(v))).collect(), cycle.clone());
    if poly.signed_area() < 0.0 {
        frame = frame.flipped();
        poly = PlanarPolygon::new(cycle.iter().map(|&v| frame.to_2d(patch.position(v))).collect(), cycle.clone());
    }
    if !(poly.signed_area() > 0.0) || !poly.is_simple() {
        return Err(RoundFailure::PolygonNotSimple);
    }

    let in_patch: FxHashSet<TriId> = tris.iter().copied().collect();
    let on_cycle: FxHashMap<VertexId, VertexId> = cycle.iter().map(|&v| (global[v], v)).collect();
    let mut blocked = FxHashSet::default();
    for &gv in on_cycle.keys() {
        for w in mesh.neighbors(gv) {
            if let Some(&lw) = on_cycle.get(&w) {
                let e = Edge::new(gv, w);
                if mesh.edge_triangles(e).iter().any(|t| !in_patch.contains(t)) {
                    blocked.insert(Edge::new(on_cycle[&gv], lw));
                }
            }
        }
    }
    let lift = SurfaceLift::new(patch, frame);
    Ok(Round { patch, poly, frame, lift, blocked })
}

/// Replaces the patch triangles by the candidate; candidate vertices
/// `0..corners` are the polygon corners listed in `corner_ids`.
fn splice(
    mesh: &mut TriMesh,
    tris: &[TriId],
    patch: &TriMesh,
    global: &[VertexId],
    cand: &TriMesh,
    corner_ids: &[VertexId],
) -> (Vec<TriId>, usize, usize) {
    let interior: Vec<VertexId> =
        patch.vertex_ids().filter(|&v| !patch.is_boundary_vertex(v)).map(|v| global[v]).collect();
    for &t in tris {
        mesh.remove_triangle(t);
    }
    for &v in &interior {
        mesh.remove_vertex(v);
    }
    let mut map: Vec<VertexId> = corner_ids.iter().map(|&v| global[v]).collect();
    let corners = map.len();
    for v in corners..cand.num_vertices() {
        map.push(mesh.add_vertex(*cand.position(v)));
    }
    let new = cand.triangle_ids().map(|t| mesh.add_triangle(cand.triangle(t).map(|v| map[v]))).collect();
    (new, interior.len(), cand.num_vertices() - corners)
}

/// Regenerates the triangulation around a triangle violating regularity.
///
/// On failure the mesh is left untouched.
pub fn ltr_run(
    mesh: &mut TriMesh,
    seed_tri: TriId,
    params: &RegularityParams,
    cfg: &LtrConfig,
    seed: u64,
) -> LtrOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = LtrOutcome {
        success: false,
        seed,
        rounds: 0,
        round_failures: Vec::new(),
        trials: Vec::new(),
        m_est: None,
        chosen_min_angle: None,
        patch_min_angle: None,
        new_triangles: Vec::new(),
        removed_vertices: 0,
        added_vertices: 0,
        removed_triangles: 0,
    };
    // largest angle first, then the other corners
    let first = largest_angle_vertex(mesh, seed_tri);
    let tri = mesh.triangle(seed_tri);
    let angles = mesh.triangle_angles(seed_tri);
    let mut corners: Vec<usize> = (0..3).filter(|&k| tri[k] != first).collect();
    corners.sort_by(|&i, &j| angles[j].total_cmp(&angles[i]));
    let starts = std::iter::once(first).chain(corners.into_iter().map(|k| tri[k]));
    for start in starts {
        if regenerate_from(mesh, start, params, cfg, &mut rng, &mut out) {
            break;
        }
    }
    out
}

fn regenerate_from(
    mesh: &mut TriMesh,
    start: VertexId,
    params: &RegularityParams,
    cfg: &LtrConfig,
    rng: &mut ChaCha8Rng,
    out: &mut LtrOutcome,
) -> bool {
    let mut seeds = vec![start];
    for _ in 1..=cfg.mu {
        out.rounds += 1;
        let round = out.rounds;
        let tris = bfs_triangles(mesh, &seeds);
        seeds = triangle_vertices(mesh, &tris);
        let (patch, global) = mesh.submesh(&tris);
        let state = match prepare_round(mesh, &tris, &patch, &global) {
            Ok(s) => s,
            Err(f) => {
                out.round_failures.push(f);
                continue;
            }
        };
        let h_tri = state.poly.mean_edge_length();
        let m_est = estimate_points(&state.poly, h_tri);
        out.m_est = Some(m_est);
        let patch_min = min_angle_of(&patch, patch.triangle_ids());
        out.patch_min_angle = Some(patch_min);

        let mut best: Option<Candidate> = None;
        for m_star in m_est.saturating_sub(2)..=m_est + 2 {
            for trial in 0..cfg.eta {
                let result = match scatter_points(&state.poly, m_star, h_tri, rng) {
                    Err(_) => Err(TrialResult::ScatterFailed),
                    Ok(pts) => state.candidate(pts, params, cfg),
                };
                let record = match result {
                    Ok(c) => {
                        let r = TrialResult::Regular { min_angle: c.min_angle };
                        let bar = best.as_ref().map_or(patch_min, |b| b.min_angle);
                        if c.min_angle > bar {
                            best = Some(c);
                        }
                        r
                    }
                    Err(r) => r,
                };
                out.trials.push(TrialRecord { round, m_star, trial, result: record });
            }
        }
        match best {
            Some(c) => {
                let (new, removed, added) = splice(mesh, &tris, &patch, &global, &c.mesh, &state.poly.vertices);
                out.success = true;
                out.chosen_min_angle = Some(c.min_angle);
                out.removed_triangles = tris.len();
                out.new_triangles = new;
                out.removed_vertices = removed;
                out.added_vertices = added;
                return true;
            }
            None => out.round_failures.push(RoundFailure::NoCandidate),
        }
    }
    false
}
