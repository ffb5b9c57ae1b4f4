//! One time step of the linear MARS method: advect markers, split long edges
//! through their preimages, collapse short edges, then repair small angles by
//! flip, relocation and regeneration in that order.

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ema::{
    delaunay_flips_near, edge_collapse, edge_collapse_at, edge_flip, edge_split_at, preferred_endpoint, Keep,
};
use crate::flows::{time_grid, DiscreteFlowMap};
use crate::geometry::Point3;
use crate::ltr::{ltr_run, LtrConfig};
use crate::mesh::{bfs_triangles, check_regularity, Edge, RegularityParams, TriId, TriMesh, VertexId};
use crate::vrem::{vrem_run, VremConfig};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepConfig {
    pub params: RegularityParams,
    pub vrem: VremConfig,
    pub ltr: LtrConfig,
    /// Base seed for the regeneration trials.
    pub seed: u64,
    /// Cap on augmentation sweeps per step.
    pub max_sweeps: usize,
    /// Cap on full rescans of the angle cascade per step.
    pub max_passes: usize,
}

impl StepConfig {
    pub fn new(params: RegularityParams) -> Self {
        StepConfig {
            params,
            vrem: VremConfig::default(),
            ltr: LtrConfig::default(),
            seed: 0,
            max_sweeps: 10,
            max_passes: 8,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StepError {
    #[error("edges still longer than h_L after {sweeps} augmentation sweeps ({remaining} left); time step too large")]
    AugmentationCap { sweeps: usize, remaining: usize },
    #[error("triangle {tri} could not be repaired by flip, relocation or regeneration")]
    CascadeFailed {
        tri: TriId,
        /// Two-ring around the triangle in OBJ format.
        patch_obj: String,
    },
    #[error("mesh still has {violations} regularity violations after {passes} cascade passes")]
    Irregular { violations: usize, passes: usize },
}

/// Violations resolved by each adjustment tier.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TierCounts {
    pub ema: usize,
    pub vrem: usize,
    pub ltr: usize,
}

impl TierCounts {
    pub fn total(&self) -> usize {
        self.ema + self.vrem + self.ltr
    }

    pub fn add(&mut self, o: &TierCounts) {
        self.ema += o.ema;
        self.vrem += o.vrem;
        self.ltr += o.ltr;
    }
}

/// Wall-clock seconds per phase; kept apart from the reproducible fields.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct StepTimings {
    pub advect: f64,
    pub ema: f64,
    pub vrem: f64,
    pub ltr: f64,
}

impl StepTimings {
    pub fn add(&mut self, o: &StepTimings) {
        self.advect += o.advect;
        self.ema += o.ema;
        self.vrem += o.vrem;
        self.ltr += o.ltr;
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct AugmentStats {
    pub sweeps: usize,
    pub edges_split: usize,
    pub markers_added: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct CollapseStats {
    pub collapses: usize,
    /// Flips made to unblock collapses.
    pub flips: usize,
    /// Collapses that had to merge at the edge midpoint.
    pub midpoint: usize,
    /// Short edges no legal collapse could remove.
    pub stuck: Vec<Edge>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct CascadeStats {
    /// Triangles taken from the queue while violating.
    pub violations: usize,
    /// Violations resolved by a flip, by relocation and by regeneration.
    pub resolved: TierCounts,
    pub flips_applied: usize,
    pub passes: usize,
    /// Triangles left for a later pass after every tier failed.
    pub deferred: usize,
    pub ltr_seeds: Vec<u64>,
}

/// Per-step record.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StepReport {
    pub step: usize,
    pub t: f64,
    pub k: f64,
    pub vertices: usize,
    pub triangles: usize,
    pub euler: i64,
    pub augment: AugmentStats,
    pub collapses: usize,
    pub stuck_short_edges: usize,
    pub cascade: CascadeStats,
    /// All violations by resolving tier; splits and collapses count as EMA.
    pub tiers: TierCounts,
    pub min_angle: f64,
    pub min_edge: f64,
    pub max_edge: f64,
    pub violations_after: usize,
    /// Markers outside the unit cube after advection.
    pub outside_domain: usize,
    pub timings: StepTimings,
}

/// Moves every marker by the flow map and returns the old positions by vertex slot.
pub fn advect(mesh: &mut TriMesh, flow: &DiscreteFlowMap, t: f64, k: f64) -> Vec<Point3> {
    let pre = mesh.positions().to_vec();
    mesh.positions_mut().par_iter_mut().for_each(|p| *p = flow.map(p, t, k));
    pre
}

/// Splits every edge longer than `h_L` through its preimage until none is left.
///
/// `pre` holds the preimage of each vertex slot and grows with the new markers.
pub fn augment_long_edges(
    mesh: &mut TriMesh,
    pre: &mut Vec<Point3>,
    flow: &DiscreteFlowMap,
    t: f64,
    k: f64,
    params: &RegularityParams,
    max_sweeps: usize,
) -> Result<AugmentStats, StepError> {
    let mut stats = AugmentStats::default();
    loop {
        let long: Vec<(Edge, f64)> =
            mesh.edges().into_iter().map(|e| (e, mesh.edge_length(e))).filter(|&(_, l)| l > params.h_l).collect();
        if long.is_empty() {
            return Ok(stats);
        }
        if stats.sweeps == max_sweeps {
            return Err(StepError::AugmentationCap { sweeps: stats.sweeps, remaining: long.len() });
        }
        stats.sweeps += 1;
        for (e, len) in long {
            let n = (len / params.h_l).ceil() as usize;
            let (pa, pb) = (pre[e.a()], pre[e.b()]);
            let back: Vec<Point3> = (1..n).map(|i| pa + (pb - pa) * (i as f64 / n as f64)).collect();
            let fwd: Vec<Point3> = back.iter().map(|x| flow.map(x, t, k)).collect();
            let new = edge_split_at(mesh, e, &fwd).expect("long edge is present");
            pre.resize(mesh.vertex_capacity(), Point3::zeros());
            for (v, x) in new.into_iter().zip(back) {
                pre[v] = x;
            }
            stats.edges_split += 1;
            stats.markers_added += n - 1;
        }
    }
}

#[derive(PartialEq)]
struct ByLength(f64, Edge);

impl Eq for ByLength {}

impl PartialOrd for ByLength {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

impl Ord for ByLength {
    fn cmp(&self, o: &Self) -> Ordering {
        self.0.total_cmp(&o.0).then(self.1.cmp(&o.1))
    }
}

/// Collapses edges shorter than `r_tiny h_L`, shortest first.
pub fn collapse_short_edges(mesh: &mut TriMesh, params: &RegularityParams) -> CollapseStats {
    let tiny = params.min_length();
    let mut heap: BinaryHeap<Reverse<ByLength>> = mesh
        .edges()
        .into_iter()
        .map(|e| (e, mesh.edge_length(e)))
        .filter(|&(_, l)| l < tiny)
        .map(|(e, l)| Reverse(ByLength(l, e)))
        .collect();
    let mut stats = CollapseStats::default();
    while let Some(Reverse(ByLength(len, e))) = heap.pop() {
        if !mesh.has_edge(e) {
            continue;
        }
        let now = mesh.edge_length(e);
        if now >= tiny {
            continue;
        }
        if now != len {
            heap.push(Reverse(ByLength(now, e)));
            continue;
        }
        let first = if preferred_endpoint(mesh, e) == e.a() { Keep::A } else { Keep::B };
        let second = if first == Keep::A { Keep::B } else { Keep::A };
        let attempt = |mesh: &mut TriMesh| {
            edge_collapse(mesh, e, first, Some(params.h_l))
                .or_else(|_| edge_collapse(mesh, e, second, Some(params.h_l)))
        };
        let mut kept = attempt(mesh);
        if kept.is_err() {
            // flat neighbours often block both directions; Delaunay flips around the edge can clear them
            let mut near = mesh.neighbors(e.a());
            near.extend(mesh.neighbors(e.b()));
            stats.flips += delaunay_flips_near(mesh, &near, params, 64);
            if mesh.has_edge(e) {
                kept = attempt(mesh);
            }
        }
        if kept.is_err() && mesh.has_edge(e) {
            let k = if first == Keep::A { e.a() } else { e.b() };
            let mid = (mesh.position(e.a()) + mesh.position(e.b())) * 0.5;
            kept = edge_collapse_at(mesh, e, k, mid, Some(params.h_l));
            if kept.is_ok() {
                stats.midpoint += 1;
            }
        }
        match kept {
            Ok(v) => {
                stats.collapses += 1;
                for w in mesh.neighbors(v) {
                    let f = Edge::new(v, w);
                    let l = mesh.edge_length(f);
                    if l < tiny {
                        heap.push(Reverse(ByLength(l, f)));
                    }
                }
            }
            Err(_) => stats.stuck.push(e),
        }
    }
    stats.stuck.retain(|&e| mesh.has_edge(e) && mesh.edge_length(e) < tiny);
    stats
}

#[derive(PartialEq)]
struct ByAngle(f64, TriId);

impl Eq for ByAngle {}

impl PartialOrd for ByAngle {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

impl Ord for ByAngle {
    fn cmp(&self, o: &Self) -> Ordering {
        self.0.total_cmp(&o.0).then(self.1.cmp(&o.1))
    }
}

/// Seed of the `n`-th regeneration call of a run.
pub fn ltr_seed(base: u64, n: u64) -> u64 {
    base ^ n.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

fn patch_obj(mesh: &TriMesh, t: TriId) -> String {
    let ring1 = bfs_triangles(mesh, &mesh.triangle(t));
    let verts = crate::mesh::triangle_vertices(mesh, &ring1);
    let (patch, _) = mesh.submesh(&bfs_triangles(mesh, &verts));
    crate::io::obj_string(&patch)
}

/// Repairs every triangle breaking the bounds, worst minimum angle first.
///
/// A triangle that no tier repairs is deferred; the next pass retries it once
/// its neighbourhood has changed. The cascade fails when a pass ends with
/// deferred triangles and resolved nothing.
///
/// `counter` numbers the regeneration calls of the run and advances with each.
/// Collapses the shortest edge of `t` into whichever endpoint is legal; returns the survivor.
fn collapse_shortest_edge(mesh: &mut TriMesh, t: TriId, params: &RegularityParams) -> Option<VertexId> {
    let x = mesh.triangle(t);
    let e = (0..3)
        .map(|k| Edge::new(x[k], x[(k + 1) % 3]))
        .min_by(|a, b| mesh.edge_length(*a).total_cmp(&mesh.edge_length(*b)).then(a.cmp(b)))?;
    let first = preferred_endpoint(mesh, e);
    let second = if first == e.a() { e.b() } else { e.a() };
    for keep in [first, second] {
        let pk = *mesh.position(keep);
        if let Ok(k) = edge_collapse_at(mesh, e, keep, pk, Some(params.h_l)) {
            return Some(k);
        }
    }
    let mid = (mesh.position(e.a()) + mesh.position(e.b())) * 0.5;
    edge_collapse_at(mesh, e, first, mid, Some(params.h_l)).ok()
}

pub fn enforce_theta(
    mesh: &mut TriMesh,
    cfg: &StepConfig,
    counter: &mut u64,
    timings: &mut StepTimings,
) -> Result<CascadeStats, StepError> {
    let params = &cfg.params;
    let mut stats = CascadeStats::default();
    for pass in 1..=cfg.max_passes {
        stats.passes = pass;
        let mut heap: BinaryHeap<Reverse<ByAngle>> = mesh
            .triangle_ids()
            .filter(|&t| mesh.triangle_violates(t, params))
            .map(|t| Reverse(ByAngle(mesh.min_angle(t), t)))
            .collect();
        if heap.is_empty() {
            return Ok(stats);
        }
        let mut deferred: Vec<TriId> = Vec::new();
        let before = stats.resolved.total() + stats.flips_applied;
        while let Some(Reverse(ByAngle(angle, t))) = heap.pop() {
            if !mesh.is_triangle_alive(t) || !mesh.triangle_violates(t, params) {
                continue;
            }
            let now = mesh.min_angle(t);
            if now != angle {
                heap.push(Reverse(ByAngle(now, t)));
                continue;
            }
            stats.violations += 1;

            let clock = Instant::now();
            let flip = edge_flip(mesh, t, params);
            let mut target = t;
            if let Some(new) = flip.new_triangles {
                stats.flips_applied += 1;
                let worst = new
                    .into_iter()
                    .filter(|&n| mesh.triangle_violates(n, params))
                    .min_by(|&a, &b| mesh.min_angle(a).total_cmp(&mesh.min_angle(b)).then(a.cmp(&b)));
                match worst {
                    None => {
                        stats.resolved.ema += 1;
                        timings.ema += clock.elapsed().as_secs_f64();
                        continue;
                    }
                    Some(w) => target = w,
                }
            }
            timings.ema += clock.elapsed().as_secs_f64();

            let clock = Instant::now();
            let relocated = vrem_run(mesh, target, params, &cfg.vrem);
            timings.vrem += clock.elapsed().as_secs_f64();
            if relocated.success {
                stats.resolved.vrem += 1;
                continue;
            }

            let clock = Instant::now();
            let seed = ltr_seed(cfg.seed, *counter);
            *counter += 1;
            stats.ltr_seeds.push(seed);
            let regen = ltr_run(mesh, target, params, &cfg.ltr, seed);
            timings.ltr += clock.elapsed().as_secs_f64();
            if !regen.success {
                // last resort: collapse the shortest edge, otherwise make the
                // neighbourhood locally Delaunay and come back to it
                let tri = mesh.triangle(target);
                let clock = Instant::now();
                let collapsed = collapse_shortest_edge(mesh, target, params);
                timings.ema += clock.elapsed().as_secs_f64();
                if let Some(k) = collapsed {
                    stats.resolved.ema += 1;
                    for n in bfs_triangles(mesh, &[k]) {
                        if mesh.triangle_violates(n, params) {
                            heap.push(Reverse(ByAngle(mesh.min_angle(n), n)));
                        }
                    }
                    continue;
                }
                let flips = delaunay_flips_near(mesh, &tri, params, 64);
                stats.flips_applied += flips;
                if flips > 0 {
                    let near: Vec<VertexId> = tri.iter().filter(|&&v| mesh.is_vertex_alive(v)).copied().collect();
                    for n in bfs_triangles(mesh, &near) {
                        if mesh.triangle_violates(n, params) {
                            heap.push(Reverse(ByAngle(mesh.min_angle(n), n)));
                        }
                    }
                }
                stats.deferred += 1;
                deferred.push(target);
                continue;
            }
            stats.resolved.ltr += 1;
            // rescan the seam of the spliced patch
            let seam: Vec<usize> = crate::mesh::triangle_vertices(mesh, &regen.new_triangles);
            for n in bfs_triangles(mesh, &seam) {
                if mesh.triangle_violates(n, params) {
                    heap.push(Reverse(ByAngle(mesh.min_angle(n), n)));
                }
            }
        }
        deferred.retain(|&t| mesh.is_triangle_alive(t) && mesh.triangle_violates(t, params));
        if let Some(&t) = deferred.first() {
            if stats.resolved.total() + stats.flips_applied == before {
                return Err(StepError::CascadeFailed { tri: t, patch_obj: patch_obj(mesh, t) });
            }
        }
    }
    let left = mesh.triangle_ids().filter(|&t| mesh.triangle_violates(t, params)).count();
    if left == 0 {
        Ok(stats)
    } else {
        Err(StepError::Irregular { violations: left, passes: cfg.max_passes })
    }
}

/// Advances the mesh from `t` to `t + k`.
pub fn step(
    mesh: &mut TriMesh,
    flow: &DiscreteFlowMap,
    t: f64,
    k: f64,
    cfg: &StepConfig,
    index: usize,
    counter: &mut u64,
) -> Result<StepReport, StepError> {
    let mut timings = StepTimings::default();
    let clock = Instant::now();
    let mut pre = advect(mesh, flow, t, k);
    timings.advect = clock.elapsed().as_secs_f64();
    let outside_domain =
        mesh.vertex_ids().filter(|&v| mesh.position(v).iter().any(|&c| !(0.0..=1.0).contains(&c))).count();

    let clock = Instant::now();
    let augment = augment_long_edges(mesh, &mut pre, flow, t, k, &cfg.params, cfg.max_sweeps)?;
    drop(pre);
    let collapse = collapse_short_edges(mesh, &cfg.params);
    timings.ema += clock.elapsed().as_secs_f64();

    let cascade = enforce_theta(mesh, cfg, counter, &mut timings)?;

    if mesh.triangle_capacity() > 2 * mesh.num_triangles().max(16) {
        mesh.compact();
    }
    let q = check_regularity(mesh, &cfg.params);
    let tiers = TierCounts {
        ema: augment.edges_split + collapse.collapses + cascade.resolved.ema,
        vrem: cascade.resolved.vrem,
        ltr: cascade.resolved.ltr,
    };
    Ok(StepReport {
        step: index,
        t: t + k,
        k,
        vertices: mesh.num_vertices(),
        triangles: mesh.num_triangles(),
        euler: mesh.euler_characteristic(),
        augment,
        collapses: collapse.collapses,
        stuck_short_edges: collapse.stuck.len(),
        cascade,
        tiers,
        min_angle: q.min_angle,
        min_edge: q.min_edge_length,
        max_edge: q.max_edge_length,
        violations_after: q.violation_count(),
        outside_domain,
        timings,
    })
}

/// Applies the length repairs and the angle cascade to a static mesh.
pub fn remesh(mesh: &mut TriMesh, cfg: &StepConfig) -> Result<StepReport, StepError> {
    let still = DiscreteFlowMap::new(crate::flows::Field::Uniform { velocity: [0.0; 3] });
    step(mesh, &still, 0.0, 0.0, cfg, 0, &mut 0)
}

/// Runs uniform steps of size `k` over `[0, t_end]`, shortening the last one.
/// `on_step` sees the mesh and report after every step.
pub fn simulate(
    mesh: &mut TriMesh,
    flow: &DiscreteFlowMap,
    t_end: f64,
    k: f64,
    cfg: &StepConfig,
    mut on_step: impl FnMut(&TriMesh, &StepReport),
) -> Result<Vec<StepReport>, StepError> {
    let mut counter = 0;
    let mut out = Vec::new();
    for (i, (t, dt)) in time_grid(t_end, k).into_iter().enumerate() {
        let r = step(mesh, flow, t, dt, cfg, i + 1, &mut counter)?;
        on_step(mesh, &r);
        out.push(r);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flows::Field;
    use crate::mesh::fixtures::*;
    use crate::mesh::validate;
    use std::f64::consts::PI;

    fn still() -> DiscreteFlowMap {
        DiscreteFlowMap::new(Field::Uniform { velocity: [0.0; 3] })
    }

    #[test]
    fn advect_uniform_translates() {
        let mut m = tetrahedron();
        let before: Vec<Point3> = m.positions().to_vec();
        let flow = DiscreteFlowMap::new(Field::Uniform { velocity: [1.0, 0.5, -0.25] });
        let pre = advect(&mut m, &flow, 0.0, 0.2);
        assert_eq!(pre, before);
        for v in m.vertex_ids() {
            assert!((m.position(v) - before[v] - Point3::new(0.2, 0.1, -0.05)).norm() < 1e-15);
        }
    }

    #[test]
    fn long_edge_split_in_three() {
        let mut m = two_triangles();
        // shared diagonal (1, 2) has length sqrt(2); h_L = sqrt(2) / 2.5
        let params = RegularityParams::new(0.1, 2f64.sqrt() / 2.5, PI / 10.0).unwrap();
        let mut pre = m.positions().to_vec();
        let s = augment_long_edges(&mut m, &mut pre, &still(), 0.0, 0.1, &params, 10).unwrap();
        assert!(s.sweeps >= 1);
        assert!(m.edges().iter().all(|&e| m.edge_length(e) <= params.h_l));
        assert!(validate(&m).is_empty());
        for v in m.vertex_ids() {
            assert_eq!(pre[v], *m.position(v));
        }
    }

    #[test]
    fn single_edge_division_count() {
        let mut m = two_triangles();
        let diag = 2f64.sqrt();
        // only the diagonal is long: 1 < h_L < diag
        let params = RegularityParams::new(0.1, diag / 1.3, PI / 10.0).unwrap();
        let mut pre = m.positions().to_vec();
        let s = augment_long_edges(&mut m, &mut pre, &still(), 0.0, 0.1, &params, 10).unwrap();
        assert_eq!(s.edges_split, 1);
        assert_eq!(s.markers_added, 1);
        assert_eq!(s.sweeps, 1);
        assert_eq!(m.num_triangles(), 4);
    }

    #[test]
    fn tiny_edge_is_collapsed() {
        let mut m = lattice(6, 1.0);
        let params = RegularityParams::new(0.1, 2.0, PI / 10.0).unwrap();
        // pull an interior vertex to within 0.05 h_L of its right neighbour
        let (v, w) = (2 * 6 + 2, 2 * 6 + 3);
        let target = m.position(w) - Point3::new(0.1, 0.0, 0.0);
        m.set_position(v, target);
        let (nv, chi) = (m.num_vertices(), m.euler_characteristic());
        let s = collapse_short_edges(&mut m, &params);
        assert_eq!(s.collapses, 1);
        assert_eq!(m.num_vertices(), nv - 1);
        assert_eq!(m.euler_characteristic(), chi);
        assert!(m.edges().iter().all(|&e| m.edge_length(e) >= params.min_length()));
    }

    #[test]
    fn zero_step_is_identity() {
        let mut m = lattice(5, 1.0);
        let before = m.positions().to_vec();
        let cfg = StepConfig::new(RegularityParams::new(0.1, 1.5, PI / 10.0).unwrap());
        let flow = DiscreteFlowMap::new(Field::vortical_shear(3.0));
        let mut c = 0;
        let r = step(&mut m, &flow, 0.0, 0.0, &cfg, 1, &mut c).unwrap();
        assert_eq!(m.positions(), &before[..]);
        assert_eq!(r.tiers.total(), 0);
    }

    #[test]
    fn skinny_pair_resolved_by_flip() {
        let p = vec![
            Point3::new(-1.0, 0.0, 0.0),
            Point3::new(1.0, 0.0, 0.0),
            Point3::new(0.0, 0.3, 0.0),
            Point3::new(0.0, -0.3, 0.0),
        ];
        let mut m = TriMesh::from_triangles(p, &[[0, 1, 2], [1, 0, 3]]).unwrap();
        let cfg = StepConfig::new(RegularityParams::new(0.1, 2.5, PI / 10.0).unwrap());
        let s = enforce_theta(&mut m, &cfg, &mut 0, &mut StepTimings::default()).unwrap();
        assert_eq!(s.resolved, TierCounts { ema: 1, vrem: 0, ltr: 0 });
        assert!(m.has_edge(Edge::new(2, 3)));
    }
}
