//! Error norms, convergence orders, mesh statistics and adjustment-cost accounting.

use std::f64::consts::PI;

use serde::Serialize;
use thiserror::Error;

use crate::geometry::Point3;
use crate::mesh::TriMesh;
use crate::stepper::{StepReport, StepTimings, TierCounts};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ErrorRecord {
    pub e1: f64,
    pub eg: f64,
    pub markers: usize,
    pub radius: f64,
    pub center: [f64; 3],
}

impl ErrorRecord {
    pub fn new(mesh: &TriMesh, center: Point3, radius: f64) -> Self {
        let e = e1(mesh, &center, radius);
        ErrorRecord { e1: e, eg: eg(e, radius), markers: mesh.num_vertices(), radius, center: center.into() }
    }
}

/// Mean absolute deviation of the markers from the sphere `|x - c| = r`.
pub fn e1(mesh: &TriMesh, c: &Point3, r: f64) -> f64 {
    let n = mesh.num_vertices();
    assert!(n > 0, "E1 needs at least one marker");
    mesh.vertex_ids().map(|v| ((mesh.position(v) - c).norm() - r).abs()).sum::<f64>() / n as f64
}

/// Geometric error `4 pi R^2 E1`.
pub fn eg(e1: f64, r: f64) -> f64 {
    4.0 * PI * r * r * e1
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OrderError {
    #[error("need at least two grid levels")]
    TooFew,
    #[error("grid sizes {0} and {1} are not a halving")]
    NotHalving(f64, f64),
}

/// Observed orders `log2(E_coarse / E_fine)` for consecutive levels sorted
/// coarse to fine; `None` where the finer error vanishes.
pub fn convergence_order(levels: &[(f64, f64)]) -> Result<Vec<Option<f64>>, OrderError> {
    if levels.len() < 2 {
        return Err(OrderError::TooFew);
    }
    let mut v = levels.to_vec();
    v.sort_by(|a, b| b.0.total_cmp(&a.0));
    v.windows(2)
        .map(|w| {
            let ((hc, ec), (hf, ef)) = (w[0], w[1]);
            if ((hc / hf) - 2.0).abs() > 1e-9 {
                return Err(OrderError::NotHalving(hc, hf));
            }
            Ok(if ef == 0.0 { None } else { Some((ec / ef).log2()) })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QualityStats {
    pub min_angle: f64,
    pub mean_angle: f64,
    pub min_edge: f64,
    pub max_edge: f64,
    pub mean_edge: f64,
    /// Counts of interior angles in 18 bins of 10 degrees.
    pub angle_histogram: Vec<usize>,
    /// Counts of edge lengths in `bins` equal bins over `[min_edge, max_edge]`.
    pub edge_histogram: Vec<usize>,
}

pub fn quality_stats(mesh: &TriMesh, bins: usize) -> QualityStats {
    let mut angle_histogram = vec![0; 18];
    let (mut min_angle, mut sum_angle, mut n_angle) = (f64::INFINITY, 0.0, 0usize);
    for t in mesh.triangle_ids() {
        for a in mesh.triangle_angles(t) {
            min_angle = min_angle.min(a);
            sum_angle += a;
            n_angle += 1;
            let b = ((a.to_degrees() / 10.0) as usize).min(17);
            angle_histogram[b] += 1;
        }
    }
    let lengths: Vec<f64> = mesh.edges().into_iter().map(|e| mesh.edge_length(e)).collect();
    let min_edge = lengths.iter().copied().fold(f64::INFINITY, f64::min);
    let max_edge = lengths.iter().copied().fold(0.0, f64::max);
    let mut edge_histogram = vec![0; bins.max(1)];
    let span = max_edge - min_edge;
    for &l in &lengths {
        let b = if span > 0.0 { (((l - min_edge) / span) * bins as f64) as usize } else { 0 };
        edge_histogram[b.min(bins.max(1) - 1)] += 1;
    }
    QualityStats {
        min_angle,
        mean_angle: sum_angle / n_angle.max(1) as f64,
        min_edge,
        max_edge,
        mean_edge: lengths.iter().sum::<f64>() / lengths.len().max(1) as f64,
        angle_histogram,
        edge_histogram,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Tier {
    Ema,
    Vrem,
    Ltr,
}

/// Per-tier counts of resolved violations and accumulated wall time.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct CostLedger {
    pub counts: TierCounts,
    /// Angle violations only, without the length repairs.
    pub theta_counts: TierCounts,
    pub times: StepTimings,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct Shares {
    pub ema: f64,
    pub vrem: f64,
    pub ltr: f64,
}

fn shares(v: [f64; 3]) -> Shares {
    let total: f64 = v.iter().sum();
    if total <= 0.0 {
        return Shares::default();
    }
    Shares { ema: 100.0 * v[0] / total, vrem: 100.0 * v[1] / total, ltr: 100.0 * v[2] / total }
}

fn as_f64(c: &TierCounts) -> [f64; 3] {
    [c.ema as f64, c.vrem as f64, c.ltr as f64]
}

impl CostLedger {
    pub fn record(&mut self, tier: Tier, triangles: usize, seconds: f64) {
        match tier {
            Tier::Ema => {
                self.counts.ema += triangles;
                self.times.ema += seconds;
            }
            Tier::Vrem => {
                self.counts.vrem += triangles;
                self.times.vrem += seconds;
            }
            Tier::Ltr => {
                self.counts.ltr += triangles;
                self.times.ltr += seconds;
            }
        }
    }

    pub fn add_step(&mut self, r: &StepReport) {
        self.counts.add(&r.tiers);
        self.theta_counts.add(&r.cascade.resolved);
        self.times.add(&r.timings);
    }

    pub fn count_shares(&self) -> Shares {
        shares(as_f64(&self.counts))
    }

    pub fn theta_shares(&self) -> Shares {
        shares(as_f64(&self.theta_counts))
    }

    pub fn time_shares(&self) -> Shares {
        shares([self.times.ema, self.times.vrem, self.times.ltr])
    }
}
