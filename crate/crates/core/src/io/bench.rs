use std::fs::File;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;
use thiserror::Error;

use super::config::{ConfigError, RunConfig};
use super::obj::{read_obj, write_obj, ObjError};
use super::sphere::gen_sphere;
use crate::flows::DiscreteFlowMap;
use crate::metrics::{convergence_order, CostLedger, ErrorRecord, OrderError};
use crate::stepper::{simulate, StepError, StepReport};

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Obj(#[from] ObjError),
    #[error(transparent)]
    Step(#[from] StepError),
    #[error(transparent)]
    Order(#[from] OrderError),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("initial mesh is not regular: {0} violation(s)")]
    IrregularStart(usize),
}

impl RunError {
    pub fn kind(&self) -> &'static str {
        match self {
            RunError::Config(_) => "config",
            RunError::Obj(_) => "obj",
            RunError::Step(StepError::AugmentationCap { .. }) => "augmentation_cap",
            RunError::Step(StepError::CascadeFailed { .. }) => "cascade_failed",
            RunError::Step(StepError::Irregular { .. }) => "irregular",
            RunError::Order(_) => "order",
            RunError::Csv(_) => "csv",
            RunError::Io(_) => "io",
            RunError::Json(_) => "json",
            RunError::IrregularStart(_) => "irregular_start",
        }
    }
}

/// One row of the per-step CSV.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StepRow {
    pub step: usize,
    pub t: f64,
    pub k: f64,
    pub vertices: usize,
    pub triangles: usize,
    pub euler: i64,
    pub sweeps: usize,
    pub edges_split: usize,
    pub markers_added: usize,
    pub collapses: usize,
    pub stuck_short_edges: usize,
    pub theta_violations: usize,
    pub flips_applied: usize,
    pub ema: usize,
    pub vrem: usize,
    pub ltr: usize,
    pub theta_ema: usize,
    pub theta_vrem: usize,
    pub theta_ltr: usize,
    pub min_angle: f64,
    pub min_edge: f64,
    pub max_edge: f64,
    pub violations_after: usize,
    pub outside_domain: usize,
}

impl From<&StepReport> for StepRow {
    fn from(r: &StepReport) -> Self {
        StepRow {
            step: r.step,
            t: r.t,
            k: r.k,
            vertices: r.vertices,
            triangles: r.triangles,
            euler: r.euler,
            sweeps: r.augment.sweeps,
            edges_split: r.augment.edges_split,
            markers_added: r.augment.markers_added,
            collapses: r.collapses,
            stuck_short_edges: r.stuck_short_edges,
            theta_violations: r.cascade.violations,
            flips_applied: r.cascade.flips_applied,
            ema: r.tiers.ema,
            vrem: r.tiers.vrem,
            ltr: r.tiers.ltr,
            theta_ema: r.cascade.resolved.ema,
            theta_vrem: r.cascade.resolved.vrem,
            theta_ltr: r.cascade.resolved.ltr,
            min_angle: r.min_angle,
            min_edge: r.min_edge,
            max_edge: r.max_edge,
            violations_after: r.violations_after,
            outside_domain: r.outside_domain,
        }
    }
}

/// Final errors of one grid level, one row of the error CSV.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ErrorRow {
    pub field: String,
    pub h: f64,
    pub h_l: f64,
    pub k: f64,
    pub steps: usize,
    pub initial_markers: usize,
    pub markers: usize,
    pub euler: i64,
    pub e1: f64,
    pub eg: f64,
    pub ema: usize,
    pub vrem: usize,
    pub ltr: usize,
    pub theta_ema: usize,
    pub theta_vrem: usize,
    pub theta_ltr: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OrderRow {
    pub h_coarse: f64,
    pub h_fine: f64,
    pub e1_coarse: f64,
    pub e1_fine: f64,
    /// Empty when the finer error vanishes.
    pub order: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct LevelResult {
    pub h: f64,
    pub h_l: f64,
    pub k: f64,
    pub level: Option<usize>,
    pub initial_markers: usize,
    pub error: ErrorRecord,
    pub ledger: CostLedger,
    #[serde(skip)]
    pub reports: Vec<StepReport>,
    pub step_csv: PathBuf,
}

#[derive(Clone, Debug, Serialize)]
pub struct BenchmarkSummary {
    pub levels: Vec<LevelResult>,
    pub orders: Vec<OrderRow>,
    pub error_csv: PathBuf,
    pub convergence_csv: Option<PathBuf>,
}

fn tag(h: f64) -> String {
    let n = 1.0 / h;
    if (n - n.round()).abs() < 1e-9 {
        format!("h{}", n.round() as u64)
    } else {
        format!("h{h}")
    }
}

/// Runs one grid level and writes its per-step CSV, flushing after every row.
pub fn run_level(cfg: &RunConfig, h: f64, out: &Path) -> Result<LevelResult, RunError> {
    let step_cfg = cfg.step_config(h)?;
    let (mut mesh, level) = match &cfg.mesh {
        Some(p) => (read_obj(p)?, None),
        None => {
            let (m, s) = gen_sphere(cfg.center_point(), cfg.radius, cfg.spacing * h);
            (m, Some(s))
        }
    };
    let q = crate::mesh::check_regularity(&mesh, &step_cfg.params);
    if !q.is_regular() {
        return Err(RunError::IrregularStart(q.violation_count()));
    }
    let initial_markers = mesh.num_vertices();
    let flow = DiscreteFlowMap::new(cfg.field.field(cfg.period));
    let k = flow.time_step(cfg.cr, h);
    let step_csv = out.join(format!("steps_{}_{}.csv", cfg.field.label(), tag(h)));
    let mut w = csv::Writer::from_path(&step_csv)?;
    let mut snaps: Vec<f64> = cfg.snapshots.clone();
    snaps.sort_by(f64::total_cmp);
    let mut next_snap = 0;
    if snaps.first() == Some(&0.0) {
        write_obj(&mesh, out.join(format!("snap_{}_{}_t0.obj", cfg.field.label(), tag(h))))?;
        next_snap = 1;
    }
    let mut failure: Option<RunError> = None;
    let result = simulate(&mut mesh, &flow, cfg.t_end, k, &step_cfg, |m, r| {
        if failure.is_some() {
            return;
        }
        let row = StepRow::from(r);
        if let Err(e) = w.serialize(&row).and_then(|_| w.flush().map_err(csv::Error::from)) {
            failure = Some(e.into());
        }
        while next_snap < snaps.len() && r.t >= snaps[next_snap] - 1e-12 {
            let p = out.join(format!("snap_{}_{}_t{}.obj", cfg.field.label(), tag(h), snaps[next_snap]));
            if let Err(e) = write_obj(m, p) {
                failure = Some(e.into());
            }
            next_snap += 1;
        }
    });
    w.flush()?;
    drop(w);
    if let Err(StepError::CascadeFailed { tri, patch_obj }) = &result {
        std::fs::write(out.join(format!("failed_patch_{}_{}_tri{}.obj", cfg.field.label(), tag(h), tri)), patch_obj)?;
    }
    let reports = result?;
    if let Some(e) = failure {
        return Err(e);
    }
    let mut ledger = CostLedger::default();
    for r in &reports {
        ledger.add_step(r);
    }
    Ok(LevelResult {
        h,
        h_l: step_cfg.params.h_l,
        k,
        level,
        initial_markers,
        error: ErrorRecord::new(&mesh, cfg.center_point(), cfg.radius),
        ledger,
        reports,
        step_csv,
    })
}

fn error_row(cfg: &RunConfig, l: &LevelResult) -> ErrorRow {
    ErrorRow {
        field: cfg.field.label().into(),
        h: l.h,
        h_l: l.h_l,
        k: l.k,
        steps: l.reports.len(),
        initial_markers: l.initial_markers,
        markers: l.error.markers,
        euler: l.reports.last().map_or(2, |r| r.euler),
        e1: l.error.e1,
        eg: l.error.eg,
        ema: l.ledger.counts.ema,
        vrem: l.ledger.counts.vrem,
        ltr: l.ledger.counts.ltr,
        theta_ema: l.ledger.theta_counts.ema,
        theta_vrem: l.ledger.theta_counts.vrem,
        theta_ltr: l.ledger.theta_counts.ltr,
    }
}

/// Runs every grid level of `cfg` and writes the step, error and convergence
/// CSVs plus a JSON file with the cost ledger and wall times.
pub fn run_benchmark(cfg: &RunConfig) -> Result<BenchmarkSummary, RunError> {
    std::fs::create_dir_all(&cfg.out)?;
    std::fs::write(cfg.out.join("config.txt"), cfg.to_text())?;
    let name = cfg.field.label();
    let error_csv = cfg.out.join(format!("errors_{name}.csv"));
    let mut ew = csv::Writer::from_path(&error_csv)?;
    let mut levels = Vec::new();
    for &h in &cfg.h {
        let l = run_level(cfg, h, &cfg.out)?;
        ew.serialize(error_row(cfg, &l))?;
        ew.flush()?;
        levels.push(l);
    }
    drop(ew);
    let mut orders = Vec::new();
    let mut convergence_csv = None;
    if levels.len() >= 2 {
        let pairs: Vec<(f64, f64)> = levels.iter().map(|l| (l.h, l.error.e1)).collect();
        let o = convergence_order(&pairs)?;
        let mut sorted = pairs.clone();
        sorted.sort_by(|a, b| b.0.total_cmp(&a.0));
        for (w, order) in sorted.windows(2).zip(o) {
            orders.push(OrderRow { h_coarse: w[0].0, h_fine: w[1].0, e1_coarse: w[0].1, e1_fine: w[1].1, order });
        }
        let path = cfg.out.join(format!("convergence_{name}.csv"));
        let mut cw = csv::Writer::from_path(&path)?;
        for r in &orders {
            cw.serialize(r)?;
        }
        cw.flush()?;
        convergence_csv = Some(path);
    }
    let summary = BenchmarkSummary { levels, orders, error_csv, convergence_csv };
    let mut f = File::create(cfg.out.join(format!("summary_{name}.json")))?;
    let ledgers: Vec<_> = summary
        .levels
        .iter()
        .map(|l| {
            serde_json::json!({
                "h": l.h,
                "counts": l.ledger.counts,
                "theta_counts": l.ledger.theta_counts,
                "count_shares": l.ledger.count_shares(),
                "theta_shares": l.ledger.theta_shares(),
                "seconds": l.ledger.times,
                "time_shares": l.ledger.time_shares(),
                "error": l.error,
            })
        })
        .collect();
    serde_json::to_writer_pretty(&mut f, &serde_json::json!({ "levels": ledgers, "orders": summary.orders }))?;
    f.write_all(b"\n")?;
    Ok(summary)
}

/// Reads `(h, e1)` pairs from error CSVs and computes the orders.
pub fn orders_from_csv(paths: &[PathBuf]) -> Result<Vec<OrderRow>, RunError> {
    let mut pairs = Vec::new();
    for p in paths {
        let mut r = csv::Reader::from_path(p)?;
        let headers = r.headers()?.clone();
        let col = |name: &str| headers.iter().position(|h| h == name);
        let (hi, ei) = match (col("h"), col("e1")) {
            (Some(a), Some(b)) => (a, b),
            _ => return Err(RunError::Csv(csv::Error::from(std::io::Error::other("missing h or e1 column")))),
        };
        for rec in r.records() {
            let rec = rec?;
            let parse = |i: usize| {
                rec[i].parse::<f64>().map_err(|e| RunError::Csv(csv::Error::from(std::io::Error::other(e.to_string()))))
            };
            pairs.push((parse(hi)?, parse(ei)?));
        }
    }
    let o = convergence_order(&pairs)?;
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0));
    Ok(pairs
        .windows(2)
        .zip(o)
        .map(|(w, order)| OrderRow { h_coarse: w[0].0, h_fine: w[1].0, e1_coarse: w[0].1, e1_fine: w[1].1, order })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::config::FieldName;

    #[test]
    fn tags() {
        assert_eq!(tag(1.0 / 32.0), "h32");
        assert_eq!(tag(0.3), "h0.3");
    }

    #[test]
    fn short_run_writes_artifacts() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = RunConfig::benchmark(FieldName::Deformation);
        cfg.h = vec![1.0 / 8.0];
        cfg.t_end = 0.25;
        cfg.out = dir.path().to_path_buf();
        cfg.snapshots = vec![0.0, 0.25];
        let s = run_benchmark(&cfg).unwrap();
        let l = &s.levels[0];
        assert_eq!(l.reports.len(), 8);
        assert!(l.reports.iter().all(|r| r.violations_after == 0 && r.euler == 2));
        let text = std::fs::read_to_string(&l.step_csv).unwrap();
        assert!(text.starts_with("step,t,k,vertices"));
        assert_eq!(text.lines().count(), 9);
        assert!(dir.path().join("snap_deformation_h8_t0.obj").exists());
        assert!(dir.path().join("snap_deformation_h8_t0.25.obj").exists());
        let orders = orders_from_csv(&[s.error_csv.clone()]);
        assert!(matches!(orders, Err(RunError::Order(OrderError::TooFew))));
    }
}
