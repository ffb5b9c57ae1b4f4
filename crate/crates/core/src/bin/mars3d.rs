use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use mars_core::io::{orders_from_csv, read_obj, run_benchmark, write_obj, RunConfig, RunError};
use mars_core::mesh::{classify, validate};
use mars_core::metrics::quality_stats;
use mars_core::stepper::remesh;

#[derive(Parser)]
#[command(name = "mars3d", version, about = "Interface tracking of closed triangle meshes")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Clone, Default)]
struct Common {
    /// Flat `key = value` configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// vortical_shear or deformation.
    #[arg(long)]
    field: Option<String>,
    /// Grid size, or a comma-separated list such as `1/32,1/64`.
    #[arg(long)]
    h: Option<String>,
    /// 0.5h or 6h^1.5.
    #[arg(long = "hL-rule")]
    hl_rule: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory (run) or file (remesh).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Further overrides as `key=value`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a benchmark, one level per grid size.
    Run(Common),
    /// Repair a static OBJ mesh until it is regular.
    Remesh {
        input: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Convergence orders from error CSVs.
    Report { csv: Vec<PathBuf> },
    /// Check an OBJ mesh.
    Validate { input: PathBuf },
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error(transparent)]
    Run(#[from] RunError),
    #[error("bad override {0:?}; expected key=value")]
    Override(String),
    #[error("invalid mesh: {0}")]
    Invalid(String),
}

impl CliError {
    fn kind(&self) -> &'static str {
        match self {
            CliError::Run(e) => e.kind(),
            CliError::Override(_) => "config",
            CliError::Invalid(_) => "invalid_mesh",
        }
    }
}

fn config(c: &Common) -> Result<RunConfig, CliError> {
    let mut cfg = match &c.config {
        Some(p) => RunConfig::from_file(p).map_err(RunError::from)?,
        None => RunConfig::default(),
    };
    let mut set = |k: &str, v: &str| cfg.set(k, v).map_err(|e| CliError::Run(e.into()));
    if let Some(f) = &c.field {
        set("field", f)?;
    }
    if let Some(h) = &c.h {
        set("h", h)?;
    }
    if let Some(r) = &c.hl_rule {
        set("hL_rule", r)?;
    }
    if let Some(s) = c.seed {
        set("seed", &s.to_string())?;
    }
    if let Some(o) = &c.out {
        set("out", &o.display().to_string())?;
    }
    for kv in &c.set {
        let (k, v) = kv.split_once('=').ok_or_else(|| CliError::Override(kv.clone()))?;
        set(k, v)?;
    }
    Ok(cfg)
}

fn run(cli: Cli) -> Result<serde_json::Value, CliError> {
    match cli.cmd {
        Cmd::Run(c) => {
            let cfg = config(&c)?;
            let s = run_benchmark(&cfg)?;
            let levels: Vec<_> = s
                .levels
                .iter()
                .map(|l| {
                    json!({
                        "h": l.h,
                        "h_l": l.h_l,
                        "steps": l.reports.len(),
                        "markers": l.error.markers,
                        "e1": l.error.e1,
                        "eg": l.error.eg,
                        "count_shares": l.ledger.count_shares(),
                        "theta_shares": l.ledger.theta_shares(),
                    })
                })
                .collect();
            Ok(json!({ "status": "ok", "field": cfg.field.label(), "levels": levels, "orders": s.orders }))
        }
        Cmd::Remesh { input, common } => {
            let cfg = config(&common)?;
            let mut mesh = read_obj(&input).map_err(RunError::from)?;
            let h = cfg.h[0];
            let report = remesh(&mut mesh, &cfg.step_config(h).map_err(RunError::from)?).map_err(RunError::from)?;
            let out = common.out.unwrap_or_else(|| input.with_extension("remeshed.obj"));
            write_obj(&mesh, &out).map_err(RunError::from)?;
            Ok(json!({
                "status": "ok",
                "out": out,
                "vertices": report.vertices,
                "triangles": report.triangles,
                "min_angle": report.min_angle,
                "tiers": report.tiers,
            }))
        }
        Cmd::Report { csv } => {
            let orders = orders_from_csv(&csv)?;
            Ok(json!({ "status": "ok", "orders": orders }))
        }
        Cmd::Validate { input } => {
            let mesh = read_obj(&input).map_err(|e| CliError::Invalid(e.to_string()))?;
            let cl = classify(&mesh);
            let v = validate(&mesh);
            let q = quality_stats(&mesh, 10);
            Ok(json!({
                "status": if v.is_empty() { "ok" } else { "invalid" },
                "vertices": mesh.num_vertices(),
                "edges": mesh.num_edges(),
                "triangles": mesh.num_triangles(),
                "euler": mesh.euler_characteristic(),
                "closed": cl.boundary_edges.is_empty(),
                "violations": v.len(),
                "min_angle": q.min_angle,
                "min_edge": q.min_edge,
                "max_edge": q.max_edge,
            }))
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(v) => {
            println!("{v}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            println!("{}", json!({ "status": "error", "kind": e.kind(), "message": e.to_string() }));
            ExitCode::FAILURE
        }
    }
}
