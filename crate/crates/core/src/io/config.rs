use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use serde::Serialize;
use thiserror::Error;

use crate::flows::Field;
use crate::geometry::Point3;
use crate::ltr::LtrConfig;
use crate::mesh::RegularityParams;
use crate::stepper::StepConfig;
use crate::vrem::{LineSearchParams, VremConfig};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: expected key = value")]
    Syntax { line: usize },
    #[error("unknown key {0:?}")]
    UnknownKey(String),
    #[error("bad value {value:?} for {key}: {msg}")]
    Value { key: String, value: String, msg: String },
}

/// Rule deriving the maximal edge length from the grid size.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum HlRule {
    /// `h_L = 0.5 h`
    Linear,
    /// `h_L = 6 h^1.5`
    Power,
}

impl HlRule {
    pub fn h_l(&self, h: f64) -> f64 {
        match self {
            HlRule::Linear => 0.5 * h,
            HlRule::Power => 6.0 * h.powf(1.5),
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.trim().to_ascii_lowercase().replace(' ', "").as_str() {
            "0.5h" | "linear" | "half" => Some(HlRule::Linear),
            "6h^1.5" | "6h^{3/2}" | "6h^(3/2)" | "power" => Some(HlRule::Power),
            _ => None,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            HlRule::Linear => "0.5h",
            HlRule::Power => "6h^1.5",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum FieldName {
    VorticalShear,
    Deformation,
}

impl FieldName {
    pub fn parse(s: &str) -> Option<Self> {
        match s.trim() {
            "vortical_shear" | "shear" | "vortical" => Some(FieldName::VorticalShear),
            "deformation" | "deform" => Some(FieldName::Deformation),
            _ => None,
        }
    }

    pub fn field(&self, period: f64) -> Field {
        match self {
            FieldName::VorticalShear => Field::vortical_shear(period),
            FieldName::Deformation => Field::deformation(period),
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            FieldName::VorticalShear => "vortical_shear",
            FieldName::Deformation => "deformation",
        }
    }

    /// Initial sphere centre of the benchmark.
    pub fn default_center(&self) -> [f64; 3] {
        match self {
            FieldName::VorticalShear => [0.5, 0.75, 0.25],
            FieldName::Deformation => [0.35, 0.35, 0.35],
        }
    }
}

/// Everything a benchmark run depends on, one key per parameter.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub field: FieldName,
    pub period: f64,
    /// Duration of the run; defaults to the period.
    pub t_end: f64,
    pub center: [f64; 3],
    pub radius: f64,
    /// Initial mesh read from OBJ instead of the generated sphere.
    pub mesh: Option<PathBuf>,
    /// Grid sizes of a convergence study, coarse to fine.
    pub h: Vec<f64>,
    pub hl_rule: HlRule,
    /// Initial marker spacing relative to `h`.
    pub spacing: f64,
    pub cr: f64,
    pub r_tiny: f64,
    pub theta: f64,
    pub mu: usize,
    pub nu: usize,
    pub eta: usize,
    pub c: f64,
    pub rho: f64,
    pub max_backtracks: usize,
    pub max_sweeps: usize,
    pub seed: u64,
    pub out: PathBuf,
    /// Times at which OBJ snapshots are written.
    pub snapshots: Vec<f64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            field: FieldName::VorticalShear,
            period: 3.0,
            t_end: 3.0,
            center: FieldName::VorticalShear.default_center(),
            radius: 0.15,
            mesh: None,
            h: vec![1.0 / 32.0],
            hl_rule: HlRule::Linear,
            spacing: 0.25,
            cr: 0.5,
            r_tiny: 0.1,
            theta: PI / 10.0,
            mu: 4,
            nu: 10,
            eta: 3,
            c: 1e-4,
            rho: 0.8,
            max_backtracks: 200,
            max_sweeps: 10,
            seed: 0,
            out: PathBuf::from("out"),
            snapshots: Vec::new(),
        }
    }
}

/// Parses numbers like `0.25`, `1/32`, `pi/10` or `2pi`.
pub fn parse_number(s: &str) -> Option<f64> {
    let s = s.trim();
    if let Some((a, b)) = s.split_once('/') {
        let (a, b) = (parse_number(a)?, parse_number(b)?);
        return (b != 0.0).then(|| a / b);
    }
    if let Some(head) = s.strip_suffix("pi") {
        let k = if head.is_empty() { 1.0 } else { head.trim_end_matches('*').parse().ok()? };
        return Some(k * PI);
    }
    s.parse().ok()
}

fn list(s: &str) -> Option<Vec<f64>> {
    s.split(',').filter(|x| !x.trim().is_empty()).map(parse_number).collect()
}

impl RunConfig {
    pub fn benchmark(field: FieldName) -> Self {
        RunConfig { field, center: field.default_center(), ..Default::default() }
    }

    /// Sets one key; `field` also resets the centre to the benchmark default.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let bad = |msg: &str| ConfigError::Value { key: key.into(), value: value.into(), msg: msg.into() };
        let num = || parse_number(value).ok_or_else(|| bad("not a number"));
        let int = || value.trim().parse::<usize>().map_err(|e| bad(&e.to_string()));
        match key.trim() {
            "field" => {
                self.field = FieldName::parse(value).ok_or_else(|| bad("unknown field"))?;
                self.center = self.field.default_center();
            }
            "period" | "T" => {
                let p = num()?;
                if self.t_end == self.period {
                    self.t_end = p;
                }
                self.period = p;
            }
            "t_end" => self.t_end = num()?,
            "center" => {
                let v = list(value).filter(|v| v.len() == 3).ok_or_else(|| bad("need three numbers"))?;
                self.center = [v[0], v[1], v[2]];
            }
            "radius" | "R" => self.radius = num()?,
            "mesh" => self.mesh = Some(PathBuf::from(value.trim())),
            "h" => {
                let v = list(value).filter(|v| !v.is_empty()).ok_or_else(|| bad("need grid sizes"))?;
                self.h = v;
            }
            "hL_rule" | "hl_rule" | "h_L" => {
                self.hl_rule = HlRule::parse(value).ok_or_else(|| bad("use 0.5h or 6h^1.5"))?
            }
            "spacing" => self.spacing = num()?,
            "cr" | "Cr" => self.cr = num()?,
            "r_tiny" => self.r_tiny = num()?,
            "theta" => self.theta = num()?,
            "mu" => self.mu = int()?,
            "nu" => self.nu = int()?,
            "eta" => self.eta = int()?,
            "c" => self.c = num()?,
            "rho" => self.rho = num()?,
            "max_backtracks" => self.max_backtracks = int()?,
            "max_sweeps" => self.max_sweeps = int()?,
            "seed" => self.seed = value.trim().parse().map_err(|e: std::num::ParseIntError| bad(&e.to_string()))?,
            "out" => self.out = PathBuf::from(value.trim()),
            "snapshots" => self.snapshots = list(value).ok_or_else(|| bad("need times"))?,
            k => return Err(ConfigError::UnknownKey(k.into())),
        }
        Ok(())
    }

    /// Applies `key = value` lines; `#` starts a comment.
    pub fn apply_text(&mut self, text: &str) -> Result<(), ConfigError> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or(ConfigError::Syntax { line: i + 1 })?;
            self.set(k.trim(), v.trim())?;
        }
        Ok(())
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        let mut c = RunConfig::default();
        c.apply_text(&std::fs::read_to_string(path)?)?;
        Ok(c)
    }

    pub fn center_point(&self) -> Point3 {
        Point3::from(self.center)
    }

    pub fn regularity(&self, h: f64) -> Result<RegularityParams, ConfigError> {
        RegularityParams::new(self.r_tiny, self.hl_rule.h_l(h), self.theta).map_err(|e| ConfigError::Value {
            key: "regularity".into(),
            value: format!("r_tiny={} h_L={} theta={}", self.r_tiny, self.hl_rule.h_l(h), self.theta),
            msg: e.to_string(),
        })
    }

    pub fn step_config(&self, h: f64) -> Result<StepConfig, ConfigError> {
        let line_search = LineSearchParams { c: self.c, rho: self.rho, max_backtracks: self.max_backtracks };
        let mut s = StepConfig::new(self.regularity(h)?);
        s.vrem = VremConfig { mu: self.mu, nu: self.nu, line_search, ..VremConfig::default() };
        s.ltr = LtrConfig { mu: self.mu, nu: self.nu, eta: self.eta, line_search, ..LtrConfig::default() };
        s.seed = self.seed;
        s.max_sweeps = self.max_sweeps;
        Ok(s)
    }

    /// Writes the configuration back as `key = value` text.
    pub fn to_text(&self) -> String {
        let join = |v: &[f64]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ");
        let mut s = String::new();
        let mut kv = |k: &str, v: String| s.push_str(&format!("{k} = {v}\n"));
        kv("field", self.field.label().into());
        kv("period", self.period.to_string());
        kv("t_end", self.t_end.to_string());
        kv("center", join(&self.center));
        kv("radius", self.radius.to_string());
        if let Some(m) = &self.mesh {
            kv("mesh", m.display().to_string());
        }
        kv("h", join(&self.h));
        kv("hL_rule", self.hl_rule.label().into());
        kv("spacing", self.spacing.to_string());
        kv("cr", self.cr.to_string());
        kv("r_tiny", self.r_tiny.to_string());
        kv("theta", self.theta.to_string());
        kv("mu", self.mu.to_string());
        kv("nu", self.nu.to_string());
        kv("eta", self.eta.to_string());
        kv("c", self.c.to_string());
        kv("rho", self.rho.to_string());
        kv("max_backtracks", self.max_backtracks.to_string());
        kv("max_sweeps", self.max_sweeps.to_string());
        kv("seed", self.seed.to_string());
        kv("out", self.out.display().to_string());
        kv("snapshots", join(&self.snapshots));
        s
    }
}
