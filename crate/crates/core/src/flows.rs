//! Benchmark velocity fields and the RK4 discrete flow map.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::geometry::Point3;

/// Velocity fields with an analytic sup-norm bound.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Field {
    /// Swirl about the vertical axis through `(0.5, 0.5)`, reversed at `period / 2`.
    VorticalShear {
        period: f64,
    },
    /// Product-of-sines deformation, reversed at `period / 2`.
    Deformation {
        period: f64,
    },
    Uniform {
        velocity: [f64; 3],
    },
    /// Rigid rotation about the z-axis with angular speed `omega`.
    Rotation {
        omega: f64,
    },
}

impl Field {
    pub fn vortical_shear(period: f64) -> Self {
        Field::VorticalShear { period }
    }

    pub fn deformation(period: f64) -> Self {
        Field::Deformation { period }
    }

    pub fn velocity(&self, x: &Point3, t: f64) -> Point3 {
        match *self {
            Field::VorticalShear { period } => vortical_shear(x, t, period),
            Field::Deformation { period } => deformation(x, t, period),
            Field::Uniform { velocity } => Point3::from(velocity),
            Field::Rotation { omega } => Point3::new(-omega * x.y, omega * x.x, 0.0),
        }
    }

    /// Bound on `|u|_inf` over the unit cube, used to pick the time step.
    pub fn sup_norm(&self) -> f64 {
        match *self {
            Field::VorticalShear { .. } | Field::Deformation { .. } => 2.0,
            Field::Uniform { velocity } => velocity.iter().fold(0.0f64, |m, v| m.max(v.abs())),
            // over the unit cube
            Field::Rotation { omega } => omega.abs() * 2f64.sqrt(),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Field::VorticalShear { .. } => "vortical_shear",
            Field::Deformation { .. } => "deformation",
            Field::Uniform { .. } => "uniform",
            Field::Rotation { .. } => "rotation",
        }
    }
}

pub fn vortical_shear(x: &Point3, t: f64, period: f64) -> Point3 {
    let c = (PI * t / period).cos();
    let (sx, sy) = ((PI * x.x).sin(), (PI * x.y).sin());
    let r = ((x.x - 0.5).powi(2) + (x.y - 0.5).powi(2)).sqrt();
    Point3::new(
        2.0 * sx * sx * (2.0 * PI * x.y).sin() * c,
        -(2.0 * PI * x.x).sin() * sy * sy * c,
        (1.0 - 2.0 * r).powi(2) * c,
    )
}

pub fn deformation(x: &Point3, t: f64, period: f64) -> Point3 {
    let c = (PI * t / period).cos();
    let (sx, sy, sz) = ((PI * x.x).sin(), (PI * x.y).sin(), (PI * x.z).sin());
    let (s2x, s2y, s2z) = ((2.0 * PI * x.x).sin(), (2.0 * PI * x.y).sin(), (2.0 * PI * x.z).sin());
    Point3::new(2.0 * sx * sx * s2y * s2z * c, -sy * sy * s2z * s2x * c, -sz * sz * s2x * s2y * c)
}

/// One classical fourth-order Runge-Kutta step of `dx/dt = u(x, t)`.
pub fn rk4_step(field: &Field, x: &Point3, t: f64, k: f64) -> Point3 {
    let k1 = field.velocity(x, t);
    let k2 = field.velocity(&(x + k1 * (0.5 * k)), t + 0.5 * k);
    let k3 = field.velocity(&(x + k2 * (0.5 * k)), t + 0.5 * k);
    let k4 = field.velocity(&(x + k3 * k), t + k);
    x + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (k / 6.0)
}

/// Approximate flow map over `[t, t + k]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscreteFlowMap {
    pub field: Field,
}

impl DiscreteFlowMap {
    pub fn new(field: Field) -> Self {
        DiscreteFlowMap { field }
    }

    pub fn map(&self, x: &Point3, t: f64, k: f64) -> Point3 {
        rk4_step(&self.field, x, t, k)
    }

    /// Uniform step for Courant number `cr` on grid size `h`.
    pub fn time_step(&self, cr: f64, h: f64) -> f64 {
        cr * h / self.field.sup_norm()
    }
}

/// Step sizes covering `[0, t_end]` with uniform `k`, the last one shortened to land on `t_end`.
pub fn time_grid(t_end: f64, k: f64) -> Vec<(f64, f64)> {
    assert!(k > 0.0, "time step must be positive");
    let n = (t_end / k - 1e-9).ceil().max(1.0) as usize;
    (0..n)
        .map(|i| {
            let t = i as f64 * k;
            (t, if i + 1 == n { t_end - t } else { k })
        })
        .collect()
}
