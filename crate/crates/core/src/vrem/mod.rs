//! Vertex relocation by minimising a spring energy on a patch with fixed boundary.
//!
//! Free vertices move along the net spring force, are pulled back onto the
//! surface through local projections frozen at the start of a round, and the
//! step length is chosen by Armijo backtracking.

mod energy;
mod plane;
mod projection;
mod relocate;

pub use energy::{resting_length, spring_force, EnergyError, RestLengthRule, SpringSystem};
pub use plane::{fit_plane, Axis, FittedPlane, PlaneError, PlaneFrame};
pub use projection::{LocalProjection, ProjectionError};
#[allow(unused_imports)]
pub(crate) use relocate::{largest_angle_vertex, relocate_patch};
pub use relocate::{
    vrem_iterate, vrem_run, LineSearchParams, Relocator, StepOutcome, VremConfig, VremError, VremOutcome, VremState,
};
