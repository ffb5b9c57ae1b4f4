//! Lagrangian tracking of closed triangulated interfaces.
//!
//! Markers are advected by a discrete flow map and the mesh is kept
//! `(r_tiny, h_L, theta)`-regular after every step by a cascade of local
//! adjustments: elementary operations ([`ema`]), vertex relocation by
//! spring-energy minimisation ([`vrem`]) and local Delaunay regeneration
//! ([`ltr`]).

pub mod ema;
pub mod flows;
pub mod geometry;
pub mod io;
pub mod ltr;
pub mod mesh;
pub mod metrics;
pub mod stepper;
pub mod vrem;

pub use geometry::Point3;
pub use mesh::{Edge, RegularityParams, TriMesh};
pub use stepper::{simulate, step, StepConfig, StepError, StepReport};
