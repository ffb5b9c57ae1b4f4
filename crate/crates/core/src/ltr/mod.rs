//! Local triangulation regeneration.
//!
//! A BFS patch around the offending triangle is projected onto its fitted
//! plane, re-triangulated by constrained Delaunay over the projected boundary
//! plus randomly scattered points, lifted back onto the patch and polished by
//! vertex relocation. The best regular candidate replaces the patch.

mod delaunay;
mod lift;
mod polygon;
mod regen;
mod scatter;

pub use delaunay::{delaunay_2d, delaunay_triangulation, DelaunayError};
pub use lift::{lift_to_surface, LiftError, PlanarTriangulation, SurfaceLift};
pub use polygon::{estimate_points, polygon_area, PlanarPolygon};
pub use regen::{ltr_run, LtrConfig, LtrOutcome, RoundFailure, TrialRecord, TrialResult};
pub use scatter::{scatter_points, scatter_points_seeded, ScatterError, CLEARANCE};
