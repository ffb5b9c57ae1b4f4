use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use super::polygon::PlanarPolygon;
use crate::geometry::Point2;

/// Minimum spacing of scattered points, relative to `h_tri`.
pub const CLEARANCE: f64 = 0.5;

/// Draws allowed per requested point before giving up.
const DRAWS_PER_POINT: usize = 2000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScatterError {
    #[error("placed only {placed} of {wanted} points")]
    Exhausted { placed: usize, wanted: usize },
    #[error("polygon has no interior")]
    Degenerate,
}

/// Rejection-samples `m_star` points inside `poly`, each at least
/// `CLEARANCE * h_tri` away from the boundary and from each other.
pub fn scatter_points<R: Rng + ?Sized>(
    poly: &PlanarPolygon,
    m_star: usize,
    h_tri: f64,
    rng: &mut R,
) -> Result<Vec<Point2>, ScatterError> {
    if m_star == 0 {
        return Ok(Vec::new());
    }
    let (lo, hi) = poly.bounds();
    if !(hi.x > lo.x && hi.y > lo.y) {
        return Err(ScatterError::Degenerate);
    }
    let gap = CLEARANCE * h_tri;
    let mut out: Vec<Point2> = Vec::with_capacity(m_star);
    let mut draws = 0;
    while out.len() < m_star {
        if draws == DRAWS_PER_POINT * m_star {
            return Err(ScatterError::Exhausted { placed: out.len(), wanted: m_star });
        }
        draws += 1;
        let q = Point2::new(rng.random_range(lo.x..hi.x), rng.random_range(lo.y..hi.y));
        if poly.contains(&q) && poly.boundary_distance(&q) >= gap && out.iter().all(|p| (p - q).norm() >= gap) {
            out.push(q);
        }
    }
    Ok(out)
}

/// [`scatter_points`] driven by a fresh generator seeded with `seed`.
pub fn scatter_points_seeded(
    poly: &PlanarPolygon,
    m_star: usize,
    h_tri: f64,
    seed: u64,
) -> Result<Vec<Point2>, ScatterError> {
    scatter_points(poly, m_star, h_tri, &mut ChaCha8Rng::seed_from_u64(seed))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square() -> PlanarPolygon {
        PlanarPolygon::from_points(vec![
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(1.0, 1.0),
            Point2::new(0.0, 1.0),
        ])
    }

    #[test]
    fn zero_points() {
        assert!(scatter_points_seeded(&square(), 0, 1.0, 3).unwrap().is_empty());
    }

    #[test]
    fn clearance_holds() {
        let sq = square();
        for seed in 0..10 {
            let pts = scatter_points_seeded(&sq, 12, 0.2, seed).unwrap();
            assert_eq!(pts.len(), 12);
            for (i, p) in pts.iter().enumerate() {
                assert!(p.x > 0.0 && p.x < 1.0 && p.y > 0.0 && p.y < 1.0);
                let edge = p.x.min(p.y).min(1.0 - p.x).min(1.0 - p.y);
                assert!(edge >= 0.1);
                for q in &pts[i + 1..] {
                    assert!((p - q).norm() >= 0.1);
                }
            }
        }
    }

    #[test]
    fn deterministic() {
        let a = scatter_points_seeded(&square(), 7, 0.2, 42).unwrap();
        let b = scatter_points_seeded(&square(), 7, 0.2, 42).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn overfull_request_fails() {
        // a gap of 2.5 leaves no admissible point in the unit square
        assert!(matches!(scatter_points_seeded(&square(), 1, 5.0, 1), Err(ScatterError::Exhausted { .. })));
    }
}
