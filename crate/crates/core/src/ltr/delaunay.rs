use rustc_hash::FxHashMap;
use thiserror::Error;

use crate::geometry::{incircle, orient2d, Point2};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DelaunayError {
    #[error("need at least 3 points, got {0}")]
    TooFewPoints(usize),
    #[error("all points are collinear")]
    Collinear,
    #[error("points {0} and {1} coincide")]
    Duplicate(usize, usize),
    #[error("boundary edge ({0}, {1}) could not be recovered")]
    MissingBoundaryEdge(usize, usize),
    #[error("clipped triangulation does not close along the boundary")]
    BoundaryMismatch,
}

/// Counter-clockwise triangles over an indexed point set.
#[derive(Clone, Debug)]
struct Triangulation<'a> {
    points: &'a [Point2],
    tris: Vec<[usize; 3]>,
    alive: Vec<bool>,
    /// Directed edge to the triangle holding it.
    half: FxHashMap<(usize, usize), usize>,
}

impl<'a> Triangulation<'a> {
    fn new(points: &'a [Point2]) -> Self {
        Triangulation { points, tris: Vec::new(), alive: Vec::new(), half: FxHashMap::default() }
    }

    fn add(&mut self, t: [usize; 3]) -> usize {
        debug_assert!(orient2d(&self.points[t[0]], &self.points[t[1]], &self.points[t[2]]) > 0.0);
        let id = self.tris.len();
        for k in 0..3 {
            self.half.insert((t[k], t[(k + 1) % 3]), id);
        }
        self.tris.push(t);
        self.alive.push(true);
        id
    }

    fn remove(&mut self, id: usize) {
        let t = self.tris[id];
        for k in 0..3 {
            self.half.remove(&(t[k], t[(k + 1) % 3]));
        }
        self.alive[id] = false;
    }

    fn opposite(&self, a: usize, b: usize) -> Option<usize> {
        let &t = self.half.get(&(a, b))?;
        let tri = self.tris[t];
        Some(tri.into_iter().find(|&v| v != a && v != b).unwrap())
    }

    fn has_edge(&self, a: usize, b: usize) -> bool {
        self.half.contains_key(&(a, b)) || self.half.contains_key(&(b, a))
    }

    /// Quad `a, d, b, c` around the edge `a -> b`, if interior.
    fn quad(&self, a: usize, b: usize) -> Option<(usize, usize)> {
        Some((self.opposite(a, b)?, self.opposite(b, a)?))
    }

    fn strictly_convex(&self, a: usize, b: usize, c: usize, d: usize) -> bool {
        let p = self.points;
        orient2d(&p[a], &p[d], &p[c]) > 0.0 && orient2d(&p[d], &p[b], &p[c]) > 0.0
    }

    /// Replaces diagonal `ab` by `cd`; the caller checks convexity.
    fn flip(&mut self, a: usize, b: usize) -> (usize, usize) {
        let (c, d) = self.quad(a, b).expect("interior edge");
        let t1 = self.half[&(a, b)];
        let t2 = self.half[&(b, a)];
        self.remove(t1);
        self.remove(t2);
        self.add([a, d, c]);
        self.add([d, b, c]);
        (c, d)
    }

    /// Whether interior edge `ab` should be replaced by the other diagonal.
    fn illegal(&self, a: usize, b: usize) -> bool {
        let Some((c, d)) = self.quad(a, b) else { return false };
        let p = self.points;
        let s = incircle(&p[a], &p[b], &p[c], &p[d]);
        if s > 0.0 {
            return true;
        }
        // cocircular: keep the diagonal through the lexicographically smallest corner
        if s == 0.0 && self.strictly_convex(a, b, c, d) {
            let lex = |i: usize| (p[i].x, p[i].y);
            let lowest = [a, b, c, d].into_iter().min_by(|&i, &j| lex(i).partial_cmp(&lex(j)).unwrap()).unwrap();
            return lowest == c || lowest == d;
        }
        false
    }

    /// Lawson flips until every unconstrained edge is locally Delaunay.
    fn legalize(&mut self, constrained: &rustc_hash::FxHashSet<(usize, usize)>) {
        let mut stack: Vec<(usize, usize)> = self.half.keys().copied().filter(|&(a, b)| a < b).collect();
        stack.sort_unstable();
        let mut budget = 64 * (self.points.len() + 4).pow(2);
        while let Some((a, b)) = stack.pop() {
            if budget == 0 {
                break;
            }
            budget -= 1;
            if constrained.contains(&(a.min(b), a.max(b))) || !self.has_edge(a, b) {
                continue;
            }
            let (a, b) = if self.half.contains_key(&(a, b)) { (a, b) } else { (b, a) };
            if self.illegal(a, b) {
                let (c, d) = self.flip(a, b);
                for (x, y) in [(a, d), (d, b), (b, c), (c, a)] {
                    stack.push((x.min(y), x.max(y)));
                }
            }
        }
    }

    fn live(&self) -> Vec<[usize; 3]> {
        self.tris.iter().zip(&self.alive).filter(|(_, &a)| a).map(|(t, _)| *t).collect()
    }
}

fn lex_order(points: &[Point2]) -> Result<Vec<usize>, DelaunayError> {
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&i, &j| {
        (points[i].x, points[i].y).partial_cmp(&(points[j].x, points[j].y)).expect("finite coordinates").then(i.cmp(&j))
    });
    for w in order.windows(2) {
        if points[w[0]] == points[w[1]] {
            return Err(DelaunayError::Duplicate(w[0].min(w[1]), w[0].max(w[1])));
        }
    }
    Ok(order)
}

/// Lexicographic sweep: every new point lies outside the current hull and is
/// joined to the hull edges it sees.
fn sweep(points: &[Point2]) -> Result<Triangulation<'_>, DelaunayError> {
    let n = points.len();
    if n < 3 {
        return Err(DelaunayError::TooFewPoints(n));
    }
    let order = lex_order(points)?;
    let k = (2..n)
        .find(|&k| orient2d(&points[order[0]], &points[order[1]], &points[order[k]]) != 0.0)
        .ok_or(DelaunayError::Collinear)?;

    let mut tr = Triangulation::new(points);
    let apex = order[k];
    let up = orient2d(&points[order[0]], &points[order[1]], &points[apex]) > 0.0;
    for w in order[..k].windows(2) {
        if up {
            tr.add([w[0], w[1], apex]);
        } else {
            tr.add([w[1], w[0], apex]);
        }
    }
    // counter-clockwise hull cycle
    let mut hull: Vec<usize> = if up {
        let mut h = order[..k].to_vec();
        h.push(apex);
        h
    } else {
        let mut h = vec![apex];
        h.extend(order[..k].iter().rev());
        h
    };

    for &p in &order[k + 1..] {
        let m = hull.len();
        let visible: Vec<bool> =
            (0..m).map(|i| orient2d(&points[hull[i]], &points[hull[(i + 1) % m]], &points[p]) < 0.0).collect();
        // visible edges form one run; find where it starts
        let start = (0..m).find(|&i| visible[i] && !visible[(i + m - 1) % m]).expect("point outside hull");
        let mut i = start;
        let mut run = Vec::new();
        while visible[i] {
            tr.add([hull[i], p, hull[(i + 1) % m]]);
            run.push(i);
            i = (i + 1) % m;
        }
        // drop the hull corners strictly inside the visible run and insert p
        let first = start;
        let last = (start + run.len()) % m;
        let mut next = Vec::with_capacity(m + 1);
        let mut j = last;
        loop {
            next.push(hull[j]);
            if j == first {
                break;
            }
            j = (j + 1) % m;
        }
        next.push(p);
        hull = next;
    }
    Ok(tr)
}

/// Delaunay triangulation of a planar point set, counter-clockwise, with
/// cocircular ties broken toward the lexicographically smallest corner.
pub fn delaunay_triangulation(points: &[Point2]) -> Result<Vec<[usize; 3]>, DelaunayError> {
    let mut tr = sweep(points)?;
    tr.legalize(&Default::default());
    Ok(tr.live())
}

fn crosses(p: &[Point2], u: usize, v: usize, a: usize, b: usize) -> bool {
    if a == u || a == v || b == u || b == v {
        return false;
    }
    let o1 = orient2d(&p[u], &p[v], &p[a]);
    let o2 = orient2d(&p[u], &p[v], &p[b]);
    let o3 = orient2d(&p[a], &p[b], &p[u]);
    let o4 = orient2d(&p[a], &p[b], &p[v]);
    o1 * o2 < 0.0 && o3 * o4 < 0.0
}

/// Forces segment `uv` into the triangulation by flipping crossing edges.
fn recover_edge(tr: &mut Triangulation<'_>, u: usize, v: usize) -> Result<(), DelaunayError> {
    let p = tr.points;
    let mut queue: std::collections::VecDeque<(usize, usize)> =
        tr.half.keys().copied().filter(|&(a, b)| a < b && crosses(p, u, v, a, b)).collect();
    let mut sorted: Vec<_> = queue.drain(..).collect();
    sorted.sort_unstable();
    queue.extend(sorted);
    let mut budget = 16 * (p.len() + 4).pow(2);
    while let Some((a, b)) = queue.pop_front() {
        if budget == 0 {
            return Err(DelaunayError::MissingBoundaryEdge(u, v));
        }
        budget -= 1;
        if !tr.has_edge(a, b) {
            continue;
        }
        let (a, b) = if tr.half.contains_key(&(a, b)) { (a, b) } else { (b, a) };
        let Some((c, d)) = tr.quad(a, b) else {
            return Err(DelaunayError::MissingBoundaryEdge(u, v));
        };
        if tr.strictly_convex(a, b, c, d) {
            tr.flip(a, b);
            if crosses(p, u, v, c, d) {
                queue.push_back((c.min(d), c.max(d)));
            }
        } else {
            queue.push_back((a.min(b), a.max(b)));
        }
    }
    if tr.has_edge(u, v) {
        Ok(())
    } else {
        Err(DelaunayError::MissingBoundaryEdge(u, v))
    }
}

/// Constrained Delaunay triangulation of `points` restricted to the simple
/// counter-clockwise polygon whose corners are `points[boundary[i]]`.
///
/// Every boundary edge is present and the boundary of the returned triangle
/// set is exactly that cycle.
pub fn delaunay_2d(points: &[Point2], boundary: &[usize]) -> Result<Vec<[usize; 3]>, DelaunayError> {
    let mut tr = sweep(points)?;
    tr.legalize(&Default::default());
    let m = boundary.len();
    let mut constrained = rustc_hash::FxHashSet::default();
    for i in 0..m {
        let (u, v) = (boundary[i], boundary[(i + 1) % m]);
        if !tr.has_edge(u, v) {
            recover_edge(&mut tr, u, v)?;
        }
        constrained.insert((u.min(v), u.max(v)));
    }
    tr.legalize(&constrained);
    for &(u, v) in &constrained {
        if !tr.has_edge(u, v) {
            return Err(DelaunayError::MissingBoundaryEdge(u, v));
        }
    }

    let poly: Vec<Point2> = boundary.iter().map(|&i| points[i]).collect();
    let kept: Vec<[usize; 3]> = tr
        .live()
        .into_iter()
        .filter(|t| {
            let c = (points[t[0]] + points[t[1]] + points[t[2]]) / 3.0;
            crate::geometry::point_in_polygon(&c, &poly)
        })
        .collect();

    // the boundary of the kept set must be the input cycle, traversed forward
    let mut directed: rustc_hash::FxHashSet<(usize, usize)> = Default::default();
    for t in &kept {
        for k in 0..3 {
            directed.insert((t[k], t[(k + 1) % 3]));
        }
    }
    let mut open = 0;
    for &(a, b) in &directed {
        if !directed.contains(&(b, a)) {
            open += 1;
        }
    }
    let forward = (0..m).all(|i| {
        let (u, v) = (boundary[i], boundary[(i + 1) % m]);
        directed.contains(&(u, v)) && !directed.contains(&(v, u))
    });
    if !forward || open != m {
        return Err(DelaunayError::BoundaryMismatch);
    }
    Ok(kept)
}
