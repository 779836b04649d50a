//! Restriction of chains to closed norm balls, `T⌊B(y, r)`.
//!
//! Both halves `T⌊B` and `T⌊Bᶜ` are produced together and share every clip
//! vertex, so `T = T⌊B + T⌊Bᶜ` holds exactly as currents.
//!
//! * Exact mode (polytope norms): the ball is an intersection of half-spaces
//!   and every crossing is the solution of a linear equation.
//! * Snap mode (Euclidean / l_p): crossings on edges are found numerically and
//!   snapped to dyadic rationals *along the edge*, so snapped vertices stay on
//!   the original simplex. Inside a triangle the sphere is replaced by chords
//!   between consecutive edge crossings.
//!
//! Crossings on an edge are always computed on the canonically ordered edge so
//! that neighbouring simplices produce identical rational vertices.

use std::collections::HashMap;

use num_traits::{One, Signed, Zero};

use crate::chain::{Chain, Simplex};
use crate::error::{Error, Result};
use crate::normed_space::NormedSpace;
use crate::rational::{dot, dyadic, euclid_f64, rank, to_f64, Point, Q};

/// How sphere crossings are computed.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ClipMode {
    Exact,
    Snap { tol: f64 },
}

impl ClipMode {
    /// Exact for polytope norms, snap with `tol` otherwise.
    pub fn for_space(space: &NormedSpace, tol: f64) -> Self {
        if space.is_exact() {
            ClipMode::Exact
        } else {
            ClipMode::Snap { tol }
        }
    }

    pub fn tolerance(&self) -> f64 {
        match self {
            ClipMode::Exact => 0.0,
            ClipMode::Snap { tol } => *tol,
        }
    }
}

/// Closed ball `{x : ||x - center|| <= radius}`.
#[derive(Clone, Debug, PartialEq)]
pub struct Ball {
    pub center: Point,
    pub radius: Q,
}

impl Ball {
    pub fn new(center: Point, radius: Q) -> Self {
        Ball { center, radius }
    }
}

#[derive(Clone, Debug)]
pub struct Restriction {
    pub inside: Chain,
    pub outside: Chain,
    /// Crossing vertices lie within this distance of the sphere (0 in exact mode).
    pub radius_tol: f64,
}

pub fn restrict_to_ball(t: &Chain, ball: &Ball, mode: ClipMode, space: &NormedSpace) -> Result<Restriction> {
    if ball.center.dim() != t.ambient() || space.dimension() != t.ambient() {
        return Err(Error::DimensionMismatch {
            expected: t.ambient(),
            got: ball.center.dim(),
        });
    }
    if ball.radius.is_negative() {
        return Err(Error::InvalidParameter("negative radius".into()));
    }
    match mode {
        ClipMode::Exact if !space.is_exact() => return Err(Error::ExactModeNeedsPolytope),
        ClipMode::Snap { tol } if !(tol > 0.0) => return Err(Error::InvalidTolerance(tol)),
        _ => {}
    }
    if t.dim() > 2 {
        return Err(Error::Unsupported(format!("restricting {}-chains to balls", t.dim())));
    }
    let mut clipper = Clipper::new(space, ball, mode);
    let mut inside = Chain::zero(t.dim(), t.ambient());
    let mut outside = Chain::zero(t.dim(), t.ambient());
    for (s, w) in t.terms() {
        let verts = s.vertices();
        let labels: Vec<bool> = verts.iter().map(|v| clipper.contains(v)).collect();
        if labels.iter().all(|&b| b) {
            inside.add_term(s.clone(), w);
            continue;
        }
        match s.dim() {
            0 => outside.add_term(s.clone(), w),
            1 => clipper.clip_segment(s, w, &mut inside, &mut outside),
            _ => match mode {
                ClipMode::Exact => clipper.clip_triangle_exact(s, w, &mut inside, &mut outside),
                ClipMode::Snap { .. } => clipper.clip_triangle_snap(s, &labels, w, &mut inside, &mut outside),
            },
        }
    }
    Ok(Restriction {
        inside,
        outside,
        radius_tol: mode.tolerance(),
    })
}

struct Clipper<'a> {
    space: &'a NormedSpace,
    center: Point,
    center_f: Vec<f64>,
    radius: Q,
    radius_f: f64,
    mode: ClipMode,
    /// `a · x <= b` for each facet of the ball (exact mode)
    halfspaces: Vec<(Vec<Q>, Q)>,
    edges: HashMap<(Point, Point), Option<(Q, Q)>>,
}

impl<'a> Clipper<'a> {
    fn new(space: &'a NormedSpace, ball: &Ball, mode: ClipMode) -> Self {
        let halfspaces = if mode == ClipMode::Exact {
            space
                .facets()
                .iter()
                .map(|a| (a.clone(), &ball.radius + dot(a, &ball.center.0)))
                .collect()
        } else {
            Vec::new()
        };
        Clipper {
            space,
            center: ball.center.clone(),
            center_f: ball.center.to_f64(),
            radius: ball.radius.clone(),
            radius_f: to_f64(&ball.radius),
            mode,
            halfspaces,
            edges: HashMap::new(),
        }
    }

    fn contains(&self, p: &Point) -> bool {
        match self.mode {
            ClipMode::Exact => self.space.norm_exact(&p.sub(&self.center)).unwrap() <= self.radius,
            ClipMode::Snap { .. } => self.dist_f64(&p.to_f64()) <= self.radius_f,
        }
    }

    fn dist_f64(&self, p: &[f64]) -> f64 {
        let d: Vec<f64> = p.iter().zip(&self.center_f).map(|(a, b)| a - b).collect();
        self.space.norm_f64(&d)
    }

    /// Parameter interval `[lo, hi]` (with `lo < hi`) of the edge `u -> v` lying in
    /// the ball, where `u < v` in canonical order.
    fn canonical_interval(&mut self, u: &Point, v: &Point) -> Option<(Q, Q)> {
        let key = (u.clone(), v.clone());
        if let Some(hit) = self.edges.get(&key) {
            return hit.clone();
        }
        let iv = match self.mode {
            ClipMode::Exact => self.interval_exact(u, v),
            ClipMode::Snap { tol } => self.interval_snap(u, v, tol),
        };
        self.edges.insert(key, iv.clone());
        iv
    }

    fn interval_exact(&self, u: &Point, v: &Point) -> Option<(Q, Q)> {
        let d = v.sub(u);
        let mut lo = Q::zero();
        let mut hi = Q::one();
        for (a, b) in &self.halfspaces {
            let c0 = dot(a, &u.0) - b;
            let c1 = dot(a, &d);
            // c0 + t c1 <= 0
            if c1.is_zero() {
                if c0.is_positive() {
                    return None;
                }
            } else {
                let t = -&c0 / &c1;
                if c1.is_positive() {
                    if t < hi {
                        hi = t;
                    }
                } else if t > lo {
                    lo = t;
                }
            }
        }
        (lo < hi).then_some((lo, hi))
    }

    fn interval_snap(&self, u: &Point, v: &Point, tol: f64) -> Option<(Q, Q)> {
        let uf = u.to_f64();
        let vf = v.to_f64();
        let d: Vec<f64> = vf.iter().zip(&uf).map(|(a, b)| a - b).collect();
        let f = |t: f64| -> f64 {
            let p: Vec<f64> = uf.iter().zip(&d).map(|(a, b)| a + t * b).collect();
            self.dist_f64(&p)
        };
        let r = self.radius_f;
        let in0 = self.contains(u);
        let in1 = self.contains(v);
        let (lo, hi) = match (in0, in1) {
            (true, true) => return Some((Q::zero(), Q::one())),
            (true, false) => (0.0, bisect(&f, r, 0.0, 1.0)),
            (false, true) => (bisect(&f, r, 1.0, 0.0), 1.0),
            (false, false) => {
                let tmin = if self.space.is_euclidean() {
                    let w: Vec<f64> = uf.iter().zip(&self.center_f).map(|(a, b)| a - b).collect();
                    let dd: f64 = d.iter().map(|x| x * x).sum();
                    (-w.iter().zip(&d).map(|(a, b)| a * b).sum::<f64>() / dd).clamp(0.0, 1.0)
                } else {
                    golden_min(&f, 0.0, 1.0)
                };
                if f(tmin) >= r {
                    return None;
                }
                (bisect(&f, r, tmin, 0.0), bisect(&f, r, tmin, 1.0))
            }
        };
        let len = euclid_f64(&d);
        let bits = ((2.0 * len / tol).log2().ceil().max(1.0)) as u32;
        let clamp = |x: Q| {
            if x.is_negative() {
                Q::zero()
            } else if x > Q::one() {
                Q::one()
            } else {
                x
            }
        };
        let lo = if in0 { Q::zero() } else { clamp(dyadic(lo, bits)) };
        let hi = if in1 { Q::one() } else { clamp(dyadic(hi, bits)) };
        (lo < hi).then_some((lo, hi))
    }

    /// Inside interval of the directed edge `a -> b` plus the canonical endpoints.
    fn directed_interval(&mut self, a: &Point, b: &Point) -> (Option<(Q, Q)>, Point, Point, bool) {
        let flipped = a > b;
        let (u, v) = if flipped { (b.clone(), a.clone()) } else { (a.clone(), b.clone()) };
        let iv = self.canonical_interval(&u, &v);
        (iv, u, v, flipped)
    }

    fn clip_segment(&mut self, s: &Simplex, w: i64, inside: &mut Chain, outside: &mut Chain) {
        let u = &s.vertices()[0];
        let v = &s.vertices()[1];
        match self.canonical_interval(u, v) {
            None => outside.add_term(s.clone(), w),
            Some((lo, hi)) => {
                let p = u.lerp(v, &lo);
                let q = u.lerp(v, &hi);
                outside.push_unchecked(vec![u.clone(), p.clone()], w);
                inside.push_unchecked(vec![p, q.clone()], w);
                outside.push_unchecked(vec![q, v.clone()], w);
            }
        }
    }

    /// Boundary walk of the triangle with edge crossings inserted; each entry is
    /// a point and whether it belongs to the (closed) inside.
    fn boundary_walk(&mut self, verts: &[Point], labels: &[bool]) -> Vec<(Point, bool)> {
        let mut walk: Vec<(Point, bool)> = Vec::new();
        let k = verts.len();
        for i in 0..k {
            let a = &verts[i];
            let b = &verts[(i + 1) % k];
            walk.push((a.clone(), labels[i]));
            let (iv, u, v, flipped) = self.directed_interval(a, b);
            if let Some((lo, hi)) = iv {
                let mut cuts = Vec::new();
                if !lo.is_zero() {
                    cuts.push(u.lerp(&v, &lo));
                }
                if hi != Q::one() {
                    cuts.push(u.lerp(&v, &hi));
                }
                if flipped {
                    cuts.reverse();
                }
                walk.extend(cuts.into_iter().map(|p| (p, true)));
            }
        }
        // merge cyclic duplicates, keeping the inside label if any copy has it
        let mut merged: Vec<(Point, bool)> = Vec::new();
        for (p, l) in walk {
            match merged.last_mut() {
                Some((q, lq)) if *q == p => *lq |= l,
                _ => merged.push((p, l)),
            }
        }
        if merged.len() > 1 && merged[0].0 == merged[merged.len() - 1].0 {
            let (_, l) = merged.pop().unwrap();
            merged[0].1 |= l;
        }
        merged
    }

    fn clip_triangle_snap(&mut self, s: &Simplex, labels: &[bool], w: i64, inside: &mut Chain, outside: &mut Chain) {
        let walk = self.boundary_walk(s.vertices(), labels);
        let core: Vec<Point> = walk.iter().filter(|(_, l)| *l).map(|(p, _)| p.clone()).collect();
        if !has_area(&core) {
            outside.add_term(s.clone(), w);
            return;
        }
        emit_polygon(&core, w, inside);
        // each maximal run of outside points, closed off by a chord
        let n = walk.len();
        let start = walk.iter().position(|(_, l)| *l).unwrap();
        let mut i = 0;
        while i < n {
            let idx = (start + i) % n;
            if walk[idx].1 {
                i += 1;
                continue;
            }
            let mut piece = vec![walk[(idx + n - 1) % n].0.clone()];
            while !walk[(start + i) % n].1 {
                piece.push(walk[(start + i) % n].0.clone());
                i += 1;
            }
            piece.push(walk[(start + i) % n].0.clone());
            emit_polygon(&piece, w, outside);
        }
    }

    fn clip_triangle_exact(&mut self, s: &Simplex, w: i64, inside: &mut Chain, outside: &mut Chain) {
        let mut rest: Vec<Point> = s.vertices().to_vec();
        let mut pieces: Vec<Vec<Point>> = Vec::new();
        for (a, b) in &self.halfspaces {
            let (keep, cut) = split_polygon(&rest, a, b);
            if has_area(&cut) {
                pieces.push(cut);
            }
            rest = keep;
            if !has_area(&rest) {
                break;
            }
        }
        if !has_area(&rest) {
            outside.add_term(s.clone(), w);
            return;
        }
        let mut all: Vec<Point> = rest.clone();
        for p in &pieces {
            all.extend(p.iter().cloned());
        }
        all.sort();
        all.dedup();
        emit_polygon(&conform(&rest, &all), w, inside);
        for p in &pieces {
            emit_polygon(&conform(p, &all), w, outside);
        }
    }
}

/// Solves `f(t) = r` by bisection between `t_in` (f <= r) and `t_out` (f > r).
pub(crate) fn bisect(f: &dyn Fn(f64) -> f64, r: f64, mut t_in: f64, mut t_out: f64) -> f64 {
    for _ in 0..200 {
        let m = 0.5 * (t_in + t_out);
        if m == t_in || m == t_out {
            break;
        }
        if f(m) <= r {
            t_in = m;
        } else {
            t_out = m;
        }
    }
    0.5 * (t_in + t_out)
}

/// Minimizer of a convex function on `[a, b]`.
pub(crate) fn golden_min(f: &dyn Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..120 {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    let m = 0.5 * (a + b);
    [0.0, m, 1.0]
        .into_iter()
        .min_by(|x, y| f(*x).partial_cmp(&f(*y)).unwrap())
        .unwrap()
}

pub(crate) fn has_area(poly: &[Point]) -> bool {
    if poly.len() < 3 {
        return false;
    }
    let diffs: Vec<Vec<Q>> = poly[1..].iter().map(|p| p.sub(&poly[0])).collect();
    rank(&diffs) >= 2
}

/// Splits a convex polygon by the hyperplane `a · x = b` into the `<=` and `>=` parts.
pub(crate) fn split_polygon(poly: &[Point], a: &[Q], b: &Q) -> (Vec<Point>, Vec<Point>) {
    let mut below = Vec::new();
    let mut above = Vec::new();
    let n = poly.len();
    let vals: Vec<Q> = poly.iter().map(|p| dot(a, &p.0) - b).collect();
    for i in 0..n {
        let j = (i + 1) % n;
        let (p, sp, sq) = (&poly[i], &vals[i], &vals[j]);
        if !sp.is_positive() {
            below.push(p.clone());
        }
        if !sp.is_negative() {
            above.push(p.clone());
        }
        if (sp.is_negative() && sq.is_positive()) || (sp.is_positive() && sq.is_negative()) {
            let t = sp / (sp - sq);
            let x = p.lerp(&poly[j], &t);
            below.push(x.clone());
            above.push(x);
        }
    }
    (below, above)
}

/// Inserts every point of `all` lying in the relative interior of an edge of `poly`.
fn conform(poly: &[Point], all: &[Point]) -> Vec<Point> {
    let n = poly.len();
    let mut out = Vec::new();
    for i in 0..n {
        let p = &poly[i];
        let q = &poly[(i + 1) % n];
        out.push(p.clone());
        let d = q.sub(p);
        let Some(axis) = d.iter().position(|x| !x.is_zero()) else {
            continue;
        };
        let mut on: Vec<(Q, Point)> = Vec::new();
        for x in all {
            let t = (&x.0[axis] - &p.0[axis]) / &d[axis];
            if t.is_positive() && t < Q::one() && p.lerp(q, &t) == *x {
                on.push((t, x.clone()));
            }
        }
        on.sort();
        out.extend(on.into_iter().map(|(_, x)| x));
    }
    out.dedup();
    if out.len() > 1 && out[0] == out[out.len() - 1] {
        out.pop();
    }
    out
}

/// Adds a convex polygon (cyclically ordered, orientation inherited from the
/// parent simplex) as triangles: itself if it is a triangle, else a fan from
/// its vertex centroid, which keeps every boundary edge intact.
fn emit_polygon(poly: &[Point], w: i64, into: &mut Chain) {
    let mut pts: Vec<Point> = poly.to_vec();
    pts.dedup();
    if pts.len() > 1 && pts[0] == pts[pts.len() - 1] {
        pts.pop();
    }
    if !has_area(&pts) {
        return;
    }
    if pts.len() == 3 {
        into.push_unchecked(pts, w);
        return;
    }
    let c = Point::centroid(&pts);
    for i in 0..pts.len() {
        into.push_unchecked(vec![c.clone(), pts[i].clone(), pts[(i + 1) % pts.len()].clone()], w);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::normed_space::NormSpec;
    use crate::rational::{q, qr};

    fn p(c: &[i64]) -> Point {
        Point::from_ints(c)
    }

    fn euclid2() -> NormedSpace {
        NormedSpace::new(NormSpec::euclidean(2)).unwrap()
    }

    #[test]
    fn segment_crossing_at_one() {
        let space = euclid2();
        let seg = Chain::simplex(vec![p(&[0, 0]), p(&[3, 0])], 1).unwrap();
        let ball = Ball::new(p(&[0, 0]), q(1));
        let r = restrict_to_ball(&seg, &ball, ClipMode::Snap { tol: 1e-12 }, &space).unwrap();
        assert_eq!(r.inside.len(), 1);
        let m = r.inside.mass(&space).unwrap();
        assert!((m - 1.0).abs() <= 1e-12, "{m}");
        assert!(seg.current_eq(&(&r.inside + &r.outside)));
    }

    #[test]
    fn fully_inside_and_disjoint() {
        let space = euclid2();
        let sq = Chain::polygon(&[p(&[1, 1]), p(&[-1, 1]), p(&[-1, -1]), p(&[1, -1])]).unwrap();
        let big = restrict_to_ball(&sq, &Ball::new(p(&[0, 0]), q(10)), ClipMode::Snap { tol: 1e-12 }, &space).unwrap();
        assert_eq!(big.inside, sq);
        assert!(big.outside.is_zero());
        let small = restrict_to_ball(&sq, &Ball::new(p(&[0, 0]), qr(1, 2)), ClipMode::Snap { tol: 1e-12 }, &space).unwrap();
        assert!(small.inside.is_zero());
        assert_eq!(small.outside, sq);
    }

    #[test]
    fn mode_errors() {
        let space = euclid2();
        let seg = Chain::simplex(vec![p(&[0, 0]), p(&[3, 0])], 1).unwrap();
        let ball = Ball::new(p(&[0, 0]), q(1));
        assert!(matches!(
            restrict_to_ball(&seg, &ball, ClipMode::Exact, &space),
            Err(Error::ExactModeNeedsPolytope)
        ));
        assert!(matches!(
            restrict_to_ball(&seg, &ball, ClipMode::Snap { tol: 0.0 }, &space),
            Err(Error::InvalidTolerance(_))
        ));
    }

    #[test]
    fn exact_triangle_clip_in_linf() {
        let space = NormedSpace::new(NormSpec::linf(2)).unwrap();
        let tri = Chain::simplex(vec![p(&[-3, -2]), p(&[4, -1]), p(&[0, 5])], 1).unwrap();
        let ball = Ball::new(p(&[0, 0]), q(1));
        let r = restrict_to_ball(&tri, &ball, ClipMode::Exact, &space).unwrap();
        // the unit square lies inside the triangle, so T⌊B is the square itself
        let area = r.inside.mass(&euclid2()).unwrap();
        assert!((area - 4.0).abs() < 1e-12, "{area} {}", r.inside);
        assert!(tri.current_eq(&(&r.inside + &r.outside)));
        assert!(r.inside.boundary().boundary().is_zero());
    }

    #[test]
    fn tangent_side_is_inside() {
        // the side x = 1 lies on the l_inf unit sphere
        let space = NormedSpace::new(NormSpec::linf(2)).unwrap();
        let seg = Chain::simplex(vec![p(&[1, -1]), p(&[1, 1])], 1).unwrap();
        let r = restrict_to_ball(&seg, &Ball::new(p(&[0, 0]), q(1)), ClipMode::Exact, &space).unwrap();
        assert_eq!(r.inside, seg);
    }

    #[test]
    fn neighbouring_triangles_share_crossings() {
        let space = euclid2();
        let quad = Chain::reduce(
            2,
            2,
            [
                (vec![p(&[0, 0]), p(&[4, 0]), p(&[4, 4])], 1),
                (vec![p(&[0, 0]), p(&[4, 4]), p(&[0, 4])], 1),
            ],
        )
        .unwrap();
        let r = restrict_to_ball(&quad, &Ball::new(p(&[0, 0]), q(3)), ClipMode::Snap { tol: 1e-12 }, &space).unwrap();
        // interior edges cancel at the simplex level: the slice is a single arc chain
        let slice = r.inside.boundary();
        let pieces_on_boundary = (&r.inside.boundary() + &r.outside.boundary()).current_eq(&quad.boundary());
        assert!(pieces_on_boundary);
        assert_eq!(slice.boundary().len(), 0);
        assert!(quad.current_eq(&(&r.inside + &r.outside)));
    }
}
