//! Slices by distance functions `ρ(x) = ||x - y||` and the growth function
//! `β(r) = ||T||(B(y, r))`.
//!
//! `β` is evaluated simplex by simplex. Polytope norms get an exact rational
//! evaluation of the covered fraction of every simplex, so `β` is piecewise
//! polynomial in `r` and its right derivative is recovered exactly from a
//! three point forward difference once two step sizes agree. The Euclidean
//! norm uses closed forms (segment/ball, triangle/disc), and `l_p` norms fall
//! back to bisection and quadrature.

use num_traits::{One, Signed, Zero};

use crate::chain::Chain;
use crate::error::{Error, Result};
use crate::normed_space::{adaptive_simpson, NormedSpace};
use crate::rational::{dot, dot_f64, euclid_f64, to_f64, Point, Q};
use crate::restrict::{bisect, golden_min, has_area, restrict_to_ball, split_polygon, Ball, ClipMode};

/// `⟨T, ρ, r⟩` together with the radius actually used.
#[derive(Clone, Debug)]
pub struct SliceResult {
    pub radius: Q,
    pub slice: Chain,
    pub radius_tol: f64,
    /// True when the requested radius sat on a vertex distance and was moved up.
    pub perturbed: bool,
}

/// Moves `r` upward by `2 tol` until no vertex distance is within `tol` of it.
pub fn perturb_radius(r: &Q, distances: &[f64], tol: f64) -> (Q, bool) {
    let mut r = r.clone();
    let mut moved = false;
    let step = Q::from_float(2.0 * tol).unwrap_or_else(Q::zero);
    for _ in 0..64 {
        let rf = to_f64(&r);
        if distances.iter().all(|d| (d - rf).abs() > tol) {
            break;
        }
        r += &step;
        moved = true;
    }
    (r, moved)
}

/// `∂(T⌊B(y,r)) − (∂T)⌊B(y,r)`.
pub fn slice(t: &Chain, y: &Point, r: &Q, mode: ClipMode, space: &NormedSpace) -> Result<SliceResult> {
    if !r.is_positive() {
        return Err(Error::InvalidParameter(format!("slice radius must be positive, got {r}")));
    }
    if y.dim() != t.ambient() {
        return Err(Error::DimensionMismatch {
            expected: t.ambient(),
            got: y.dim(),
        });
    }
    if t.dim() == 0 {
        return Err(Error::Unsupported("slicing 0-chains".into()));
    }
    let verts = t.vertices();
    let (radius, perturbed) = match mode {
        ClipMode::Exact => {
            if !space.is_exact() {
                return Err(Error::ExactModeNeedsPolytope);
            }
            for v in &verts {
                if space.norm_exact(&v.sub(y)).as_ref() == Some(r) {
                    return Err(Error::Tangency(r.to_string()));
                }
            }
            (r.clone(), false)
        }
        ClipMode::Snap { tol } => {
            let d: Vec<f64> = verts.iter().map(|v| space.dist(v, y)).collect();
            perturb_radius(r, &d, tol)
        }
    };
    let ball = Ball::new(y.clone(), radius.clone());
    let inner = restrict_to_ball(t, &ball, mode, space)?;
    let mut s = inner.inside.boundary();
    if t.dim() >= 2 {
        let bd = restrict_to_ball(&t.boundary(), &ball, mode, space)?;
        s = &s - &bd.inside;
    } else {
        let bd = t.boundary();
        let inside: Vec<_> = bd
            .terms()
            .filter(|(sx, _)| match mode {
                ClipMode::Exact => space.norm_exact(&sx.vertices()[0].sub(y)).unwrap() <= radius,
                ClipMode::Snap { .. } => space.dist(&sx.vertices()[0], y) <= to_f64(&radius),
            })
            .map(|(sx, w)| (sx.vertices().to_vec(), w))
            .collect();
        let bd_in = Chain::reduce(0, t.ambient(), inside)?;
        s = &s - &bd_in;
    }
    Ok(SliceResult {
        radius,
        slice: s,
        radius_tol: inner.radius_tol,
        perturbed,
    })
}

struct Piece {
    verts: Vec<Point>,
    vf: Vec<Vec<f64>>,
    /// `|w| · M(σ)`
    mass: f64,
    rmin: f64,
    rmax: f64,
}

/// `β(r) = ||T||(B(y, r))` with value and right-derivative queries.
pub struct GrowthFunction {
    center: Point,
    center_f: Vec<f64>,
    space: NormedSpace,
    dim: usize,
    pieces: Vec<Piece>,
    breakpoints: Vec<f64>,
    total: f64,
    support_radius: f64,
}

impl std::fmt::Debug for GrowthFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("GrowthFunction")
            .field("center", &self.center)
            .field("pieces", &self.pieces.len())
            .field("total", &self.total)
            .finish()
    }
}

impl GrowthFunction {
    pub fn new(t: &Chain, center: &Point, space: &NormedSpace) -> Result<Self> {
        if center.dim() != t.ambient() {
            return Err(Error::DimensionMismatch {
                expected: t.ambient(),
                got: center.dim(),
            });
        }
        if t.dim() > 2 {
            return Err(Error::Unsupported(format!("growth function of a {}-chain", t.dim())));
        }
        let center_f = center.to_f64();
        let mut pieces = Vec::with_capacity(t.len());
        let mut breakpoints = Vec::new();
        for (s, w) in t.terms() {
            let vf: Vec<Vec<f64>> = s.vertices().iter().map(|p| p.to_f64()).collect();
            let dists: Vec<f64> = s.vertices().iter().map(|p| space.dist(p, center)).collect();
            let rmax = dists.iter().cloned().fold(0.0, f64::max);
            let rmin = min_distance(space, &vf, &center_f);
            breakpoints.extend(dists.iter().cloned());
            breakpoints.push(rmin);
            pieces.push(Piece {
                verts: s.vertices().to_vec(),
                vf,
                mass: w.unsigned_abs() as f64 * s.mass(space)?,
                rmin,
                rmax,
            });
        }
        breakpoints.sort_by(|a, b| a.partial_cmp(b).unwrap());
        breakpoints.dedup_by(|a, b| (*a - *b).abs() <= 1e-15 * b.abs().max(1.0));
        let total = pieces.iter().map(|p| p.mass).sum();
        let support_radius = pieces.iter().map(|p| p.rmax).fold(0.0, f64::max);
        Ok(GrowthFunction {
            center: center.clone(),
            center_f,
            space: space.clone(),
            dim: t.dim(),
            pieces,
            breakpoints,
            total,
            support_radius,
        })
    }

    pub fn center(&self) -> &Point {
        &self.center
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn total_mass(&self) -> f64 {
        self.total
    }

    /// Largest distance from the center to the support.
    pub fn support_radius(&self) -> f64 {
        self.support_radius
    }

    /// Smallest distance from the center to the support.
    pub fn min_radius(&self) -> f64 {
        self.pieces.iter().map(|p| p.rmin).fold(f64::INFINITY, f64::min)
    }

    /// Vertex distances and per-simplex nearest distances, sorted.
    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn value(&self, r: f64) -> f64 {
        if r < 0.0 {
            return 0.0;
        }
        if r >= self.support_radius {
            return self.total;
        }
        self.pieces.iter().map(|p| self.piece_value(p, r)).sum()
    }

    fn piece_value(&self, p: &Piece, r: f64) -> f64 {
        if r < p.rmin {
            return 0.0;
        }
        if r >= p.rmax {
            return p.mass;
        }
        if self.space.is_exact() {
            let rq = Q::from_float(r).unwrap();
            return p.mass * to_f64(&self.fraction_exact(p, &rq));
        }
        p.mass * self.fraction_float(p, r)
    }

    /// Right derivative `β'(r+)`.
    pub fn right_derivative(&self, r: f64) -> f64 {
        if r < 0.0 || r >= self.support_radius {
            return 0.0;
        }
        self.pieces
            .iter()
            .filter(|p| r >= p.rmin - 1e-12 * p.rmin.max(1.0) && r < p.rmax)
            .map(|p| self.piece_derivative(p, r))
            .sum()
    }

    fn piece_derivative(&self, p: &Piece, r: f64) -> f64 {
        if self.space.is_exact() {
            return p.mass * exact_forward_derivative(|x| self.fraction_exact(p, x), &Q::from_float(r).unwrap());
        }
        match p.verts.len() {
            1 => 0.0,
            2 => p.mass * self.segment_fraction_derivative(&p.vf[0], &p.vf[1], r),
            _ if self.space.is_euclidean() => {
                let (_, arc, rho, area_e) = self.disc_section(&p.vf, r);
                if rho <= 0.0 || area_e <= 0.0 {
                    return 0.0;
                }
                p.mass * arc * r / rho / area_e
            }
            _ => {
                let h = 1e-4 * r.max(1e-9);
                let f0 = self.fraction_float(p, r);
                let f1 = self.fraction_float(p, r + h);
                let f2 = self.fraction_float(p, r + 2.0 * h);
                p.mass * ((-3.0 * f0 + 4.0 * f1 - f2) / (2.0 * h)).max(0.0)
            }
        }
    }

    /// Fraction of the simplex (by volume) inside `B(y, r)`, exactly.
    fn fraction_exact(&self, p: &Piece, r: &Q) -> Q {
        let halfspaces: Vec<(Vec<Q>, Q)> = self
            .space
            .facets()
            .iter()
            .map(|a| (a.clone(), r + dot(a, &self.center.0)))
            .collect();
        match p.verts.len() {
            1 => {
                if halfspaces.iter().all(|(a, b)| dot(a, &p.verts[0].0) <= *b) {
                    Q::one()
                } else {
                    Q::zero()
                }
            }
            2 => {
                let u = &p.verts[0];
                let d = p.verts[1].sub(u);
                let mut lo = Q::zero();
                let mut hi = Q::one();
                for (a, b) in &halfspaces {
                    let c0 = dot(a, &u.0) - b;
                    let c1 = dot(a, &d);
                    if c1.is_zero() {
                        if c0.is_positive() {
                            return Q::zero();
                        }
                    } else {
                        let t = -&c0 / &c1;
                        if c1.is_positive() {
                            hi = hi.min(t);
                        } else {
                            lo = lo.max(t);
                        }
                    }
                }
                if lo < hi {
                    hi - lo
                } else {
                    Q::zero()
                }
            }
            _ => {
                let mut poly = p.verts.clone();
                for (a, b) in &halfspaces {
                    poly = split_polygon(&poly, a, b).0;
                    if !has_area(&poly) {
                        return Q::zero();
                    }
                }
                let e1 = p.verts[1].sub(&p.verts[0]);
                let e2 = p.verts[2].sub(&p.verts[0]);
                let whole = wedge_dot(&e1, &e2, &e1, &e2);
                let mut acc = Q::zero();
                for i in 1..poly.len() - 1 {
                    let a = poly[i].sub(&poly[0]);
                    let b = poly[i + 1].sub(&poly[0]);
                    acc += wedge_dot(&a, &b, &e1, &e2);
                }
                (acc / whole).abs()
            }
        }
    }

    fn fraction_float(&self, p: &Piece, r: f64) -> f64 {
        match p.vf.len() {
            1 => 1.0,
            2 => match self.segment_interval(&p.vf[0], &p.vf[1], r) {
                Some((lo, hi)) => hi - lo,
                None => 0.0,
            },
            _ if self.space.is_euclidean() => {
                let (area, _, _, area_e) = self.disc_section(&p.vf, r);
                (area / area_e).clamp(0.0, 1.0)
            }
            _ => {
                let (a, b, c) = (&p.vf[0], &p.vf[1], &p.vf[2]);
                let row = |s: f64| -> f64 {
                    let start: Vec<f64> = a.iter().zip(b).map(|(x, y)| x + s * (y - x)).collect();
                    let end: Vec<f64> = start.iter().zip(a).zip(c).map(|((p, x), z)| p + (1.0 - s) * (z - x)).collect();
                    match self.segment_interval(&start, &end, r) {
                        Some((lo, hi)) => 2.0 * (1.0 - s) * (hi - lo),
                        None => 0.0,
                    }
                };
                let pieces = 8;
                (0..pieces)
                    .map(|i| {
                        let s0 = i as f64 / pieces as f64;
                        let s1 = (i + 1) as f64 / pieces as f64;
                        adaptive_simpson(&row, s0, s1, 1e-11, 30)
                    })
                    .sum::<f64>()
                    .clamp(0.0, 1.0)
            }
        }
    }

    /// Parameter interval of `u + t (v - u)`, `t ∈ [0, 1]`, inside the closed ball.
    fn segment_interval(&self, u: &[f64], v: &[f64], r: f64) -> Option<(f64, f64)> {
        let d: Vec<f64> = v.iter().zip(u).map(|(a, b)| a - b).collect();
        let w: Vec<f64> = u.iter().zip(&self.center_f).map(|(a, b)| a - b).collect();
        if self.space.is_euclidean() {
            let aa = dot_f64(&d, &d);
            let bb = dot_f64(&w, &d);
            let cc = dot_f64(&w, &w) - r * r;
            let disc = bb * bb - aa * cc;
            if disc <= 0.0 {
                return None;
            }
            let sq = disc.sqrt();
            let lo = ((-bb - sq) / aa).max(0.0);
            let hi = ((-bb + sq) / aa).min(1.0);
            return (lo < hi).then_some((lo, hi));
        }
        let f = |t: f64| -> f64 {
            let p: Vec<f64> = w.iter().zip(&d).map(|(a, b)| a + t * b).collect();
            self.space.norm_f64(&p)
        };
        let in0 = f(0.0) <= r;
        let in1 = f(1.0) <= r;
        match (in0, in1) {
            (true, true) => Some((0.0, 1.0)),
            (true, false) => Some((0.0, bisect(&f, r, 0.0, 1.0))),
            (false, true) => Some((bisect(&f, r, 1.0, 0.0), 1.0)),
            (false, false) => {
                let m = golden_min(&f, 0.0, 1.0);
                if f(m) >= r {
                    return None;
                }
                Some((bisect(&f, r, m, 0.0), bisect(&f, r, m, 1.0)))
            }
        }
    }

    /// Derivative in `r` of the inside fraction of a segment (smooth norms).
    fn segment_fraction_derivative(&self, u: &[f64], v: &[f64], r: f64) -> f64 {
        let Some((lo, hi)) = self.segment_interval(u, v, r) else {
            return 0.0;
        };
        let d: Vec<f64> = v.iter().zip(u).map(|(a, b)| a - b).collect();
        let mut total = 0.0;
        for (t, interior) in [(lo, lo > 0.0), (hi, hi < 1.0)] {
            if !interior {
                continue;
            }
            let p: Vec<f64> = u.iter().zip(&d).zip(&self.center_f).map(|((a, b), c)| a + t * b - c).collect();
            let slope = dot_f64(&self.space.norm_gradient(&p), &d).abs();
            if slope > 0.0 {
                total += 1.0 / slope;
            }
        }
        total
    }

    /// Euclidean ball against a triangle: (area inside, arc length inside, disc
    /// radius in the triangle plane, triangle area).
    fn disc_section(&self, vf: &[Vec<f64>], r: f64) -> (f64, f64, f64, f64) {
        let a = &vf[0];
        let sub = |x: &[f64], y: &[f64]| -> Vec<f64> { x.iter().zip(y).map(|(p, q)| p - q).collect() };
        let ab = sub(&vf[1], a);
        let ac = sub(&vf[2], a);
        let e1: Vec<f64> = ab.iter().map(|x| x / euclid_f64(&ab)).collect();
        let proj = dot_f64(&ac, &e1);
        let perp: Vec<f64> = ac.iter().zip(&e1).map(|(x, e)| x - proj * e).collect();
        let e2: Vec<f64> = perp.iter().map(|x| x / euclid_f64(&perp)).collect();
        let to2 = |p: &[f64]| -> [f64; 2] {
            let q = sub(p, a);
            [dot_f64(&q, &e1), dot_f64(&q, &e2)]
        };
        let yc = sub(&self.center_f, a);
        let c = [dot_f64(&yc, &e1), dot_f64(&yc, &e2)];
        let h2 = (dot_f64(&yc, &yc) - c[0] * c[0] - c[1] * c[1]).max(0.0);
        let tri = [to2(&vf[0]), to2(&vf[1]), to2(&vf[2])];
        let area_e = 0.5 * cross2(sub2(tri[1], tri[0]), sub2(tri[2], tri[0])).abs();
        let rho2 = r * r - h2;
        if rho2 <= 0.0 {
            return (0.0, 0.0, 0.0, area_e);
        }
        let rho = rho2.sqrt();
        let (area, arc) = disc_triangle(c, rho, tri);
        (area, arc, rho, area_e)
    }
}

fn sub2(a: [f64; 2], b: [f64; 2]) -> [f64; 2] {
    [a[0] - b[0], a[1] - b[1]]
}

fn cross2(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

/// Area and boundary arc length of `disc(c, rho) ∩ triangle`, by summing the
/// signed contributions of the fans `(c, p, q)` over the triangle edges.
fn disc_triangle(c: [f64; 2], rho: f64, tri: [[f64; 2]; 3]) -> (f64, f64) {
    let orient = cross2(sub2(tri[1], tri[0]), sub2(tri[2], tri[0])).signum();
    let mut area = 0.0;
    let mut arc = 0.0;
    for i in 0..3 {
        let p = sub2(tri[i], c);
        let q = sub2(tri[(i + 1) % 3], c);
        let d = sub2(q, p);
        let aa = d[0] * d[0] + d[1] * d[1];
        let bb = p[0] * d[0] + p[1] * d[1];
        let cc = p[0] * p[0] + p[1] * p[1] - rho * rho;
        let mut ts = vec![0.0];
        let disc = bb * bb - aa * cc;
        if disc > 0.0 {
            let sq = disc.sqrt();
            for t in [(-bb - sq) / aa, (-bb + sq) / aa] {
                if t > 0.0 && t < 1.0 {
                    ts.push(t);
                }
            }
        }
        ts.push(1.0);
        for w in ts.windows(2) {
            let x = [p[0] + w[0] * d[0], p[1] + w[0] * d[1]];
            let z = [p[0] + w[1] * d[0], p[1] + w[1] * d[1]];
            let tm = 0.5 * (w[0] + w[1]);
            let m = [p[0] + tm * d[0], p[1] + tm * d[1]];
            if m[0] * m[0] + m[1] * m[1] <= rho * rho {
                area += 0.5 * cross2(x, z);
            } else {
                let theta = cross2(x, z).atan2(x[0] * z[0] + x[1] * z[1]);
                area += 0.5 * rho * rho * theta;
                arc += rho * theta;
            }
        }
    }
    (orient * area, orient * arc)
}

/// `⟨a∧b, c∧d⟩ = (a·c)(b·d) − (a·d)(b·c)`.
fn wedge_dot(a: &[Q], b: &[Q], c: &[Q], d: &[Q]) -> Q {
    dot(a, c) * dot(b, d) - dot(a, d) * dot(b, c)
}

/// Right derivative of a piecewise quadratic function given exactly: the
/// forward three point formula is exact on a single piece, so the first step
/// size whose estimate agrees with half of it is accepted.
fn exact_forward_derivative(f: impl Fn(&Q) -> Q, r: &Q) -> f64 {
    let f0 = f(r);
    let est = |h: &Q| -> Q {
        let two = Q::from_integer(2.into());
        let f1 = f(&(r + h));
        let f2 = f(&(r + h * &two));
        (Q::from_integer((-3).into()) * &f0 + Q::from_integer(4.into()) * f1 - f2) / (two * h)
    };
    let scale = if r.is_zero() { Q::one() } else { r.abs() };
    let mut h = scale * Q::new(1.into(), num_bigint::BigInt::one() << 12);
    let mut prev = est(&h);
    for _ in 0..48 {
        h /= Q::from_integer(2.into());
        let cur = est(&h);
        if cur == prev {
            return to_f64(&cur).max(0.0);
        }
        prev = cur;
    }
    to_f64(&prev).max(0.0)
}

/// Distance from `y` to the simplex with the given vertices.
pub(crate) fn min_distance(space: &NormedSpace, vf: &[Vec<f64>], y: &[f64]) -> f64 {
    let dist = |p: &[f64]| -> f64 {
        let d: Vec<f64> = p.iter().zip(y).map(|(a, b)| a - b).collect();
        space.norm_f64(&d)
    };
    let along = |u: &[f64], v: &[f64]| -> f64 {
        let f = |t: f64| -> f64 {
            let p: Vec<f64> = u.iter().zip(v).map(|(a, b)| a + t * (b - a)).collect();
            dist(&p)
        };
        f(golden_min(&f, 0.0, 1.0))
    };
    match vf.len() {
        1 => dist(&vf[0]),
        2 => along(&vf[0], &vf[1]),
        _ => {
            let (a, b, c) = (&vf[0], &vf[1], &vf[2]);
            let row = |s: f64| -> f64 {
                let u: Vec<f64> = a.iter().zip(b).map(|(x, z)| x + s * (z - x)).collect();
                let v: Vec<f64> = a.iter().zip(c).map(|(x, z)| x + s * (z - x)).collect();
                along(&u, &v)
            };
            let s = golden_min(&row, 0.0, 1.0);
            // golden section on a convex function can still overshoot by a hair
            row(s).min(along(a, b)).min(along(b, c)).min(along(a, c)) * (1.0 - 1e-12)
        }
    }
}

/// Largest `r` with `β(r) >= F r^k`; 0 when no positive radius qualifies.
pub fn critical_radius(g: &GrowthFunction, f: f64, k: usize) -> f64 {
    assert!(f > 0.0, "critical_radius needs F > 0");
    let kk = k.max(1) as i32;
    let total = g.total_mass();
    if total <= 0.0 {
        return 0.0;
    }
    let cap = (total / f).powf(1.0 / kk as f64);
    if cap >= g.support_radius() {
        return cap;
    }
    let gap = |r: f64| g.value(r) - f * r.powi(kk);
    let mut grid: Vec<f64> = g.breakpoints().iter().cloned().filter(|&b| b > 0.0 && b < cap).collect();
    let samples = 2048;
    grid.extend((1..=samples).map(|i| cap * i as f64 / samples as f64));
    grid.sort_by(|a, b| a.partial_cmp(b).unwrap());
    grid.dedup();
    // scan downward for the last grid point where the inequality holds
    let mut above = cap;
    for &r in grid.iter().rev() {
        if r >= cap {
            continue;
        }
        if gap(r) >= 0.0 {
            let mut lo = r;
            let mut hi = above;
            for _ in 0..200 {
                let m = 0.5 * (lo + hi);
                if m <= lo || m >= hi {
                    break;
                }
                if gap(m) >= 0.0 {
                    lo = m;
                } else {
                    hi = m;
                }
            }
            return lo;
        }
        above = r;
    }
    0.0
}

/// One row of the slice-mass comparison.
#[derive(Clone, Debug)]
pub struct SliceCheck {
    pub radius: f64,
    pub slice_mass: f64,
    pub beta: f64,
    pub beta_prime: f64,
}

impl SliceCheck {
    pub fn violation(&self) -> f64 {
        (self.slice_mass - self.beta_prime).max(0.0)
    }
}

#[derive(Clone, Debug)]
pub struct SliceReport {
    pub rows: Vec<SliceCheck>,
    pub max_violation: f64,
}

/// Compares `M(⟨T, ρ, r⟩)` with `β'(r+)` at the given radii; `Lip(ρ) = 1`.
pub fn slice_mass_vs_derivative(
    t: &Chain,
    y: &Point,
    radii: &[Q],
    mode: ClipMode,
    space: &NormedSpace,
) -> Result<SliceReport> {
    if !t.is_cycle() {
        return Err(Error::NotACycle);
    }
    let g = GrowthFunction::new(t, y, space)?;
    let mut rows = Vec::with_capacity(radii.len());
    for r in radii {
        let s = slice(t, y, r, mode, space)?;
        let rf = to_f64(&s.radius);
        rows.push(SliceCheck {
            radius: rf,
            slice_mass: s.slice.mass(space)?,
            beta: g.value(rf),
            beta_prime: g.right_derivative(rf),
        });
    }
    let max_violation = rows.iter().map(|r| r.violation()).fold(0.0, f64::max);
    Ok(SliceReport { rows, max_violation })
}
