//! The ambient normed space `(R^n, ||.||)` and Busemann volume densities.
//!
//! Mass everywhere in this crate is Hausdorff (Busemann) mass: a k-simplex
//! `sigma` with Euclidean volume `vol_E(sigma)` lying in the k-plane `P` has
//! mass `vol_E(sigma) * omega_k / vol_E(B ∩ P)` where `B` is the unit ball.
//!
//! Polytope norms are the exact mode. Their unit ball is stored by facets
//! `{x : <a_j, x> <= 1}` so that norms, sphere crossings and ball sections
//! are all rational.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt;
use std::sync::Mutex;

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::rational::{det, dot, dot_f64, euclid_f64, gram_det, q, rank, rref, solve, to_f64, Point, Q};

/// Volume of the Euclidean unit ball in dimension `k`.
pub fn unit_ball_volume(k: usize) -> f64 {
    let k = k as f64;
    PI.powf(k / 2.0) / statrs::function::gamma::gamma(k / 2.0 + 1.0)
}

#[derive(Clone, Debug, PartialEq)]
pub enum NormKind {
    Euclidean,
    /// `l_p` norm with rational exponent `p >= 1`.
    Lp(Q),
    /// Norm whose unit ball is the convex hull of a centrally symmetric vertex set.
    Polytope(Vec<Point>),
}

/// Description of the ambient norm.
#[derive(Clone, Debug, PartialEq)]
pub struct NormSpec {
    pub dimension: usize,
    pub kind: NormKind,
}

impl NormSpec {
    pub fn euclidean(dimension: usize) -> Self {
        NormSpec {
            dimension,
            kind: NormKind::Euclidean,
        }
    }

    pub fn lp(dimension: usize, p: Q) -> Self {
        NormSpec {
            dimension,
            kind: NormKind::Lp(p),
        }
    }

    pub fn polytope(dimension: usize, vertices: Vec<Point>) -> Self {
        NormSpec {
            dimension,
            kind: NormKind::Polytope(vertices),
        }
    }

    /// The `l_inf` norm: unit ball is the cube `[-1, 1]^n`.
    pub fn linf(dimension: usize) -> Self {
        let mut vertices = Vec::new();
        for mask in 0..(1u32 << dimension) {
            let coords: Vec<i64> = (0..dimension)
                .map(|i| if mask & (1 << i) != 0 { 1 } else { -1 })
                .collect();
            vertices.push(Point::from_ints(&coords));
        }
        Self::polytope(dimension, vertices)
    }

    /// The `l_1` norm as a polytope: unit ball is the cross-polytope.
    pub fn l1_polytope(dimension: usize) -> Self {
        let mut vertices = Vec::new();
        for i in 0..dimension {
            for s in [1, -1] {
                let mut c = vec![0; dimension];
                c[i] = s;
                vertices.push(Point::from_ints(&c));
            }
        }
        Self::polytope(dimension, vertices)
    }

    pub fn is_exact(&self) -> bool {
        matches!(self.kind, NormKind::Polytope(_))
    }
}

impl fmt::Display for NormSpec {
    /// Header form used by chain files: `euclidean`, `lp <p>`, `polytope <v1> <v2> ...`
    /// with each vertex written as comma-separated rationals.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            NormKind::Euclidean => write!(f, "euclidean"),
            NormKind::Lp(p) => write!(f, "lp {p}"),
            NormKind::Polytope(vs) => {
                write!(f, "polytope")?;
                for v in vs {
                    let parts: Vec<String> = v.0.iter().map(|c| c.to_string()).collect();
                    write!(f, " {}", parts.join(","))?;
                }
                Ok(())
            }
        }
    }
}

/// k linearly independent vectors spanning a plane through the origin.
#[derive(Clone, Debug, PartialEq)]
pub struct PlaneBasis {
    vectors: Vec<Vec<Q>>,
}

impl PlaneBasis {
    pub fn new(vectors: Vec<Vec<Q>>) -> Result<Self> {
        if vectors.is_empty() || rank(&vectors) != vectors.len() {
            return Err(Error::DegeneratePlane);
        }
        Ok(PlaneBasis { vectors })
    }

    pub fn dim(&self) -> usize {
        self.vectors.len()
    }

    pub fn vectors(&self) -> &[Vec<Q>] {
        &self.vectors
    }

    /// Canonical key of the spanned subspace (reduced row echelon form).
    fn key(&self) -> Vec<Vec<Q>> {
        rref(&self.vectors).0
    }

    fn orthonormal_f64(&self) -> Vec<Vec<f64>> {
        let mut out: Vec<Vec<f64>> = Vec::new();
        for v in &self.vectors {
            let mut w: Vec<f64> = v.iter().map(to_f64).collect();
            for _ in 0..2 {
                for e in &out {
                    let c = dot_f64(&w, e);
                    for (wi, ei) in w.iter_mut().zip(e) {
                        *wi -= c * ei;
                    }
                }
            }
            let n = euclid_f64(&w);
            out.push(w.into_iter().map(|x| x / n).collect());
        }
        out
    }
}

/// A validated normed space with precomputed facets and a density cache.
pub struct NormedSpace {
    spec: NormSpec,
    facets: Vec<Vec<Q>>,
    facets_f64: Vec<Vec<f64>>,
    p: f64,
    densities: Mutex<HashMap<Vec<Vec<Q>>, f64>>,
}

impl Clone for NormedSpace {
    fn clone(&self) -> Self {
        NormedSpace {
            spec: self.spec.clone(),
            facets: self.facets.clone(),
            facets_f64: self.facets_f64.clone(),
            p: self.p,
            densities: Mutex::new(HashMap::new()),
        }
    }
}

impl fmt::Debug for NormedSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("NormedSpace").field("spec", &self.spec).finish()
    }
}

impl NormedSpace {
    pub fn new(spec: NormSpec) -> Result<Self> {
        let n = spec.dimension;
        if n == 0 {
            return Err(Error::InvalidNorm("dimension must be positive".into()));
        }
        let mut p = 2.0;
        let mut facets = Vec::new();
        match &spec.kind {
            NormKind::Euclidean => {}
            NormKind::Lp(exp) => {
                if *exp < q(1) {
                    return Err(Error::InvalidNorm(format!("lp exponent {exp} < 1")));
                }
                p = to_f64(exp);
            }
            NormKind::Polytope(vs) => {
                facets = polytope_facets(n, vs)?;
            }
        }
        let facets_f64 = facets
            .iter()
            .map(|a| a.iter().map(to_f64).collect())
            .collect();
        Ok(NormedSpace {
            spec,
            facets,
            facets_f64,
            p,
            densities: Mutex::new(HashMap::new()),
        })
    }

    pub fn spec(&self) -> &NormSpec {
        &self.spec
    }

    pub fn dimension(&self) -> usize {
        self.spec.dimension
    }

    pub fn is_exact(&self) -> bool {
        self.spec.is_exact()
    }

    pub fn is_euclidean(&self) -> bool {
        matches!(self.spec.kind, NormKind::Euclidean)
    }

    /// Facet normals `a_j` of the unit ball `{x : <a_j, x> <= 1}` (polytope kind only).
    pub fn facets(&self) -> &[Vec<Q>] {
        &self.facets
    }

    /// `||v||` in floating point.
    pub fn norm_eval(&self, v: &[Q]) -> Result<f64> {
        if v.len() != self.dimension() {
            return Err(Error::DimensionMismatch {
                expected: self.dimension(),
                got: v.len(),
            });
        }
        match &self.spec.kind {
            NormKind::Polytope(_) => Ok(to_f64(&self.norm_exact_unchecked(v))),
            _ => Ok(self.norm_f64(&v.iter().map(to_f64).collect::<Vec<_>>())),
        }
    }

    /// Exact norm for the polytope kind, `None` otherwise.
    pub fn norm_exact(&self, v: &[Q]) -> Option<Q> {
        if self.is_exact() && v.len() == self.dimension() {
            Some(self.norm_exact_unchecked(v))
        } else {
            None
        }
    }

    fn norm_exact_unchecked(&self, v: &[Q]) -> Q {
        self.facets
            .iter()
            .map(|a| dot(a, v))
            .max()
            .unwrap_or_else(Q::zero)
    }

    pub fn norm_f64(&self, v: &[f64]) -> f64 {
        match &self.spec.kind {
            NormKind::Euclidean => euclid_f64(v),
            NormKind::Lp(_) => {
                let p = self.p;
                let m = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
                if m == 0.0 {
                    return 0.0;
                }
                m * v.iter().map(|x| (x.abs() / m).powf(p)).sum::<f64>().powf(1.0 / p)
            }
            NormKind::Polytope(_) => self
                .facets_f64
                .iter()
                .map(|a| dot_f64(a, v))
                .fold(0.0, f64::max),
        }
    }

    pub fn dist(&self, a: &Point, b: &Point) -> f64 {
        match self.norm_exact(&a.sub(b)) {
            Some(d) => to_f64(&d),
            None => {
                let d: Vec<f64> = a.0.iter().zip(&b.0).map(|(x, y)| to_f64(x) - to_f64(y)).collect();
                self.norm_f64(&d)
            }
        }
    }

    /// A subgradient of the norm at `v != 0`; its dual norm is 1.
    pub fn norm_gradient(&self, v: &[f64]) -> Vec<f64> {
        match &self.spec.kind {
            NormKind::Euclidean => {
                let n = euclid_f64(v);
                v.iter().map(|x| x / n).collect()
            }
            NormKind::Lp(_) => {
                let n = self.norm_f64(v);
                let p = self.p;
                v.iter()
                    .map(|x| x.signum() * (x.abs() / n).powf(p - 1.0))
                    .collect()
            }
            NormKind::Polytope(_) => {
                let mut best = 0;
                let mut val = f64::NEG_INFINITY;
                for (j, a) in self.facets_f64.iter().enumerate() {
                    let d = dot_f64(a, v);
                    if d > val {
                        val = d;
                        best = j;
                    }
                }
                self.facets_f64[best].clone()
            }
        }
    }

    /// Multiplier converting Euclidean k-volume inside `plane` into Hausdorff k-volume
    /// of the norm: `omega_k / vol_E(B ∩ plane)`.
    pub fn busemann_density(&self, plane: &PlaneBasis) -> Result<f64> {
        let k = plane.dim();
        if k > self.dimension() {
            return Err(Error::InvalidParameter(format!(
                "plane dimension {k} exceeds ambient dimension {}",
                self.dimension()
            )));
        }
        if plane.vectors.iter().any(|v| v.len() != self.dimension()) {
            return Err(Error::DimensionMismatch {
                expected: self.dimension(),
                got: plane.vectors[0].len(),
            });
        }
        if self.is_euclidean() {
            return Ok(1.0);
        }
        if k == 1 {
            let v = &plane.vectors[0];
            let e = to_f64(&gram_det(plane.vectors())).sqrt();
            return Ok(self.norm_eval(v)? / e);
        }
        let key = plane.key();
        if let Some(d) = self.densities.lock().unwrap().get(&key) {
            return Ok(*d);
        }
        let section = self.section_volume(plane)?;
        let density = unit_ball_volume(k) / section;
        self.densities.lock().unwrap().insert(key, density);
        Ok(density)
    }

    /// Euclidean k-volume of the unit ball cut by the plane.
    fn section_volume(&self, plane: &PlaneBasis) -> Result<f64> {
        let k = plane.dim();
        let n = self.dimension();
        match (&self.spec.kind, k) {
            (NormKind::Polytope(_), 2) => {
                let area_st = polytope_section_area(&self.facets, plane);
                let gram = to_f64(&gram_det(plane.vectors())).sqrt();
                Ok(to_f64(&area_st) * gram)
            }
            (NormKind::Polytope(vs), k) if k == n && k == 3 => Ok(to_f64(&polytope_volume_3d(vs, &self.facets))),
            (NormKind::Lp(_), 2) => {
                let frame = plane.orthonormal_f64();
                let radial = |theta: f64| {
                    let v: Vec<f64> = (0..n)
                        .map(|i| theta.cos() * frame[0][i] + theta.sin() * frame[1][i])
                        .collect();
                    let rho = 1.0 / self.norm_f64(&v);
                    0.5 * rho * rho
                };
                let pieces = 16;
                let mut total = 0.0;
                for i in 0..pieces {
                    let a = 2.0 * PI * i as f64 / pieces as f64;
                    let b = 2.0 * PI * (i + 1) as f64 / pieces as f64;
                    total += adaptive_simpson(&radial, a, b, 1e-9 / pieces as f64, 40);
                }
                Ok(total)
            }
            (NormKind::Lp(exp), k) if k == n => {
                let p = to_f64(exp);
                let g = statrs::function::gamma::gamma;
                let kf = k as f64;
                Ok(2f64.powf(kf) * g(1.0 + 1.0 / p).powf(kf) / g(1.0 + kf / p))
            }
            _ => Err(Error::Unsupported(format!(
                "Busemann density for {k}-planes in {n}-dimensional {} norm",
                self.spec
            ))),
        }
    }
}

/// Adaptive Simpson quadrature with absolute tolerance `tol`.
pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
    fn rec(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            left + right + delta / 15.0
        } else {
            rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
                + rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
        }
    }
    let fa = f(a);
    let fb = f(b);
    let fm = f(0.5 * (a + b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    rec(f, a, b, fa, fm, fb, whole, tol, depth)
}

/// Facet normals of a centrally symmetric polytope given by vertices.
fn polytope_facets(n: usize, vertices: &[Point]) -> Result<Vec<Vec<Q>>> {
    if vertices.iter().any(|v| v.dim() != n) {
        return Err(Error::InvalidNorm("polytope vertex of wrong dimension".into()));
    }
    let rows: Vec<Vec<Q>> = vertices.iter().map(|v| v.0.clone()).collect();
    if rank(&rows) != n {
        return Err(Error::InvalidNorm("polytope vertices do not span the space".into()));
    }
    for v in vertices {
        let neg = Point(v.0.iter().map(|c| -c).collect());
        if !vertices.contains(&neg) {
            return Err(Error::InvalidNorm(format!("polytope is not symmetric: {neg} missing")));
        }
    }
    let mut facets: Vec<Vec<Q>> = Vec::new();
    let mut idx: Vec<usize> = (0..n).collect();
    let m = vertices.len();
    loop {
        let a: Vec<Vec<Q>> = idx.iter().map(|&i| vertices[i].0.clone()).collect();
        if let Some(normal) = solve(&a, &vec![Q::one(); n]) {
            if vertices.iter().all(|v| dot(&normal, &v.0) <= Q::one()) && !facets.contains(&normal) {
                facets.push(normal);
            }
        }
        // next n-combination of 0..m
        let mut i = n;
        loop {
            if i == 0 {
                facets.sort();
                if facets.is_empty() {
                    return Err(Error::InvalidNorm("no facets found".into()));
                }
                return Ok(facets);
            }
            i -= 1;
            if idx[i] < m - n + i {
                idx[i] += 1;
                for j in i + 1..n {
                    idx[j] = idx[j - 1] + 1;
                }
                break;
            }
        }
    }
}

/// Compares the angles of two nonzero 2D vectors in `[0, 2pi)` exactly.
pub(crate) fn angle_cmp(a: &(Q, Q), b: &(Q, Q)) -> std::cmp::Ordering {
    let half = |v: &(Q, Q)| -> u8 {
        if v.1.is_positive() || (v.1.is_zero() && v.0.is_positive()) {
            0
        } else {
            1
        }
    };
    half(a).cmp(&half(b)).then_with(|| {
        let cross = &a.0 * &b.1 - &a.1 * &b.0;
        Q::zero().cmp(&cross)
    })
}

/// Area (in plane coordinates) of a convex polygon given by unordered vertices.
pub(crate) fn convex_polygon_area(mut pts: Vec<(Q, Q)>) -> Q {
    pts.sort();
    pts.dedup();
    if pts.len() < 3 {
        return Q::zero();
    }
    let m = q(pts.len() as i64);
    let cx = pts.iter().fold(Q::zero(), |s, p| s + &p.0) / &m;
    let cy = pts.iter().fold(Q::zero(), |s, p| s + &p.1) / &m;
    pts.sort_by(|a, b| angle_cmp(&(&a.0 - &cx, &a.1 - &cy), &(&b.0 - &cx, &b.1 - &cy)));
    let mut twice = Q::zero();
    for i in 0..pts.len() {
        let a = &pts[i];
        let b = &pts[(i + 1) % pts.len()];
        twice += &a.0 * &b.1 - &a.1 * &b.0;
    }
    twice.abs() / q(2)
}

/// Area of `{(s, t) : s e1 + t e2 ∈ B}` for the polytope ball `B`.
fn polytope_section_area(facets: &[Vec<Q>], plane: &PlaneBasis) -> Q {
    let e1 = &plane.vectors[0];
    let e2 = &plane.vectors[1];
    let cons: Vec<(Q, Q)> = facets.iter().map(|a| (dot(a, e1), dot(a, e2))).collect();
    let mut verts = Vec::new();
    for i in 0..cons.len() {
        for j in i + 1..cons.len() {
            let (a1, b1) = &cons[i];
            let (a2, b2) = &cons[j];
            let d = a1 * b2 - a2 * b1;
            if d.is_zero() {
                continue;
            }
            let s = (b2 - b1) / &d;
            let t = (a1 - a2) / &d;
            if cons.iter().all(|(a, b)| a * &s + b * &t <= Q::one()) {
                verts.push((s, t));
            }
        }
    }
    convex_polygon_area(verts)
}

/// Volume of a 3D polytope from its vertices and facet normals.
fn polytope_volume_3d(vertices: &[Point], facets: &[Vec<Q>]) -> Q {
    let mut vol = Q::zero();
    for a in facets {
        let on: Vec<&Point> = vertices.iter().filter(|v| dot(a, &v.0) == Q::one()).collect();
        // project to the two coordinates complementary to the dominant normal axis
        let axis = (0..3).max_by(|&i, &j| a[i].abs().cmp(&a[j].abs())).unwrap();
        let (u, w) = match axis {
            0 => (1, 2),
            1 => (0, 2),
            _ => (0, 1),
        };
        let m = q(on.len() as i64);
        let cu = on.iter().fold(Q::zero(), |s, p| s + &p.0[u]) / &m;
        let cw = on.iter().fold(Q::zero(), |s, p| s + &p.0[w]) / &m;
        let mut ordered = on.clone();
        ordered.sort_by(|p, r| {
            angle_cmp(&(&p.0[u] - &cu, &p.0[w] - &cw), &(&r.0[u] - &cu, &r.0[w] - &cw))
        });
        for i in 1..ordered.len().saturating_sub(1) {
            let m3 = vec![
                ordered[0].0.clone(),
                ordered[i].0.clone(),
                ordered[i + 1].0.clone(),
            ];
            vol += det(&m3).abs();
        }
    }
    vol / q(6)
}
