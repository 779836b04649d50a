//! Integer-weighted polyhedral chains with rational vertices.
//!
//! A chain is a reduced formal sum of oriented simplices. Simplices are kept
//! in canonical form (vertices sorted lexicographically); the orientation of
//! the original vertex order is folded into the sign of the weight, so two
//! orientation-equivalent simplices always land on the same key and cancel
//! exactly.

use std::collections::btree_map::Entry;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::ops::{Add, Neg, Sub};

use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::normed_space::{NormedSpace, PlaneBasis};
use crate::rational::{dot, factorial, gram_det, rank, rref, solve, to_f64, Point, Q};

/// A non-degenerate simplex in canonical (sorted) vertex order.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Simplex {
    vertices: Vec<Point>,
}

impl Simplex {
    /// Canonicalizes an ordered vertex tuple. Returns the simplex and the sign of
    /// the sorting permutation, or `None` when the vertices are affinely dependent.
    pub fn oriented(mut vertices: Vec<Point>) -> Option<(Simplex, i64)> {
        let mut sign = 1;
        // insertion sort keeps track of the permutation parity
        for i in 1..vertices.len() {
            let mut j = i;
            while j > 0 && vertices[j - 1] > vertices[j] {
                vertices.swap(j - 1, j);
                sign = -sign;
                j -= 1;
            }
        }
        if vertices.windows(2).any(|w| w[0] == w[1]) {
            return None;
        }
        if vertices.len() > 2 {
            let diffs: Vec<Vec<Q>> = vertices[1..].iter().map(|v| v.sub(&vertices[0])).collect();
            if rank(&diffs) != diffs.len() {
                return None;
            }
        }
        Some((Simplex { vertices }, sign))
    }

    pub fn dim(&self) -> usize {
        self.vertices.len() - 1
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn ambient(&self) -> usize {
        self.vertices[0].dim()
    }

    /// Edge vectors `v_i - v_0`.
    pub fn edge_vectors(&self) -> Vec<Vec<Q>> {
        self.vertices[1..].iter().map(|v| v.sub(&self.vertices[0])).collect()
    }

    /// Euclidean k-volume.
    pub fn euclidean_volume(&self) -> f64 {
        if self.dim() == 0 {
            return 1.0;
        }
        to_f64(&gram_det(&self.edge_vectors())).sqrt() / factorial(self.dim())
    }

    /// Hausdorff k-volume in the given norm.
    pub fn mass(&self, space: &NormedSpace) -> Result<f64> {
        if self.dim() == 0 {
            return Ok(1.0);
        }
        let plane = PlaneBasis::new(self.edge_vectors())?;
        Ok(self.euclidean_volume() * space.busemann_density(&plane)?)
    }

    pub fn barycenter(&self) -> Point {
        Point::centroid(&self.vertices)
    }
}

impl fmt::Display for Simplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, v) in self.vertices.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, "]")
    }
}

/// A reduced integer-weighted formal sum of k-simplices in `R^n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Chain {
    dim: usize,
    ambient: usize,
    terms: BTreeMap<Simplex, i64>,
}

impl Chain {
    pub fn zero(dim: usize, ambient: usize) -> Self {
        Chain {
            dim,
            ambient,
            terms: BTreeMap::new(),
        }
    }

    /// Builds a reduced chain from ordered vertex tuples and weights: merges
    /// orientation-equivalent simplices, drops degenerate simplices and zero weights.
    pub fn reduce<I>(dim: usize, ambient: usize, raw: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<Point>, i64)>,
    {
        let mut chain = Chain::zero(dim, ambient);
        for (verts, w) in raw {
            if verts.len() != dim + 1 {
                return Err(if !verts.is_empty() {
                    Error::MixedDimensions(dim, verts.len() - 1)
                } else {
                    Error::VertexCount { dim, got: 0 }
                });
            }
            if let Some(bad) = verts.iter().find(|p| p.dim() != ambient) {
                return Err(Error::DimensionMismatch {
                    expected: ambient,
                    got: bad.dim(),
                });
            }
            chain.push_unchecked(verts, w);
        }
        Ok(chain)
    }

    /// Single simplex with weight `w`.
    pub fn simplex(vertices: Vec<Point>, w: i64) -> Result<Self> {
        if vertices.is_empty() {
            return Err(Error::VertexCount { dim: 0, got: 0 });
        }
        let dim = vertices.len() - 1;
        let ambient = vertices[0].dim();
        Chain::reduce(dim, ambient, [(vertices, w)])
    }

    /// Closed polygonal loop through the given points.
    pub fn polygon(points: &[Point]) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::ZeroChain);
        }
        let n = points.len();
        let ambient = points[0].dim();
        Chain::reduce(
            1,
            ambient,
            (0..n).map(|i| (vec![points[i].clone(), points[(i + 1) % n].clone()], 1)),
        )
    }

    pub(crate) fn push_unchecked(&mut self, verts: Vec<Point>, w: i64) {
        if w == 0 {
            return;
        }
        if let Some((s, sign)) = Simplex::oriented(verts) {
            self.add_term(s, sign * w);
        }
    }

    pub(crate) fn add_term(&mut self, s: Simplex, w: i64) {
        if w == 0 {
            return;
        }
        match self.terms.entry(s) {
            Entry::Occupied(mut o) => {
                *o.get_mut() += w;
                if *o.get() == 0 {
                    o.remove();
                }
            }
            Entry::Vacant(v) => {
                v.insert(w);
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn ambient(&self) -> usize {
        self.ambient
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Simplex, i64)> {
        self.terms.iter().map(|(s, &w)| (s, w))
    }

    pub fn weight(&self, s: &Simplex) -> i64 {
        self.terms.get(s).copied().unwrap_or(0)
    }

    /// Sum of weights; for a 0-chain this is the augmentation.
    pub fn total_weight(&self) -> i64 {
        self.terms.values().sum()
    }

    /// Distinct vertices of the reduced chain, sorted.
    pub fn vertices(&self) -> Vec<Point> {
        let set: BTreeSet<&Point> = self.terms.keys().flat_map(|s| s.vertices.iter()).collect();
        set.into_iter().cloned().collect()
    }

    pub fn scaled(&self, a: i64) -> Chain {
        if a == 0 {
            return Chain::zero(self.dim, self.ambient);
        }
        Chain {
            dim: self.dim,
            ambient: self.ambient,
            terms: self.terms.iter().map(|(s, &w)| (s.clone(), w * a)).collect(),
        }
    }

    fn check_compatible(&self, other: &Chain) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::MixedDimensions(self.dim, other.dim));
        }
        if self.ambient != other.ambient {
            return Err(Error::DimensionMismatch {
                expected: self.ambient,
                got: other.ambient,
            });
        }
        Ok(())
    }

    pub fn try_add(&self, other: &Chain) -> Result<Chain> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        for (s, &w) in &other.terms {
            out.add_term(s.clone(), w);
        }
        Ok(out)
    }

    pub fn try_sub(&self, other: &Chain) -> Result<Chain> {
        self.try_add(&other.scaled(-1))
    }

    /// Alternating face sum.
    pub fn boundary(&self) -> Chain {
        assert!(self.dim >= 1, "boundary of a 0-chain");
        let mut out = Chain::zero(self.dim - 1, self.ambient);
        for (s, &w) in &self.terms {
            for i in 0..s.vertices.len() {
                let face: Vec<Point> = s
                    .vertices
                    .iter()
                    .enumerate()
                    .filter(|&(j, _)| j != i)
                    .map(|(_, p)| p.clone())
                    .collect();
                let sign = if i % 2 == 0 { 1 } else { -1 };
                // faces of a sorted simplex are sorted and non-degenerate
                out.add_term(Simplex { vertices: face }, sign * w);
            }
        }
        out
    }

    /// True when the boundary reduces to zero (vacuously for 0-chains).
    pub fn is_cycle(&self) -> bool {
        self.dim == 0 || self.boundary().is_zero()
    }

    /// Hausdorff mass `sum |w| * vol(sigma)`.
    pub fn mass(&self, space: &NormedSpace) -> Result<f64> {
        let mut total = 0.0;
        for (s, &w) in &self.terms {
            total += w.unsigned_abs() as f64 * s.mass(space)?;
        }
        Ok(total)
    }

    /// Diameter of the support, attained at vertices since norm balls are convex.
    pub fn support_diameter(&self, space: &NormedSpace) -> Result<f64> {
        if self.is_zero() {
            return Err(Error::ZeroChain);
        }
        Ok(diameter(&self.vertices(), space))
    }

    /// Push-forward by a vertex map, extended affinely on each simplex.
    pub fn pushforward_vertices<F>(&self, target_ambient: usize, f: F) -> Chain
    where
        F: Fn(&Point) -> Point,
    {
        let mut cache: HashMap<&Point, Point> = HashMap::new();
        let mut out = Chain::zero(self.dim, target_ambient);
        for (s, &w) in &self.terms {
            let image: Vec<Point> = s
                .vertices
                .iter()
                .map(|v| cache.entry(v).or_insert_with(|| f(v)).clone())
                .collect();
            out.push_unchecked(image, w);
        }
        out
    }

    pub fn pushforward_affine(&self, map: &AffineMap) -> Result<Chain> {
        if map.source_dim() != self.ambient {
            return Err(Error::DimensionMismatch {
                expected: self.ambient,
                got: map.source_dim(),
            });
        }
        Ok(self.pushforward_vertices(map.target_dim(), |p| map.apply(p)))
    }

    /// Push-forward by a piecewise-affine map. Every simplex of the chain must lie in
    /// a single cell of the map's partition.
    pub fn pushforward(&self, map: &PiecewiseAffineMap) -> Result<Chain> {
        let mut out = Chain::zero(self.dim, map.target_dim());
        for (i, (s, &w)) in self.terms.iter().enumerate() {
            let Some(cell) = map.cell_containing(s) else {
                return Err(Error::NotAffineOnCell(i));
            };
            let image = s.vertices.iter().map(|v| cell.apply(v)).collect();
            out.push_unchecked(image, w);
        }
        Ok(out)
    }

    /// Tests whether the chain is the zero current, i.e. whether its weight
    /// function vanishes almost everywhere. This sees through subdivisions that
    /// simplex-level reduction cannot merge.
    ///
    /// Simplices are grouped by their affine carrier plane. Within a carrier the
    /// group is a top-dimensional chain with compact support, which vanishes iff
    /// its boundary does; the boundary test recurses one dimension down and ends
    /// at 0-chains, where reduction is canonical.
    pub fn is_zero_current(&self) -> bool {
        if self.dim == 0 || self.is_zero() {
            return self.is_zero();
        }
        let mut groups: BTreeMap<(Vec<Vec<Q>>, Vec<Q>), Chain> = BTreeMap::new();
        for (s, &w) in &self.terms {
            let key = affine_carrier(s);
            groups
                .entry(key)
                .or_insert_with(|| Chain::zero(self.dim, self.ambient))
                .add_term(s.clone(), w);
        }
        groups.values().all(|g| g.boundary().is_zero_current())
    }

    /// Equality as currents (see [`Chain::is_zero_current`]).
    pub fn current_eq(&self, other: &Chain) -> bool {
        match self.try_sub(other) {
            Ok(d) => d.is_zero_current(),
            Err(_) => self.is_zero() && other.is_zero(),
        }
    }

    /// Largest norm distance from `center` to a vertex.
    pub fn support_radius(&self, center: &Point, space: &NormedSpace) -> f64 {
        self.vertices()
            .iter()
            .map(|v| space.dist(v, center))
            .fold(0.0, f64::max)
    }

    pub fn to_f64_vertices(&self) -> Vec<Vec<f64>> {
        self.vertices().iter().map(|v| v.to_f64()).collect()
    }
}

impl Add for &Chain {
    type Output = Chain;
    fn add(self, rhs: &Chain) -> Chain {
        self.try_add(rhs).expect("adding incompatible chains")
    }
}

impl Sub for &Chain {
    type Output = Chain;
    fn sub(self, rhs: &Chain) -> Chain {
        self.try_sub(rhs).expect("subtracting incompatible chains")
    }
}

impl Neg for &Chain {
    type Output = Chain;
    fn neg(self) -> Chain {
        self.scaled(-1)
    }
}

impl fmt::Display for Chain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        for (i, (s, &w)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{w}{s}")?;
        }
        Ok(())
    }
}

pub fn diameter(points: &[Point], space: &NormedSpace) -> f64 {
    let mut best = 0.0f64;
    if space.is_exact() {
        let mut best_q = Q::zero();
        for i in 0..points.len() {
            for j in i + 1..points.len() {
                let d = space.norm_exact(&points[i].sub(&points[j])).unwrap();
                if d > best_q {
                    best_q = d;
                }
            }
        }
        return to_f64(&best_q);
    }
    let fl: Vec<Vec<f64>> = points.iter().map(|p| p.to_f64()).collect();
    let mut diff = vec![0.0; fl.first().map_or(0, |p| p.len())];
    for i in 0..fl.len() {
        for j in i + 1..fl.len() {
            for (d, (a, b)) in diff.iter_mut().zip(fl[i].iter().zip(&fl[j])) {
                *d = a - b;
            }
            best = best.max(space.norm_f64(&diff));
        }
    }
    best
}

/// Canonical key of the affine plane spanned by a simplex: reduced row echelon
/// basis of its direction space plus the unique point of the plane whose pivot
/// coordinates vanish.
fn affine_carrier(s: &Simplex) -> (Vec<Vec<Q>>, Vec<Q>) {
    let (basis, pivots) = rref(&s.edge_vectors());
    let mut p = s.vertices[0].0.clone();
    for (row, &c) in basis.iter().zip(&pivots) {
        let f = p[c].clone();
        if !f.is_zero() {
            for (x, r) in p.iter_mut().zip(row) {
                *x -= &f * r;
            }
        }
    }
    (basis, p)
}

/// `x ↦ A x + b` with rational entries.
#[derive(Clone, Debug, PartialEq)]
pub struct AffineMap {
    pub linear: Vec<Vec<Q>>,
    pub offset: Vec<Q>,
}

impl AffineMap {
    pub fn new(linear: Vec<Vec<Q>>, offset: Vec<Q>) -> Result<Self> {
        if linear.len() != offset.len() {
            return Err(Error::DimensionMismatch {
                expected: linear.len(),
                got: offset.len(),
            });
        }
        let cols = linear.first().map_or(0, |r| r.len());
        if linear.iter().any(|r| r.len() != cols) {
            return Err(Error::InvalidParameter("ragged affine map matrix".into()));
        }
        Ok(AffineMap { linear, offset })
    }

    pub fn identity(n: usize) -> Self {
        let linear = (0..n)
            .map(|i| (0..n).map(|j| if i == j { Q::from_integer(1.into()) } else { Q::zero() }).collect())
            .collect();
        AffineMap {
            linear,
            offset: vec![Q::zero(); n],
        }
    }

    pub fn scaling(n: usize, c: Q) -> Self {
        let mut m = Self::identity(n);
        for (i, row) in m.linear.iter_mut().enumerate() {
            row[i] = c.clone();
        }
        m
    }

    pub fn source_dim(&self) -> usize {
        self.linear.first().map_or(0, |r| r.len())
    }

    pub fn target_dim(&self) -> usize {
        self.linear.len()
    }

    pub fn apply(&self, p: &Point) -> Point {
        Point(
            self.linear
                .iter()
                .zip(&self.offset)
                .map(|(row, b)| dot(row, &p.0) + b)
                .collect(),
        )
    }

    /// Euclidean operator norm of the linear part (largest singular value).
    pub fn operator_norm_f64(&self) -> f64 {
        let a: Vec<Vec<f64>> = self.linear.iter().map(|r| r.iter().map(to_f64).collect()).collect();
        let n = self.source_dim();
        let mut x = vec![1.0; n];
        let mut sigma = 0.0;
        for _ in 0..500 {
            let ax: Vec<f64> = a.iter().map(|r| r.iter().zip(&x).map(|(p, q)| p * q).sum()).collect();
            let mut atax = vec![0.0; n];
            for (row, y) in a.iter().zip(&ax) {
                for (t, r) in atax.iter_mut().zip(row) {
                    *t += r * y;
                }
            }
            let norm = atax.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm == 0.0 {
                return 0.0;
            }
            sigma = norm.sqrt();
            x = atax.into_iter().map(|v| v / norm).collect();
        }
        sigma
    }
}

/// A map that is affine on each cell of a simplicial partition of the source.
#[derive(Clone, Debug)]
pub struct PiecewiseAffineMap {
    cells: Vec<(Vec<Point>, AffineMap)>,
    target: usize,
}

impl PiecewiseAffineMap {
    /// Each cell is a full-dimensional simplex of the source space together with
    /// the affine map used on it.
    pub fn new(cells: Vec<(Vec<Point>, AffineMap)>) -> Result<Self> {
        let target = cells.first().map_or(0, |(_, m)| m.target_dim());
        for (verts, map) in &cells {
            let n = map.source_dim();
            if verts.len() != n + 1 || map.target_dim() != target {
                return Err(Error::InvalidParameter("malformed cell in piecewise-affine map".into()));
            }
        }
        Ok(PiecewiseAffineMap { cells, target })
    }

    /// Globally affine map on a single cell covering everything.
    pub fn global(map: AffineMap) -> Self {
        PiecewiseAffineMap {
            target: map.target_dim(),
            cells: vec![(Vec::new(), map)],
        }
    }

    pub fn target_dim(&self) -> usize {
        self.target
    }

    fn cell_containing(&self, s: &Simplex) -> Option<&AffineMap> {
        self.cells
            .iter()
            .find(|(verts, _)| verts.is_empty() || s.vertices.iter().all(|p| in_simplex(verts, p)))
            .map(|(_, m)| m)
    }
}

/// Exact closed-simplex membership via barycentric coordinates.
fn in_simplex(verts: &[Point], p: &Point) -> bool {
    let n = verts.len() - 1;
    let a: Vec<Vec<Q>> = (0..n)
        .map(|row| (1..=n).map(|j| &verts[j].0[row] - &verts[0].0[row]).collect())
        .collect();
    let b = p.sub(&verts[0]);
    let Some(lam) = solve(&a, &b) else {
        return false;
    };
    let sum = lam.iter().fold(Q::zero(), |s, x| s + x);
    lam.iter().all(|x| !x.is_negative()) && sum <= Q::from_integer(1.into())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::normed_space::NormSpec;
    use crate::rational::{q, qr};

    fn p(c: &[i64]) -> Point {
        Point::from_ints(c)
    }

    fn square() -> Chain {
        Chain::polygon(&[p(&[1, 1]), p(&[-1, 1]), p(&[-1, -1]), p(&[1, -1])]).unwrap()
    }

    #[test]
    fn reduce_examples() {
        let s = vec![p(&[0, 0]), p(&[1, 0])];
        let r = vec![p(&[1, 0]), p(&[0, 0])];
        let t = vec![p(&[0, 0]), p(&[0, 1])];
        let c = Chain::reduce(1, 2, [(s.clone(), 1), (s.clone(), 1)]).unwrap();
        assert_eq!(c.len(), 1);
        assert_eq!(c.terms().next().unwrap().1, 2);
        assert!(Chain::reduce(1, 2, [(s.clone(), 1), (r, 1)]).unwrap().is_zero());
        let c = Chain::reduce(1, 2, [(s.clone(), 3), (t, -1)]).unwrap();
        assert_eq!(c.len(), 2);
        assert!(matches!(
            Chain::reduce(1, 2, [(vec![p(&[0, 0])], 1)]),
            Err(Error::MixedDimensions(1, 0))
        ));
        // idempotent
        let again = Chain::reduce(1, 2, c.terms().map(|(s, w)| (s.vertices().to_vec(), w))).unwrap();
        assert_eq!(again, c);
    }

    #[test]
    fn boundary_examples() {
        let a = p(&[0, 0]);
        let b = p(&[1, 0]);
        let c = p(&[0, 1]);
        let tri = Chain::simplex(vec![a.clone(), b.clone(), c.clone()], 1).unwrap();
        let expect = Chain::reduce(
            1,
            2,
            [(vec![b.clone(), c.clone()], 1), (vec![a.clone(), c.clone()], -1), (vec![a, b], 1)],
        )
        .unwrap();
        assert_eq!(tri.boundary(), expect);
        assert!(tri.boundary().boundary().is_zero());
        assert!(square().boundary().is_zero());
    }

    #[test]
    fn mass_examples() {
        let e = NormedSpace::new(NormSpec::euclidean(2)).unwrap();
        let seg = Chain::simplex(vec![p(&[0, 0]), p(&[1, 0])], 1).unwrap();
        assert_eq!(seg.mass(&e).unwrap(), 1.0);
        assert_eq!(seg.scaled(2).mass(&e).unwrap(), 2.0);
        let linf = NormedSpace::new(NormSpec::linf(2)).unwrap();
        let tri = Chain::simplex(vec![p(&[0, 0]), p(&[1, 0]), p(&[0, 1])], 1).unwrap();
        assert!((tri.mass(&linf).unwrap() - std::f64::consts::PI / 8.0).abs() < 1e-15);
        assert_eq!(Chain::zero(1, 2).mass(&e).unwrap(), 0.0);
    }

    #[test]
    fn diameter_examples() {
        let e = NormedSpace::new(NormSpec::euclidean(2)).unwrap();
        let linf = NormedSpace::new(NormSpec::linf(2)).unwrap();
        let seg = Chain::simplex(vec![p(&[0, 0]), p(&[1, 0])], 1).unwrap();
        assert_eq!(seg.support_diameter(&e).unwrap(), 1.0);
        assert!((square().support_diameter(&e).unwrap() - 2.0 * 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(square().support_diameter(&linf).unwrap(), 2.0);
        assert!(matches!(Chain::zero(1, 2).support_diameter(&e), Err(Error::ZeroChain)));
    }

    #[test]
    fn pushforward_examples() {
        let e = NormedSpace::new(NormSpec::euclidean(2)).unwrap();
        let tri = Chain::simplex(vec![p(&[0, 0]), p(&[2, 0]), p(&[0, 1])], 3).unwrap();
        assert_eq!(tri.pushforward_affine(&AffineMap::identity(2)).unwrap(), tri);
        let seg = Chain::simplex(vec![p(&[0, 0]), p(&[1, 0])], 1).unwrap();
        let doubled = seg.pushforward_affine(&AffineMap::scaling(2, q(2))).unwrap();
        assert_eq!(doubled.mass(&e).unwrap(), 2.0);
        let reflect = AffineMap::new(vec![vec![q(-1), q(0)], vec![q(0), q(1)]], vec![q(0), q(0)]).unwrap();
        let image = tri.pushforward_affine(&reflect).unwrap();
        assert_eq!(image.terms().next().unwrap().1, -3);
        assert_eq!(image.mass(&e).unwrap(), tri.mass(&e).unwrap());
    }

    #[test]
    fn piecewise_map_requires_a_containing_cell() {
        let left = (vec![p(&[0, 0]), p(&[1, 0]), p(&[0, 1])], AffineMap::identity(2));
        let map = PiecewiseAffineMap::new(vec![left]).unwrap();
        let inside = Chain::simplex(vec![p(&[0, 0]), Point::new(vec![qr(1, 2), qr(1, 2)])], 1).unwrap();
        assert_eq!(inside.pushforward(&map).unwrap(), inside);
        let outside = Chain::simplex(vec![p(&[0, 0]), p(&[2, 2])], 1).unwrap();
        assert!(matches!(outside.pushforward(&map), Err(Error::NotAffineOnCell(0))));
    }

    #[test]
    fn current_equality_sees_subdivisions() {
        let whole = Chain::simplex(vec![p(&[0, 0]), p(&[2, 0])], 1).unwrap();
        let split = Chain::reduce(
            1,
            2,
            [(vec![p(&[0, 0]), p(&[1, 0])], 1), (vec![p(&[1, 0]), p(&[2, 0])], 1)],
        )
        .unwrap();
        assert_ne!(whole, split);
        assert!(whole.current_eq(&split));
        let tri = Chain::simplex(vec![p(&[0, 0]), p(&[2, 0]), p(&[0, 2])], 1).unwrap();
        let m = p(&[1, 0]);
        let halves = Chain::reduce(
            2,
            2,
            [
                (vec![p(&[0, 0]), m.clone(), p(&[0, 2])], 1),
                (vec![m, p(&[2, 0]), p(&[0, 2])], 1),
            ],
        )
        .unwrap();
        assert!(tri.current_eq(&halves));
        assert!(!tri.current_eq(&halves.scaled(2)));
        // overlapping collinear pieces with a net weight
        let overlap = Chain::reduce(
            1,
            2,
            [(vec![p(&[0, 0]), p(&[3, 0])], 1), (vec![p(&[1, 0]), p(&[2, 0])], -1)],
        )
        .unwrap();
        assert!(!overlap.is_zero_current());
    }
}
