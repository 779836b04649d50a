//! Products with the unit interval and cones over cycles.
//!
//! `[0,1] × T` is realized by the staircase triangulation of `[0,1] × Δ^k`:
//! the simplex `[v0..vk]` becomes `Σ_i (-1)^i [(0,v0)..(0,vi),(1,vi)..(1,vk)]`,
//! with the interval coordinate prepended. The cone from `x0` is the image of
//! that prism under the straight-line homotopy `(t, x) -> x0 + t (x - x0)`,
//! which collapses the bottom to the apex and leaves simplices `[x0, σ]`.

use crate::chain::{diameter, Chain};
use crate::error::{Error, Result};
use crate::normed_space::NormedSpace;
use crate::rational::{q, Point, Q};

fn lift(t: i64, p: &Point) -> Point {
    let mut c = Vec::with_capacity(p.dim() + 1);
    c.push(q(t));
    c.extend(p.0.iter().cloned());
    Point(c)
}

/// `{t} × T` inside `R^{1+n}`.
pub fn slice_at(t: &Chain, level: i64) -> Chain {
    t.pushforward_vertices(t.ambient() + 1, |p| lift(level, p))
}

/// The prism `[0,1] × T`, a `(k+1)`-chain in `R^{1+n}`.
pub fn interval_product(t: &Chain) -> Chain {
    let mut out = Chain::zero(t.dim() + 1, t.ambient() + 1);
    for (s, w) in t.terms() {
        let v = s.vertices();
        for i in 0..v.len() {
            let mut verts: Vec<Point> = v[..=i].iter().map(|p| lift(0, p)).collect();
            verts.extend(v[i..].iter().map(|p| lift(1, p)));
            let sign = if i % 2 == 0 { 1 } else { -1 };
            out.push_unchecked(verts, sign * w);
        }
    }
    out
}

/// `top - bottom - [0,1] × ∂T`, which equals `∂([0,1] × T)` for every chain.
/// For cycles the last term vanishes.
pub fn prism_boundary_formula(t: &Chain) -> Chain {
    let top = slice_at(t, 1);
    let bottom = slice_at(t, 0);
    let mut out = &top - &bottom;
    if t.dim() > 0 {
        out = &out - &interval_product(&t.boundary());
    }
    out
}

/// A cone filling together with its certified mass bound.
#[derive(Clone, Debug)]
pub struct ConeFilling {
    pub filling: Chain,
    pub apex: Point,
    /// `diam(spt T ∪ {apex})`
    pub diameter: f64,
    pub mass: f64,
    /// `(k+1) · diam · M(T)`
    pub bound: f64,
}

/// Relative slack granted to floating point mass evaluation when checking bounds.
pub const MASS_SLACK: f64 = 1e-9;

/// Cone over the cycle `t` with the given apex; `∂(cone) = t` exactly.
pub fn cone(t: &Chain, apex: &Point, space: &NormedSpace) -> Result<ConeFilling> {
    if apex.dim() != t.ambient() {
        return Err(Error::DimensionMismatch {
            expected: t.ambient(),
            got: apex.dim(),
        });
    }
    if t.dim() > 0 && !t.is_cycle() {
        return Err(Error::NotACycle);
    }
    if t.dim() == 0 && t.total_weight() != 0 {
        return Err(Error::NotACycle);
    }
    let mut filling = Chain::zero(t.dim() + 1, t.ambient());
    for (s, w) in t.terms() {
        let mut verts = Vec::with_capacity(s.vertices().len() + 1);
        verts.push(apex.clone());
        verts.extend(s.vertices().iter().cloned());
        filling.push_unchecked(verts, w);
    }
    if filling.is_zero() && !t.is_zero() && !t.is_zero_current() {
        return Err(Error::Certificate("every cone simplex degenerated for a nonzero cycle".into()));
    }
    let mut pts = t.vertices();
    pts.push(apex.clone());
    let diameter = if t.is_zero() { 0.0 } else { diameter(&pts, space) };
    let mass = filling.mass(space)?;
    let bound = (t.dim() + 1) as f64 * diameter * t.mass(space)?;
    if mass > bound * (1.0 + MASS_SLACK) + MASS_SLACK {
        return Err(Error::Certificate(format!("cone mass {mass} exceeds bound {bound}")));
    }
    Ok(ConeFilling {
        filling,
        apex: apex.clone(),
        diameter,
        mass,
        bound,
    })
}

/// Cone from a vertex of `t`. Every vertex gives the same diameter bound, so
/// the lexicographically smallest one is used.
pub fn cone_from_support(t: &Chain, space: &NormedSpace) -> Result<ConeFilling> {
    match t.vertices().into_iter().min() {
        Some(apex) => cone(t, &apex, space),
        None => cone(t, &Point::origin(t.ambient()), space),
    }
}

/// Cone whose apex is the vertex of `t` nearest to `target` (ties: smallest vertex).
pub fn cone_from_nearest(t: &Chain, target: &Point, space: &NormedSpace) -> Result<ConeFilling> {
    let apex = t
        .vertices()
        .into_iter()
        .map(|v| (space.dist(&v, target), v))
        .min_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then_with(|| a.1.cmp(&b.1)))
        .map(|(_, v)| v)
        .unwrap_or_else(|| target.clone());
    cone(t, &apex, space)
}

/// The straight-line homotopy `(t, x) -> x0 + t (x - x0)` applied to prism vertices.
pub fn contract_to(apex: &Point) -> impl Fn(&Point) -> Point + '_ {
    move |p: &Point| {
        let t: &Q = &p.0[0];
        let x = Point(p.0[1..].to_vec());
        apex.lerp(&x, t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::normed_space::NormSpec;
    use crate::rational::qr;
    use proptest::prelude::*;

    fn p(c: &[i64]) -> Point {
        Point::from_ints(c)
    }

    fn square() -> Chain {
        Chain::polygon(&[p(&[1, 1]), p(&[-1, 1]), p(&[-1, -1]), p(&[1, -1])]).unwrap()
    }

    #[test]
    fn segment_prism() {
        let seg = Chain::simplex(vec![p(&[0]), p(&[1])], 1).unwrap();
        let prism = interval_product(&seg);
        assert_eq!(prism.len(), 2);
        assert_eq!(prism.boundary(), prism_boundary_formula(&seg));
    }

    #[test]
    fn point_prism() {
        let pt = Chain::simplex(vec![p(&[3, 4])], 1).unwrap();
        let prism = interval_product(&pt);
        assert_eq!(prism.len(), 1);
        assert_eq!(prism.boundary(), &slice_at(&pt, 1) - &slice_at(&pt, 0));
    }

    #[test]
    fn square_prism_has_eight_triangles() {
        let t = square();
        let prism = interval_product(&t);
        assert_eq!(prism.len(), 8);
        // every interior face appears in exactly two prisms with opposite signs
        let mut faces = std::collections::BTreeMap::new();
        for (s, w) in prism.terms() {
            for (f, fw) in Chain::simplex(s.vertices().to_vec(), w).unwrap().boundary().terms() {
                *faces.entry(f.clone()).or_insert(0) += fw;
            }
        }
        faces.retain(|_, w| *w != 0);
        let expect = &slice_at(&t, 1) - &slice_at(&t, 0);
        assert_eq!(faces.len(), expect.len());
        for (f, w) in faces {
            assert_eq!(expect.weight(&f), w);
        }
    }

    #[test]
    fn cone_of_square() {
        let space = NormedSpace::new(NormSpec::euclidean(2)).unwrap();
        let c = cone(&square(), &p(&[0, 0]), &space).unwrap();
        assert_eq!(c.filling.len(), 4);
        assert!((c.mass - 4.0).abs() < 1e-12);
        assert!((c.bound - 2.0 * 8f64.sqrt() * 8.0).abs() < 1e-9);
        assert_eq!(c.filling.boundary(), square());
    }

    #[test]
    fn cone_of_zero_is_zero() {
        let space = NormedSpace::new(NormSpec::euclidean(2)).unwrap();
        let c = cone(&Chain::zero(1, 2), &p(&[0, 0]), &space).unwrap();
        assert!(c.filling.is_zero());
        assert_eq!(c.mass, 0.0);
    }

    #[test]
    fn cone_needs_cycle() {
        let space = NormedSpace::new(NormSpec::euclidean(2)).unwrap();
        let seg = Chain::simplex(vec![p(&[0, 0]), p(&[1, 0])], 1).unwrap();
        assert!(matches!(cone(&seg, &p(&[0, 1]), &space), Err(Error::NotACycle)));
    }

    #[test]
    fn regular_polygon_cone_tends_to_pi() {
        let space = NormedSpace::new(NormSpec::euclidean(2)).unwrap();
        let n = 256;
        let pts: Vec<Point> = (0..n)
            .map(|i| {
                let a = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
                Point::from_f64(&[a.cos(), a.sin()], 1e-15)
            })
            .collect();
        let t = Chain::polygon(&pts).unwrap();
        let c = cone(&t, &Point::centroid(&pts), &space).unwrap();
        let fan = 0.5 * n as f64 * (2.0 * std::f64::consts::PI / n as f64).sin();
        assert!((c.mass - fan).abs() < 1e-9);
        assert!((c.mass - std::f64::consts::PI).abs() < 1e-3);
    }

    #[test]
    fn cone_from_support_uses_a_corner() {
        let space = NormedSpace::new(NormSpec::euclidean(2)).unwrap();
        let c = cone_from_support(&square(), &space).unwrap();
        assert_eq!(c.apex, p(&[-1, -1]));
        assert!((c.diameter - 8f64.sqrt()).abs() < 1e-12);
        assert_eq!(c.filling.len(), 2);
        assert_eq!(c.filling.boundary(), square());
    }

    #[test]
    fn coning_a_simplex_boundary_from_its_vertex() {
        let space = NormedSpace::new(NormSpec::euclidean(3)).unwrap();
        let sigma = Chain::simplex(vec![p(&[0, 0, 0]), p(&[1, 0, 0]), p(&[0, 1, 0]), p(&[0, 0, 1])], 1).unwrap();
        let c = cone_from_support(&sigma.boundary(), &space).unwrap();
        assert_eq!(c.filling, sigma);
    }

    #[test]
    fn two_far_loops_bound_uses_joint_diameter() {
        let space = NormedSpace::new(NormSpec::euclidean(2)).unwrap();
        let a = Chain::polygon(&[p(&[0, 0]), p(&[1, 0]), p(&[0, 1])]).unwrap();
        let b = Chain::polygon(&[p(&[100, 0]), p(&[101, 0]), p(&[100, 1])]).unwrap();
        let c = cone_from_support(&(&a + &b), &space).unwrap();
        assert!(c.diameter > 100.0);
        assert!(c.filling.boundary().current_eq(&(&a + &b)));
    }

    #[test]
    fn cone_via_contracted_prism() {
        let space = NormedSpace::new(NormSpec::euclidean(2)).unwrap();
        let t = square();
        let apex = p(&[3, -2]);
        let image = interval_product(&t).pushforward_vertices(2, contract_to(&apex));
        let direct = cone(&t, &apex, &space).unwrap().filling;
        assert!(image.current_eq(&direct));
    }

    #[test]
    fn cone_in_polytope_norm_respects_bound() {
        let space = NormedSpace::new(NormSpec::linf(2)).unwrap();
        let t = Chain::polygon(&[p(&[0, 0]), p(&[4, 1]), p(&[1, 3])]).unwrap();
        let c = cone(&t, &Point::new(vec![qr(1, 2), qr(1, 3)]), &space).unwrap();
        assert!(c.mass <= c.bound);
    }

    fn arb_cycle() -> impl Strategy<Value = Chain> {
        // boundary of a random 2-chain in R^3: a 1-cycle
        prop::collection::vec((prop::collection::vec(-4i64..5, 9), -2i64..3), 1..4).prop_map(|raw| {
            let simplices = raw.into_iter().map(|(c, w)| {
                (
                    vec![p(&c[0..3]), p(&c[3..6]), p(&c[6..9])],
                    w,
                )
            });
            Chain::reduce(2, 3, simplices).unwrap().boundary()
        })
    }

    proptest! {
        #[test]
        fn cone_boundary_is_cycle(t in arb_cycle(), a in prop::collection::vec(-5i64..6, 3)) {
            let space = NormedSpace::new(NormSpec::euclidean(3)).unwrap();
            let apex = p(&a);
            let c = cone(&t, &apex, &space).unwrap();
            prop_assert!(c.filling.boundary().current_eq(&t));
            let neg = cone(&-&t, &apex, &space).unwrap();
            prop_assert!((&c.filling + &neg.filling).is_zero());
        }

        #[test]
        fn prism_identity(t in arb_cycle()) {
            prop_assert_eq!(interval_product(&t).boundary(), prism_boundary_formula(&t));
            prop_assert_eq!(interval_product(&t).boundary(), &slice_at(&t, 1) - &slice_at(&t, 0));
        }
    }
}
