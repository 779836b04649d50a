//! Vitali-type covering: points whose doubled critical balls are pairwise
//! disjoint and which together capture a definite fraction of the mass.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::chain::Chain;
use crate::error::{Error, Result};
use crate::normed_space::NormedSpace;
use crate::rational::{dyadic, Point, Q};
use crate::slicing::{critical_radius, GrowthFunction};

#[derive(Clone, Debug, PartialEq)]
pub struct WeightedCandidate {
    pub point: Point,
    /// `r₀(y)`, the largest `r` with `β_y(r) >= F r^k`
    pub r0: f64,
    /// `β_y(r₀)`
    pub captured: f64,
}

#[derive(Clone, Copy, Debug, Default)]
pub struct CandidateStrategy {
    /// Random points on the support, drawn with probability proportional to mass.
    pub extra_samples: usize,
    pub seed: u64,
}

#[derive(Clone, Debug)]
pub struct CoverSelection {
    pub selected: Vec<WeightedCandidate>,
    /// `Σ β_{y_i}(r₀(y_i)) / M(T)`
    pub fraction: f64,
    pub total_mass: f64,
}

/// The covering constant `5^{-k}`.
pub fn alpha(k: usize) -> f64 {
    5f64.powi(-(k as i32))
}

fn support_samples(t: &Chain, space: &NormedSpace, count: usize, seed: u64) -> Result<Vec<Point>> {
    if count == 0 {
        return Ok(Vec::new());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let simplices: Vec<_> = t.terms().map(|(s, w)| (s.clone(), w.unsigned_abs() as f64)).collect();
    let mut cumulative = Vec::with_capacity(simplices.len());
    let mut acc = 0.0;
    for (s, w) in &simplices {
        acc += w * s.mass(space)?;
        cumulative.push(acc);
    }
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let u = rng.gen::<f64>() * acc;
        let i = cumulative.partition_point(|&c| c < u).min(simplices.len() - 1);
        let verts = simplices[i].0.vertices();
        // uniform barycentric weights, rounded to dyadics that sum to one
        let mut raw: Vec<f64> = (0..verts.len()).map(|_| -rng.gen::<f64>().max(1e-300).ln()).collect();
        let sum: f64 = raw.iter().sum();
        raw.iter_mut().for_each(|x| *x /= sum);
        let mut weights: Vec<Q> = raw[1..].iter().map(|&x| dyadic(x, 30)).collect();
        let rest = Q::from_integer(1.into()) - weights.iter().fold(Q::from_integer(0.into()), |s, x| s + x);
        weights.insert(0, rest);
        let mut coords = vec![Q::from_integer(0.into()); t.ambient()];
        for (v, w) in verts.iter().zip(&weights) {
            for (c, x) in coords.iter_mut().zip(&v.0) {
                *c += w * x;
            }
        }
        out.push(Point(coords));
    }
    Ok(out)
}

/// Vertices and barycenters of `t` plus optional random support points, each
/// with its critical radius; candidates with `r₀ = 0` are dropped.
pub fn select_candidates(
    t: &Chain,
    space: &NormedSpace,
    f: f64,
    strategy: CandidateStrategy,
) -> Result<Vec<WeightedCandidate>> {
    if t.is_zero() {
        return Err(Error::ZeroChain);
    }
    let k = t.dim();
    let mut points = t.vertices();
    points.extend(t.terms().map(|(s, _)| s.barycenter()));
    points.extend(support_samples(t, space, strategy.extra_samples, strategy.seed)?);
    points.sort();
    points.dedup();
    let results: Vec<Result<Option<WeightedCandidate>>> = points
        .into_par_iter()
        .map(|y| {
            let g = GrowthFunction::new(t, &y, space)?;
            let r0 = critical_radius(&g, f, k);
            Ok((r0 > 0.0).then(|| WeightedCandidate {
                captured: g.value(r0),
                point: y,
                r0,
            }))
        })
        .collect();
    let mut out = Vec::new();
    for r in results {
        if let Some(c) = r? {
            out.push(c);
        }
    }
    Ok(out)
}

/// Greedy by decreasing `r₀` (ties: lexicographic center): a candidate is kept
/// iff its `2r₀` ball is disjoint from every kept `2r₀` ball.
pub fn greedy_cover(cands: &[WeightedCandidate], total_mass: f64, space: &NormedSpace) -> Result<CoverSelection> {
    if cands.is_empty() {
        return Err(Error::InvalidParameter("greedy cover of an empty candidate list".into()));
    }
    let mut order: Vec<&WeightedCandidate> = cands.iter().collect();
    order.sort_by(|a, b| b.r0.partial_cmp(&a.r0).unwrap().then_with(|| a.point.cmp(&b.point)));
    let mut selected: Vec<WeightedCandidate> = Vec::new();
    for c in order {
        let free = selected
            .iter()
            .all(|s| space.dist(&s.point, &c.point) > 2.0 * s.r0 + 2.0 * c.r0);
        if free {
            selected.push(c.clone());
        }
    }
    let captured: f64 = selected.iter().map(|c| c.captured).sum();
    let fraction = if total_mass > 0.0 { captured / total_mass } else { 0.0 };
    Ok(CoverSelection {
        selected,
        fraction,
        total_mass,
    })
}

/// Candidates plus greedy selection, doubling the random candidate count
/// (bounded retries) while the captured fraction stays below `5^{-k}`.
pub fn cover(t: &Chain, space: &NormedSpace, f: f64, strategy: CandidateStrategy) -> Result<CoverSelection> {
    let total = t.mass(space)?;
    let mut strategy = strategy;
    let mut best: Option<CoverSelection> = None;
    for attempt in 0..4 {
        let cands = select_candidates(t, space, f, strategy)?;
        if cands.is_empty() {
            break;
        }
        let sel = greedy_cover(&cands, total, space)?;
        let done = sel.fraction >= alpha(t.dim());
        if best.as_ref().is_none_or(|b| sel.fraction > b.fraction) {
            best = Some(sel);
        }
        if done {
            break;
        }
        strategy.extra_samples = (strategy.extra_samples.max(t.len()) * 2).max(16);
        strategy.seed = strategy.seed.wrapping_add(attempt + 1);
    }
    best.ok_or_else(|| Error::Certificate("no candidate with positive critical radius".into()))
}

/// Every `y` satisfies `B(y, r₀(y)) ⊆ B(y_i, 5 r₀(y_i))` for a selected `y_i`
/// with `r₀(y_i) >= r₀(y)`.
pub fn five_r_property(cands: &[WeightedCandidate], sel: &CoverSelection, space: &NormedSpace) -> bool {
    cands.iter().all(|c| {
        sel.selected
            .iter()
            .any(|s| s.r0 >= c.r0 && space.dist(&s.point, &c.point) + c.r0 <= 5.0 * s.r0 * (1.0 + 1e-12))
    })
}

/// Pairwise disjointness of the doubled balls of a selection.
pub fn doubled_balls_disjoint(sel: &CoverSelection, space: &NormedSpace) -> bool {
    let s = &sel.selected;
    (0..s.len()).all(|i| (i + 1..s.len()).all(|j| space.dist(&s[i].point, &s[j].point) > 2.0 * s[i].r0 + 2.0 * s[j].r0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::normed_space::NormSpec;
    use approx::assert_relative_eq;

    fn p(c: &[i64]) -> Point {
        Point::from_ints(c)
    }

    fn euclid() -> NormedSpace {
        NormedSpace::new(NormSpec::euclidean(2)).unwrap()
    }

    fn cand(x: i64, r0: f64, captured: f64) -> WeightedCandidate {
        WeightedCandidate {
            point: p(&[x, 0]),
            r0,
            captured,
        }
    }

    #[test]
    fn unit_segment_midpoint() {
        let seg = Chain::simplex(vec![p(&[0, 0]), p(&[1, 0])], 1).unwrap();
        let cands = select_candidates(&seg, &euclid(), 1.0, CandidateStrategy::default()).unwrap();
        let mid = cands.iter().find(|c| c.point == seg.terms().next().unwrap().0.barycenter()).unwrap();
        // beta(r) = min(2r, 1) >= r holds up to r = 1
        assert_relative_eq!(mid.r0, 1.0, epsilon = 1e-12);
        assert_relative_eq!(mid.captured, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn two_far_segments() {
        let a = Chain::simplex(vec![p(&[0, 0]), p(&[1, 0])], 1).unwrap();
        let b = Chain::simplex(vec![p(&[100, 0]), p(&[101, 0])], 1).unwrap();
        let t = &a + &b;
        let cands = select_candidates(&t, &euclid(), 1.0, CandidateStrategy::default()).unwrap();
        let sel = greedy_cover(&cands, 2.0, &euclid()).unwrap();
        assert_eq!(sel.selected.len(), 2);
        assert_relative_eq!(sel.fraction, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn zero_chain_is_rejected() {
        let z = Chain::zero(1, 2);
        assert!(matches!(
            select_candidates(&z, &euclid(), 1.0, CandidateStrategy::default()),
            Err(Error::ZeroChain)
        ));
        assert!(greedy_cover(&[], 1.0, &euclid()).is_err());
    }

    #[test]
    fn far_candidates_are_both_kept() {
        let sel = greedy_cover(&[cand(0, 0.5, 1.0), cand(100, 0.5, 1.0)], 2.0, &euclid()).unwrap();
        assert_eq!(sel.selected.len(), 2);
        assert_eq!(sel.fraction, 1.0);
    }

    #[test]
    fn coincident_candidates_keep_one() {
        let sel = greedy_cover(&[cand(0, 0.5, 1.0), cand(0, 0.5, 1.0)], 2.0, &euclid()).unwrap();
        assert_eq!(sel.selected.len(), 1);
    }

    #[test]
    fn greedy_is_deterministic_and_five_r() {
        let cands: Vec<_> = (0..12).map(|i| cand(i * 3, 1.0 + (i % 4) as f64 * 0.5, 1.0)).collect();
        let a = greedy_cover(&cands, 12.0, &euclid()).unwrap();
        let mut rev = cands.clone();
        rev.reverse();
        let b = greedy_cover(&rev, 12.0, &euclid()).unwrap();
        assert_eq!(a.selected, b.selected);
        assert!(doubled_balls_disjoint(&a, &euclid()));
        assert!(five_r_property(&cands, &a, &euclid()));
    }

    #[test]
    fn random_samples_lie_on_the_support() {
        let t = Chain::polygon(&[p(&[0, 0]), p(&[4, 0]), p(&[0, 3])]).unwrap();
        let pts = support_samples(&t, &euclid(), 50, 7).unwrap();
        for y in pts {
            let on = t.terms().any(|(s, _)| {
                let a = &s.vertices()[0];
                let b = &s.vertices()[1];
                let d = b.sub(a);
                let e = y.sub(a);
                let cross = &d[0] * &e[1] - &d[1] * &e[0];
                cross == Q::from_integer(0.into())
            });
            assert!(on);
        }
    }
}
