use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::chain::Chain;
use crate::error::{Error, Result};
use crate::normed_space::NormSpec;
use crate::rational::{q, snap, to_f64, Point, Q};

/// Coordinates of generated curved shapes are snapped to within this distance.
const SNAP_TOL: f64 = 1e-12;

/// Families of test cycles.
#[derive(Clone, Debug, PartialEq)]
pub enum GeneratorSpec {
    /// Inscribed in the circle of the given radius about the origin.
    RegularPolygon { n: usize, radius: Q },
    /// Star-shaped: each vertex moves radially and in angle by up to `noise / 2`
    /// of the radius and of the angular step.
    PerturbedPolygon { n: usize, radius: Q, noise: Q },
    /// Unit squares with lower-left corners at `(i * spacing, 0)`.
    MultiLoop { count: usize, spacing: Q },
    /// Octahedron with each face split into `4^level` triangles, projected to the unit sphere.
    PolyhedralSphere { level: u32 },
    /// Boundary of `[0, aspect] x [0, 1]`.
    ThinRectangle { aspect: Q },
    /// Two unit squares meeting only at the origin.
    FigureEight,
    /// Surface of the unit cube `[0, 1]^3`.
    CubeSurface,
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}

fn embed(norm: &NormSpec, coords: Vec<Q>) -> Point {
    let mut c = coords;
    c.resize(norm.dimension, Q::from_integer(0.into()));
    Point::new(c)
}

fn need_ambient(norm: &NormSpec, d: usize, family: &str) -> Result<()> {
    if norm.dimension < d {
        return Err(invalid(format!("{family} needs ambient dimension >= {d}, got {}", norm.dimension)));
    }
    Ok(())
}

fn polar(norm: &NormSpec, r: f64, theta: f64) -> Point {
    embed(norm, vec![snap(r * theta.cos(), SNAP_TOL), snap(r * theta.sin(), SNAP_TOL)])
}

fn unit_square(norm: &NormSpec, x0: &Q, y0: &Q, sx: i64, sy: i64) -> Vec<Point> {
    [(0, 0), (1, 0), (1, 1), (0, 1)]
        .iter()
        .map(|&(a, b)| embed(norm, vec![x0 + q(a * sx), y0 + q(b * sy)]))
        .collect()
}

fn polygon_terms(pts: &[Point]) -> Vec<(Vec<Point>, i64)> {
    (0..pts.len()).map(|i| (vec![pts[i].clone(), pts[(i + 1) % pts.len()].clone()], 1)).collect()
}

fn sphere(norm: &NormSpec, level: u32) -> Result<Chain> {
    if level > 6 {
        return Err(invalid(format!("subdivision level {level} exceeds 6")));
    }
    let m = 1i64 << level;
    let axis = |i: usize, s: i64| {
        let mut c = vec![q(0); 3];
        c[i] = q(s);
        c
    };
    let project = |p: Vec<Q>| {
        let f: Vec<f64> = p.iter().map(to_f64).collect();
        let len = f.iter().map(|x| x * x).sum::<f64>().sqrt();
        embed(norm, f.iter().map(|x| snap(x / len, SNAP_TOL)).collect())
    };
    let mut faces = Vec::new();
    for sx in [1, -1] {
        for sy in [1, -1] {
            for sz in [1, -1] {
                let (a, mut b, mut c) = (axis(0, sx), axis(1, sy), axis(2, sz));
                if sx * sy * sz < 0 {
                    std::mem::swap(&mut b, &mut c);
                }
                let at = |i: i64, j: i64| -> Vec<Q> {
                    (0..3)
                        .map(|d| &a[d] + (&b[d] - &a[d]) * Q::new(i.into(), m.into()) + (&c[d] - &a[d]) * Q::new(j.into(), m.into()))
                        .collect()
                };
                for i in 0..m {
                    for j in 0..m - i {
                        faces.push((vec![project(at(i, j)), project(at(i + 1, j)), project(at(i, j + 1))], 1));
                        if i + j < m - 1 {
                            faces.push((vec![project(at(i + 1, j)), project(at(i + 1, j + 1)), project(at(i, j + 1))], 1));
                        }
                    }
                }
            }
        }
    }
    Chain::reduce(2, norm.dimension, faces)
}

fn cube(norm: &NormSpec) -> Result<Chain> {
    let v = |x: i64, y: i64, z: i64| embed(norm, vec![q(x), q(y), q(z)]);
    let quads = [
        [v(0, 0, 0), v(0, 1, 0), v(1, 1, 0), v(1, 0, 0)],
        [v(0, 0, 1), v(1, 0, 1), v(1, 1, 1), v(0, 1, 1)],
        [v(0, 0, 0), v(1, 0, 0), v(1, 0, 1), v(0, 0, 1)],
        [v(0, 1, 0), v(0, 1, 1), v(1, 1, 1), v(1, 1, 0)],
        [v(0, 0, 0), v(0, 0, 1), v(0, 1, 1), v(0, 1, 0)],
        [v(1, 0, 0), v(1, 1, 0), v(1, 1, 1), v(1, 0, 1)],
    ];
    let faces = quads.iter().flat_map(|[a, b, c, d]| {
        [(vec![a.clone(), b.clone(), c.clone()], 1), (vec![a.clone(), c.clone(), d.clone()], 1)]
    });
    Chain::reduce(2, norm.dimension, faces)
}

/// Builds a cycle of the requested family in the ambient space of `norm`.
/// Only the perturbed polygon consumes `seed`.
pub fn generate(spec: &GeneratorSpec, norm: &NormSpec, seed: u64) -> Result<Chain> {
    let zero = Q::from_integer(0.into());
    let chain = match spec {
        GeneratorSpec::RegularPolygon { n, radius } => {
            need_ambient(norm, 2, "regular_polygon")?;
            if *n < 3 || *radius <= zero {
                return Err(invalid(format!("regular_polygon needs n >= 3 and radius > 0, got n = {n}, radius = {radius}")));
            }
            let r = to_f64(radius);
            let pts: Vec<Point> = (0..*n).map(|i| polar(norm, r, 2.0 * PI * i as f64 / *n as f64)).collect();
            Chain::reduce(1, norm.dimension, polygon_terms(&pts))?
        }
        GeneratorSpec::PerturbedPolygon { n, radius, noise } => {
            need_ambient(norm, 2, "perturbed_polygon")?;
            if *n < 3 || *radius <= zero || *noise < zero || *noise >= q(1) {
                return Err(invalid("perturbed_polygon needs n >= 3, radius > 0 and 0 <= noise < 1"));
            }
            let (r, eps) = (to_f64(radius), to_f64(noise));
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let step = 2.0 * PI / *n as f64;
            let pts: Vec<Point> = (0..*n)
                .map(|i| {
                    let dr = rng.gen_range(-0.5..0.5) * eps;
                    let dt = rng.gen_range(-0.5..0.5) * eps;
                    polar(norm, r * (1.0 + dr), step * (i as f64 + dt))
                })
                .collect();
            Chain::reduce(1, norm.dimension, polygon_terms(&pts))?
        }
        GeneratorSpec::MultiLoop { count, spacing } => {
            need_ambient(norm, 2, "multi_loop")?;
            if *count == 0 || *spacing <= q(1) {
                return Err(invalid("multi_loop needs count >= 1 and spacing > 1"));
            }
            let terms = (0..*count).flat_map(|i| polygon_terms(&unit_square(norm, &(spacing * q(i as i64)), &zero, 1, 1)));
            Chain::reduce(1, norm.dimension, terms)?
        }
        GeneratorSpec::PolyhedralSphere { level } => {
            need_ambient(norm, 3, "polyhedral_sphere")?;
            sphere(norm, *level)?
        }
        GeneratorSpec::ThinRectangle { aspect } => {
            need_ambient(norm, 2, "thin_rectangle")?;
            if *aspect <= zero {
                return Err(invalid(format!("thin_rectangle needs aspect > 0, got {aspect}")));
            }
            let pts = [(zero.clone(), zero.clone()), (aspect.clone(), zero.clone()), (aspect.clone(), q(1)), (zero.clone(), q(1))]
                .into_iter()
                .map(|(x, y)| embed(norm, vec![x, y]))
                .collect::<Vec<_>>();
            Chain::reduce(1, norm.dimension, polygon_terms(&pts))?
        }
        GeneratorSpec::FigureEight => {
            need_ambient(norm, 2, "figure_eight")?;
            let a = unit_square(norm, &zero, &zero, 1, 1);
            let b = unit_square(norm, &zero, &zero, -1, -1);
            Chain::reduce(1, norm.dimension, polygon_terms(&a).into_iter().chain(polygon_terms(&b)))?
        }
        GeneratorSpec::CubeSurface => {
            need_ambient(norm, 3, "cube_surface")?;
            cube(norm)?
        }
    };
    if !chain.is_cycle() {
        return Err(Error::Certificate(format!("generated {spec:?} is not a cycle")));
    }
    Ok(chain)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::normed_space::NormedSpace;
    use crate::rational::qr;
    use approx::assert_relative_eq;

    fn e(n: usize) -> NormSpec {
        NormSpec::euclidean(n)
    }

    #[test]
    fn square_perimeter() {
        let c = generate(&GeneratorSpec::RegularPolygon { n: 4, radius: q(1) }, &e(2), 0).unwrap();
        let m = c.mass(&NormedSpace::new(e(2)).unwrap()).unwrap();
        assert_relative_eq!(m, 8.0 * (PI / 4.0).sin(), max_relative = 1e-11);
        assert_relative_eq!(m, 4.0 * 2f64.sqrt(), max_relative = 1e-11);
    }

    #[test]
    fn polygon_perimeter_formula() {
        for n in [3, 7, 64] {
            let c = generate(&GeneratorSpec::RegularPolygon { n, radius: qr(5, 2) }, &e(2), 0).unwrap();
            let m = c.mass(&NormedSpace::new(e(2)).unwrap()).unwrap();
            assert_relative_eq!(m, 2.5 * 2.0 * n as f64 * (PI / n as f64).sin(), max_relative = 1e-10);
        }
    }

    #[test]
    fn two_loops_are_two_components() {
        let c = generate(&GeneratorSpec::MultiLoop { count: 2, spacing: q(100) }, &e(2), 0).unwrap();
        assert!(c.is_cycle());
        let (near, far): (Vec<_>, Vec<_>) = c.vertices().into_iter().partition(|v| v.0[0] < q(50));
        assert_eq!((near.len(), far.len()), (4, 4));
    }

    #[test]
    fn octahedron() {
        let c = generate(&GeneratorSpec::PolyhedralSphere { level: 0 }, &e(3), 0).unwrap();
        assert_eq!(c.len(), 8);
        assert_eq!(c.vertices().len(), 6);
        let s = generate(&GeneratorSpec::PolyhedralSphere { level: 2 }, &e(3), 0).unwrap();
        assert_eq!(s.len(), 128);
        let m = s.mass(&NormedSpace::new(e(3)).unwrap()).unwrap();
        assert!(m < 4.0 * PI && m > 0.85 * 4.0 * PI);
    }

    #[test]
    fn perturbed_polygon_is_deterministic() {
        let spec = GeneratorSpec::PerturbedPolygon { n: 12, radius: q(1), noise: qr(1, 2) };
        let a = generate(&spec, &e(2), 9).unwrap();
        assert_eq!(a, generate(&spec, &e(2), 9).unwrap());
        assert_ne!(a, generate(&spec, &e(2), 10).unwrap());
    }

    #[test]
    fn degenerate_parameters() {
        assert!(generate(&GeneratorSpec::RegularPolygon { n: 2, radius: q(1) }, &e(2), 0).is_err());
        assert!(generate(&GeneratorSpec::ThinRectangle { aspect: q(0) }, &e(2), 0).is_err());
        assert!(generate(&GeneratorSpec::PolyhedralSphere { level: 1 }, &e(2), 0).is_err());
        assert!(generate(&GeneratorSpec::MultiLoop { count: 0, spacing: q(3) }, &e(2), 0).is_err());
    }

    #[test]
    fn embeds_in_higher_dimension() {
        let c = generate(&GeneratorSpec::FigureEight, &e(3), 0).unwrap();
        assert_eq!(c.ambient(), 3);
        assert_eq!(c.len(), 8);
        assert!(generate(&GeneratorSpec::CubeSurface, &e(3), 0).unwrap().is_cycle());
    }
}
