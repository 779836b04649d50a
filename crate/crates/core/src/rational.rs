//! Exact rational scalars and points, plus the small amount of exact linear
//! algebra the chain engine needs (rank, row echelon form, linear solves).

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Q = BigRational;

pub fn q(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn qr(num: i64, den: i64) -> Q {
    Q::new(BigInt::from(num), BigInt::from(den))
}

pub fn to_f64(x: &Q) -> f64 {
    x.to_f64().unwrap_or_else(|| {
        if x.is_negative() {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        }
    })
}

/// Rounds `x` to the nearest multiple of `2^-bits`.
pub fn dyadic(x: f64, bits: u32) -> Q {
    let scale = (bits as f64).exp2();
    let n = (x * scale).round();
    let num = BigInt::from(n as i128);
    Q::new(num, BigInt::one() << bits)
}

/// Snaps a float to a rational whose absolute error is at most `tol`.
pub fn snap(x: f64, tol: f64) -> Q {
    let bits = (1.0 / tol).log2().ceil().max(0.0) as u32 + 1;
    dyadic(x, bits)
}

/// Parses `p/q`, integers, and plain or scientific decimals exactly.
pub fn parse_rational(s: &str) -> std::result::Result<Q, String> {
    let s = s.trim();
    if s.is_empty() {
        return Err("empty number".into());
    }
    if let Some((n, d)) = s.split_once('/') {
        let n = BigInt::from_str(n.trim()).map_err(|e| format!("bad numerator in '{s}': {e}"))?;
        let d = BigInt::from_str(d.trim()).map_err(|e| format!("bad denominator in '{s}': {e}"))?;
        if d.is_zero() {
            return Err(format!("zero denominator in '{s}'"));
        }
        return Ok(Q::new(n, d));
    }
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(i) => {
            let e: i32 = s[i + 1..]
                .parse()
                .map_err(|e| format!("bad exponent in '{s}': {e}"))?;
            (&s[..i], e)
        }
        None => (s, 0),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    let negative = int_part.starts_with('-');
    let digits = format!("{}{}", int_part.trim_start_matches(['-', '+']), frac_part);
    if digits.is_empty() || !digits.chars().all(|c| c.is_ascii_digit()) {
        return Err(format!("not a number: '{s}'"));
    }
    let mut value = Q::from_integer(BigInt::from_str(&digits).map_err(|e| e.to_string())?);
    let shift = exponent - frac_part.len() as i32;
    let ten = BigInt::from(10);
    if shift >= 0 {
        value *= Q::from_integer(num_traits::pow(ten, shift as usize));
    } else {
        value /= Q::from_integer(num_traits::pow(ten, (-shift) as usize));
    }
    Ok(if negative { -value } else { value })
}

/// A point (or vector) with exact rational coordinates.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Point(pub Vec<Q>);

impl Point {
    pub fn new(coords: Vec<Q>) -> Self {
        Point(coords)
    }

    pub fn from_ints(coords: &[i64]) -> Self {
        Point(coords.iter().map(|&c| q(c)).collect())
    }

    pub fn from_f64(coords: &[f64], tol: f64) -> Self {
        Point(coords.iter().map(|&c| snap(c, tol)).collect())
    }

    pub fn origin(n: usize) -> Self {
        Point(vec![Q::zero(); n])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[Q] {
        &self.0
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.0.iter().map(to_f64).collect()
    }

    pub fn sub(&self, other: &Point) -> Vec<Q> {
        self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect()
    }

    pub fn add_vec(&self, v: &[Q]) -> Point {
        Point(self.0.iter().zip(v).map(|(a, b)| a + b).collect())
    }

    /// `self + t * (other - self)`.
    pub fn lerp(&self, other: &Point, t: &Q) -> Point {
        Point(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| a + t * (b - a))
                .collect(),
        )
    }

    pub fn scale(&self, c: &Q) -> Point {
        Point(self.0.iter().map(|a| a * c).collect())
    }

    /// Centroid of a nonempty point list.
    pub fn centroid(points: &[Point]) -> Point {
        let n = points[0].dim();
        let mut acc = vec![Q::zero(); n];
        for p in points {
            for (a, x) in acc.iter_mut().zip(&p.0) {
                *a += x;
            }
        }
        let m = q(points.len() as i64);
        Point(acc.into_iter().map(|a| a / &m).collect())
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

pub fn dot(a: &[Q], b: &[Q]) -> Q {
    a.iter().zip(b).map(|(x, y)| x * y).fold(Q::zero(), |s, t| s + t)
}

pub fn dot_f64(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn euclid_f64(a: &[f64]) -> f64 {
    dot_f64(a, a).sqrt()
}

/// Reduced row echelon form. Returns the nonzero rows and their pivot columns.
pub fn rref(rows: &[Vec<Q>]) -> (Vec<Vec<Q>>, Vec<usize>) {
    let mut m: Vec<Vec<Q>> = rows.to_vec();
    let ncols = m.first().map_or(0, |r| r.len());
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..ncols {
        if row == m.len() {
            break;
        }
        let Some(p) = (row..m.len()).find(|&i| !m[i][col].is_zero()) else {
            continue;
        };
        m.swap(row, p);
        let inv = m[row][col].recip();
        for x in m[row].iter_mut() {
            *x *= &inv;
        }
        for i in 0..m.len() {
            if i != row && !m[i][col].is_zero() {
                let factor = m[i][col].clone();
                for j in col..ncols {
                    let delta = &factor * &m[row][j];
                    m[i][j] -= delta;
                }
            }
        }
        pivots.push(col);
        row += 1;
    }
    m.truncate(row);
    (m, pivots)
}

pub fn rank(rows: &[Vec<Q>]) -> usize {
    rref(rows).1.len()
}

/// Solves the square system `a x = b` exactly; `None` when singular.
pub fn solve(a: &[Vec<Q>], b: &[Q]) -> Option<Vec<Q>> {
    let n = a.len();
    let aug: Vec<Vec<Q>> = a
        .iter()
        .zip(b)
        .map(|(row, bi)| {
            let mut r = row.clone();
            r.push(bi.clone());
            r
        })
        .collect();
    let (red, pivots) = rref(&aug);
    if pivots.len() != n || pivots.iter().any(|&p| p >= n) {
        return None;
    }
    Some(red.into_iter().map(|r| r[n].clone()).collect())
}

/// Exact determinant of a square matrix.
pub fn det(a: &[Vec<Q>]) -> Q {
    let n = a.len();
    let mut m = a.to_vec();
    let mut d = Q::one();
    for col in 0..n {
        let Some(p) = (col..n).find(|&i| !m[i][col].is_zero()) else {
            return Q::zero();
        };
        if p != col {
            m.swap(p, col);
            d = -d;
        }
        d *= &m[col][col];
        for i in col + 1..n {
            if !m[i][col].is_zero() {
                let factor = &m[i][col] / &m[col][col];
                for j in col..n {
                    let delta = &factor * &m[col][j];
                    m[i][j] -= delta;
                }
            }
        }
    }
    d
}

/// Gram determinant of the given vectors (squared k-volume of the parallelotope).
pub fn gram_det(vectors: &[Vec<Q>]) -> Q {
    let g: Vec<Vec<Q>> = vectors
        .iter()
        .map(|a| vectors.iter().map(|b| dot(a, b)).collect())
        .collect();
    det(&g)
}

pub fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

/// A convenient error for mismatched coordinate counts.
pub fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}
