//! Splitting a cycle into round pieces plus a remainder of definitely smaller mass.

use std::fmt;

use num_traits::{Signed, ToPrimitive, Zero};

use crate::chain::{diameter, Chain};
use crate::covering::{alpha, cover, CandidateStrategy};
use crate::error::{Error, Result};
use crate::normed_space::{unit_ball_volume, NormedSpace};
use crate::product_cone::cone_from_nearest;
use crate::rational::{dyadic, q, qr, to_f64, Point, Q};
use crate::restrict::{restrict_to_ball, Ball, ClipMode};
use crate::slicing::{min_distance, perturb_radius, GrowthFunction};

/// Relative slack for floating point comparisons of masses and lengths.
pub const REL_SLACK: f64 = 1e-9;

fn leq(a: f64, b: f64) -> bool {
    a <= b + REL_SLACK * b.abs().max(1e-300) + 1e-15
}

/// All constants of the decomposition and filling argument for one dimension.
#[derive(Clone, Debug, PartialEq)]
pub struct ConstantsChain {
    pub k: usize,
    /// Isoperimetric constant in dimension `k - 1` (absent for `k = 1`).
    pub c: Option<f64>,
    pub lambda: Q,
    /// Allowed relative mass excess of the pieces: `λ` for `k >= 2`, `0` for `k = 1`.
    pub lambda_slack: f64,
    pub f: f64,
    pub alpha: f64,
    pub delta: f64,
    pub e: f64,
    /// Cone constant `(k+1) γ^{k+1}` with `γ = 1`.
    pub c_k: f64,
    pub d_k: f64,
    /// Constants of dimension `k - 1` that produced `c`.
    pub prev: Option<Box<ConstantsChain>>,
}

impl ConstantsChain {
    /// Constants for dimension `k`. `c_prev` is required iff `k >= 2`; `λ` must
    /// lie in `(0, 1/6]` and is halved until `F < ω_k / k^{k/2}`.
    pub fn new(k: usize, c_prev: Option<f64>, lambda: Q) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidParameter("dimension must be at least 1".into()));
        }
        if !lambda.is_positive() || lambda > qr(1, 6) {
            return Err(Error::InvalidParameter(format!("lambda must lie in (0, 1/6], got {lambda}")));
        }
        let alpha = alpha(k);
        let c_k = (k + 1) as f64;
        if k == 1 {
            if c_prev.is_some() {
                return Err(Error::InvalidParameter("k = 1 takes no lower-dimensional constant".into()));
            }
            let f = 1.0;
            let delta = alpha;
            let e = 4.0;
            let d_k = c_k * e * (1.0 / delta).powi(2);
            return Ok(ConstantsChain {
                k,
                c: None,
                lambda: Q::zero(),
                lambda_slack: 0.0,
                f,
                alpha,
                delta,
                e,
                c_k,
                d_k,
                prev: None,
            });
        }
        let c = c_prev.ok_or_else(|| Error::InvalidParameter(format!("k = {k} needs the constant of dimension {}", k - 1)))?;
        if !(c > 0.0) {
            return Err(Error::InvalidParameter(format!("isoperimetric constant must be positive, got {c}")));
        }
        let kf = k as f64;
        let f_of = |l: f64| l.powi(k as i32 - 1) / (c.powi(k as i32 - 1) * kf.powi(k as i32));
        let cap = unit_ball_volume(k) / kf.powf(kf / 2.0);
        let mut lambda = lambda;
        while f_of(to_f64(&lambda)) >= cap {
            lambda /= q(2);
        }
        let l = to_f64(&lambda);
        if 3.0 * l > 0.5 {
            return Err(Error::InvalidParameter("support condition 3 lambda <= 1/2 fails".into()));
        }
        let f = f_of(l);
        let delta = alpha * (1.0 - l);
        let e = 4.0 / (f * (1.0 - l)).powf(1.0 / kf);
        let d_k = c_k * e * ((1.0 + l) / delta).powf((kf + 1.0) / kf);
        Ok(ConstantsChain {
            k,
            c: Some(c),
            lambda,
            lambda_slack: l,
            f,
            alpha,
            delta,
            e,
            c_k,
            d_k,
            prev: None,
        })
    }

    /// Constants for dimension `k` with every lower dimension computed first and
    /// `C = D_{k-1}` fed upward.
    pub fn recursive(k: usize, lambda: Q) -> Result<Self> {
        if k <= 1 {
            return Self::new(k, None, lambda);
        }
        let prev = Self::recursive(k - 1, lambda.clone())?;
        let mut out = Self::new(k, Some(prev.d_k), lambda)?;
        out.prev = Some(Box::new(prev));
        Ok(out)
    }

    pub fn lambda_f64(&self) -> f64 {
        self.lambda.to_f64().unwrap_or(0.0)
    }

    /// `(4/3)(1 + 3λ)`: the supports of pieces stay within this multiple of `r₀`.
    pub fn support_factor(&self) -> f64 {
        4.0 / 3.0 * (1.0 + 3.0 * self.lambda_f64())
    }

    /// Constants as `key=value` lines (lower dimensions first, prefixed `k<j>.`).
    pub fn to_kv(&self) -> Vec<(String, String)> {
        let mut out = Vec::new();
        if let Some(p) = &self.prev {
            out.extend(p.to_kv());
        }
        let pre = format!("k{}.", self.k);
        let c = self.c.map_or("none".to_string(), |c| format!("{c:.17e}"));
        out.push((format!("{pre}C"), c));
        out.push((format!("{pre}lambda"), self.lambda.to_string()));
        out.push((format!("{pre}F"), format!("{:.17e}", self.f)));
        out.push((format!("{pre}alpha"), format!("{:.17e}", self.alpha)));
        out.push((format!("{pre}delta"), format!("{:.17e}", self.delta)));
        out.push((format!("{pre}E"), format!("{:.17e}", self.e)));
        out.push((format!("{pre}C_k"), format!("{:.17e}", self.c_k)));
        out.push((format!("{pre}D_k"), format!("{:.17e}", self.d_k)));
        out
    }
}

impl fmt::Display for ConstantsChain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, v) in self.to_kv() {
            writeln!(f, "{k}={v}")?;
        }
        Ok(())
    }
}

/// A function of the radius with a derivative, as used by the growth lemma.
pub trait Profile {
    fn value(&self, r: f64) -> f64;
    fn derivative(&self, r: f64) -> f64;
}

impl Profile for GrowthFunction {
    fn value(&self, r: f64) -> f64 {
        GrowthFunction::value(self, r)
    }
    fn derivative(&self, r: f64) -> f64 {
        self.right_derivative(r)
    }
}

/// A profile given by two closures.
pub struct FnProfile<V, D> {
    pub value: V,
    pub derivative: D,
}

impl<V: Fn(f64) -> f64, D: Fn(f64) -> f64> Profile for FnProfile<V, D> {
    fn value(&self, r: f64) -> f64 {
        (self.value)(r)
    }
    fn derivative(&self, r: f64) -> f64 {
        (self.derivative)(r)
    }
}

/// `r^k / (C̄^{k-1} k^k)`, the extremal solution of the growth inequality.
pub fn ode_extremal(c_bar: f64, k: usize, r: f64) -> f64 {
    let kf = k as f64;
    r.powi(k as i32) / (c_bar.powi(k as i32 - 1) * kf.powi(k as i32))
}

/// True iff `β(r) >= r^k / (C̄^{k-1} k^k)` (relative tolerance `rel_tol`) on a
/// uniform grid of `samples + 1` radii in `[r0, r1]`.
pub fn ode_lower_bound_check(
    c_bar: f64,
    k: usize,
    beta: &dyn Profile,
    r0: f64,
    r1: f64,
    samples: usize,
    rel_tol: f64,
) -> Result<bool> {
    if k < 2 || !(r0 >= 0.0 && r1 >= r0) || !(c_bar > 0.0) || samples == 0 {
        return Err(Error::InvalidParameter(format!("bad growth lemma interval [{r0}, {r1}] for k = {k}")));
    }
    Ok((0..=samples).all(|i| {
        let r = r0 + (r1 - r0) * i as f64 / samples as f64;
        let bound = ode_extremal(c_bar, k, r);
        beta.value(r) >= bound * (1.0 - rel_tol)
    }))
}

/// Checks the hypotheses of the growth lemma on the same grid: equality at `r0`
/// and `β <= C̄ (β')^{k/(k-1)}`.
pub fn ode_hypotheses_hold(c_bar: f64, k: usize, beta: &dyn Profile, r0: f64, r1: f64, samples: usize, rel_tol: f64) -> bool {
    let start = ode_extremal(c_bar, k, r0);
    if (beta.value(r0) - start).abs() > rel_tol * start.abs().max(1e-300) {
        return false;
    }
    let expo = k as f64 / (k as f64 - 1.0);
    (0..=samples).all(|i| {
        let r = r0 + (r1 - r0) * i as f64 / samples as f64;
        beta.value(r) <= c_bar * beta.derivative(r).max(0.0).powf(expo) * (1.0 + rel_tol)
    })
}

#[derive(Clone, Debug)]
pub struct DecompositionConfig {
    pub lambda: Q,
    pub strategy: CandidateStrategy,
    /// Snap tolerance for non-polytope norms.
    pub snap_tol: f64,
    /// Radii sampled in `[r₀, 4r₀/3]` when looking for a split radius (`k >= 2`).
    pub scan_samples: usize,
}

impl Default for DecompositionConfig {
    fn default() -> Self {
        DecompositionConfig {
            lambda: qr(1, 6),
            strategy: CandidateStrategy::default(),
            snap_tol: 1e-12,
            scan_samples: 10_000,
        }
    }
}

impl DecompositionConfig {
    pub fn mode(&self, space: &NormedSpace) -> ClipMode {
        ClipMode::for_space(space, self.snap_tol)
    }
}

fn to_rational(r: f64, resolution: f64) -> Q {
    let bits = (1.0 / resolution.max(1e-300)).log2().ceil().clamp(8.0, 200.0) as u32;
    dyadic(r, bits)
}

/// A split radius for the growth function `g` of `t` about its center.
///
/// `k = 1`: a radius in `[r₀, 2r₀)` whose sphere misses the support, taken from
/// the widest gap in the union of per-segment distance ranges.
/// `k >= 2`: a radius in `[r₀, 4r₀/3]` with `C β'(r)^{k/(k-1)} < λ β(r)`,
/// the one with the largest margin among the scanned radii.
pub fn find_split_radius(
    t: &Chain,
    g: &GrowthFunction,
    r0: f64,
    consts: &ConstantsChain,
    space: &NormedSpace,
    scan_samples: usize,
) -> Result<Q> {
    if !(r0 > 0.0) {
        return Err(Error::InvalidParameter(format!("critical radius must be positive, got {r0}")));
    }
    let y = g.center();
    let k = t.dim();
    if k == 1 {
        let yf = y.to_f64();
        let (lo, hi) = (r0, 2.0 * r0);
        let mut ranges: Vec<(f64, f64)> = t
            .terms()
            .map(|(s, _)| {
                let vf: Vec<Vec<f64>> = s.vertices().iter().map(|p| p.to_f64()).collect();
                let near = min_distance(space, &vf, &yf);
                let far = s.vertices().iter().map(|p| space.dist(p, y)).fold(0.0, f64::max);
                (near, far)
            })
            .filter(|&(a, b)| b >= lo && a < hi)
            .collect();
        ranges.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut gaps: Vec<(f64, f64)> = Vec::new();
        let mut cursor = lo;
        for (a, b) in ranges {
            if a > cursor {
                gaps.push((cursor, a));
            }
            cursor = cursor.max(b);
        }
        if cursor < hi {
            gaps.push((cursor, hi));
        }
        let best = gaps
            .into_iter()
            .filter(|(a, b)| b - a > 1e-9 * r0)
            .max_by(|a, b| (a.1 - a.0).partial_cmp(&(b.1 - b.0)).unwrap());
        return match best {
            Some((a, b)) => Ok(to_rational(0.5 * (a + b), (b - a) * 1e-3)),
            None => Err(Error::NoSplitRadius {
                center: y.to_string(),
                lo,
                hi,
            }),
        };
    }
    let c = consts.c.unwrap_or(1.0);
    let l = consts.lambda_f64();
    let expo = k as f64 / (k as f64 - 1.0);
    let (lo, hi) = (r0, 4.0 * r0 / 3.0);
    let bps = g.breakpoints();
    let mut samples = scan_samples.max(16);
    for _ in 0..2 {
        let mut best: Option<(f64, f64)> = None;
        for i in 0..samples {
            let r = lo + (hi - lo) * (i as f64 + 0.5) / samples as f64;
            let near_break = bps.iter().any(|b| (b - r).abs() <= 1e-9 * r0);
            if near_break {
                continue;
            }
            let beta = g.value(r);
            let margin = l * beta - c * g.right_derivative(r).powf(expo);
            if margin > 0.0 && best.is_none_or(|(_, m)| margin > m) {
                best = Some((r, margin));
            }
        }
        if let Some((r, _)) = best {
            return Ok(to_rational(r, (hi - lo) / samples as f64 * 1e-3));
        }
        samples *= 2;
    }
    Err(Error::NoSplitRadius {
        center: y.to_string(),
        lo,
        hi,
    })
}

/// Result of cutting one round piece out of a cycle.
#[derive(Clone, Debug)]
pub struct SplitOutcome {
    pub piece: Chain,
    pub new_t: Chain,
    /// Radius actually used (after snap-mode perturbation).
    pub radius: Q,
    /// `β(r)`, the mass of `T⌊B(y, r)`.
    pub beta: f64,
    pub slice_filling: Option<Chain>,
    pub slice_filling_mass: f64,
    /// True when the slice filling was replaced by a cone from the support.
    pub fallback: bool,
}

/// `piece = T⌊B(y,r) − S`, `new_t = T⌊Bᶜ + S`, where `S` fills the slice
/// (absent for `k = 1`, where the sphere misses the support).
#[allow(clippy::too_many_arguments)]
pub fn split_off(
    t: &Chain,
    y: &Point,
    r: &Q,
    r0: f64,
    consts: &ConstantsChain,
    space: &NormedSpace,
    mode: ClipMode,
    filler: &dyn Fn(&Chain) -> Result<Chain>,
) -> Result<SplitOutcome> {
    let k = t.dim();
    let radius = match mode {
        ClipMode::Exact => r.clone(),
        ClipMode::Snap { tol } => {
            let d: Vec<f64> = t.vertices().iter().map(|v| space.dist(v, y)).collect();
            perturb_radius(r, &d, tol).0
        }
    };
    let cut = restrict_to_ball(t, &Ball::new(y.clone(), radius.clone()), mode, space)?;
    let beta = cut.inside.mass(space)?;
    let slice = cut.inside.boundary();
    let support_radius = 2.0 * r0;
    let within = |c: &Chain| c.vertices().iter().all(|v| leq(space.dist(v, y), support_radius));
    let l = consts.lambda_slack;
    let (filling, fallback) = if slice.is_zero() {
        (None, false)
    } else if k == 1 {
        return Err(Error::Certificate(format!("sphere of radius {radius} about {y} crosses the support")));
    } else {
        let s = filler(&slice)?;
        if !s.boundary().current_eq(&slice) {
            return Err(Error::Certificate("slice filling has the wrong boundary".into()));
        }
        if within(&s) {
            (Some(s), false)
        } else {
            (Some(cone_from_nearest(&slice, y, space)?.filling), true)
        }
    };
    let filling_mass = match &filling {
        Some(s) => s.mass(space)?,
        None => 0.0,
    };
    if !leq(filling_mass, l * beta) {
        return Err(Error::FillingMassExceeded {
            filling: filling_mass,
            bound: l * beta,
        });
    }
    let (piece, new_t) = match &filling {
        Some(s) => (&cut.inside - s, &cut.outside + s),
        None => (cut.inside, cut.outside),
    };
    let m = piece.mass(space)?;
    if !(leq((1.0 - l) * beta, m) && leq(m, (1.0 + l) * beta)) {
        return Err(Error::Certificate(format!(
            "piece mass {m} outside [(1-λ)β, (1+λ)β] with β = {beta}"
        )));
    }
    if !within(&piece) {
        return Err(Error::Certificate(format!("piece about {y} leaves B(y, 2r0 = {support_radius})")));
    }
    Ok(SplitOutcome {
        piece,
        new_t,
        radius,
        beta,
        slice_filling: filling,
        slice_filling_mass: filling_mass,
        fallback,
    })
}

#[derive(Clone, Debug)]
pub struct PieceRecord {
    pub chain: Chain,
    pub center: Point,
    pub r0: f64,
    pub radius: Q,
    pub mass: f64,
    pub diameter: f64,
    pub beta: f64,
    pub slice_filling: Option<Chain>,
    pub slice_filling_mass: f64,
    pub fallback: bool,
}

impl PieceRecord {
    /// `diam / M^{1/k}`, bounded by `E` for round pieces.
    pub fn roundness(&self, k: usize) -> f64 {
        if self.mass > 0.0 {
            self.diameter / self.mass.powf(1.0 / k as f64)
        } else {
            0.0
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Verdicts {
    pub identity: bool,
    pub cycles: bool,
    pub roundness: bool,
    pub remainder: bool,
    pub budget: bool,
    pub disjoint: bool,
}

impl Verdicts {
    pub fn all(&self) -> bool {
        self.identity && self.cycles && self.roundness && self.remainder && self.budget && self.disjoint
    }
}

#[derive(Clone, Debug)]
pub struct Decomposition {
    pub k: usize,
    pub pieces: Vec<PieceRecord>,
    pub remainder: Chain,
    pub input_mass: f64,
    pub remainder_mass: f64,
    pub cover_fraction: f64,
    pub constants: ConstantsChain,
    pub verdicts: Verdicts,
}

impl Decomposition {
    pub fn piece_mass(&self) -> f64 {
        self.pieces.iter().map(|p| p.mass).sum()
    }

    /// The ledger as `key=value` lines.
    pub fn to_kv(&self) -> Vec<(String, String)> {
        let mut out = vec![
            ("k".to_string(), self.k.to_string()),
            ("input_mass".into(), format!("{:.17e}", self.input_mass)),
            ("pieces".into(), self.pieces.len().to_string()),
        ];
        for (i, p) in self.pieces.iter().enumerate() {
            let pre = format!("piece.{i}.");
            out.push((format!("{pre}center"), p.center.to_string()));
            out.push((format!("{pre}r0"), format!("{:.17e}", p.r0)));
            out.push((format!("{pre}radius"), p.radius.to_string()));
            out.push((format!("{pre}mass"), format!("{:.17e}", p.mass)));
            out.push((format!("{pre}diameter"), format!("{:.17e}", p.diameter)));
            out.push((format!("{pre}roundness"), format!("{:.17e}", p.roundness(self.k))));
            out.push((format!("{pre}slice_filling_mass"), format!("{:.17e}", p.slice_filling_mass)));
        }
        out.push(("piece_mass".into(), format!("{:.17e}", self.piece_mass())));
        out.push(("remainder_mass".into(), format!("{:.17e}", self.remainder_mass)));
        out.push(("cover_fraction".into(), format!("{:.17e}", self.cover_fraction)));
        let v = &self.verdicts;
        for (name, ok) in [
            ("identity", v.identity),
            ("cycles", v.cycles),
            ("roundness", v.roundness),
            ("remainder_decay", v.remainder),
            ("mass_budget", v.budget),
            ("disjoint", v.disjoint),
        ] {
            out.push((format!("verdict.{name}"), if ok { "pass" } else { "fail" }.into()));
        }
        out
    }
}

/// Default slice filler for `k >= 2`: the certified filling of dimension `k - 1`.
pub fn default_filler<'a>(
    consts: &'a ConstantsChain,
    space: &'a NormedSpace,
    config: &'a DecompositionConfig,
) -> impl Fn(&Chain) -> Result<Chain> + 'a {
    move |slice: &Chain| {
        let prev = consts
            .prev
            .as_deref()
            .cloned()
            .map(Ok)
            .unwrap_or_else(|| ConstantsChain::recursive(slice.dim(), config.lambda.clone()))?;
        let cfg = crate::isofill::FillConfig {
            decomposition: config.clone(),
            ..Default::default()
        };
        crate::isofill::fill_with(slice, &prev, space, &cfg).map(|(s, _)| s)
    }
}

/// Round pieces `T_i` and remainder `R` with `T = Σ T_i + R`.
pub fn decompose(t: &Chain, consts: &ConstantsChain, space: &NormedSpace, config: &DecompositionConfig) -> Result<Decomposition> {
    let filler = default_filler(consts, space, config);
    decompose_with(t, consts, space, config, &filler)
}

pub fn decompose_with(
    t: &Chain,
    consts: &ConstantsChain,
    space: &NormedSpace,
    config: &DecompositionConfig,
    filler: &dyn Fn(&Chain) -> Result<Chain>,
) -> Result<Decomposition> {
    let k = t.dim();
    if k == 0 || consts.k != k {
        return Err(Error::InvalidParameter(format!(
            "decomposition of a {k}-chain with constants for k = {}",
            consts.k
        )));
    }
    if !t.is_cycle() {
        return Err(Error::NotACycle);
    }
    let input_mass = t.mass(space)?;
    if t.is_zero() {
        return Ok(Decomposition {
            k,
            pieces: Vec::new(),
            remainder: t.clone(),
            input_mass,
            remainder_mass: 0.0,
            cover_fraction: 1.0,
            constants: consts.clone(),
            verdicts: Verdicts {
                identity: true,
                cycles: true,
                roundness: true,
                remainder: true,
                budget: true,
                disjoint: true,
            },
        });
    }
    let mode = config.mode(space);
    let sel = cover(t, space, consts.f, config.strategy)?;
    let mut running = t.clone();
    let mut pieces = Vec::with_capacity(sel.selected.len());
    for cand in &sel.selected {
        let g = GrowthFunction::new(t, &cand.point, space)?;
        let r = find_split_radius(t, &g, cand.r0, consts, space, config.scan_samples)?;
        let out = split_off(&running, &cand.point, &r, cand.r0, consts, space, mode, filler)?;
        running = out.new_t;
        let mass = out.piece.mass(space)?;
        let diameter = if out.piece.is_zero() { 0.0 } else { diameter(&out.piece.vertices(), space) };
        pieces.push(PieceRecord {
            chain: out.piece,
            center: cand.point.clone(),
            r0: cand.r0,
            radius: out.radius,
            mass,
            diameter,
            beta: out.beta,
            slice_filling: out.slice_filling,
            slice_filling_mass: out.slice_filling_mass,
            fallback: out.fallback,
        });
    }
    let remainder = running;
    let remainder_mass = remainder.mass(space)?;
    let mut sum = Chain::zero(k, t.ambient());
    for p in &pieces {
        sum = &sum + &p.chain;
    }
    let piece_mass: f64 = pieces.iter().map(|p| p.mass).sum();
    let kf = k as f64;
    let verdicts = Verdicts {
        identity: (&(&sum + &remainder) - t).is_zero_current(),
        cycles: remainder.is_cycle() && pieces.iter().all(|p| p.chain.is_cycle()),
        roundness: pieces.iter().all(|p| leq(p.diameter, consts.e * p.mass.powf(1.0 / kf))),
        remainder: leq(remainder_mass, (1.0 - consts.delta) * input_mass),
        budget: leq(piece_mass, (1.0 + consts.lambda_slack) * input_mass),
        disjoint: crate::covering::doubled_balls_disjoint(&sel, space),
    };
    let d = Decomposition {
        k,
        pieces,
        remainder,
        input_mass,
        remainder_mass,
        cover_fraction: sel.fraction,
        constants: consts.clone(),
        verdicts,
    };
    if !d.verdicts.all() {
        let ledger: Vec<String> = d.to_kv().into_iter().map(|(a, b)| format!("{a}={b}")).collect();
        return Err(Error::Certificate(format!("decomposition invariants failed:\n{}", ledger.join("\n"))));
    }
    Ok(d)
}
