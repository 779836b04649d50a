//! Certified isoperimetric fillings: decompose repeatedly, cone off the round
//! pieces, and record every inequality that bounds the result.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::chain::Chain;
use crate::decomposition::{decompose, ConstantsChain, DecompositionConfig, REL_SLACK};
use crate::error::{Error, Result};
use crate::normed_space::NormedSpace;
use crate::product_cone::cone_from_support;
use crate::rational::{parse_rational, Q};

/// Constants for dimension `k`; see [`ConstantsChain::new`].
pub fn constants(k: usize, c_prev: Option<f64>, lambda: Q) -> Result<ConstantsChain> {
    ConstantsChain::new(k, c_prev, lambda)
}

#[derive(Clone, Debug)]
pub struct FillConfig {
    /// Stop iterating once `M(R_n) <= eps_stop · M(T)`.
    pub eps_stop: f64,
    pub max_rounds: usize,
    pub decomposition: DecompositionConfig,
}

impl Default for FillConfig {
    fn default() -> Self {
        FillConfig {
            eps_stop: 1e-6,
            max_rounds: 500,
            decomposition: DecompositionConfig::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RoundRecord {
    pub pieces: usize,
    pub remainder_mass: f64,
    pub cumulative_piece_mass: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PieceFill {
    pub round: usize,
    pub mass: f64,
    pub diameter: f64,
    pub filling_mass: f64,
    /// `C_k · diam · M(T_i)`
    pub bound: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FillingCertificate {
    pub k: usize,
    pub lambda: Q,
    pub eps_stop: f64,
    pub input_mass: f64,
    pub output_mass: f64,
    pub constants: ConstantsChain,
    pub rounds: Vec<RoundRecord>,
    pub pieces: Vec<PieceFill>,
    pub remainder_mass: f64,
    pub remainder_filling_mass: f64,
    pub remainder_bound: f64,
    /// Sum of all cone bounds, an upper bound for `M(S)`.
    pub certified_bound: f64,
    pub boundary_residual_zero: bool,
    /// `M(S) / M(T)^{(k+1)/k}`
    pub ratio: f64,
    pub d_k: f64,
}

fn power(k: usize) -> f64 {
    (k as f64 + 1.0) / k as f64
}

fn ratio_of(output: f64, input: f64, k: usize) -> f64 {
    if input > 0.0 {
        output / input.powf(power(k))
    } else {
        0.0
    }
}

/// Fills the cycle `t` (dimension 1 or 2) with constants computed recursively
/// from `config.decomposition.lambda`.
pub fn fill(t: &Chain, space: &NormedSpace, config: &FillConfig) -> Result<(Chain, FillingCertificate)> {
    let consts = ConstantsChain::recursive(t.dim(), config.decomposition.lambda.clone())?;
    fill_with(t, &consts, space, config)
}

pub fn fill_with(
    t: &Chain,
    consts: &ConstantsChain,
    space: &NormedSpace,
    config: &FillConfig,
) -> Result<(Chain, FillingCertificate)> {
    let k = t.dim();
    if !(1..=2).contains(&k) {
        return Err(Error::Unsupported(format!("filling {k}-cycles")));
    }
    if consts.k != k {
        return Err(Error::InvalidParameter(format!("constants for k = {} used on a {k}-cycle", consts.k)));
    }
    if !t.is_cycle() {
        return Err(Error::NotACycle);
    }
    if !(config.eps_stop >= 0.0) {
        return Err(Error::InvalidParameter(format!("eps_stop must be nonnegative, got {}", config.eps_stop)));
    }
    let input_mass = t.mass(space)?;
    let mut remainder = t.clone();
    let mut remainder_mass = input_mass;
    let mut rounds = Vec::new();
    let mut piece_chains: Vec<(usize, Chain, f64)> = Vec::new();
    let mut cumulative = 0.0;
    while !remainder.is_zero() && remainder_mass > config.eps_stop * input_mass {
        if rounds.len() >= config.max_rounds {
            break;
        }
        let d = decompose(&remainder, consts, space, &config.decomposition)?;
        if d.pieces.is_empty() {
            return Err(Error::Certificate(format!("round {} produced no pieces", rounds.len())));
        }
        let round = rounds.len();
        for p in d.pieces {
            cumulative += p.mass;
            piece_chains.push((round, p.chain, p.mass));
        }
        remainder = d.remainder;
        remainder_mass = d.remainder_mass;
        rounds.push(RoundRecord {
            pieces: piece_chains.iter().filter(|(r, _, _)| *r == round).count(),
            remainder_mass,
            cumulative_piece_mass: cumulative,
        });
    }
    let mut s = Chain::zero(k + 1, t.ambient());
    let mut pieces = Vec::with_capacity(piece_chains.len());
    for (round, chain, mass) in &piece_chains {
        let c = cone_from_support(chain, space)?;
        s = &s + &c.filling;
        pieces.push(PieceFill {
            round: *round,
            mass: *mass,
            diameter: c.diameter,
            filling_mass: c.mass,
            bound: consts.c_k * c.diameter * mass,
        });
    }
    let (remainder_filling_mass, remainder_bound) = if remainder.is_zero() {
        (0.0, 0.0)
    } else {
        let c = cone_from_support(&remainder, space)?;
        s = &s + &c.filling;
        (c.mass, c.bound)
    };
    let output_mass = s.mass(space)?;
    let boundary_residual_zero = (&s.boundary() - t).is_zero_current();
    let certified_bound = pieces.iter().map(|p| p.bound).sum::<f64>() + remainder_bound;
    let cert = FillingCertificate {
        k,
        lambda: consts.lambda.clone(),
        eps_stop: config.eps_stop,
        input_mass,
        output_mass,
        constants: consts.clone(),
        rounds,
        pieces,
        remainder_mass,
        remainder_filling_mass,
        remainder_bound,
        certified_bound,
        boundary_residual_zero,
        ratio: ratio_of(output_mass, input_mass, k),
        d_k: consts.d_k,
    };
    let report = cert.self_check();
    if !report.all_pass() {
        return Err(Error::Certificate(report.failures().join("; ")));
    }
    Ok((s, cert))
}

fn le(a: f64, b: f64) -> bool {
    a <= b + REL_SLACK * b.abs() + 1e-15
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= REL_SLACK * a.abs().max(b.abs()) + 1e-15
}

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct VerifyReport {
    pub checks: Vec<Check>,
}

impl VerifyReport {
    fn push(&mut self, name: &str, pass: bool, detail: String) {
        self.checks.push(Check {
            name: name.into(),
            pass,
            detail,
        });
    }

    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> Vec<String> {
        self.checks
            .iter()
            .filter(|c| !c.pass)
            .map(|c| format!("{}: {}", c.name, c.detail))
            .collect()
    }

    pub fn to_kv(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            let _ = writeln!(out, "check.{}={}", c.name, if c.pass { "pass" } else { "fail" });
            let _ = writeln!(out, "check.{}.detail={}", c.name, c.detail);
        }
        let _ = writeln!(out, "verdict={}", if self.all_pass() { "pass" } else { "fail" });
        out
    }
}

impl FillingCertificate {
    /// Inequalities that can be checked from the certificate alone.
    pub fn self_check(&self) -> VerifyReport {
        let mut r = VerifyReport::default();
        let c = &self.constants;
        r.push(
            "boundary",
            self.boundary_residual_zero,
            "boundary of the filling minus the cycle".into(),
        );
        let mut prev = self.input_mass;
        let mut decay = true;
        for (i, round) in self.rounds.iter().enumerate() {
            if !le(round.remainder_mass, (1.0 - c.delta) * prev) {
                decay = false;
            }
            prev = round.remainder_mass;
            let _ = i;
        }
        r.push("decay", decay, format!("M(R_n+1) <= (1 - {}) M(R_n) each round", c.delta));
        let total: f64 = self.pieces.iter().map(|p| p.mass).sum();
        let budget = (1.0 + c.lambda_slack) / c.delta * self.input_mass;
        r.push("budget", le(total, budget), format!("sum M(T_i) = {total} <= {budget}"));
        // tail bound: pieces after round n against C_k E (their mass)^{(k+1)/k}
        let mut tail = true;
        for n in 0..=self.rounds.len() {
            let later: Vec<&PieceFill> = self.pieces.iter().filter(|p| p.round >= n).collect();
            let fill: f64 = later.iter().map(|p| p.filling_mass).sum();
            let mass: f64 = later.iter().map(|p| p.mass).sum();
            if !le(fill, c.c_k * c.e * mass.powf(power(self.k))) {
                tail = false;
            }
        }
        r.push("tail", tail, "sum over later pieces of M(S_i) <= C_k E (sum M(T_i))^{(k+1)/k}".into());
        let per_piece = self.pieces.iter().all(|p| le(p.filling_mass, p.bound));
        r.push("cone_bounds", per_piece, "M(S_i) <= C_k diam(T_i) M(T_i) per piece".into());
        r.push(
            "certified_bound",
            le(self.output_mass, self.certified_bound),
            format!("M(S) = {} <= sum of cone bounds {}", self.output_mass, self.certified_bound),
        );
        r.push(
            "ratio",
            le(self.ratio, self.d_k),
            format!("M(S)/M(T)^((k+1)/k) = {} <= D_k = {}", self.ratio, self.d_k),
        );
        r
    }

    /// Additive slack of the certified total over `D_k M(T)^{(k+1)/k}` (0 when within).
    pub fn bound_slack(&self) -> f64 {
        (self.certified_bound - self.d_k * self.input_mass.powf(power(self.k))).max(0.0)
    }

    pub fn to_kv(&self) -> String {
        let mut out = String::new();
        let mut line = |k: &str, v: String| {
            let _ = writeln!(out, "{k}={v}");
        };
        line("certificate", "isochain-fill 1".into());
        line("k", self.k.to_string());
        line("lambda", self.lambda.to_string());
        line("eps_stop", format!("{:e}", self.eps_stop));
        line("input_mass", format!("{:.17e}", self.input_mass));
        line("output_mass", format!("{:.17e}", self.output_mass));
        line("ratio", format!("{:.17e}", self.ratio));
        line("D_k", format!("{:.17e}", self.d_k));
        line("rounds", self.rounds.len().to_string());
        for (i, r) in self.rounds.iter().enumerate() {
            line(&format!("round.{i}.pieces"), r.pieces.to_string());
            line(&format!("round.{i}.remainder_mass"), format!("{:.17e}", r.remainder_mass));
            line(&format!("round.{i}.cumulative_piece_mass"), format!("{:.17e}", r.cumulative_piece_mass));
        }
        line("pieces", self.pieces.len().to_string());
        for (i, p) in self.pieces.iter().enumerate() {
            line(&format!("piece.{i}.round"), p.round.to_string());
            line(&format!("piece.{i}.mass"), format!("{:.17e}", p.mass));
            line(&format!("piece.{i}.diameter"), format!("{:.17e}", p.diameter));
            line(&format!("piece.{i}.filling_mass"), format!("{:.17e}", p.filling_mass));
            line(&format!("piece.{i}.bound"), format!("{:.17e}", p.bound));
        }
        line("remainder_mass", format!("{:.17e}", self.remainder_mass));
        line("remainder_filling_mass", format!("{:.17e}", self.remainder_filling_mass));
        line("remainder_bound", format!("{:.17e}", self.remainder_bound));
        line("certified_bound", format!("{:.17e}", self.certified_bound));
        line("bound_slack", format!("{:.17e}", self.bound_slack()));
        line(
            "boundary_residual",
            if self.boundary_residual_zero { "zero" } else { "nonzero" }.into(),
        );
        for (k, v) in self.constants.to_kv() {
            line(&format!("const.{k}"), v);
        }
        out
    }

    /// Parses the output of [`FillingCertificate::to_kv`]; constants are recomputed
    /// from `k` and `lambda`, while the recorded `D_k` is kept as written.
    pub fn parse_kv(text: &str) -> Result<Self> {
        let mut map: BTreeMap<&str, (usize, &str)> = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let l = raw.trim();
            if l.is_empty() || l.starts_with('#') {
                continue;
            }
            let Some((k, v)) = l.split_once('=') else {
                return Err(Error::parse(i + 1, 1, "expected key=value"));
            };
            map.insert(k.trim(), (i + 1, v.trim()));
        }
        let get = |k: &str| -> Result<(usize, &str)> {
            map.get(k)
                .copied()
                .ok_or_else(|| Error::parse(0, 0, format!("missing key '{k}'")))
        };
        let num = |k: &str| -> Result<f64> {
            let (line, v) = get(k)?;
            v.parse::<f64>().map_err(|e| Error::parse(line, k.len() + 2, format!("{k}: {e}")))
        };
        let int = |k: &str| -> Result<usize> {
            let (line, v) = get(k)?;
            v.parse::<usize>().map_err(|e| Error::parse(line, k.len() + 2, format!("{k}: {e}")))
        };
        let k = int("k")?;
        let (lline, lraw) = get("lambda")?;
        let lambda = parse_rational(lraw).map_err(|e| Error::parse(lline, 8, e))?;
        let constants = if k == 1 {
            ConstantsChain::recursive(1, crate::rational::qr(1, 6))?
        } else {
            ConstantsChain::recursive(k, lambda.clone())?
        };
        let mut rounds = Vec::new();
        for i in 0..int("rounds")? {
            rounds.push(RoundRecord {
                pieces: int(&format!("round.{i}.pieces"))?,
                remainder_mass: num(&format!("round.{i}.remainder_mass"))?,
                cumulative_piece_mass: num(&format!("round.{i}.cumulative_piece_mass"))?,
            });
        }
        let mut pieces = Vec::new();
        for i in 0..int("pieces")? {
            pieces.push(PieceFill {
                round: int(&format!("piece.{i}.round"))?,
                mass: num(&format!("piece.{i}.mass"))?,
                diameter: num(&format!("piece.{i}.diameter"))?,
                filling_mass: num(&format!("piece.{i}.filling_mass"))?,
                bound: num(&format!("piece.{i}.bound"))?,
            });
        }
        let (bline, b) = get("boundary_residual")?;
        let boundary_residual_zero = match b {
            "zero" => true,
            "nonzero" => false,
            other => return Err(Error::parse(bline, 19, format!("bad boundary_residual '{other}'"))),
        };
        Ok(FillingCertificate {
            k,
            lambda,
            eps_stop: num("eps_stop")?,
            input_mass: num("input_mass")?,
            output_mass: num("output_mass")?,
            constants,
            rounds,
            pieces,
            remainder_mass: num("remainder_mass")?,
            remainder_filling_mass: num("remainder_filling_mass")?,
            remainder_bound: num("remainder_bound")?,
            certified_bound: num("certified_bound")?,
            boundary_residual_zero,
            ratio: num("ratio")?,
            d_k: num("D_k")?,
        })
    }
}

/// Recomputes every certificate line from `t` and `s` alone.
pub fn verify(t: &Chain, s: &Chain, cert: &FillingCertificate, space: &NormedSpace) -> Result<VerifyReport> {
    let mut r = VerifyReport::default();
    let k = t.dim();
    r.push(
        "dimensions",
        s.dim() == k + 1 && cert.k == k && s.ambient() == t.ambient(),
        format!("T is a {k}-chain, S a {}-chain, certificate for k = {}", s.dim(), cert.k),
    );
    if s.dim() != k + 1 || s.ambient() != t.ambient() {
        return Ok(r);
    }
    let residual = &s.boundary() - t;
    r.push(
        "boundary",
        residual.is_zero_current(),
        format!("boundary residual has {} simplices before cancellation", residual.len()),
    );
    let mt = t.mass(space)?;
    let ms = s.mass(space)?;
    r.push("input_mass", close(mt, cert.input_mass), format!("M(T) = {mt}, recorded {}", cert.input_mass));
    r.push("output_mass", close(ms, cert.output_mass), format!("M(S) = {ms}, recorded {}", cert.output_mass));
    let lambda = if k == 1 { crate::rational::qr(1, 6) } else { cert.lambda.clone() };
    let consts = ConstantsChain::recursive(k, lambda)?;
    r.push(
        "constants",
        close(consts.d_k, cert.d_k),
        format!("D_k recomputed {}, recorded {}", consts.d_k, cert.d_k),
    );
    let ratio = ratio_of(ms, mt, k);
    r.push(
        "ratio",
        close(ratio, cert.ratio) && le(ratio, cert.d_k) && le(ratio, consts.d_k),
        format!("ratio {ratio} (recorded {}) against D_k {}", cert.ratio, cert.d_k),
    );
    let mut recomputed = cert.clone();
    recomputed.constants = consts;
    recomputed.input_mass = mt;
    recomputed.output_mass = ms;
    recomputed.ratio = ratio;
    recomputed.boundary_residual_zero = residual.is_zero_current();
    let sum = cert.pieces.iter().map(|p| p.bound).sum::<f64>() + cert.remainder_bound;
    r.push(
        "bound_sum",
        close(sum, cert.certified_bound),
        format!("sum of recorded bounds {sum}, recorded total {}", cert.certified_bound),
    );
    for c in recomputed.self_check().checks {
        if ["decay", "budget", "tail", "cone_bounds", "certified_bound"].contains(&c.name.as_str()) {
            r.checks.push(c);
        }
    }
    Ok(r)
}
