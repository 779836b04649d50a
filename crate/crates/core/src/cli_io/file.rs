use std::fmt::Write as _;
use std::path::Path;

use crate::chain::{Chain, Simplex};
use crate::error::{Error, Result};
use crate::normed_space::NormSpec;
use crate::rational::{parse_rational, Point, Q};

const MAGIC: &str = "isochain";
const VERSION: &str = "1";

/// A chain together with the norm of its ambient space.
#[derive(Clone, Debug, PartialEq)]
pub struct ChainFile {
    pub norm: NormSpec,
    pub chain: Chain,
    /// Non-fatal findings from parsing, e.g. repeated simplices.
    pub warnings: Vec<String>,
}

impl ChainFile {
    pub fn new(norm: NormSpec, chain: Chain) -> Result<Self> {
        if norm.dimension != chain.ambient() {
            return Err(Error::DimensionMismatch {
                expected: norm.dimension,
                got: chain.ambient(),
            });
        }
        Ok(ChainFile {
            norm,
            chain,
            warnings: Vec::new(),
        })
    }
}

/// Parses a norm description: `euclidean`, `lp <p>`, `linf`, `l1`, or
/// `polytope <v> <v> ...` with comma-separated rational coordinates per vertex.
pub fn parse_norm(text: &str, dimension: usize) -> std::result::Result<NormSpec, String> {
    let mut words = text.split_whitespace();
    let kind = words.next().ok_or("empty norm")?;
    let rest: Vec<&str> = words.collect();
    let spec = match kind {
        "euclidean" => NormSpec::euclidean(dimension),
        "linf" => NormSpec::linf(dimension),
        "l1" => NormSpec::l1_polytope(dimension),
        "lp" => {
            let [p] = rest.as_slice() else {
                return Err("lp needs exactly one exponent".into());
            };
            NormSpec::lp(dimension, parse_rational(p)?)
        }
        "polytope" => {
            let mut vertices = Vec::new();
            for v in &rest {
                let coords = v.split(',').map(parse_rational).collect::<std::result::Result<Vec<Q>, _>>()?;
                if coords.len() != dimension {
                    return Err(format!("polytope vertex '{v}' has {} coordinates, expected {dimension}", coords.len()));
                }
                vertices.push(Point::new(coords));
            }
            NormSpec::polytope(dimension, vertices)
        }
        other => return Err(format!("unknown norm kind '{other}'")),
    };
    if kind != "lp" && kind != "polytope" && !rest.is_empty() {
        return Err(format!("unexpected arguments after '{kind}'"));
    }
    Ok(spec)
}

struct Lines<'a> {
    inner: std::iter::Peekable<std::iter::Enumerate<std::str::Lines<'a>>>,
    last: usize,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        Lines {
            inner: text.lines().enumerate().peekable(),
            last: 0,
        }
    }

    /// Next non-blank line with comments stripped, as (1-based line number, text).
    fn next(&mut self) -> Option<(usize, &'a str)> {
        for (i, raw) in self.inner.by_ref() {
            let body = raw.split('#').next().unwrap_or("");
            if !body.trim().is_empty() {
                self.last = i + 1;
                return Some((i + 1, body));
            }
        }
        None
    }

    fn expect(&mut self, what: &str) -> Result<(usize, &'a str)> {
        self.next()
            .ok_or_else(|| Error::parse(self.last + 1, 1, format!("unexpected end of file, expected {what}")))
    }
}

/// Whitespace-separated tokens with 1-based start columns.
fn tokens(line: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, c) in line.char_indices() {
        match (c.is_whitespace(), start) {
            (true, Some(s)) => {
                out.push((s + 1, &line[s..i]));
                start = None;
            }
            (false, None) => start = Some(i),
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push((s + 1, &line[s..]));
    }
    out
}

fn keyword_line<'a>(lines: &mut Lines<'a>, key: &str) -> Result<(usize, Vec<(usize, &'a str)>)> {
    let (n, line) = lines.expect(&format!("'{key}' line"))?;
    let toks = tokens(line);
    match toks.first() {
        Some((_, k)) if *k == key => Ok((n, toks[1..].to_vec())),
        Some((c, k)) => Err(Error::parse(n, *c, format!("expected '{key}', found '{k}'"))),
        None => unreachable!("blank lines are skipped"),
    }
}

fn count(n: usize, toks: &[(usize, &str)], key: &str) -> Result<usize> {
    match toks {
        [(c, v)] => v.parse().map_err(|_| Error::parse(n, *c, format!("'{key}' needs a nonnegative integer, found '{v}'"))),
        [] => Err(Error::parse(n, key.len() + 1, format!("'{key}' needs a value"))),
        [_, (c, _), ..] => Err(Error::parse(n, *c, "trailing tokens")),
    }
}

/// Parses chain file text.
pub fn parse_chain_file(text: &str) -> Result<ChainFile> {
    let mut lines = Lines::new(text);
    let (n, head) = lines.expect("header")?;
    match tokens(head).as_slice() {
        [(_, m), (_, v)] if *m == MAGIC && *v == VERSION => {}
        [(_, m), (c, v)] if *m == MAGIC => {
            return Err(Error::parse(n, *c, format!("unsupported format version '{v}'")));
        }
        _ => return Err(Error::parse(n, 1, format!("expected header '{MAGIC} {VERSION}'"))),
    }
    let (n, t) = keyword_line(&mut lines, "ambient")?;
    let ambient = count(n, &t, "ambient")?;
    if ambient == 0 {
        return Err(Error::parse(n, t[0].0, "ambient dimension must be positive"));
    }
    let (n, line) = lines.expect("'norm' line")?;
    let toks = tokens(line);
    if toks.first().map(|t| t.1) != Some("norm") {
        return Err(Error::parse(n, toks[0].0, "expected 'norm'"));
    }
    let rest = toks.get(1).map(|(c, _)| &line[c - 1..]).unwrap_or("");
    let norm = parse_norm(rest, ambient).map_err(|e| Error::parse(n, toks.get(1).map_or(5, |t| t.0), e))?;
    let (n, t) = keyword_line(&mut lines, "dim")?;
    let dim = count(n, &t, "dim")?;
    if dim > ambient {
        return Err(Error::parse(n, t[0].0, format!("chain dimension {dim} exceeds ambient dimension {ambient}")));
    }
    let (n, t) = keyword_line(&mut lines, "vertices")?;
    let nv = count(n, &t, "vertices")?;
    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (n, line) = lines.expect("vertex coordinates")?;
        let toks = tokens(line);
        if toks.len() != ambient {
            return Err(Error::parse(n, 1, format!("vertex has {} coordinates, expected {ambient}", toks.len())));
        }
        let coords = toks
            .iter()
            .map(|(c, s)| parse_rational(s).map_err(|e| Error::parse(n, *c, e)))
            .collect::<Result<Vec<Q>>>()?;
        vertices.push(Point::new(coords));
    }
    let (n, t) = keyword_line(&mut lines, "simplices")?;
    let ns = count(n, &t, "simplices")?;
    let mut chain = Chain::zero(dim, ambient);
    let mut warnings = Vec::new();
    let mut seen: std::collections::BTreeMap<Simplex, usize> = std::collections::BTreeMap::new();
    for _ in 0..ns {
        let (n, line) = lines.expect("simplex line")?;
        let toks = tokens(line);
        if toks.len() != dim + 2 {
            return Err(Error::parse(
                n,
                1,
                format!("simplex line needs a weight and {} indices, found {} tokens", dim + 1, toks.len()),
            ));
        }
        let (wc, ws) = toks[0];
        let w: i64 = ws.parse().map_err(|_| Error::parse(n, wc, format!("bad weight '{ws}'")))?;
        if w == 0 {
            return Err(Error::parse(n, wc, "zero weight"));
        }
        let mut verts = Vec::with_capacity(dim + 1);
        for &(c, s) in &toks[1..] {
            let i: usize = s.parse().map_err(|_| Error::parse(n, c, format!("bad vertex index '{s}'")))?;
            let v = vertices
                .get(i)
                .ok_or_else(|| Error::parse(n, c, format!("vertex index {i} out of range 0..{nv}")))?;
            verts.push(v.clone());
        }
        let Some((s, sign)) = Simplex::oriented(verts) else {
            return Err(Error::parse(n, toks[1].0, "degenerate simplex"));
        };
        if let Some(first) = seen.get(&s) {
            warnings.push(format!("line {n}: simplex repeats line {first}; weights merged"));
        } else {
            seen.insert(s.clone(), n);
        }
        chain.add_term(s, sign * w);
    }
    if let Some((n, line)) = lines.next() {
        return Err(Error::parse(n, tokens(line)[0].0, "trailing content after simplex list"));
    }
    Ok(ChainFile { norm, chain, warnings })
}

/// Canonical text: vertices sorted, simplices in canonical order and orientation.
pub fn serialize_chain_file(file: &ChainFile) -> String {
    let chain = &file.chain;
    let vertices = chain.vertices();
    let mut out = String::new();
    let _ = writeln!(out, "{MAGIC} {VERSION}");
    let _ = writeln!(out, "ambient {}", chain.ambient());
    let _ = writeln!(out, "norm {}", file.norm);
    let _ = writeln!(out, "dim {}", chain.dim());
    let _ = writeln!(out, "vertices {}", vertices.len());
    for v in &vertices {
        let coords: Vec<String> = v.0.iter().map(|c| c.to_string()).collect();
        let _ = writeln!(out, "{}", coords.join(" "));
    }
    let _ = writeln!(out, "simplices {}", chain.len());
    for (s, w) in chain.terms() {
        let _ = write!(out, "{w}");
        for v in s.vertices() {
            let i = vertices.binary_search(v).expect("vertex table holds every simplex vertex");
            let _ = write!(out, " {i}");
        }
        out.push('\n');
    }
    out
}

pub fn read_chain_file(path: &Path) -> Result<ChainFile> {
    parse_chain_file(&std::fs::read_to_string(path)?)
}

pub fn write_chain_file(file: &ChainFile, path: &Path) -> Result<()> {
    std::fs::write(path, serialize_chain_file(file))?;
    Ok(())
}
