use std::fmt::Write as _;
use std::path::Path;

use crate::chain::Chain;
use crate::error::{Error, Result};

/// Wavefront OBJ text: `l` elements for 1-chains, `f` for 2-chains. Negative
/// weights reverse the element; a weight of magnitude `m > 1` repeats it `m` times.
pub fn write_obj(chain: &Chain) -> Result<String> {
    if !(1..=2).contains(&chain.dim()) {
        return Err(Error::Unsupported(format!("OBJ export of {}-chains", chain.dim())));
    }
    if chain.ambient() > 3 {
        return Err(Error::Unsupported(format!("OBJ export in ambient dimension {}", chain.ambient())));
    }
    let mut out = String::new();
    let _ = writeln!(out, "# isochain export: {}-chain, {} simplices", chain.dim(), chain.len());
    let vertices = chain.vertices();
    for v in &vertices {
        let mut c = v.to_f64();
        c.resize(3, 0.0);
        let _ = writeln!(out, "v {} {} {}", c[0], c[1], c[2]);
    }
    let tag = if chain.dim() == 1 { "l" } else { "f" };
    for (s, w) in chain.terms() {
        let mut idx: Vec<usize> = s
            .vertices()
            .iter()
            .map(|v| vertices.binary_search(v).expect("vertex table holds every simplex vertex") + 1)
            .collect();
        if w < 0 {
            idx.swap(0, 1);
        }
        if w.abs() > 1 {
            let _ = writeln!(out, "# weight {w}");
        }
        let line: Vec<String> = idx.iter().map(|i| i.to_string()).collect();
        for _ in 0..w.unsigned_abs() {
            let _ = writeln!(out, "{tag} {}", line.join(" "));
        }
    }
    Ok(out)
}

pub fn export_obj(chain: &Chain, path: &Path) -> Result<()> {
    std::fs::write(path, write_obj(chain)?)?;
    Ok(())
}
