//! Chain files, test-cycle generators, mesh export and key=value reports.

mod export;
mod file;
mod generate;

pub use export::{export_obj, write_obj};
pub use file::{parse_chain_file, parse_norm, read_chain_file, serialize_chain_file, write_chain_file, ChainFile};
pub use generate::{generate, GeneratorSpec};

use std::fmt::Write as _;

/// Renders `key=value` pairs one per line.
pub fn render_kv<K: AsRef<str>, V: AsRef<str>>(pairs: &[(K, V)]) -> String {
    let mut out = String::new();
    for (k, v) in pairs {
        let _ = writeln!(out, "{}={}", k.as_ref(), v.as_ref());
    }
    out
}
