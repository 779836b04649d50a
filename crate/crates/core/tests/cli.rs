//! Drives the `isochain` binary end to end through temporary files.

use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_isochain")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn value<'a>(text: &'a str, key: &str) -> &'a str {
    text.lines()
        .find_map(|l| l.strip_prefix(key).and_then(|r| r.strip_prefix('=')))
        .unwrap_or_else(|| panic!("no key {key} in\n{text}"))
}

fn path(dir: &Path, name: &str) -> String {
    dir.join(name).to_str().unwrap().to_string()
}

#[test]
fn gen_fill_verify_export() {
    let dir = tempfile::tempdir().unwrap();
    let (t, s, c, obj) = (path(dir.path(), "t.chain"), path(dir.path(), "s.chain"), path(dir.path(), "c.txt"), path(dir.path(), "s.obj"));
    let o = run(&["gen", "perturbed-polygon", "--n", "20", "--radius", "3/2", "--noise", "1/2", "--seed", "4", "-o", &t]);
    assert!(o.status.success());
    let o = run(&["fill", &t, "-o", &s, "--cert", &c]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let cert = stdout(&o);
    assert_eq!(value(&cert, "boundary_residual"), "zero");
    assert!(value(&cert, "ratio").parse::<f64>().unwrap() <= 200.0);
    let o = run(&["verify", &t, &s, &c]);
    assert!(o.status.success());
    assert_eq!(value(&stdout(&o), "verdict"), "pass");
    let o = run(&["export", &s, "-o", &obj]);
    assert!(o.status.success());
    let text = std::fs::read_to_string(&obj).unwrap();
    assert!(text.lines().any(|l| l.starts_with("f ")));
}

#[test]
fn tampered_certificate_exits_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let (t, s, c) = (path(dir.path(), "t.chain"), path(dir.path(), "s.chain"), path(dir.path(), "c.txt"));
    assert!(run(&["gen", "regular-polygon", "--n", "12", "-o", &t]).status.success());
    assert!(run(&["fill", &t, "-o", &s, "--cert", &c]).status.success());
    let cert = std::fs::read_to_string(&c).unwrap();
    let forged: String = cert
        .lines()
        .map(|l| if l.starts_with("output_mass=") { "output_mass=1e-3".to_string() } else { l.to_string() })
        .collect::<Vec<_>>()
        .join("\n");
    std::fs::write(&c, forged).unwrap();
    let o = run(&["verify", &t, &s, &c]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(value(&stdout(&o), "check.output_mass"), "fail");
}

#[test]
fn wrong_filling_fails_verification() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b, s, c) = (
        path(dir.path(), "a.chain"),
        path(dir.path(), "b.chain"),
        path(dir.path(), "s.chain"),
        path(dir.path(), "c.txt"),
    );
    assert!(run(&["gen", "regular-polygon", "--n", "6", "-o", &a]).status.success());
    assert!(run(&["gen", "regular-polygon", "--n", "7", "-o", &b]).status.success());
    assert!(run(&["fill", &a, "-o", &s, "--cert", &c]).status.success());
    let o = run(&["verify", &b, &s, &c]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(value(&stdout(&o), "check.boundary"), "fail");
}

#[test]
fn input_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = path(dir.path(), "bad.chain");
    std::fs::write(&bad, "isochain 1\nambient 2\nnorm euclidean\ndim 1\nvertices 2\n0 0\n1 0\nsimplices 1\n0 0 1\n").unwrap();
    let o = run(&["fill", &bad]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 9, column 1"));
    assert_eq!(run(&["fill", &path(dir.path(), "missing.chain")]).status.code(), Some(2));
    assert_eq!(run(&["gen", "regular-polygon", "--n", "2"]).status.code(), Some(2));
    assert_eq!(run(&["constants", "--k", "2", "--lambda", "1/2"]).status.code(), Some(2));
    assert_eq!(run(&["slice", &bad, "--center", "0,0", "--radius", "x"]).status.code(), Some(2));
    assert_eq!(run(&["no-such-command"]).status.code(), Some(2));
}

#[test]
fn not_a_cycle_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let seg = path(dir.path(), "seg.chain");
    std::fs::write(&seg, "isochain 1\nambient 2\nnorm euclidean\ndim 1\nvertices 2\n0 0\n1 0\nsimplices 1\n1 0 1\n").unwrap();
    assert_eq!(run(&["fill", &seg]).status.code(), Some(2));
}

#[test]
fn constants_match_closed_forms() {
    let o = run(&["constants", "--k", "1"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert_eq!(value(&text, "k1.D_k").parse::<f64>().unwrap(), 200.0);
    let text = stdout(&run(&["constants", "--k", "2", "--c-prev", "200", "--lambda", "1/6"]));
    let f: f64 = value(&text, "k2.F").parse().unwrap();
    assert!((f * 4800.0 - 1.0).abs() < 1e-12);
}

#[test]
fn decompose_two_far_loops() {
    let dir = tempfile::tempdir().unwrap();
    let t = path(dir.path(), "t.chain");
    assert!(run(&["gen", "multi-loop", "--count", "2", "--spacing", "100", "-o", &t]).status.success());
    let text = stdout(&run(&["decompose", &t]));
    assert_eq!(value(&text, "pieces"), "2");
    assert_eq!(value(&text, "remainder_mass").parse::<f64>().unwrap(), 0.0);
    assert_eq!(value(&text, "verdict.identity"), "pass");
}

#[test]
fn slice_and_growth_of_a_square() {
    let dir = tempfile::tempdir().unwrap();
    let t = path(dir.path(), "sq.chain");
    assert!(run(&["gen", "regular-polygon", "--n", "4", "--norm", "linf", "-o", &t]).status.success());
    // vertices (±1, 0), (0, ±1); the sup-sphere of radius 3/4 crosses each edge twice
    let text = stdout(&run(&["slice", &t, "--center", "0,0", "--radius", "3/4"]));
    assert_eq!(value(&text, "simplices"), "8");
    assert_eq!(value(&text, "cycle"), "true");
    let text = stdout(&run(&["growth", &t, "--center", "0,0", "--radius", "1/4", "2"]));
    assert_eq!(value(&text, "beta.0").parse::<f64>().unwrap(), 0.0);
    let total: f64 = value(&text, "total_mass").parse().unwrap();
    assert_eq!(value(&text, "beta.1").parse::<f64>().unwrap(), total);
}

#[test]
fn surfaces_default_to_three_dimensions() {
    let dir = tempfile::tempdir().unwrap();
    let (t, obj) = (path(dir.path(), "oct.chain"), path(dir.path(), "oct.obj"));
    assert!(run(&["gen", "polyhedral-sphere", "-o", &t]).status.success());
    let text = std::fs::read_to_string(&t).unwrap();
    assert!(text.contains("ambient 3\n") && text.contains("simplices 8\n"));
    assert!(run(&["export", &t, "-o", &obj]).status.success());
    let obj = std::fs::read_to_string(&obj).unwrap();
    assert_eq!(obj.lines().filter(|l| l.starts_with("f ")).count(), 8);
}
