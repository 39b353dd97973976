use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn viewdb(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_viewdb"))
        .current_dir(dir)
        .args(args)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn workspace(files: &[(&str, &str)]) -> TempDir {
    let dir = tempfile::tempdir().unwrap();
    for (name, text) in files {
        fs::write(dir.path().join(name), text).unwrap();
    }
    dir
}

const FK_SCHEMA: &str = "relation r/2.\nrelation s/2.\nfk r[2] -> s[1].\nfk s[1] -> r[1].\n";
const COPY: &str = "gav: r(X, Y) :- r0(X, Y).\n";

#[test]
fn chase_then_answer() {
    let dir = workspace(&[("t.schema", FK_SCHEMA), ("m.glav", COPY), ("src.facts", "r0(a, b).\n")]);
    let out = viewdb(
        dir.path(),
        &["chase", "--schema", "t.schema", "--mapping", "m.glav", "--source", "src.facts", "--out", "can.facts"],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let can = fs::read_to_string(dir.path().join("can.facts")).unwrap();
    assert_eq!(can, "r(a, b).\nr(b, #2).\nr(#2, #4).\ns(b, #1).\ns(#2, #3).\n");

    let ans = viewdb(dir.path(), &["answer", "--canonical", "can.facts", "--query", "q(X) :- r(X, Y)."]);
    assert_eq!(stdout(&ans), "a\nb\n");
    fs::write(dir.path().join("q.rule"), "q(X, Y) :- s(X, Y).\n").unwrap();
    let ans = viewdb(dir.path(), &["answer", "--canonical", "can.facts", "--query", "q.rule"]);
    assert_eq!(stdout(&ans), "");
    let ans = viewdb(dir.path(), &["answer", "--canonical", "can.facts", "--query", ":- r(a, X)."]);
    assert_eq!(stdout(&ans), "true\n");
}

#[test]
fn chase_writes_to_stdout_by_default() {
    let dir = workspace(&[("t.schema", FK_SCHEMA), ("m.glav", COPY), ("src.facts", "r0(a, b).\n")]);
    let out = viewdb(dir.path(), &["chase", "--schema", "t.schema", "--mapping", "m.glav", "--source", "src.facts"]);
    assert!(stdout(&out).starts_with("r(a, b).\n"));
}

#[test]
fn exit_codes() {
    let dir = workspace(&[
        ("egd.schema", "relation r/2.\negd: r(X, Y), r(X, Z) -> Y = Z.\n"),
        ("key.schema", "relation r/2 key(1).\n"),
        ("m.glav", COPY),
        ("clash.facts", "r0(a, b).\nr0(a, c).\n"),
        ("bad.facts", "r0(a, b\n"),
        ("x.facts", "r(a, b).\n"),
    ]);
    let egd = viewdb(
        dir.path(),
        &["chase", "--schema", "egd.schema", "--mapping", "m.glav", "--source", "clash.facts"],
    );
    assert_eq!(egd.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&egd.stderr).contains("distinct constants b and c"));

    let key = viewdb(
        dir.path(),
        &["chase", "--schema", "key.schema", "--mapping", "m.glav", "--source", "clash.facts"],
    );
    assert_eq!(key.status.code(), Some(1));

    let bad = viewdb(dir.path(), &["equiv", "--a", "bad.facts", "--b", "x.facts"]);
    assert_eq!(bad.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("bad.facts"));

    let missing = viewdb(dir.path(), &["equiv", "--a", "nope.facts", "--b", "x.facts"]);
    assert_eq!(missing.status.code(), Some(2));

    let same = viewdb(dir.path(), &["equiv", "--a", "x.facts", "--b", "x.facts"]);
    assert_eq!(same.status.code(), Some(0));
    assert_eq!(stdout(&same), "true\n");
}

#[test]
fn source_schema_is_checked() {
    let dir = workspace(&[
        ("t.schema", "relation r/2.\n"),
        ("src.schema", "relation r0/2 key(1).\n"),
        ("m.glav", COPY),
        ("clash.facts", "r0(a, b).\nr0(a, c).\n"),
    ]);
    let out = viewdb(
        dir.path(),
        &[
            "chase", "--schema", "t.schema", "--mapping", "m.glav", "--source", "clash.facts",
            "--source-schema", "src.schema",
        ],
    );
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn equiv_weak_and_leq() {
    let dir = workspace(&[("n.facts", "r(a, #1).\n"), ("g.facts", "r(a).\n")]);
    let strict = viewdb(dir.path(), &["equiv", "--a", "n.facts", "--b", "g.facts", "--bound", "1"]);
    assert_eq!(stdout(&strict), "false\n");
    let weak = viewdb(dir.path(), &["equiv", "--a", "n.facts", "--b", "g.facts", "--bound", "1", "--weak"]);
    assert_eq!(stdout(&weak), "true\n");
    let leq = viewdb(dir.path(), &["equiv", "--a", "g.facts", "--b", "n.facts", "--bound", "1", "--leq"]);
    assert_eq!(stdout(&leq), "true\n");
}

#[test]
fn flux_and_classify() {
    let dir = workspace(&[
        ("a.facts", "r(a, b).\n"),
        ("b.facts", "t(a).\n"),
        ("f.map", "t <- q(X) :- r(X, Y). variant=exact\n"),
    ]);
    let flux = viewdb(
        dir.path(),
        &["flux", "--morphism", "f.map", "--dom", "a.facts", "--cod", "b.facts", "--bound", "1"],
    );
    assert!(flux.status.success(), "{}", String::from_utf8_lossy(&flux.stderr));
    assert_eq!(stdout(&flux), "v1(a).\n");
    let class = viewdb(
        dir.path(),
        &["classify", "--morphism", "f.map", "--dom", "a.facts", "--cod", "b.facts"],
    );
    assert_eq!(stdout(&class), "mono false\nepi true\niso false\n");
}

#[test]
fn variant_violations_are_input_errors() {
    let dir = workspace(&[
        ("a.facts", "r(a, b).\n"),
        ("b.facts", "t(c).\n"),
        ("f.map", "t <- q(X) :- r(X, Y). variant=exact\n"),
    ]);
    let out = viewdb(
        dir.path(),
        &["classify", "--morphism", "f.map", "--dom", "a.facts", "--cod", "b.facts"],
    );
    assert_eq!(out.status.code(), Some(2));
}

/// The two morphisms of the composition example, as map files with one
/// translation table per component.
fn hidden_element() -> TempDir {
    let mut files: Vec<(String, String)> = Vec::new();
    let mut map = String::new();
    let mut other = String::new();
    let f: [(&str, &[&str], &str); 4] = [
        ("qA1", &["a1", "a2"], "b1"),
        ("qA2", &["a2", "a3"], "b2"),
        ("qA3", &["a4"], "b3"),
        ("qA4", &["a4", "a5"], "b6"),
    ];
    let g: [(&str, &[&str], &str); 3] = [
        ("qB1", &["b1", "b4"], "c1"),
        ("qB2", &["b2", "b3"], "c2"),
        ("qB3", &["b4", "b5"], "c3"),
    ];
    for (into, parts) in [(&mut map, &f[..]), (&mut other, &g[..])] {
        for (label, sources, target) in parts {
            let body: Vec<String> = sources
                .iter()
                .enumerate()
                .map(|(i, s)| format!("{s}(X{i})"))
                .collect();
            into.push_str(&format!(
                "component {target} <- {label}(X0) :- {}. variant=exact translate={label}.tr\n",
                body.join(", ")
            ));
            files.push((format!("{label}.tr"), format!("{} -> {target}\n", sources[0])));
        }
    }
    files.push(("f.map".into(), map));
    files.push(("g.map".into(), other));
    for (prefix, n) in [("a", 6), ("b", 7), ("c", 4)] {
        let facts: String = (1..=n).map(|i| format!("{prefix}{i}({prefix}{i}).\n")).collect();
        files.push((format!("{prefix}.facts"), facts));
    }
    let dir = tempfile::tempdir().unwrap();
    for (name, text) in files {
        fs::write(dir.path().join(name), text).unwrap();
    }
    dir
}

const CHAIN: [&str; 9] = [
    "--morphisms", "f.map", "g.map", "--dom", "a.facts", "--mid", "b.facts", "--cod", "c.facts",
];

#[test]
fn compose_reports_boundaries() {
    let dir = hidden_element();
    let mut args = vec!["compose"];
    args.extend(CHAIN);
    args.extend(["--dot", "h.dot"]);
    let out = viewdb(dir.path(), &args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    assert!(text.starts_with("sources: a1, a2, a3, a4\ntargets: c1, c2\n"), "{text}");
    let dot = fs::read_to_string(dir.path().join("h.dot")).unwrap();
    assert!(dot.starts_with("digraph"));
}

#[test]
fn dot_marks_the_hidden_element() {
    let dir = hidden_element();
    let mut args = vec!["dot"];
    args.extend(CHAIN);
    let out = viewdb(dir.path(), &args);
    let dot = stdout(&out);
    let b4: Vec<&str> = dot.lines().filter(|l| l.contains("_b4\" [")).collect();
    assert!(!b4.is_empty());
    assert!(b4.iter().all(|l| l.contains("dashed")), "{b4:?}");
    let b1: Vec<&str> = dot.lines().filter(|l| l.contains("_b1\" [")).collect();
    assert!(b1.iter().all(|l| !l.contains("dashed")), "{b1:?}");
    // same bytes on a second run
    assert_eq!(viewdb(dir.path(), &args).stdout, out.stdout);
}

#[test]
fn chain_needs_matching_objects() {
    let dir = hidden_element();
    let out = viewdb(
        dir.path(),
        &["compose", "--morphisms", "f.map", "g.map", "--dom", "a.facts", "--cod", "c.facts"],
    );
    assert_eq!(out.status.code(), Some(2));
}
