use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn corpus(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus").join(name)
}

fn polyterm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_polyterm")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn first_line(o: &Output) -> String {
    stdout(o).lines().next().unwrap_or_default().to_string()
}

#[test]
fn der_is_yes() {
    let o = polyterm(&[corpus("der.pl").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(first_line(&o), "YES");
    assert!(stdout(&o).contains("shape: simple-mixed"));
}

#[test]
fn der_forced_linear_is_maybe() {
    let o = polyterm(&[corpus("der.pl").to_str().unwrap(), "--shape", "linear"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(first_line(&o), "MAYBE");
}

#[test]
fn missing_file_is_input_error() {
    let o = polyterm(&["no/such/file.pl"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(o.stdout.is_empty());
    assert!(String::from_utf8_lossy(&o.stderr).contains("file.pl"));
}

#[test]
fn bad_flags_are_input_errors() {
    let der = corpus("der.pl");
    let der = der.to_str().unwrap();
    for bad in [
        &["--coeff-max", "0"][..],
        &["--timeout", "0"],
        &["--timeout", "-1"],
        &["--shape", "cubic"],
        &["--format", "xml"],
        &["--frobnicate"],
    ] {
        let mut args = vec![der];
        args.extend_from_slice(bad);
        let o = polyterm(&args);
        assert_eq!(o.status.code(), Some(3), "{bad:?}");
        assert!(o.stdout.is_empty(), "{bad:?}");
    }
}

#[test]
fn help_is_not_an_error() {
    let o = polyterm(&["--help"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("--coeff-max"));
}

#[test]
fn syntax_error_is_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("bad.pl");
    fs::write(&f, "%% query: p(g)\np(X) :- .\n").unwrap();
    let o = polyterm(&[f.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn query_flag_overrides_annotations() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("app.pl");
    fs::write(&f, "app([], L, L).\napp([H|T], L, [H|R]) :- app(T, L, R).\n").unwrap();
    let path = f.to_str().unwrap();

    let o = polyterm(&[path]);
    assert_eq!(o.status.code(), Some(3), "no query at all");

    let o = polyterm(&[path, "--query", "app(g,a,a)"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(first_line(&o), "YES");

    // with every argument free the first clause can be resolved forever
    let o = polyterm(&[path, "--query", "app(a,a,a)"]);
    assert_eq!(o.status.code(), Some(1));

    let o = polyterm(&[path, "--query", "app(g,a)"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn json_is_one_document() {
    let o = polyterm(&[corpus("div.pl").to_str().unwrap(), "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["verdict"], "YES");
    assert_eq!(v["shape"], "linear");
    assert!(v["relations"]["sub"]["input"].is_string());
    assert!(v["stages"].as_array().unwrap().len() >= 2);
}

#[test]
fn tiny_budget_is_timeout() {
    let o = polyterm(&[corpus("der.pl").to_str().unwrap(), "--timeout", "1e-9"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(first_line(&o), "TIMEOUT");
}

#[test]
fn batch_lines_are_ordered_by_name() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("b_loop.pl"), "%% query: p(g)\np(X) :- p(X).\n").unwrap();
    fs::write(dir.path().join("a_less.pl"), fs::read_to_string(corpus("less.pl")).unwrap())
        .unwrap();
    fs::write(dir.path().join("c_broken.pl"), "p(.\n").unwrap();
    fs::write(dir.path().join("notes.txt"), "not a program").unwrap();
    let o = polyterm(&[dir.path().to_str().unwrap()]);
    let out = stdout(&o);
    let verdicts: Vec<&str> =
        out.lines().map(|l| l.split(' ').take(2).collect::<Vec<_>>()[1]).collect();
    assert_eq!(verdicts, ["YES", "MAYBE", "ERROR"], "{out}");
    assert!(out.lines().next().unwrap().starts_with("a_less.pl: "));
    assert_eq!(o.status.code(), Some(3), "worst status wins");

    let o = polyterm(&[dir.path().to_str().unwrap(), "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let files: Vec<&str> = v.as_array().unwrap().iter().map(|e| e["file"].as_str().unwrap()).collect();
    assert_eq!(files, ["a_less.pl", "b_loop.pl", "c_broken.pl"]);
    assert_eq!(v[2]["error"].as_str().map(|s| s.contains("c_broken.pl")), Some(true));
}
