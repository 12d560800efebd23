//! End-to-end behaviour of the `delam` binary.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn corpus(rel: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus").join(rel).to_string_lossy().into_owned()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_delam")).args(args).output().expect("run delam")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn json(args: &[&str]) -> (i32, Value) {
    let mut all = vec!["--json"];
    all.extend_from_slice(args);
    let o = run(&all);
    (o.status.code().unwrap(), serde_json::from_slice(&o.stdout).expect("one JSON object on stdout"))
}

/// A source file that lives as long as the returned guard.
struct Scratch(PathBuf);

impl Scratch {
    fn new(name: &str, src: &str) -> Scratch {
        let dir = std::env::temp_dir().join(format!("delam-cli-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let p = dir.join(name);
        std::fs::File::create(&p).unwrap().write_all(src.as_bytes()).unwrap();
        Scratch(p)
    }

    fn path(&self) -> &str {
        self.0.to_str().unwrap()
    }
}

impl Drop for Scratch {
    fn drop(&mut self) {
        let _ = std::fs::remove_file(&self.0);
    }
}

#[test]
fn check_accepts_and_counts_definitions() {
    let o = run(&["check", &corpus("ok/nat.dlm")]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("ok: "), "{}", stdout(&o));
    assert!(stdout(&o).contains("definitions"));
}

#[test]
fn type_errors_exit_1_with_rule_and_path() {
    let o = run(&["check", &corpus("bad/delta_entry_type.dlm")]);
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    assert!(err.starts_with("error[tm-conv]: "), "{err}");
    assert!(err.contains("in def `use`"));
    assert!(err.contains("  at: "));
}

#[test]
fn parse_errors_exit_2_with_position() {
    let f = Scratch::new("parse.dlm", "def x @m : Nat @ 0 := ;\n");
    let o = run(&["check", f.path()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).starts_with(&format!("error[parse]: {}:1:", f.path())), "{}", stderr(&o));
}

#[test]
fn missing_file_is_a_usage_error() {
    let o = run(&["check", "/nonexistent/file.dlm"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).starts_with("error[usage]"));
}

#[test]
fn json_diagnostic_fields() {
    let (code, v) = json(&["check", &corpus("bad/layer_lambda_at_v.dlm")]);
    assert_eq!(code, 1);
    assert_eq!(v["exit"], 1);
    assert_eq!(v["status"], "error");
    assert_eq!(v["rule"], "tm-lam");
    assert_eq!(v["def"], "f");
    assert_eq!(v["line"], 4);
    assert!(v["message"].as_str().unwrap().contains("layer v"));

    let (code, v) = json(&["check", &corpus("ok/pi.dlm")]);
    assert_eq!(code, 0);
    assert_eq!(v["status"], "ok");
}

#[test]
fn whnf_prints_the_head_normal_form() {
    let o = run(&["whnf", &corpus("ok/size_meta.dlm"), "size"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).trim_start().starts_with("succ"), "{}", stdout(&o));

    let o = run(&["whnf", &corpus("ok/neutral.dlm"), "stuckTy"]);
    assert!(stdout(&o).starts_with("elimTy("), "{}", stdout(&o));
}

#[test]
fn conv_reports_both_outcomes() {
    let o = run(&["conv", &corpus("ok/nat.dlm"), "redex", "reduct"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "convertible at layer m\n");

    let o = run(&["conv", &corpus("ok/rec_app.dlm"), "redex", "redex", "--layer", "d"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "convertible at layer d\n");

    let f = Scratch::new("conv.dlm", "def a @c : Nat @ 0 := 2;\ndef b @c : Nat @ 0 := 3;\n");
    let o = run(&["conv", f.path(), "a", "b"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).starts_with("not convertible at layer m"), "{}", stderr(&o));
    let (_, v) = json(&["conv", f.path(), "a", "b"]);
    assert_eq!(v["convertible"], false);
}

#[test]
fn conv_of_unknown_names_is_a_usage_error() {
    let o = run(&["conv", &corpus("ok/nat.dlm"), "nope", "reduct"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn fuel_exhaustion_is_an_internal_error() {
    let o = run(&["--fuel", "3", "whnf", &corpus("ok/rec_app.dlm"), "redex"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).starts_with("internal error[fuel]"), "{}", stderr(&o));

    let o = Command::new(env!("CARGO_BIN_EXE_delam"))
        .args(["whnf", &corpus("ok/rec_app.dlm"), "redex"])
        .env("DELAM_FUEL", "3")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn level_norm() {
    let cases = [("l \\/ (1+l)", "1+l"), ("0 \\/ k \\/ k", "k"), ("1+(a \\/ b)", "1+a \\/ 1+b"), ("2 \\/ 3", "3")];
    for (input, expected) in cases {
        let o = run(&["level-norm", input]);
        assert_eq!(o.status.code(), Some(0), "{input}: {}", stderr(&o));
        assert_eq!(stdout(&o).trim(), expected, "{input}");
    }
    assert_eq!(run(&["level-norm", "omega"]).status.code(), Some(1));
    assert_eq!(run(&["level-norm", "1 +"]).status.code(), Some(2));
    let (_, v) = json(&["level-norm", "0 \\/ k \\/ k"]);
    assert_eq!(v["level"], "k");
}

#[test]
fn lawbench_runs_a_suite() {
    let o = run(&["lawbench", "levels", "--cases", "50", "--seed", "3"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).lines().all(|l| l.starts_with("PASS levels/")), "{}", stdout(&o));
    assert_eq!(run(&["lawbench", "nonsense"]).status.code(), Some(2));
    let (_, v) = json(&["lawbench", "usubst", "--cases", "20"]);
    assert_eq!(v["status"], "ok");
    assert!(v["laws"].as_array().unwrap().len() >= 4);
}
