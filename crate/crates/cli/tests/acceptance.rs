//! Acceptance criteria for the kernel. Each criterion prints one
//! `PASS`/`FAIL` line, and the run exits non-zero if any criterion fails.
//! Runs without the libtest harness so the lines are never captured.
//!
//! Randomised criteria run lawbench suites at fixed seeds. Corpus criteria
//! read `corpus/ok` and `corpus/bad` and run the `delam` binary on them.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};
use std::thread;

use delam_core::surface::{check_program, parse_program, Program};
use delam_core::syntax::{GBinding, Layer, Term, Type};
use delam_core::typing::Checker;
use delam_lawbench::oracle::{Walker, ALL_CONSTRUCTORS};
use delam_lawbench::{run_suite, LawReport};

const SEED: u64 = 20_240_601;

const BRANCHES: [&str; 13] =
    ["nat", "pi", "ty", "el", "var", "natc", "pic", "tyc", "zero", "succ", "elimnat", "lam", "app"];

struct Verdict {
    name: &'static str,
    problems: Vec<String>,
    summary: String,
}

impl Verdict {
    fn passed(&self) -> bool {
        self.problems.is_empty()
    }
}

fn corpus_dir(sub: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus").join(sub)
}

fn dlm_files(sub: &str) -> Vec<PathBuf> {
    let mut v: Vec<PathBuf> = fs::read_dir(corpus_dir(sub))
        .expect("corpus directory")
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "dlm"))
        .collect();
    v.sort();
    v
}

fn stem(p: &Path) -> String {
    p.file_stem().unwrap().to_string_lossy().into_owned()
}

fn load(p: &Path) -> Program {
    let src = fs::read_to_string(p).unwrap();
    parse_program(&src).unwrap_or_else(|e| panic!("{}: {e}", p.display()))
}

fn delam(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_delam")).args(args).output().expect("run delam");
    let text = format!("{}{}", String::from_utf8_lossy(&out.stdout), String::from_utf8_lossy(&out.stderr));
    (out.status.code().unwrap_or(-1), text)
}

/// Run suites, returning failure reports and a one-line summary.
fn suites(runs: &[(&str, usize)]) -> (Vec<LawReport>, Vec<String>, String) {
    let reports: Vec<LawReport> =
        runs.iter().flat_map(|(suite, n)| run_suite(suite, *n, SEED).unwrap()).collect();
    let problems = reports.iter().filter(|r| !r.passed()).map(|r| r.to_string()).collect();
    let min_cases = reports.iter().map(|r| r.cases).min().unwrap_or(0);
    let summary = format!("{} laws, at least {min_cases} cases each", reports.len());
    (reports, problems, summary)
}

/// Names of every `<prefix><suffix>` / `<partner><suffix>` pair in a program.
fn pairs(prog: &Program, prefix: &str, partner: &str) -> Vec<(String, String)> {
    prog.defs
        .iter()
        .filter_map(|d| d.name.strip_prefix(prefix).map(|sfx| (d.name.clone(), format!("{partner}{sfx}"))))
        .filter(|(_, b)| prog.def(b).is_some())
        .collect()
}

fn levels() -> Verdict {
    let (reports, mut problems, summary) = suites(&[("levels", 5000)]);
    let rules = reports.iter().filter(|r| r.law.starts_with("rule-")).count();
    if rules != 8 {
        problems.push(format!("expected 8 equational rules, found {rules}"));
    }
    Verdict { name: "level oracle", problems, summary }
}

fn substitution_algebra() -> Verdict {
    let runs = [("usubst", 1000), ("lsubst", 1000), ("gsubst", 1000), ("weaken", 1000), ("interact", 1000)];
    let (_, problems, summary) = suites(&runs);
    Verdict { name: "substitution algebra", problems, summary }
}

fn reduction() -> Verdict {
    let (_, problems, summary) = suites(&[("reduce", 1000)]);
    Verdict { name: "whnf determinism and preservation", problems, summary }
}

fn conversion() -> Verdict {
    let (reports, mut problems, summary) = suites(&[("conv", 1000)]);
    let injectivity = reports.into_iter().find(|r| r.law == "pi-injectivity");
    match injectivity {
        Some(r) if r.cases >= 200 => {}
        other => problems.push(format!("pi-injectivity ran on too few pairs: {:?}", other.map(|r| r.cases))),
    }

    let checker = Checker::default();
    let mut refl = 0;
    let mut golden = 0;
    for p in dlm_files("ok") {
        let prog = load(&p);
        let env = prog.env();
        for d in &prog.defs {
            refl += 1;
            if let Err(e) = checker.conv_term(&env, Layer::M, &d.body, &d.body, &d.ty) {
                problems.push(format!("{}: `{}` is not convertible with itself: {e}", p.display(), d.name));
            }
        }
        for (a, b) in pairs(&prog, "redex", "reduct").into_iter().chain(pairs(&prog, "lhs", "rhs")) {
            golden += 1;
            let (code, text) = delam(&["conv", p.to_str().unwrap(), &a, &b]);
            if code != 0 {
                problems.push(format!("{}: `{a}` and `{b}` should convert: {text}", p.display()));
            }
            let (da, db) = (prog.def(&a).unwrap(), prog.def(&b).unwrap());
            if da.body == db.body {
                problems.push(format!("{}: `{a}` and `{b}` are syntactically identical", p.display()));
            }
            // A pair at type Nat is also checked against an off-by-one reduct.
            if da.ty == Type::Nat {
                let off = Term::succ(db.body.clone());
                if checker.conv_term(&env, Layer::M, &da.body, &off, &Type::Nat).is_ok() {
                    problems.push(format!("{}: `{a}` also converts with succ `{b}`", p.display()));
                }
            }
        }
    }

    for kind in BRANCHES {
        let p = corpus_dir("ok").join(format!("rec_{kind}.dlm"));
        if !p.exists() || pairs(&load(&p), "redex", "reduct").is_empty() {
            problems.push(format!("no golden redex/reduct file for recursor branch `{kind}`"));
        }
    }
    for sfx in ["Pi", "U", "Ctx", "Ty"] {
        let prog = load(&corpus_dir("ok").join("eta.dlm"));
        if prog.def(&format!("lhs{sfx}")).is_none() {
            problems.push(format!("no golden eta pair for {sfx}"));
        }
    }
    Verdict {
        name: "conversion",
        problems,
        summary: format!("{summary}; {refl} corpus definitions reflexive; {golden} golden pairs"),
    }
}

fn lifting_and_static_code() -> Verdict {
    let (_, problems, summary) = suites(&[("lift", 500), ("static", 500)]);
    Verdict { name: "lifting and static code", problems, summary }
}

/// Parse the `-- expect: exit N rule R` header of a rejected file.
fn expectation(p: &Path) -> Option<(i32, String)> {
    let first = fs::read_to_string(p).ok()?.lines().next()?.to_string();
    let rest = first.strip_prefix("-- expect: exit ")?;
    let (code, rule) = rest.split_once(" rule ")?;
    Some((code.trim().parse().ok()?, rule.trim().to_string()))
}

fn golden_corpus() -> Verdict {
    let mut problems = Vec::new();
    let ok = dlm_files("ok");
    let bad = dlm_files("bad");
    if ok.len() < 25 {
        problems.push(format!("only {} accepted files", ok.len()));
    }
    if bad.len() < 15 {
        problems.push(format!("only {} rejected files", bad.len()));
    }

    let walker = Walker::default();
    let mut layers = BTreeSet::new();
    let mut bindings = BTreeSet::new();
    for p in &ok {
        let (code, text) = delam(&["check", p.to_str().unwrap()]);
        if code != 0 {
            problems.push(format!("{} should be accepted: {text}", p.display()));
        }
        let prog = load(p);
        for e in &prog.globals.0 {
            bindings.insert(match &e.binding {
                GBinding::Ctx => "ctx",
                GBinding::Typ { .. } => "type",
                GBinding::Trm { layer: Layer::V, .. } => "term@v",
                GBinding::Trm { .. } => "term@c",
            });
        }
        for d in &prog.defs {
            layers.insert(d.layer.to_string());
            walker.ty(&d.ty);
            walker.tm(&d.body);
        }
    }
    let seen = walker.seen.borrow();
    let missing: Vec<_> = ALL_CONSTRUCTORS.iter().filter(|c| !seen.contains(*c)).collect();
    if !missing.is_empty() {
        problems.push(format!("accepted corpus never uses {missing:?}"));
    }
    for l in ["v", "c", "d", "m"] {
        if !layers.contains(l) {
            problems.push(format!("no accepted definition at layer {l}"));
        }
    }
    if bindings.len() != 4 {
        problems.push(format!("global declaration kinds used: {bindings:?}"));
    }

    // The meta-program over the code of `fun x. succ x`.
    let size = corpus_dir("ok").join("size_meta.dlm");
    let (code, text) = delam(&["conv", size.to_str().unwrap(), "size", "four"]);
    if code != 0 {
        problems.push(format!("size of the successor function should be 4: {text}"));
    }

    let mut probes = 0;
    for p in &bad {
        let Some((exit, rule)) = expectation(p) else {
            problems.push(format!("{} has no expectation header", p.display()));
            continue;
        };
        let (code, text) = delam(&["check", p.to_str().unwrap()]);
        let tag = format!("error[{rule}]");
        if code != exit || !text.starts_with(&tag) {
            problems.push(format!("{}: expected exit {exit} with {tag}, got exit {code}: {text}", p.display()));
        }
        if stem(p).starts_with("consistency_probe") {
            probes += 1;
            let prog = load(p);
            let f = prog.def("f");
            let expected = "Pi(1+l, l, x, Ty l, El l x)";
            let env = prog.env();
            let ty = delam_core::surface::parse_type(expected, &env).unwrap();
            if f.map(|d| &d.ty) != Some(&ty) {
                problems.push(format!("{}: probe is not about {expected}", p.display()));
            }
            if check_program(&prog, &Checker::default()).is_ok() {
                problems.push(format!("{}: probe body was accepted", p.display()));
            }
        }
    }
    if probes != 5 {
        problems.push(format!("{probes} consistency probes instead of 5"));
    }
    Verdict {
        name: "golden corpus",
        problems,
        summary: format!(
            "{} accepted, {} rejected, {} of {} constructors, {probes} probes",
            ok.len(),
            bad.len(),
            seen.len(),
            ALL_CONSTRUCTORS.len()
        ),
    }
}

fn main() -> ExitCode {
    let criteria: [fn() -> Verdict; 6] =
        [levels, substitution_algebra, reduction, conversion, lifting_and_static_code, golden_corpus];
    let verdicts: Vec<Verdict> = thread::scope(|s| {
        let handles: Vec<_> = criteria
            .iter()
            .map(|c| thread::Builder::new().stack_size(64 << 20).spawn_scoped(s, c).unwrap())
            .collect();
        handles.into_iter().map(|h| h.join().expect("criterion panicked")).collect()
    });
    for (k, v) in verdicts.iter().enumerate() {
        let status = if v.passed() { "PASS" } else { "FAIL" };
        println!("{status} criterion {}: {} ({})", k + 1, v.name, v.summary);
        for p in &v.problems {
            println!("    {p}");
        }
    }
    if verdicts.iter().all(Verdict::passed) {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
