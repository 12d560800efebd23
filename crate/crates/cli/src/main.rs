//! `delam`: check, reduce and compare definitions in source files, normalise
//! levels, and run the law suites.
//!
//! Exit codes: 0 success, 1 type error, failed comparison or internal error,
//! 2 parse or usage error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use delam_core::reduce::DEFAULT_FUEL;
use delam_core::surface::{check_program, parse_level, parse_program, CheckFailure, ParseError, Printer, Program};
use delam_core::syntax::{Layer, Name};
use delam_core::typing::{Checker, Diagnostic, Env};
use delam_core::ulevel::{normalize, LevelDisplay};

#[derive(Parser)]
#[command(name = "delam", version, about = "Kernel for a layered modal dependent type theory")]
struct Cli {
    /// Reduction steps allowed per command. Falls back to DELAM_FUEL.
    #[arg(long, global = true)]
    fuel: Option<u64>,
    /// Print one JSON object instead of text.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Type-check every declaration and definition in a file.
    Check { file: PathBuf },
    /// Print the weak-head normal form of a definition's body.
    Whnf { file: PathBuf, name: String },
    /// Decide whether two definitions are convertible at the first one's type.
    Conv {
        file: PathBuf,
        first: String,
        second: String,
        #[arg(long, value_enum, default_value = "m")]
        layer: LayerArg,
    },
    /// Normalise a universe level.
    LevelNorm {
        level: String,
        /// Level variables, outermost first. Defaults to the names in the
        /// level in order of first occurrence.
        #[arg(long, value_delimiter = ',')]
        vars: Option<Vec<String>>,
    },
    /// Run a randomised law suite.
    Lawbench {
        suite: String,
        #[arg(long, default_value_t = 1000)]
        cases: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum LayerArg {
    D,
    M,
}

impl From<LayerArg> for Layer {
    fn from(l: LayerArg) -> Layer {
        match l {
            LayerArg::D => Layer::D,
            LayerArg::M => Layer::M,
        }
    }
}

/// The outcome of one command: an exit code, the text to print, and the
/// same information as JSON.
struct Outcome {
    exit: u8,
    text: String,
    json: Value,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let fuel = cli.fuel.or_else(|| std::env::var("DELAM_FUEL").ok().and_then(|s| s.parse().ok())).unwrap_or(DEFAULT_FUEL);
    let out = match &cli.cmd {
        Cmd::Check { file } => cmd_check(file, fuel),
        Cmd::Whnf { file, name } => cmd_whnf(file, name, fuel),
        Cmd::Conv { file, first, second, layer } => cmd_conv(file, first, second, (*layer).into(), fuel),
        Cmd::LevelNorm { level, vars } => cmd_level_norm(level, vars.as_deref()),
        Cmd::Lawbench { suite, cases, seed } => cmd_lawbench(suite, *cases, *seed),
    };
    if cli.json {
        println!("{}", serde_json::to_string_pretty(&out.json).expect("JSON values serialise"));
    } else if out.exit == 0 {
        print!("{}", out.text);
    } else {
        eprint!("{}", out.text);
    }
    ExitCode::from(out.exit)
}

fn severity(d: &Diagnostic) -> &'static str {
    if d.rule == "fuel" {
        "internal error"
    } else {
        "error"
    }
}

fn usage_error(file: &Path, message: String) -> Outcome {
    Outcome {
        exit: 2,
        text: format!("error[usage]: {}: {message}\n", file.display()),
        json: json!({"file": file.display().to_string(), "status": "error", "exit": 2, "rule": "usage", "message": message}),
    }
}

fn parse_failure(file: &Path, e: &ParseError) -> Outcome {
    Outcome {
        exit: 2,
        text: format!("error[parse]: {}:{}:{}: {}\n", file.display(), e.line, e.col, e.message),
        json: json!({
            "file": file.display().to_string(),
            "status": "error",
            "exit": 2,
            "rule": "parse",
            "message": e.message,
            "line": e.line,
            "col": e.col,
        }),
    }
}

fn check_failure(file: &Path, f: &CheckFailure) -> Outcome {
    let d = &f.diagnostic;
    let mut text = format!("{}[{}]: {}:{}:{}: ", severity(d), d.rule, file.display(), f.line, f.col);
    match &f.def {
        Some(name) => text.push_str(&format!("in def `{name}`: ")),
        None => text.push_str("in global declaration: "),
    }
    text.push_str(&d.message);
    text.push('\n');
    if let (Some(e), Some(a)) = (&d.expected, &d.actual) {
        text.push_str(&format!("  expected: {e}\n  actual:   {a}\n"));
    }
    if !d.path.is_empty() {
        text.push_str(&format!("  at: {}\n", d.path.join(" > ")));
    }
    Outcome {
        exit: 1,
        text,
        json: json!({
            "file": file.display().to_string(),
            "status": "error",
            "exit": 1,
            "severity": severity(d),
            "rule": d.rule,
            "kind": d.kind.as_str(),
            "message": d.message,
            "def": f.def,
            "line": f.line,
            "col": f.col,
            "expected": d.expected,
            "actual": d.actual,
            "path": d.path,
        }),
    }
}

/// Read, parse and check a file.
fn load(file: &Path, checker: &Checker) -> Result<Program, Outcome> {
    let src = std::fs::read_to_string(file).map_err(|e| usage_error(file, format!("cannot read file: {e}")))?;
    let prog = parse_program(&src).map_err(|e| parse_failure(file, &e))?;
    check_program(&prog, checker).map_err(|f| check_failure(file, &f))?;
    Ok(prog)
}

fn cmd_check(file: &Path, fuel: u64) -> Outcome {
    let checker = Checker::new(fuel);
    match load(file, &checker) {
        Ok(prog) => Outcome {
            exit: 0,
            text: format!("ok: {}: {} definitions\n", file.display(), prog.defs.len()),
            json: json!({"file": file.display().to_string(), "status": "ok", "exit": 0, "defs": prog.defs.len()}),
        },
        Err(o) => o,
    }
}

fn def_failure(file: &Path, prog: &Program, name: &str, d: Diagnostic) -> Outcome {
    let (line, col) = prog.def(name).map(|d| (d.line, d.col)).unwrap_or((1, 1));
    check_failure(file, &CheckFailure { def: Some(name.to_string()), line, col, diagnostic: d })
}

fn cmd_whnf(file: &Path, name: &str, fuel: u64) -> Outcome {
    let checker = Checker::new(fuel);
    let prog = match load(file, &checker) {
        Ok(p) => p,
        Err(o) => return o,
    };
    let Some(def) = prog.def(name) else {
        return usage_error(file, format!("no definition named `{name}`"));
    };
    match checker.whnf_tm(&def.body) {
        Ok(t) => {
            let printed = Printer::from_env(&prog.env()).tm(&t);
            Outcome {
                exit: 0,
                text: format!("{printed}\n"),
                json: json!({"file": file.display().to_string(), "status": "ok", "exit": 0, "def": name, "whnf": printed}),
            }
        }
        Err(d) => def_failure(file, &prog, name, d),
    }
}

fn cmd_conv(file: &Path, first: &str, second: &str, layer: Layer, fuel: u64) -> Outcome {
    let checker = Checker::new(fuel);
    let prog = match load(file, &checker) {
        Ok(p) => p,
        Err(o) => return o,
    };
    let (Some(a), Some(b)) = (prog.def(first), prog.def(second)) else {
        return usage_error(file, format!("no definitions named `{first}` and `{second}`"));
    };
    let env: Env = prog.env();
    let result = checker
        .conv_type(&env, layer.typeof_layer(), &a.ty, &b.ty)
        .and_then(|_| checker.conv_term(&env, layer, &a.body, &b.body, &a.ty));
    match result {
        Ok(()) => Outcome {
            exit: 0,
            text: format!("convertible at layer {layer}\n"),
            json: json!({"file": file.display().to_string(), "status": "ok", "exit": 0, "convertible": true, "layer": layer.to_string()}),
        },
        Err(d) if d.rule == "fuel" => def_failure(file, &prog, first, d),
        Err(d) => {
            let mut o = def_failure(file, &prog, first, d);
            o.text = format!("not convertible at layer {layer}\n{}", o.text);
            o.json["convertible"] = json!(false);
            o
        }
    }
}

/// Identifiers in a level expression, in order of first occurrence.
fn level_names(src: &str) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for word in src.split(|c: char| !(c.is_ascii_alphanumeric() || c == '_' || c == '\'')) {
        let starts_alpha = word.chars().next().is_some_and(|c| c.is_ascii_alphabetic() || c == '_');
        if starts_alpha && word != "omega" && !out.iter().any(|w| w == word) {
            out.push(word.to_string());
        }
    }
    out
}

fn cmd_level_norm(src: &str, vars: Option<&[String]>) -> Outcome {
    let names = vars.map(<[String]>::to_vec).unwrap_or_else(|| level_names(src));
    let env = Env::new(names.iter().map(|n| Name::new(n)).collect(), Default::default());
    let l = match parse_level(src, &env) {
        Ok(l) => l,
        Err(e) => {
            return Outcome {
                exit: 2,
                text: format!("error[parse]: {}:{}: {}\n", e.line, e.col, e.message),
                json: json!({"status": "error", "exit": 2, "rule": "parse", "message": e.message, "line": e.line, "col": e.col}),
            }
        }
    };
    if l.mentions_omega() {
        let message = "omega has no normal form among finite levels".to_string();
        return Outcome {
            exit: 1,
            text: format!("error[level]: {message}\n"),
            json: json!({"status": "error", "exit": 1, "rule": "level", "message": message}),
        };
    }
    let n = normalize(&l);
    let printed = LevelDisplay { level: &n, names: &env.levels }.to_string();
    Outcome {
        exit: 0,
        text: format!("{printed}\n"),
        json: json!({"status": "ok", "exit": 0, "level": printed}),
    }
}

fn cmd_lawbench(suite: &str, cases: usize, seed: u64) -> Outcome {
    let reports = match delam_lawbench::run_suite(suite, cases, seed) {
        Ok(r) => r,
        Err(e) => {
            return Outcome {
                exit: 2,
                text: format!("error[usage]: {e}\n"),
                json: json!({"status": "error", "exit": 2, "rule": "usage", "message": e.to_string()}),
            }
        }
    };
    let ok = reports.iter().all(|r| r.passed());
    let text: String = reports.iter().map(|r| format!("{r}\n")).collect();
    let laws: Vec<Value> = reports
        .iter()
        .map(|r| {
            json!({
                "law": r.law,
                "cases": r.cases,
                "passed": r.passed(),
                "counterexample": r.counterexample.as_ref().map(|c| json!({"seed": c.seed, "detail": c.detail})),
            })
        })
        .collect();
    let exit = if ok { 0 } else { 1 };
    Outcome {
        exit,
        text,
        json: json!({"suite": suite, "seed": seed, "status": if ok { "ok" } else { "fail" }, "exit": exit, "laws": laws}),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn level_names_skip_numerals_and_omega() {
        assert_eq!(level_names("l \\/ (1+k) \\/ omega \\/ l"), vec!["l", "k"]);
    }
}
