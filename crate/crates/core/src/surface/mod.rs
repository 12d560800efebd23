//! The surface language: source files of global declarations and
//! definitions, parsed to de Bruijn syntax and printed back.
//!
//! See `docs/grammar.md` in the repository for the concrete syntax.

mod lexer;
mod parser;
mod print;

pub use lexer::is_reserved;
pub use parser::{Parser, Scope};
pub use print::Printer;

use crate::syntax::*;
use crate::typing::{Checker, Diagnostic, Env};
use crate::ulevel::{Level, UnivCtx};

/// A syntax error with a 1-based source position.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{line}:{col}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

impl ParseError {
    pub fn new(line: usize, col: usize, message: impl Into<String>) -> ParseError {
        ParseError { line, col, message: message.into() }
    }
}

/// `def name @i : T @ l := t;`
#[derive(Clone, Debug)]
pub struct Def {
    pub name: String,
    pub layer: Layer,
    pub ty: Type,
    pub level: Level,
    pub body: Term,
    pub line: usize,
    pub col: usize,
}

/// A parsed source file. Definitions live in the empty local context
/// under all level variables and globals; references to earlier
/// definitions have already been inlined.
#[derive(Clone, Debug, Default)]
pub struct Program {
    pub levels: UnivCtx,
    pub globals: GlobalCtx,
    /// Source position of each global declaration.
    pub global_pos: Vec<(usize, usize)>,
    pub defs: Vec<Def>,
}

impl Program {
    pub fn env(&self) -> Env {
        Env::new(self.levels.clone(), self.globals.clone())
    }

    pub fn def(&self, name: &str) -> Option<&Def> {
        self.defs.iter().find(|d| d.name == name)
    }
}

/// Where a check failed.
#[derive(Clone, Debug)]
pub struct CheckFailure {
    /// The failing definition, if the failure is not in the globals.
    pub def: Option<String>,
    pub line: usize,
    pub col: usize,
    pub diagnostic: Diagnostic,
}

pub fn parse_program(src: &str) -> Result<Program, ParseError> {
    let mut p = Parser::new(src, Scope::default())?;
    p.program()
}

/// Parse a type in the scope of `env`.
pub fn parse_type(src: &str, env: &Env) -> Result<Type, ParseError> {
    let mut p = Parser::new(src, Scope::from_env(env))?;
    let t = p.ty()?;
    p.expect_end()?;
    Ok(t)
}

/// Parse a term in the scope of `env`.
pub fn parse_term(src: &str, env: &Env) -> Result<Term, ParseError> {
    let mut p = Parser::new(src, Scope::from_env(env))?;
    let t = p.tm()?;
    p.expect_end()?;
    Ok(t)
}

/// Parse a level over the level variables of `env`.
pub fn parse_level(src: &str, env: &Env) -> Result<Level, ParseError> {
    let mut p = Parser::new(src, Scope::from_env(env))?;
    let l = p.level()?;
    p.expect_end()?;
    Ok(l)
}

/// Check the globals and then every definition in order.
pub fn check_program(prog: &Program, checker: &Checker) -> Result<(), Box<CheckFailure>> {
    let mut env = Env::new(prog.levels.clone(), GlobalCtx::new());
    for (k, e) in prog.globals.0.iter().enumerate() {
        checker.check_binding(&env, &e.binding).map_err(|d| {
            let (line, col) = prog.global_pos.get(k).copied().unwrap_or((1, 1));
            Box::new(CheckFailure { def: None, line, col, diagnostic: d })
        })?;
        env.globals.push(e.name.clone(), e.binding.clone());
    }
    for def in &prog.defs {
        check_def(&env, def, checker).map_err(|d| {
            Box::new(CheckFailure { def: Some(def.name.clone()), line: def.line, col: def.col, diagnostic: d })
        })?;
    }
    Ok(())
}

fn check_def(env: &Env, def: &Def, checker: &Checker) -> Result<(), Diagnostic> {
    // Universe-polymorphic definitions live at omega, and only at layer m.
    if !(def.level == Level::Omega && def.layer == Layer::M) {
        checker.wf_level(env, "def", &def.level)?;
    }
    checker.check_type(env, def.layer.typeof_layer(), &def.ty, &def.level)?;
    checker.check_term(env, def.layer, &def.body, &def.ty, &def.level)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn round_trip_term(src: &str) {
        let prog = parse_program(src).unwrap();
        let env = prog.env();
        for d in &prog.defs {
            let printed = Printer::from_env(&env).tm(&d.body);
            let back = parse_term(&printed, &env).unwrap_or_else(|e| panic!("{printed}: {e}"));
            assert_eq!(back, d.body, "{printed}");
            let printed = Printer::from_env(&env).ty(&d.ty);
            assert_eq!(parse_type(&printed, &env).unwrap(), d.ty, "{printed}");
        }
    }

    #[test]
    fn simple_definitions_round_trip() {
        round_trip_term(
            "level-vars l;
             global g : Ctx;
             global U : [g, y : Nat @ 0 |- Ty l] @ c;
             def two @d : Nat @ 0 := succ (succ zero);
             def idn @d : Pi(0, 0, x, Nat, Nat) @ 0 := fun(0, 0, x : Nat) => x;
             def c @m : [x : Nat @ 0 |- Nat : 0] @ 0 := box{x} succ x;
             def k @m : CtxPi(h, 1+l, Ty l) @ 1+l := ctxfun(h, 1+l) => Ty (l \\/ 0);",
        );
    }

    #[test]
    fn shadowed_names_are_renamed_when_printing() {
        let env = Env::new(vec![], GlobalCtx::new());
        let t = parse_term("fun(0, 0, x : Nat) => fun(0, 0, x : Nat) => app(fun(0,0,y:Nat) => y, 0, 0, z : Nat, Nat, x)", &env)
            .unwrap();
        let printed = Printer::new().tm(&t);
        assert_eq!(parse_term(&printed, &env).unwrap(), t);
        assert!(printed.contains("x1"), "{printed}");
    }

    #[test]
    fn errors_carry_positions() {
        let e = parse_program("def x @d : Nat @ 0 :=\n  succ ;").unwrap_err();
        assert_eq!(e.line, 2);
    }
}
