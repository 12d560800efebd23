//! Recursive-descent parser producing de Bruijn syntax.
//!
//! Names are resolved while parsing: local variables first, then global
//! variables, then earlier definitions, which are inlined.

use std::collections::BTreeMap;

use crate::recursor::branch_signature;
use crate::subst::{shift_globals, shift_levels, shift_locals};
use crate::syntax::*;
use crate::typing::Env;
use crate::ulevel::Level;

use super::lexer::{is_reserved, lex, Spanned, Tok};
use super::{Def, ParseError, Program};

/// Names in scope, innermost last.
#[derive(Clone, Debug, Default)]
pub struct Scope {
    levels: Vec<String>,
    globals: Vec<(String, Option<LocalCtx>)>,
    locals: Vec<String>,
}

impl Scope {
    pub fn from_env(env: &Env) -> Scope {
        Scope {
            levels: env.levels.iter().map(|n| n.to_string()).collect(),
            globals: env
                .globals
                .0
                .iter()
                .map(|e| {
                    let ctx = match &e.binding {
                        GBinding::Ctx => None,
                        GBinding::Typ { ctx, .. } | GBinding::Trm { ctx, .. } => Some(ctx.clone()),
                    };
                    (e.name.to_string(), ctx)
                })
                .collect(),
            locals: env.locals.entries.iter().map(|e| e.name.to_string()).collect(),
        }
    }
}

fn position<T: PartialEq<str>>(v: &[T], name: &str) -> Option<usize> {
    v.iter().rev().position(|n| n == name)
}

struct GlobalName<'a>(&'a (String, Option<LocalCtx>));

impl PartialEq<str> for GlobalName<'_> {
    fn eq(&self, other: &str) -> bool {
        self.0 .0 == other
    }
}

struct DefInfo {
    name: String,
    body: Term,
    levels: usize,
    globals: usize,
}

pub struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
    scope: Scope,
    defs: Vec<DefInfo>,
}

type P<T> = Result<T, ParseError>;

impl Parser {
    pub fn new(src: &str, scope: Scope) -> P<Parser> {
        Ok(Parser { toks: lex(src)?, pos: 0, scope, defs: Vec::new() })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        let i = (self.pos + k).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    fn here(&self) -> (usize, usize) {
        let t = &self.toks[self.pos];
        (t.line, t.col)
    }

    fn err<T>(&self, msg: impl Into<String>) -> P<T> {
        let (l, c) = self.here();
        Err(ParseError::new(l, c, msg))
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn is_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Sym(x) if *x == s)
    }

    fn is_kw(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Ident(x) if x == s)
    }

    fn eat_sym(&mut self, s: &str) -> bool {
        if self.is_sym(s) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect_sym(&mut self, s: &str) -> P<()> {
        if self.eat_sym(s) {
            Ok(())
        } else {
            self.err(format!("expected `{s}`, found {}", self.peek()))
        }
    }

    fn expect_kw(&mut self, s: &str) -> P<()> {
        if self.is_kw(s) {
            self.bump();
            Ok(())
        } else {
            self.err(format!("expected `{s}`, found {}", self.peek()))
        }
    }

    /// A binder or variable name.
    fn ident(&mut self) -> P<String> {
        match self.peek().clone() {
            Tok::Ident(s) if !is_reserved(&s) => {
                self.bump();
                Ok(s)
            }
            Tok::Ident(s) => self.err(format!("`{s}` is a reserved word")),
            t => self.err(format!("expected a name, found {t}")),
        }
    }

    fn num(&mut self) -> P<u64> {
        match self.peek().clone() {
            Tok::Num(n) => {
                self.bump();
                Ok(n)
            }
            t => self.err(format!("expected a numeral, found {t}")),
        }
    }

    pub fn at_end(&self) -> bool {
        matches!(self.peek(), Tok::Eof)
    }

    pub fn expect_end(&self) -> P<()> {
        if self.at_end() {
            Ok(())
        } else {
            self.err(format!("unexpected {} after the end", self.peek()))
        }
    }

    // -- levels ---------------------------------------------------------

    pub fn level(&mut self) -> P<Level> {
        let a = self.level_sum()?;
        if self.eat_sym("\\/") {
            Ok(a.lub(self.level()?))
        } else {
            Ok(a)
        }
    }

    fn level_sum(&mut self) -> P<Level> {
        if let (Tok::Num(n), Tok::Sym("+")) = (self.peek().clone(), self.peek_at(1).clone()) {
            self.bump();
            self.bump();
            return Ok(self.level_atom()?.plus(n));
        }
        self.level_atom()
    }

    fn level_atom(&mut self) -> P<Level> {
        match self.peek().clone() {
            Tok::Num(n) => {
                self.bump();
                Ok(Level::nat(n))
            }
            Tok::Ident(s) if s == "omega" => {
                self.bump();
                Ok(Level::Omega)
            }
            Tok::Sym("(") => {
                self.bump();
                let l = self.level()?;
                self.expect_sym(")")?;
                Ok(l)
            }
            Tok::Ident(_) => {
                let (line, col) = self.here();
                let s = self.ident()?;
                match position(&self.scope.levels, &s) {
                    Some(i) => Ok(Level::Var(i)),
                    None => Err(ParseError::new(line, col, format!("unknown level variable `{s}`"))),
                }
            }
            t => self.err(format!("expected a level, found {t}")),
        }
    }

    fn layer(&mut self) -> P<Layer> {
        let (line, col) = self.here();
        let s = match self.bump() {
            Tok::Ident(s) => s,
            t => return Err(ParseError::new(line, col, format!("expected a layer, found {t}"))),
        };
        Layer::from_letter(&s)
            .ok_or_else(|| ParseError::new(line, col, format!("`{s}` is not a layer (v, c, d or m)")))
    }

    // -- scopes -----------------------------------------------------------

    fn with_scope<T>(&mut self, scope: Scope, f: impl FnOnce(&mut Parser) -> P<T>) -> P<T> {
        let saved = std::mem::replace(&mut self.scope, scope);
        let r = f(self);
        self.scope = saved;
        r
    }

    fn push_local(&self, x: &str) -> Scope {
        let mut s = self.scope.clone();
        s.locals.push(x.to_string());
        s
    }

    fn push_global(&self, x: &str, ctx: Option<LocalCtx>) -> Scope {
        let mut s = self.scope.clone();
        s.globals.push((x.to_string(), ctx));
        s
    }

    fn push_levels(&self, xs: &[String]) -> Scope {
        let mut s = self.scope.clone();
        s.levels.extend(xs.iter().cloned());
        s
    }

    fn foreign(&self, names: &[String]) -> Scope {
        let mut s = self.scope.clone();
        s.locals = names.to_vec();
        s
    }

    fn global_index(&self, name: &str) -> Option<usize> {
        let gs: Vec<GlobalName> = self.scope.globals.iter().map(GlobalName).collect();
        position(&gs, name)
    }

    /// The identity substitution on the context of global `j`.
    fn identity_for(&self, j: usize, name: &str) -> P<LocalSubst> {
        let n = self.scope.globals.len();
        match &self.scope.globals[n - 1 - j].1 {
            Some(ctx) => Ok(lid(&shift_globals(ctx, 0, j + 1))),
            None => self.err(format!("`{name}` is a context variable")),
        }
    }

    // -- contexts and substitutions ---------------------------------------

    /// A local context in its own local scope; returns the scope extended
    /// with its entries.
    pub fn ctx(&mut self) -> P<(LocalCtx, Scope)> {
        let mut scope = self.foreign(&[]);
        let mut ctx = LocalCtx::empty();
        if self.eat_sym(".") || self.is_sym("|-") || self.is_sym("]") {
            return Ok((ctx, scope));
        }
        let starts_with_entry = matches!(self.peek_at(1), Tok::Sym(":"));
        if !starts_with_entry {
            let (line, col) = self.here();
            let g = self.ident()?;
            match self.global_index(&g) {
                Some(j) => ctx.base = CtxBase::Var(j),
                None => return Err(ParseError::new(line, col, format!("unknown context variable `{g}`"))),
            }
            if !self.eat_sym(",") {
                return Ok((ctx, scope));
            }
        }
        loop {
            let x = self.ident()?;
            self.expect_sym(":")?;
            let (ty, level) = self.with_scope(scope.clone(), |p| {
                let ty = p.ty()?;
                p.expect_sym("@")?;
                Ok((ty, p.level()?))
            })?;
            ctx = ctx.push(Name::new(&x), ty, level);
            scope.locals.push(x);
            if !self.eat_sym(",") {
                return Ok((ctx, scope));
            }
        }
    }

    fn lsubst(&mut self) -> P<LocalSubst> {
        self.expect_sym("[")?;
        let base = if self.is_kw("wk") {
            self.bump();
            self.expect_sym("(")?;
            let g = self.global_ref()?;
            self.expect_sym(",")?;
            let k = self.num()? as usize;
            self.expect_sym(")")?;
            LsBase::Wk { g, k }
        } else if self.is_kw("emp") {
            self.bump();
            self.expect_sym("(")?;
            let g = if matches!(self.peek(), Tok::Num(_)) {
                None
            } else {
                let g = self.global_ref()?;
                self.expect_sym(",")?;
                Some(g)
            };
            let k = self.num()? as usize;
            self.expect_sym(")")?;
            LsBase::Empty { g, k }
        } else {
            return self.err(format!("expected `wk` or `emp`, found {}", self.peek()));
        };
        let mut entries = Vec::new();
        while self.eat_sym(",") {
            entries.push(self.tm()?);
        }
        self.expect_sym("]")?;
        Ok(LocalSubst { base, entries })
    }

    fn global_ref(&mut self) -> P<usize> {
        let (line, col) = self.here();
        let g = self.ident()?;
        self.global_index(&g)
            .ok_or_else(|| ParseError::new(line, col, format!("unknown global variable `{g}`")))
    }

    /// `[Δ |- Ty l]` or `[Δ |- T : l]`, with the opening bracket already
    /// consumed. Returns the context and, for term codes, the type.
    fn code_sig(&mut self) -> P<(LocalCtx, Option<Type>, Level)> {
        let (ctx, scope) = self.ctx()?;
        self.expect_sym("|-")?;
        let ty = self.with_scope(scope, |p| p.ty())?;
        if self.eat_sym(":") {
            let l = self.level()?;
            self.expect_sym("]")?;
            return Ok((ctx, Some(ty), l));
        }
        self.expect_sym("]")?;
        match ty {
            Type::Ty(l) => Ok((ctx, None, l)),
            _ => self.err("expected `: level` after the type of a term code"),
        }
    }

    fn names_header(&mut self) -> P<Vec<String>> {
        let mut names = Vec::new();
        if self.eat_sym("{") {
            if !self.is_sym("}") {
                names.push(self.ident()?);
                while self.eat_sym(",") {
                    names.push(self.ident()?);
                }
            }
            self.expect_sym("}")?;
        }
        Ok(names)
    }

    // -- types ------------------------------------------------------------

    pub fn ty(&mut self) -> P<Type> {
        let (line, col) = self.here();
        match self.peek().clone() {
            Tok::Sym("(") => {
                self.bump();
                let t = self.ty()?;
                self.expect_sym(")")?;
                Ok(t)
            }
            Tok::Sym("[") => {
                self.bump();
                let (ctx, ty, l) = self.code_sig()?;
                Ok(match ty {
                    Some(t) => Type::CodeTm(ctx, Box::new(t), l),
                    None => Type::CodeTy(ctx, l),
                })
            }
            Tok::Ident(s) => match s.as_str() {
                "Nat" => {
                    self.bump();
                    Ok(Type::Nat)
                }
                "Ty" => {
                    self.bump();
                    Ok(Type::Ty(self.level_atom()?))
                }
                "El" => {
                    self.bump();
                    let l = self.level_atom()?;
                    let t = self.tm_atom()?;
                    Ok(Type::El(l, Box::new(t)))
                }
                "Pi" => {
                    self.bump();
                    self.expect_sym("(")?;
                    let l = self.level()?;
                    self.expect_sym(",")?;
                    let l2 = self.level()?;
                    self.expect_sym(",")?;
                    let x = self.ident()?;
                    self.expect_sym(",")?;
                    let s = self.ty()?;
                    self.expect_sym(",")?;
                    let t = self.with_scope(self.push_local(&x), |p| p.ty())?;
                    self.expect_sym(")")?;
                    Ok(Type::Pi(l, l2, Name::new(&x), Box::new(s), Box::new(t)))
                }
                "UPi" => {
                    self.bump();
                    self.expect_sym("(")?;
                    let xs = self.level_binders()?;
                    self.expect_sym(",")?;
                    let (l, t) = self.with_scope(self.push_levels(&xs), |p| {
                        let l = p.level()?;
                        p.expect_sym(",")?;
                        Ok((l, p.ty()?))
                    })?;
                    self.expect_sym(")")?;
                    Ok(Type::UPi(xs.iter().map(|x| Name::new(x)).collect(), l, Box::new(t)))
                }
                "CtxPi" => {
                    self.bump();
                    self.expect_sym("(")?;
                    let g = self.ident()?;
                    self.expect_sym(",")?;
                    let l = self.level()?;
                    self.expect_sym(",")?;
                    let t = self.with_scope(self.push_global(&g, None), |p| p.ty())?;
                    self.expect_sym(")")?;
                    Ok(Type::CtxPi(Name::new(&g), l, Box::new(t)))
                }
                "TyPi" => {
                    self.bump();
                    self.expect_sym("(")?;
                    let (u, ctx, l) = self.type_binder()?;
                    self.expect_sym(",")?;
                    let l2 = self.level()?;
                    self.expect_sym(",")?;
                    let t = self.with_scope(self.push_global(&u, Some(ctx.clone())), |p| p.ty())?;
                    self.expect_sym(")")?;
                    Ok(Type::TyPi(Name::new(&u), ctx, l, l2, Box::new(t)))
                }
                _ => {
                    let name = self.ident()?;
                    if position(&self.scope.locals, &name).is_some() {
                        return Err(ParseError::new(
                            line,
                            col,
                            format!("local variable `{name}` is used where a type is expected"),
                        ));
                    }
                    let j = self
                        .global_index(&name)
                        .ok_or_else(|| ParseError::new(line, col, format!("unknown type `{name}`")))?;
                    let d = if self.is_sym("[") { self.lsubst()? } else { self.identity_for(j, &name)? };
                    Ok(Type::GVar(j, d))
                }
            },
            t => self.err(format!("expected a type, found {t}")),
        }
    }

    /// `U : [Δ |- Ty l]`.
    fn type_binder(&mut self) -> P<(String, LocalCtx, Level)> {
        let u = self.ident()?;
        self.expect_sym(":")?;
        self.expect_sym("[")?;
        match self.code_sig()? {
            (ctx, None, l) => Ok((u, ctx, l)),
            _ => self.err("expected a type-variable signature `[ctx |- Ty l]`"),
        }
    }

    fn level_binders(&mut self) -> P<Vec<String>> {
        let mut xs = vec![self.ident()?];
        while matches!(self.peek(), Tok::Ident(_)) {
            xs.push(self.ident()?);
        }
        Ok(xs)
    }

    // -- terms ------------------------------------------------------------

    fn tm_atom(&mut self) -> P<Term> {
        match self.peek() {
            Tok::Sym("(") => {
                self.bump();
                let t = self.tm()?;
                self.expect_sym(")")?;
                Ok(t)
            }
            Tok::Num(_) => self.tm(),
            Tok::Ident(s) if matches!(s.as_str(), "zero" | "Nat" | "Ty" | "Pi") || !is_reserved(s) => self.tm(),
            t => self.err(format!("expected a variable, numeral or parenthesised term, found {t}")),
        }
    }

    pub fn tm(&mut self) -> P<Term> {
        let (line, col) = self.here();
        let s = match self.peek().clone() {
            Tok::Num(n) => {
                self.bump();
                return Ok(Term::numeral(n));
            }
            Tok::Sym("(") => {
                self.bump();
                let t = self.tm()?;
                self.expect_sym(")")?;
                return Ok(t);
            }
            Tok::Ident(s) => s,
            t => return self.err(format!("expected a term, found {t}")),
        };
        match s.as_str() {
            "zero" => {
                self.bump();
                Ok(Term::Zero)
            }
            "succ" => {
                self.bump();
                Ok(Term::succ(self.tm()?))
            }
            "Nat" => {
                self.bump();
                Ok(Term::NatCode)
            }
            "Ty" => {
                self.bump();
                Ok(Term::TyCode(self.level_atom()?))
            }
            "Pi" => {
                self.bump();
                self.expect_sym("(")?;
                let l = self.level()?;
                self.expect_sym(",")?;
                let l2 = self.level()?;
                self.expect_sym(",")?;
                let x = self.ident()?;
                self.expect_sym(",")?;
                let a = self.tm()?;
                self.expect_sym(",")?;
                let b = self.with_scope(self.push_local(&x), |p| p.tm())?;
                self.expect_sym(")")?;
                Ok(Term::PiCode(l, l2, Name::new(&x), Box::new(a), Box::new(b)))
            }
            "elimNat" => {
                self.bump();
                self.expect_sym("(")?;
                let l = self.level()?;
                self.expect_sym(",")?;
                let x = self.ident()?;
                self.expect_sym(".")?;
                let m = self.with_scope(self.push_local(&x), |p| p.ty())?;
                self.expect_sym(",")?;
                let z = self.tm()?;
                self.expect_sym(",")?;
                let x = self.ident()?;
                let y = self.ident()?;
                self.expect_sym(".")?;
                let mut sc = self.push_local(&x);
                sc.locals.push(y);
                let st = self.with_scope(sc, |p| p.tm())?;
                self.expect_sym(",")?;
                let n = self.tm()?;
                self.expect_sym(")")?;
                Ok(Term::ElimNat(l, Box::new(m), Box::new(z), Box::new(st), Box::new(n)))
            }
            "fun" => {
                self.bump();
                self.expect_sym("(")?;
                let l = self.level()?;
                self.expect_sym(",")?;
                let l2 = self.level()?;
                self.expect_sym(",")?;
                let x = self.ident()?;
                self.expect_sym(":")?;
                let s = self.ty()?;
                self.expect_sym(")")?;
                self.expect_sym("=>")?;
                let b = self.with_scope(self.push_local(&x), |p| p.tm())?;
                Ok(Term::Lam(l, l2, Name::new(&x), Box::new(s), Box::new(b)))
            }
            "app" => {
                self.bump();
                self.expect_sym("(")?;
                let f = self.tm()?;
                self.expect_sym(",")?;
                let l = self.level()?;
                self.expect_sym(",")?;
                let l2 = self.level()?;
                self.expect_sym(",")?;
                let x = self.ident()?;
                self.expect_sym(":")?;
                let s = self.ty()?;
                self.expect_sym(",")?;
                let t = self.with_scope(self.push_local(&x), |p| p.ty())?;
                self.expect_sym(",")?;
                let a = self.tm()?;
                self.expect_sym(")")?;
                Ok(Term::App(Box::new(f), l, l2, Name::new(&x), Box::new(s), Box::new(t), Box::new(a)))
            }
            "ulam" => {
                self.bump();
                self.expect_sym("(")?;
                let xs = self.level_binders()?;
                self.expect_sym(",")?;
                let (l, b) = self.with_scope(self.push_levels(&xs), |p| {
                    let l = p.level()?;
                    p.expect_sym(")")?;
                    p.expect_sym("=>")?;
                    Ok((l, p.tm()?))
                })?;
                Ok(Term::ULam(l, xs.iter().map(|x| Name::new(x)).collect(), Box::new(b)))
            }
            "uapp" => {
                self.bump();
                self.expect_sym("(")?;
                let f = self.tm()?;
                let mut ls = Vec::new();
                while self.eat_sym(",") {
                    ls.push(self.level()?);
                }
                self.expect_sym(")")?;
                if ls.is_empty() {
                    return Err(ParseError::new(line, col, "`uapp` needs at least one level argument"));
                }
                Ok(Term::UApp(Box::new(f), ls))
            }
            "ctxfun" => {
                self.bump();
                self.expect_sym("(")?;
                let g = self.ident()?;
                self.expect_sym(",")?;
                let l = self.level()?;
                self.expect_sym(")")?;
                self.expect_sym("=>")?;
                let b = self.with_scope(self.push_global(&g, None), |p| p.tm())?;
                Ok(Term::CtxLam(l, Name::new(&g), Box::new(b)))
            }
            "ctxapp" => {
                self.bump();
                self.expect_sym("(")?;
                let f = self.tm()?;
                self.expect_sym(",")?;
                self.expect_sym("[")?;
                let (ctx, _) = self.ctx()?;
                self.expect_sym("]")?;
                self.expect_sym(")")?;
                Ok(Term::CtxApp(Box::new(f), ctx))
            }
            "tyfun" => {
                self.bump();
                self.expect_sym("(")?;
                let (u, ctx, l) = self.type_binder()?;
                self.expect_sym(",")?;
                let l2 = self.level()?;
                self.expect_sym(")")?;
                self.expect_sym("=>")?;
                let b = self.with_scope(self.push_global(&u, Some(ctx.clone())), |p| p.tm())?;
                Ok(Term::TyLam(l, l2, Name::new(&u), ctx, Box::new(b)))
            }
            "tyapp" => {
                self.bump();
                self.expect_sym("(")?;
                let f = self.tm()?;
                self.expect_sym(",")?;
                let names = self.names_header()?;
                let t = self.with_scope(self.foreign(&names), |p| p.ty())?;
                self.expect_sym(")")?;
                Ok(Term::TyApp(Box::new(f), Box::new(t)))
            }
            "boxty" => {
                self.bump();
                let names = self.names_header()?;
                let t = self.with_scope(self.foreign(&names), |p| p.ty())?;
                Ok(Term::BoxTy(Box::new(t)))
            }
            "box" => {
                self.bump();
                let names = self.names_header()?;
                let t = self.with_scope(self.foreign(&names), |p| p.tm())?;
                Ok(Term::BoxTm(Box::new(t)))
            }
            "letbox" => {
                self.bump();
                let u = self.ident()?;
                self.expect_sym(":")?;
                self.expect_sym("[")?;
                let (ctx, ty, l) = self.code_sig()?;
                self.expect_sym(":=")?;
                let s = self.tm()?;
                self.expect_kw("return")?;
                let x = self.ident()?;
                self.expect_sym(".")?;
                let m = self.with_scope(self.push_local(&x), |p| p.ty())?;
                self.expect_sym("@")?;
                let l2 = self.level()?;
                self.expect_kw("in")?;
                let body = self.with_scope(self.push_global(&u, Some(ctx.clone())), |p| p.tm())?;
                let (u, m, body, s) = (Name::new(&u), Box::new(m), Box::new(body), Box::new(s));
                Ok(match ty {
                    None => Term::LetBoxTy(l2, l, ctx, m, u, body, s),
                    Some(t) => Term::LetBoxTm(l2, l, ctx, Box::new(t), m, u, body, s),
                })
            }
            "elimTy" | "elimTm" => {
                self.bump();
                self.expect_sym("(")?;
                let l1 = self.level()?;
                self.expect_sym(",")?;
                let l2 = self.level()?;
                self.expect_sym(",")?;
                let l = self.level()?;
                self.expect_sym(",")?;
                self.expect_sym("[")?;
                let (ctx, scope) = self.ctx()?;
                let ty = if s == "elimTm" {
                    self.expect_sym("|-")?;
                    Some(self.with_scope(scope, |p| p.ty())?)
                } else {
                    None
                };
                self.expect_sym("]")?;
                self.expect_sym(",")?;
                let scrut = self.tm()?;
                self.expect_sym(")")?;
                let (ms, bs) = self.recursor()?;
                let (ms, bs, scrut) = (Box::new(ms), Box::new(bs), Box::new(scrut));
                Ok(match ty {
                    None => Term::ElimTyp(l1, l2, ms, bs, l, ctx, scrut),
                    Some(t) => Term::ElimTrm(l1, l2, ms, bs, l, ctx, Box::new(t), scrut),
                })
            }
            _ if is_reserved(&s) => self.err(format!("unexpected `{s}`")),
            _ => {
                self.bump();
                self.variable(&s, line, col)
            }
        }
    }

    fn variable(&mut self, name: &str, line: usize, col: usize) -> P<Term> {
        if let Some(j) = position(&self.scope.locals, name) {
            if self.is_sym("[") {
                return self.err(format!("local variable `{name}` cannot take a substitution"));
            }
            return Ok(Term::LocalVar(j));
        }
        if let Some(j) = self.global_index(name) {
            let d = if self.is_sym("[") { self.lsubst()? } else { self.identity_for(j, name)? };
            return Ok(Term::GVar(j, d));
        }
        if let Some(def) = self.defs.iter().rev().find(|d| d.name == name) {
            let t = shift_levels(&def.body, 0, self.scope.levels.len() - def.levels);
            let t = shift_globals(&t, 0, self.scope.globals.len() - def.globals);
            return Ok(shift_locals(&t, 0, self.scope.locals.len()));
        }
        Err(ParseError::new(line, col, format!("unknown variable `{name}`")))
    }

    fn recursor(&mut self) -> P<(Motives, Branches)> {
        self.expect_sym("{")?;
        self.expect_kw("ty")?;
        let l = self.ident()?;
        let g = self.ident()?;
        let xt = self.ident()?;
        self.expect_sym("=>")?;
        let mut sc = self.push_levels(std::slice::from_ref(&l));
        sc.globals.push((g.clone(), None));
        sc.locals.push(xt.clone());
        let typ = self.with_scope(sc, |p| p.ty())?;
        self.expect_sym(";")?;
        self.expect_kw("tm")?;
        let l = self.ident()?;
        let g = self.ident()?;
        let u = self.ident()?;
        let xm = self.ident()?;
        self.expect_sym("=>")?;
        let mut sc = self.push_levels(std::slice::from_ref(&l));
        sc.globals.push((g, None));
        sc.globals.push((u, Some(LocalCtx::var(0))));
        sc.locals.push(xm.clone());
        let trm = self.with_scope(sc, |p| p.ty())?;
        let ms = Motives { typ_name: Name::new(&xt), typ, trm_name: Name::new(&xm), trm };

        let mut cases: BTreeMap<BranchKind, Branch> = BTreeMap::new();
        while self.eat_sym("|") {
            let (line, col) = self.here();
            let kw = match self.bump() {
                Tok::Ident(s) => s,
                t => return Err(ParseError::new(line, col, format!("expected a case name, found {t}"))),
            };
            let kind = BranchKind::from_keyword(&kw)
                .ok_or_else(|| ParseError::new(line, col, format!("`{kw}` is not a recursor case")))?;
            if cases.contains_key(&kind) {
                return Err(ParseError::new(line, col, format!("case `{kw}` is given twice")));
            }
            let mut binders = Vec::new();
            while !self.is_sym("=>") {
                binders.push(self.ident()?);
            }
            if binders.len() != kind.binder_count() {
                return Err(ParseError::new(
                    line,
                    col,
                    format!("case `{kw}` binds {} names, found {}", kind.binder_count(), binders.len()),
                ));
            }
            self.expect_sym("=>")?;
            let (nl, ng, _) = kind.arity();
            let sig = branch_signature(kind);
            let mut sc = self.push_levels(&binders[..nl]);
            for (q, b) in sig.globals.iter().enumerate() {
                let ctx = match b {
                    GBinding::Ctx => None,
                    GBinding::Typ { ctx, .. } | GBinding::Trm { ctx, .. } => Some(ctx.clone()),
                };
                sc.globals.push((binders[nl + q].clone(), ctx));
            }
            sc.locals.extend(binders[nl + ng..].iter().cloned());
            let body = self.with_scope(sc, |p| p.tm())?;
            cases.insert(kind, Branch { binders: binders.iter().map(|b| Name::new(b)).collect(), body });
        }
        let (line, col) = self.here();
        self.expect_sym("}")?;
        if let Some(k) = BranchKind::ALL.into_iter().find(|k| !cases.contains_key(k)) {
            return Err(ParseError::new(line, col, format!("missing recursor case `{}`", k.keyword())));
        }
        let bs = Branches::new(cases.into_values().collect())
            .map_err(|e| ParseError::new(line, col, e.to_string()))?;
        Ok((ms, bs))
    }

    // -- files ------------------------------------------------------------

    pub fn program(&mut self) -> P<Program> {
        let mut prog = Program::default();
        let mut seen_other = false;
        while !self.at_end() {
            let (line, col) = self.here();
            if self.is_kw("level-vars") {
                if seen_other {
                    return self.err("`level-vars` must come before all globals and definitions");
                }
                self.bump();
                while matches!(self.peek(), Tok::Ident(_)) {
                    let x = self.ident()?;
                    prog.levels.push(Name::new(&x));
                    self.scope.levels.push(x);
                }
                self.expect_sym(";")?;
            } else if self.is_kw("global") {
                if !prog.defs.is_empty() {
                    return self.err("globals must come before all definitions");
                }
                seen_other = true;
                self.bump();
                let x = self.ident()?;
                self.expect_sym(":")?;
                let binding = if self.is_kw("Ctx") {
                    self.bump();
                    GBinding::Ctx
                } else {
                    self.expect_sym("[")?;
                    let (ctx, ty, level) = self.code_sig()?;
                    self.expect_sym("@")?;
                    let layer = self.layer()?;
                    match ty {
                        None => GBinding::Typ { ctx, layer, level },
                        Some(ty) => GBinding::Trm { ctx, layer, ty, level },
                    }
                };
                self.expect_sym(";")?;
                let ctx = match &binding {
                    GBinding::Ctx => None,
                    GBinding::Typ { ctx, .. } | GBinding::Trm { ctx, .. } => Some(ctx.clone()),
                };
                self.scope.globals.push((x.clone(), ctx));
                prog.globals.push(Name::new(&x), binding);
                prog.global_pos.push((line, col));
            } else if self.is_kw("def") {
                seen_other = true;
                self.bump();
                let name = self.ident()?;
                if self.defs.iter().any(|d| d.name == name) {
                    return Err(ParseError::new(line, col, format!("`{name}` is defined twice")));
                }
                self.expect_sym("@")?;
                let layer = self.layer()?;
                self.expect_sym(":")?;
                let ty = self.ty()?;
                self.expect_sym("@")?;
                let level = self.level()?;
                self.expect_sym(":=")?;
                let body = self.tm()?;
                self.expect_sym(";")?;
                self.defs.push(DefInfo {
                    name: name.clone(),
                    body: body.clone(),
                    levels: self.scope.levels.len(),
                    globals: self.scope.globals.len(),
                });
                prog.defs.push(Def { name, layer, ty, level, body, line, col });
            } else {
                return self.err(format!("expected `level-vars`, `global` or `def`, found {}", self.peek()));
            }
        }
        Ok(prog)
    }
}
