//! Pretty printing back to the surface syntax.
//!
//! Binders are renamed when their name would capture or be confused with
//! a variable already in scope, so printed output always parses back to the
//! same term.

use std::collections::HashSet;

use crate::recursor::branch_signature;
use crate::subst::{local_bound, shift_globals};
use crate::syntax::*;
use crate::typing::Env;
use crate::ulevel::{level_is_atomic, Level, LevelDisplay};

use super::lexer::is_reserved;

/// Names in scope while printing. Each global remembers the context of
/// its binding (in the binding's own scope) so that identity substitutions
/// can be printed as a bare name.
#[derive(Clone, Debug, Default)]
pub struct Printer {
    levels: Vec<Name>,
    globals: Vec<(Name, Option<LocalCtx>)>,
    locals: Vec<Name>,
}

fn binding_ctx(b: &GBinding) -> Option<LocalCtx> {
    match b {
        GBinding::Ctx => None,
        GBinding::Typ { ctx, .. } | GBinding::Trm { ctx, .. } => Some(ctx.clone()),
    }
}

impl Printer {
    pub fn new() -> Printer {
        Printer::default()
    }

    pub fn from_env(env: &Env) -> Printer {
        let mut p = Printer::new();
        for n in &env.levels {
            p = p.bind_level(n).0;
        }
        for e in &env.globals.0 {
            p = p.bind_global(&e.name, binding_ctx(&e.binding)).0;
        }
        for e in &env.locals.entries {
            p = p.bind_local(&e.name).0;
        }
        p
    }

    fn term_names(&self) -> HashSet<&str> {
        self.globals.iter().map(|(n, _)| n.as_str()).chain(self.locals.iter().map(|n| n.as_str())).collect()
    }

    fn fresh(base: &str, taken: &HashSet<&str>) -> String {
        let base = if base.is_empty() || base == "_" || is_reserved(base) { "x" } else { base };
        if !taken.contains(base) && !is_reserved(base) {
            return base.to_string();
        }
        let stem = base.trim_end_matches(|c: char| c.is_ascii_digit());
        let stem = if stem.is_empty() { "x" } else { stem };
        (1..)
            .map(|i| format!("{stem}{i}"))
            .find(|c| !taken.contains(c.as_str()) && !is_reserved(c))
            .expect("unbounded supply of names")
    }

    fn bind_level(&self, n: &Name) -> (Printer, String) {
        let taken: HashSet<&str> = self.levels.iter().map(|n| n.as_str()).collect();
        let s = Printer::fresh(n.as_str(), &taken);
        let mut p = self.clone();
        p.levels.push(Name::new(&s));
        (p, s)
    }

    fn bind_levels(&self, ns: &[Name]) -> (Printer, Vec<String>) {
        let mut p = self.clone();
        let mut out = Vec::new();
        for n in ns {
            let (q, s) = p.bind_level(n);
            p = q;
            out.push(s);
        }
        (p, out)
    }

    fn bind_global(&self, n: &Name, ctx: Option<LocalCtx>) -> (Printer, String) {
        let s = Printer::fresh(n.as_str(), &self.term_names());
        let mut p = self.clone();
        p.globals.push((Name::new(&s), ctx));
        (p, s)
    }

    fn bind_local(&self, n: &Name) -> (Printer, String) {
        let s = Printer::fresh(n.as_str(), &self.term_names());
        let mut p = self.clone();
        p.locals.push(Name::new(&s));
        (p, s)
    }

    fn bind_locals(&self, ns: &[Name]) -> (Printer, Vec<String>) {
        let mut p = self.clone();
        let mut out = Vec::new();
        for n in ns {
            let (q, s) = p.bind_local(n);
            p = q;
            out.push(s);
        }
        (p, out)
    }

    /// A fresh local scope of `n` generated names, for the contents of a
    /// box or a type argument.
    fn foreign_scope(&self, n: usize) -> (Printer, Vec<String>) {
        let mut p = self.clone();
        p.locals.clear();
        let names: Vec<Name> = (0..n).map(|i| Name::new(&format!("x{i}"))).collect();
        p.bind_locals(&names)
    }

    fn global_name(&self, j: usize) -> String {
        let n = self.globals.len();
        if j < n {
            self.globals[n - 1 - j].0.to_string()
        } else {
            format!("?g{}", j - n)
        }
    }

    fn local_name(&self, j: usize) -> String {
        let n = self.locals.len();
        if j < n {
            self.locals[n - 1 - j].to_string()
        } else {
            format!("?x{}", j - n)
        }
    }

    /// Whether `delta` is the identity on the context of global `j`.
    fn is_identity(&self, j: usize, delta: &LocalSubst) -> bool {
        let n = self.globals.len();
        if j >= n {
            return false;
        }
        match &self.globals[n - 1 - j].1 {
            Some(ctx) => lid(&shift_globals(ctx, 0, j + 1)) == *delta,
            None => false,
        }
    }

    pub fn level(&self, l: &Level) -> String {
        LevelDisplay { level: l, names: &self.levels }.to_string()
    }

    fn latom(&self, l: &Level) -> String {
        if level_is_atomic(l) {
            self.level(l)
        } else {
            format!("({})", self.level(l))
        }
    }

    /// A context's base as written in diagnostics.
    pub fn base_name(&self, b: &CtxBase) -> String {
        match b {
            CtxBase::Empty => ".".into(),
            CtxBase::Var(g) => self.global_name(*g),
        }
    }

    /// A context abbreviated to its base and length.
    pub fn ctx_shape(&self, c: &LocalCtx) -> String {
        format!("{} with {} entries", self.base_name(&c.base), c.len())
    }

    pub fn ls_base(&self, b: &LsBase) -> String {
        match b {
            LsBase::Empty { g: None, k } => format!("emp({k})"),
            LsBase::Empty { g: Some(g), k } => format!("emp({}, {k})", self.global_name(*g)),
            LsBase::Wk { g, k } => format!("wk({}, {k})", self.global_name(*g)),
        }
    }

    fn lsubst(&self, d: &LocalSubst) -> String {
        let mut parts = vec![self.ls_base(&d.base)];
        parts.extend(d.entries.iter().map(|t| self.tm(t)));
        format!("[{}]", parts.join(", "))
    }

    /// A local context, printed with its own local scope. Returns the
    /// printer extended with the context's entries.
    pub fn ctx_with(&self, c: &LocalCtx) -> (String, Printer) {
        let mut p = self.clone();
        p.locals.clear();
        let mut parts = Vec::new();
        if let CtxBase::Var(g) = c.base {
            parts.push(self.global_name(g));
        }
        for e in &c.entries {
            let ty = p.ty(&e.ty);
            let lv = p.level(&e.level);
            let (q, x) = p.bind_local(&e.name);
            parts.push(format!("{x} : {ty} @ {lv}"));
            p = q;
        }
        let s = if parts.is_empty() { ".".to_string() } else { parts.join(", ") };
        (s, p)
    }

    pub fn ctx(&self, c: &LocalCtx) -> String {
        self.ctx_with(c).0
    }

    pub fn ty(&self, t: &Type) -> String {
        match t {
            Type::Nat => "Nat".into(),
            Type::Ty(l) => format!("Ty {}", self.latom(l)),
            Type::Pi(l, l2, x, s, body) => {
                let (p, x) = self.bind_local(x);
                format!("Pi({}, {}, {x}, {}, {})", self.level(l), self.level(l2), self.ty(s), p.ty(body))
            }
            Type::UPi(ns, l, body) => {
                let (p, xs) = self.bind_levels(ns);
                format!("UPi({}, {}, {})", xs.join(" "), p.level(l), p.ty(body))
            }
            Type::El(l, code) => format!("El {} {}", self.latom(l), self.tatom(code)),
            Type::GVar(j, d) => {
                if self.is_identity(*j, d) {
                    self.global_name(*j)
                } else {
                    format!("{}{}", self.global_name(*j), self.lsubst(d))
                }
            }
            Type::CtxPi(g, l, body) => {
                let (p, g) = self.bind_global(g, None);
                format!("CtxPi({g}, {}, {})", self.level(l), p.ty(body))
            }
            Type::TyPi(u, c, l, l2, body) => {
                let (p, u) = self.bind_global(u, Some(c.clone()));
                format!(
                    "TyPi({u} : [{} |- Ty {}], {}, {})",
                    self.ctx(c),
                    self.latom(l),
                    self.level(l2),
                    p.ty(body)
                )
            }
            Type::CodeTy(c, l) => format!("[{} |- Ty {}]", self.ctx(c), self.latom(l)),
            Type::CodeTm(c, t, l) => {
                let (cs, p) = self.ctx_with(c);
                format!("[{cs} |- {} : {}]", p.ty(t), self.level(l))
            }
        }
    }

    fn tatom(&self, t: &Term) -> String {
        let atomic = match t {
            Term::LocalVar(_) | Term::GVar(..) | Term::NatCode | Term::Zero | Term::PiCode(..) => true,
            Term::TyCode(l) => level_is_atomic(l),
            Term::Succ(_) => t.as_numeral().is_some(),
            _ => false,
        };
        if atomic {
            self.tm(t)
        } else {
            format!("({})", self.tm(t))
        }
    }

    fn names_header(names: &[String]) -> String {
        if names.is_empty() {
            String::new()
        } else {
            format!("{{{}}} ", names.join(", "))
        }
    }

    pub fn tm(&self, t: &Term) -> String {
        match t {
            Term::LocalVar(j) => self.local_name(*j),
            Term::GVar(j, d) => {
                if self.is_identity(*j, d) {
                    self.global_name(*j)
                } else {
                    format!("{}{}", self.global_name(*j), self.lsubst(d))
                }
            }
            Term::NatCode => "Nat".into(),
            Term::TyCode(l) => format!("Ty {}", self.latom(l)),
            Term::PiCode(l, l2, x, s, body) => {
                let (p, x) = self.bind_local(x);
                format!("Pi({}, {}, {x}, {}, {})", self.level(l), self.level(l2), self.tm(s), p.tm(body))
            }
            Term::Zero => "zero".into(),
            Term::Succ(n) => match t.as_numeral() {
                Some(k) => k.to_string(),
                None => format!("succ {}", self.tatom(n)),
            },
            Term::ElimNat(l, m, s, s2, n) => {
                let (px, x) = self.bind_local(&Name::new("x"));
                let (pxy, ys) = self.bind_locals(&[Name::new("x"), Name::new("y")]);
                format!(
                    "elimNat({}, {x}. {}, {}, {} {}. {}, {})",
                    self.level(l),
                    px.ty(m),
                    self.tm(s),
                    ys[0],
                    ys[1],
                    pxy.tm(s2),
                    self.tm(n)
                )
            }
            Term::Lam(l, l2, x, s, body) => {
                let (p, x) = self.bind_local(x);
                format!("fun({}, {}, {x} : {}) => {}", self.level(l), self.level(l2), self.ty(s), p.tm(body))
            }
            Term::App(f, l, l2, x, s, ty, a) => {
                let (p, x) = self.bind_local(x);
                format!(
                    "app({}, {}, {}, {x} : {}, {}, {})",
                    self.tm(f),
                    self.level(l),
                    self.level(l2),
                    self.ty(s),
                    p.ty(ty),
                    self.tm(a)
                )
            }
            Term::ULam(l, ns, body) => {
                let (p, xs) = self.bind_levels(ns);
                format!("ulam({}, {}) => {}", xs.join(" "), p.level(l), p.tm(body))
            }
            Term::UApp(f, ls) => {
                let args: Vec<String> = ls.iter().map(|l| self.level(l)).collect();
                format!("uapp({}, {})", self.tm(f), args.join(", "))
            }
            Term::CtxLam(l, g, body) => {
                let (p, g) = self.bind_global(g, None);
                format!("ctxfun({g}, {}) => {}", self.level(l), p.tm(body))
            }
            Term::CtxApp(f, c) => format!("ctxapp({}, [{}])", self.tm(f), self.ctx(c)),
            Term::TyLam(l, l2, u, c, body) => {
                let (p, u) = self.bind_global(u, Some(c.clone()));
                format!(
                    "tyfun({u} : [{} |- Ty {}], {}) => {}",
                    self.ctx(c),
                    self.latom(l),
                    self.level(l2),
                    p.tm(body)
                )
            }
            Term::TyApp(f, a) => {
                let (p, names) = self.foreign_scope(local_bound(&**a));
                format!("tyapp({}, {}{})", self.tm(f), Printer::names_header(&names), p.ty(a))
            }
            Term::BoxTy(a) => {
                let (p, names) = self.foreign_scope(local_bound(&**a));
                format!("boxty {}{}", Printer::names_header(&names), p.ty(a))
            }
            Term::BoxTm(a) => {
                let (p, names) = self.foreign_scope(local_bound(&**a));
                format!("box {}{}", Printer::names_header(&names), p.tm(a))
            }
            Term::LetBoxTy(l2, l, c, m, u, body, s) => {
                let (px, x) = self.bind_local(&Name::new("x"));
                let (pu, u) = self.bind_global(u, Some(c.clone()));
                format!(
                    "letbox {u} : [{} |- Ty {}] := {} return {x}. {} @ {} in {}",
                    self.ctx(c),
                    self.latom(l),
                    self.tm(s),
                    px.ty(m),
                    self.level(l2),
                    pu.tm(body)
                )
            }
            Term::LetBoxTm(l2, l, c, ty, m, u, body, s) => {
                let (cs, pc) = self.ctx_with(c);
                let (px, x) = self.bind_local(&Name::new("x"));
                let (pu, u) = self.bind_global(u, Some(c.clone()));
                format!(
                    "letbox {u} : [{cs} |- {} : {}] := {} return {x}. {} @ {} in {}",
                    pc.ty(ty),
                    self.level(l),
                    self.tm(s),
                    px.ty(m),
                    self.level(l2),
                    pu.tm(body)
                )
            }
            Term::ElimTyp(l1, l2, ms, bs, l, c, s) => format!(
                "elimTy({}, {}, {}, [{}], {}) {}",
                self.level(l1),
                self.level(l2),
                self.level(l),
                self.ctx(c),
                self.tm(s),
                self.recursor(ms, bs)
            ),
            Term::ElimTrm(l1, l2, ms, bs, l, c, ty, s) => {
                let (cs, pc) = self.ctx_with(c);
                format!(
                    "elimTm({}, {}, {}, [{cs} |- {}], {}) {}",
                    self.level(l1),
                    self.level(l2),
                    self.level(l),
                    pc.ty(ty),
                    self.tm(s),
                    self.recursor(ms, bs)
                )
            }
        }
    }

    fn recursor(&self, ms: &Motives, bs: &Branches) -> String {
        let (p, lv) = self.bind_level(&Name::new("l"));
        let (p, g) = p.bind_global(&Name::new("g"), None);
        let (pt, xt) = p.bind_local(&ms.typ_name);
        let (pu, ut) = p.bind_global(&Name::new("T"), Some(LocalCtx::var(0)));
        let (pm, xm) = pu.bind_local(&ms.trm_name);
        let mut out = format!(
            "{{ ty {lv} {g} {xt} => {}; tm {lv} {g} {ut} {xm} => {}",
            pt.ty(&ms.typ),
            pm.ty(&ms.trm)
        );
        for (k, b) in bs.iter() {
            let sig = branch_signature(k);
            let (nl, ng, _) = k.arity();
            let (mut p, mut names) = self.bind_levels(&b.binders[..nl]);
            for (q, gb) in sig.globals.iter().enumerate() {
                let (p2, s) = p.bind_global(&b.binders[nl + q], binding_ctx(gb));
                p = p2;
                names.push(s);
            }
            let (p, xs) = p.bind_locals(&b.binders[nl + ng..]);
            names.extend(xs);
            out.push_str(&format!(" | {} {} => {}", k.keyword(), names.join(" "), p.tm(&b.body)));
        }
        out.push_str(" }");
        out
    }
}
