//! Bidirectional type checking for all four layers.
//!
//! Every judgement takes an [`Env`] (level variables, global context,
//! local context) and a [`Layer`]. Eliminators and most introduction forms
//! infer their type; boxes and, when an expected type is available, the
//! binder forms are checked. All remaining equality obligations go through
//! the convertibility checker at `typeof(i)`.

use std::fmt;

use crate::recursor::{branch_signature, motive_instance, rec_bindings, result_type, BranchSig};
use crate::reduce::{whnf_term, whnf_type, Fuel, ReduceError};
use crate::subst::{
    gctx_lookup, gctx_shift_levels, lctx_lookup, lsubst_apply, shift_globals, shift_levels,
    shift_locals, subst_top_globals, subst_top_levels, subst_top_locals, SubstError,
};
use crate::surface::Printer;
use crate::syntax::*;
use crate::ulevel::{level_equiv, normalize, wf_level, Level, UnivCtx};

/// The contexts of a judgement.
#[derive(Clone, Debug, Default)]
pub struct Env {
    pub levels: UnivCtx,
    pub globals: GlobalCtx,
    pub locals: LocalCtx,
}

impl Default for LocalCtx {
    fn default() -> LocalCtx {
        LocalCtx::empty()
    }
}

impl Env {
    pub fn new(levels: UnivCtx, globals: GlobalCtx) -> Env {
        Env { levels, globals, locals: LocalCtx::empty() }
    }

    /// `Γ, x : T @ l`.
    pub fn push_local(&self, name: Name, ty: Type, level: Level) -> Env {
        Env { locals: self.locals.clone().push(name, ty, level), ..self.clone() }
    }

    /// `Ψ, x : B`, weakening the local context.
    pub fn push_global(&self, name: Name, binding: GBinding) -> Env {
        let mut globals = self.globals.clone();
        globals.push(name, binding);
        Env { levels: self.levels.clone(), globals, locals: shift_globals(&self.locals, 0, 1) }
    }

    /// `L, ℓ⃗`, weakening both other contexts.
    pub fn push_levels(&self, names: &[Name]) -> Env {
        let n = names.len();
        let mut levels = self.levels.clone();
        levels.extend(names.iter().cloned());
        Env {
            levels,
            globals: gctx_shift_levels(&self.globals, n),
            locals: shift_levels(&self.locals, 0, n),
        }
    }

    /// The same level and global contexts with a different local context.
    pub fn with_locals(&self, locals: LocalCtx) -> Env {
        Env { levels: self.levels.clone(), globals: self.globals.clone(), locals }
    }

    pub fn printer(&self) -> Printer {
        Printer::from_env(self)
    }
}

/// Broad category of a type error.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErrorKind {
    /// A construct used at a layer that does not admit it.
    Layer,
    /// An ill-formed or mismatched level, including misuse of `omega`.
    Level,
    /// Two types or terms that should agree do not.
    Mismatch,
    /// A variable that is unbound or of the wrong sort.
    Scope,
    /// A local substitution whose base does not fit its contexts.
    Base,
    /// A term that needs an expected type to be checked.
    Annotation,
    /// Reduction ran out of fuel or met an ill-formed redex.
    Reduction,
}

impl ErrorKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ErrorKind::Layer => "layer",
            ErrorKind::Level => "level",
            ErrorKind::Mismatch => "mismatch",
            ErrorKind::Scope => "scope",
            ErrorKind::Base => "base",
            ErrorKind::Annotation => "annotation",
            ErrorKind::Reduction => "reduction",
        }
    }
}

/// A failed judgement: the rule whose premise failed, what went wrong, the
/// path of constructors from the checked term down to the failure, and
/// pretty-printed expected and actual forms when there are any.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagnostic {
    pub rule: &'static str,
    pub kind: ErrorKind,
    pub message: String,
    /// Outermost first.
    pub path: Vec<&'static str>,
    pub expected: Option<String>,
    pub actual: Option<String>,
}

impl Diagnostic {
    pub fn new(rule: &'static str, kind: ErrorKind, message: impl Into<String>) -> Diagnostic {
        Diagnostic { rule, kind, message: message.into(), path: Vec::new(), expected: None, actual: None }
    }

    pub fn with_forms(mut self, expected: String, actual: String) -> Diagnostic {
        self.expected = Some(expected);
        self.actual = Some(actual);
        self
    }

    fn within(mut self, step: &'static str) -> Diagnostic {
        self.path.insert(0, step);
        self
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}] {}", self.rule, self.message)?;
        if let (Some(e), Some(a)) = (&self.expected, &self.actual) {
            write!(f, "\n  expected: {e}\n  actual:   {a}")?;
        }
        if !self.path.is_empty() {
            write!(f, "\n  at: {}", self.path.join(" > "))?;
        }
        Ok(())
    }
}

impl std::error::Error for Diagnostic {}

pub type TcResult<T> = Result<T, Diagnostic>;

pub(crate) fn subst_err(rule: &'static str, e: SubstError) -> Diagnostic {
    Diagnostic::new(rule, ErrorKind::Scope, e.to_string())
}

/// `stuck` renders the subject whose reduction failed.
fn reduce_err(e: ReduceError, stuck: impl FnOnce() -> String) -> Diagnostic {
    match e {
        ReduceError::FuelExhausted { .. } => {
            Diagnostic::new("fuel", ErrorKind::Reduction, format!("{e} while reducing `{}`", stuck()))
        }
        ReduceError::Subst(_) => Diagnostic::new("reduce", ErrorKind::Reduction, e.to_string()),
    }
}

pub(crate) fn require_m(rule: &'static str, i: Layer) -> TcResult<()> {
    if i == Layer::M {
        Ok(())
    } else {
        Err(Diagnostic::new(rule, ErrorKind::Layer, format!("only allowed at layer m, not at layer {i}")))
    }
}

fn not_v(rule: &'static str, i: Layer) -> TcResult<()> {
    if i == Layer::V {
        Err(Diagnostic::new(rule, ErrorKind::Layer, "layer v admits only variables"))
    } else {
        Ok(())
    }
}

pub(crate) fn lvl_eq(env: &Env, rule: &'static str, expected: &Level, actual: &Level) -> TcResult<()> {
    if level_equiv(expected, actual) {
        Ok(())
    } else {
        let p = env.printer();
        Err(Diagnostic::new(rule, ErrorKind::Level, "level mismatch")
            .with_forms(p.level(&normalize(expected)), p.level(&normalize(actual))))
    }
}

fn type_head(t: &Type) -> &'static str {
    match t {
        Type::Nat => "Nat",
        Type::Pi(..) => "Pi",
        Type::Ty(_) => "Ty",
        Type::UPi(..) => "UPi",
        Type::El(..) => "El",
        Type::GVar(..) => "U",
        Type::CtxPi(..) => "CtxPi",
        Type::TyPi(..) => "TyPi",
        Type::CodeTy(..) => "CodeTy",
        Type::CodeTm(..) => "CodeTm",
    }
}

fn term_head(t: &Term) -> &'static str {
    match t {
        Term::LocalVar(_) => "var",
        Term::GVar(..) => "u",
        Term::NatCode => "Nat",
        Term::PiCode(..) => "Pi",
        Term::TyCode(_) => "Ty",
        Term::Zero => "zero",
        Term::Succ(_) => "succ",
        Term::ElimNat(..) => "elimNat",
        Term::Lam(..) => "fun",
        Term::App(..) => "app",
        Term::ULam(..) => "ulam",
        Term::UApp(..) => "uapp",
        Term::CtxLam(..) => "ctxfun",
        Term::CtxApp(..) => "ctxapp",
        Term::TyLam(..) => "tyfun",
        Term::TyApp(..) => "tyapp",
        Term::BoxTy(_) => "boxty",
        Term::BoxTm(_) => "box",
        Term::LetBoxTy(..) | Term::LetBoxTm(..) => "letbox",
        Term::ElimTyp(..) => "elimTy",
        Term::ElimTrm(..) => "elimTm",
    }
}

/// `M[succ x / x]` moved under the extra binder `y`: the motive of
/// `elimNat` as seen by its step case.
pub(crate) fn motive_at_succ(m: &Type) -> Type {
    subst_top_locals(&shift_locals(m, 1, 2), &[Term::succ(Term::LocalVar(1))])
}

/// The type checker. Holds the reduction budget for one run.
#[derive(Debug, Default)]
pub struct Checker {
    pub fuel: Fuel,
}

impl Checker {
    pub fn new(fuel: u64) -> Checker {
        Checker { fuel: Fuel::new(fuel) }
    }

    pub fn whnf_ty(&self, t: &Type) -> TcResult<Type> {
        whnf_type(t, &self.fuel).map_err(|e| reduce_err(e, || Printer::new().ty(t)))
    }

    pub fn whnf_tm(&self, t: &Term) -> TcResult<Term> {
        whnf_term(t, &self.fuel).map_err(|e| reduce_err(e, || Printer::new().tm(t)))
    }

    /// `L ⊢ l`.
    pub fn wf_level(&self, env: &Env, rule: &'static str, l: &Level) -> TcResult<()> {
        wf_level(env.levels.len(), l)
            .map_err(|e| Diagnostic::new(rule, ErrorKind::Level, e.to_string()))
    }

    /// `⊢_L Ψ`.
    pub fn check_gctx(&self, levels: &UnivCtx, psi: &GlobalCtx) -> TcResult<()> {
        let mut env = Env::new(levels.clone(), GlobalCtx::new());
        for e in &psi.0 {
            self.check_binding(&env, &e.binding).map_err(|d| d.within("global"))?;
            env.globals.push(e.name.clone(), e.binding.clone());
        }
        Ok(())
    }

    /// Formation of one global binding in `env.globals`.
    pub fn check_binding(&self, env: &Env, b: &GBinding) -> TcResult<()> {
        match b {
            GBinding::Ctx => Ok(()),
            GBinding::Typ { ctx, layer, level } => {
                if !matches!(layer, Layer::C | Layer::D) {
                    return Err(Diagnostic::new(
                        "gctx-typ",
                        ErrorKind::Layer,
                        format!("a type variable must live at layer c or d, not {layer}"),
                    ));
                }
                self.wf_level(env, "gctx-typ", level)?;
                self.check_lctx(env, Layer::D, ctx)
            }
            GBinding::Trm { ctx, layer, ty, level } => {
                if !matches!(layer, Layer::V | Layer::C) {
                    return Err(Diagnostic::new(
                        "gctx-trm",
                        ErrorKind::Layer,
                        format!("a term variable must live at layer v or c, not {layer}"),
                    ));
                }
                self.wf_level(env, "gctx-trm", level)?;
                self.check_lctx(env, Layer::D, ctx)?;
                self.check_type(&env.with_locals(ctx.clone()), Layer::D, ty, level)
            }
        }
    }

    /// `Ψ ⊢_i Γ`, ignoring `env.locals`.
    pub fn check_lctx(&self, env: &Env, i: Layer, ctx: &LocalCtx) -> TcResult<()> {
        if let CtxBase::Var(g) = ctx.base {
            match gctx_lookup(&env.globals, g) {
                Some((_, GBinding::Ctx)) => {}
                Some(_) => {
                    return Err(Diagnostic::new(
                        "ctx-var",
                        ErrorKind::Scope,
                        "the base of a local context must be a context variable",
                    ))
                }
                None => return Err(Diagnostic::new("ctx-var", ErrorKind::Scope, "unbound context variable")),
            }
        }
        for (p, e) in ctx.entries.iter().enumerate() {
            let sub = env.with_locals(ctx.prefix(p));
            self.wf_level(&sub, "ctx-ext", &e.level)?;
            self.check_type(&sub, i, &e.ty, &e.level).map_err(|d| d.within("ctx-entry"))?;
        }
        Ok(())
    }

    /// `Ψ; Γ ⊢_i T : l`, returning the normalised level.
    pub fn infer_type(&self, env: &Env, i: Layer, t: &Type) -> TcResult<Level> {
        self.infer_type_inner(env, i, t).map(|l| normalize(&l)).map_err(|d| d.within(type_head(t)))
    }

    fn infer_type_inner(&self, env: &Env, i: Layer, t: &Type) -> TcResult<Level> {
        match t {
            Type::Nat => {
                not_v("ty-nat", i)?;
                Ok(Level::Zero)
            }
            Type::Pi(l, l2, x, s, body) => {
                not_v("ty-pi", i)?;
                self.wf_level(env, "ty-pi", l)?;
                self.wf_level(env, "ty-pi", l2)?;
                self.check_type(env, i, s, l)?;
                self.check_type(&env.push_local(x.clone(), (**s).clone(), l.clone()), i, body, l2)?;
                Ok(l.clone().lub(l2.clone()))
            }
            Type::Ty(l) => {
                not_v("ty-ty", i)?;
                self.wf_level(env, "ty-ty", l)?;
                Ok(l.clone().succ())
            }
            Type::UPi(ns, l, body) => {
                require_m("ty-upi", i)?;
                if ns.is_empty() {
                    return Err(Diagnostic::new("ty-upi", ErrorKind::Level, "must bind at least one level"));
                }
                let env2 = env.push_levels(ns);
                self.wf_level(&env2, "ty-upi", l)?;
                self.check_type(&env2, Layer::M, body, l)?;
                Ok(Level::Omega)
            }
            Type::El(l, code) => {
                not_v("ty-el", i)?;
                self.wf_level(env, "ty-el", l)?;
                self.check_term(env, i, code, &Type::Ty(l.clone()), &l.clone().succ())?;
                Ok(l.clone())
            }
            Type::GVar(j, delta) => match gctx_lookup(&env.globals, *j) {
                Some((name, GBinding::Typ { ctx, layer, level })) => {
                    if layer > i {
                        return Err(Diagnostic::new(
                            "ty-gvar",
                            ErrorKind::Layer,
                            format!("{name} lives at layer {layer} and cannot be used at layer {i}"),
                        ));
                    }
                    self.check_lsubst(env, i, delta, &ctx).map_err(|d| d.within("subst"))?;
                    Ok(level)
                }
                Some((name, _)) => Err(Diagnostic::new(
                    "ty-gvar",
                    ErrorKind::Scope,
                    format!("{name} is not a type variable"),
                )),
                None => Err(Diagnostic::new("ty-gvar", ErrorKind::Scope, "unbound global variable")),
            },
            Type::CtxPi(g, l, body) => {
                require_m("ty-ctxpi", i)?;
                self.wf_level(env, "ty-ctxpi", l)?;
                self.check_type(&env.push_global(g.clone(), GBinding::Ctx), Layer::M, body, l)?;
                Ok(l.clone())
            }
            Type::TyPi(u, ctx, l, l2, body) => {
                require_m("ty-typi", i)?;
                self.wf_level(env, "ty-typi", l)?;
                self.wf_level(env, "ty-typi", l2)?;
                self.check_lctx(env, Layer::D, ctx)?;
                let b = GBinding::Typ { ctx: ctx.clone(), layer: Layer::D, level: l.clone() };
                self.check_type(&env.push_global(u.clone(), b), Layer::M, body, l2)?;
                Ok(l2.clone())
            }
            Type::CodeTy(ctx, l) => {
                require_m("ty-codety", i)?;
                self.wf_level(env, "ty-codety", l)?;
                self.check_lctx(env, Layer::D, ctx)?;
                Ok(Level::Zero)
            }
            Type::CodeTm(ctx, ty, l) => {
                require_m("ty-codetm", i)?;
                self.wf_level(env, "ty-codetm", l)?;
                self.check_lctx(env, Layer::D, ctx)?;
                self.check_type(&env.with_locals(ctx.clone()), Layer::D, ty, l)?;
                Ok(Level::Zero)
            }
        }
    }

    /// `Ψ; Γ ⊢_i T : l` against a given level.
    pub fn check_type(&self, env: &Env, i: Layer, t: &Type, l: &Level) -> TcResult<()> {
        let found = self.infer_type(env, i, t)?;
        lvl_eq(env, "ty-level", l, &found).map_err(|d| d.within(type_head(t)))
    }

    /// `Ψ; Γ ⊢_i t : T @ l`, inferring `T` and `l`.
    pub fn infer_term(&self, env: &Env, i: Layer, t: &Term) -> TcResult<(Type, Level)> {
        self.infer_term_inner(env, i, t)
            .map(|(ty, l)| (ty, normalize(&l)))
            .map_err(|d| d.within(term_head(t)))
    }

    fn infer_term_inner(&self, env: &Env, i: Layer, t: &Term) -> TcResult<(Type, Level)> {
        let lv = |rule, l: &Level| self.wf_level(env, rule, l);
        match t {
            Term::LocalVar(j) => match lctx_lookup(&env.locals, *j) {
                Some((_, ty, l)) => Ok((ty, l)),
                None => Err(Diagnostic::new("tm-var", ErrorKind::Scope, "unbound local variable")),
            },
            Term::GVar(j, delta) => match gctx_lookup(&env.globals, *j) {
                Some((name, GBinding::Trm { ctx, layer, ty, level })) => {
                    if layer > i {
                        return Err(Diagnostic::new(
                            "tm-gvar",
                            ErrorKind::Layer,
                            format!("{name} lives at layer {layer} and cannot be used at layer {i}"),
                        ));
                    }
                    self.check_lsubst(env, i, delta, &ctx).map_err(|d| d.within("subst"))?;
                    let ty = lsubst_apply(&ty, delta).map_err(|e| subst_err("tm-gvar", e))?;
                    Ok((ty, level))
                }
                Some((name, _)) => Err(Diagnostic::new(
                    "tm-gvar",
                    ErrorKind::Scope,
                    format!("{name} is not a term variable"),
                )),
                None => Err(Diagnostic::new("tm-gvar", ErrorKind::Scope, "unbound global variable")),
            },
            Term::NatCode => {
                not_v("tm-natcode", i)?;
                Ok((Type::Ty(Level::Zero), Level::nat(1)))
            }
            Term::PiCode(l, l2, x, s, body) => {
                not_v("tm-picode", i)?;
                lv("tm-picode", l)?;
                lv("tm-picode", l2)?;
                self.check_term(env, i, s, &Type::Ty(l.clone()), &l.clone().succ())?;
                let env2 = env.push_local(x.clone(), Type::El(l.clone(), s.clone()), l.clone());
                self.check_term(&env2, i, body, &Type::Ty(l2.clone()), &l2.clone().succ())?;
                let m = l.clone().lub(l2.clone());
                Ok((Type::Ty(m.clone()), m.succ()))
            }
            Term::TyCode(l) => {
                not_v("tm-tycode", i)?;
                lv("tm-tycode", l)?;
                Ok((Type::Ty(l.clone().succ()), l.clone().plus(2)))
            }
            Term::Zero => {
                not_v("tm-zero", i)?;
                Ok((Type::Nat, Level::Zero))
            }
            Term::Succ(n) => {
                not_v("tm-succ", i)?;
                self.check_term(env, i, n, &Type::Nat, &Level::Zero)?;
                Ok((Type::Nat, Level::Zero))
            }
            Term::ElimNat(l, m, s, s2, n) => {
                not_v("tm-elimnat", i)?;
                lv("tm-elimnat", l)?;
                let envx = env.push_local(Name::new("x"), Type::Nat, Level::Zero);
                self.check_type(&envx, i, m, l).map_err(|d| d.within("motive"))?;
                let m_zero = subst_top_locals(&**m, &[Term::Zero]);
                self.check_term(env, i, s, &m_zero, l).map_err(|d| d.within("base"))?;
                let envxy = envx.push_local(Name::new("y"), (**m).clone(), l.clone());
                self.check_term(&envxy, i, s2, &motive_at_succ(m), l).map_err(|d| d.within("step"))?;
                self.check_term(env, i, n, &Type::Nat, &Level::Zero)?;
                Ok((subst_top_locals(&**m, &[(**n).clone()]), l.clone()))
            }
            Term::Lam(l, l2, x, s, body) => {
                not_v("tm-lam", i)?;
                lv("tm-lam", l)?;
                lv("tm-lam", l2)?;
                self.check_type(env, i, s, l)?;
                let env2 = env.push_local(x.clone(), (**s).clone(), l.clone());
                let (ty, bl) = self.infer_term(&env2, i, body)?;
                lvl_eq(env, "tm-lam", l2, &bl)?;
                Ok((Type::Pi(l.clone(), l2.clone(), x.clone(), s.clone(), Box::new(ty)), l.clone().lub(l2.clone())))
            }
            Term::App(f, l, l2, x, s, ty, a) => {
                not_v("tm-app", i)?;
                lv("tm-app", l)?;
                lv("tm-app", l2)?;
                self.check_type(env, i, s, l)?;
                self.check_type(&env.push_local(x.clone(), (**s).clone(), l.clone()), i, ty, l2)?;
                let pi = Type::Pi(l.clone(), l2.clone(), x.clone(), s.clone(), ty.clone());
                self.check_term(env, i, f, &pi, &l.clone().lub(l2.clone())).map_err(|d| d.within("function"))?;
                self.check_term(env, i, a, s, l).map_err(|d| d.within("argument"))?;
                Ok((subst_top_locals(&**ty, &[(**a).clone()]), l2.clone()))
            }
            Term::ULam(l, ns, body) => {
                require_m("tm-ulam", i)?;
                if ns.is_empty() {
                    return Err(Diagnostic::new("tm-ulam", ErrorKind::Level, "must bind at least one level"));
                }
                let env2 = env.push_levels(ns);
                self.wf_level(&env2, "tm-ulam", l)?;
                let (ty, bl) = self.infer_term(&env2, Layer::M, body)?;
                lvl_eq(&env2, "tm-ulam", l, &bl)?;
                Ok((Type::UPi(ns.clone(), l.clone(), Box::new(ty)), Level::Omega))
            }
            Term::UApp(f, ls) => {
                require_m("tm-uapp", i)?;
                let (fty, _) = self.infer_term(env, i, f)?;
                match self.whnf_ty(&fty)? {
                    Type::UPi(ns, l, body) if ns.len() == ls.len() => {
                        for a in ls {
                            lv("tm-uapp", a)?;
                        }
                        Ok((subst_top_levels(&*body, ls), subst_top_levels(&l, ls)))
                    }
                    Type::UPi(ns, ..) => Err(Diagnostic::new(
                        "tm-uapp",
                        ErrorKind::Level,
                        format!("expected {} level arguments, got {}", ns.len(), ls.len()),
                    )),
                    other => Err(self.not_a("tm-uapp", env, "a universe-polymorphic type", &other)),
                }
            }
            Term::CtxLam(l, g, body) => {
                require_m("tm-ctxlam", i)?;
                lv("tm-ctxlam", l)?;
                let env2 = env.push_global(g.clone(), GBinding::Ctx);
                let (ty, bl) = self.infer_term(&env2, Layer::M, body)?;
                lvl_eq(env, "tm-ctxlam", l, &bl)?;
                Ok((Type::CtxPi(g.clone(), l.clone(), Box::new(ty)), l.clone()))
            }
            Term::CtxApp(f, ctx) => {
                require_m("tm-ctxapp", i)?;
                let (fty, _) = self.infer_term(env, i, f)?;
                match self.whnf_ty(&fty)? {
                    Type::CtxPi(_, l, body) => {
                        self.check_lctx(env, Layer::D, ctx)?;
                        let r = subst_top_globals(&*body, &[GEntry::Ctx(ctx.clone())])
                            .map_err(|e| subst_err("tm-ctxapp", e))?;
                        Ok((r, l))
                    }
                    other => Err(self.not_a("tm-ctxapp", env, "a context-polymorphic type", &other)),
                }
            }
            Term::TyLam(l, l2, u, ctx, body) => {
                require_m("tm-tylam", i)?;
                lv("tm-tylam", l)?;
                lv("tm-tylam", l2)?;
                self.check_lctx(env, Layer::D, ctx)?;
                let b = GBinding::Typ { ctx: ctx.clone(), layer: Layer::D, level: l.clone() };
                let (ty, bl) = self.infer_term(&env.push_global(u.clone(), b), Layer::M, body)?;
                lvl_eq(env, "tm-tylam", l2, &bl)?;
                Ok((Type::TyPi(u.clone(), ctx.clone(), l.clone(), l2.clone(), Box::new(ty)), l2.clone()))
            }
            Term::TyApp(f, a) => {
                require_m("tm-tyapp", i)?;
                let (fty, _) = self.infer_term(env, i, f)?;
                match self.whnf_ty(&fty)? {
                    Type::TyPi(_, ctx, l, l2, body) => {
                        self.check_type(&env.with_locals(ctx), Layer::D, a, &l)
                            .map_err(|d| d.within("argument"))?;
                        let r = subst_top_globals(&*body, &[GEntry::Typ((**a).clone())])
                            .map_err(|e| subst_err("tm-tyapp", e))?;
                        Ok((r, l2))
                    }
                    other => Err(self.not_a("tm-tyapp", env, "a type-polymorphic type", &other)),
                }
            }
            Term::BoxTy(_) | Term::BoxTm(_) => Err(Diagnostic::new(
                if matches!(t, Term::BoxTy(_)) { "tm-boxty" } else { "tm-boxtm" },
                ErrorKind::Annotation,
                "the context of a box cannot be inferred; it needs an expected type",
            )),
            Term::LetBoxTy(l2, l, ctx, m, u, body, s) => {
                require_m("tm-letboxty", i)?;
                lv("tm-letboxty", l2)?;
                lv("tm-letboxty", l)?;
                self.check_lctx(env, Layer::D, ctx)?;
                let code_ty = Type::CodeTy(ctx.clone(), l.clone());
                self.check_term(env, i, s, &code_ty, &Level::Zero).map_err(|d| d.within("scrutinee"))?;
                let envx = env.push_local(Name::new("x"), code_ty, Level::Zero);
                self.check_type(&envx, Layer::M, m, l2).map_err(|d| d.within("motive"))?;
                let b = GBinding::Typ { ctx: ctx.clone(), layer: Layer::C, level: l.clone() };
                let env_u = env.push_global(u.clone(), b);
                let uvar = Type::GVar(0, lid(&shift_globals(ctx, 0, 1)));
                let m_u = subst_top_locals(&shift_globals(&**m, 0, 1), &[Term::BoxTy(Box::new(uvar))]);
                self.check_term(&env_u, Layer::M, body, &m_u, l2).map_err(|d| d.within("body"))?;
                Ok((subst_top_locals(&**m, &[(**s).clone()]), l2.clone()))
            }
            Term::LetBoxTm(l2, l, ctx, ty, m, u, body, s) => {
                require_m("tm-letboxtm", i)?;
                lv("tm-letboxtm", l2)?;
                lv("tm-letboxtm", l)?;
                self.check_lctx(env, Layer::D, ctx)?;
                self.check_type(&env.with_locals(ctx.clone()), Layer::D, ty, l)?;
                let code_ty = Type::CodeTm(ctx.clone(), ty.clone(), l.clone());
                self.check_term(env, i, s, &code_ty, &Level::Zero).map_err(|d| d.within("scrutinee"))?;
                let envx = env.push_local(Name::new("x"), code_ty, Level::Zero);
                self.check_type(&envx, Layer::M, m, l2).map_err(|d| d.within("motive"))?;
                let b = GBinding::Trm { ctx: ctx.clone(), layer: Layer::C, ty: (**ty).clone(), level: l.clone() };
                let env_u = env.push_global(u.clone(), b);
                let uvar = Term::GVar(0, lid(&shift_globals(ctx, 0, 1)));
                let m_u = subst_top_locals(&shift_globals(&**m, 0, 1), &[Term::BoxTm(Box::new(uvar))]);
                self.check_term(&env_u, Layer::M, body, &m_u, l2).map_err(|d| d.within("body"))?;
                Ok((subst_top_locals(&**m, &[(**s).clone()]), l2.clone()))
            }
            Term::ElimTyp(l1, l2, ms, bs, l, ctx, s) => {
                require_m("tm-elimtyp", i)?;
                self.check_recursor(env, l1, l2, ms, bs)?;
                lv("tm-elimtyp", l)?;
                self.check_lctx(env, Layer::D, ctx)?;
                let code_ty = Type::CodeTy(ctx.clone(), l.clone());
                self.check_term(env, i, s, &code_ty, &Level::Zero).map_err(|d| d.within("scrutinee"))?;
                let r = motive_instance(ms, 0, 0, l, ctx, None, s).map_err(|e| subst_err("tm-elimtyp", e))?;
                Ok((r, l1.clone()))
            }
            Term::ElimTrm(l1, l2, ms, bs, l, ctx, ty, s) => {
                require_m("tm-elimtrm", i)?;
                self.check_recursor(env, l1, l2, ms, bs)?;
                lv("tm-elimtrm", l)?;
                self.check_lctx(env, Layer::D, ctx)?;
                self.check_type(&env.with_locals(ctx.clone()), Layer::D, ty, l)?;
                let code_ty = Type::CodeTm(ctx.clone(), ty.clone(), l.clone());
                self.check_term(env, i, s, &code_ty, &Level::Zero).map_err(|d| d.within("scrutinee"))?;
                let r = motive_instance(ms, 0, 0, l, ctx, Some(ty), s)
                    .map_err(|e| subst_err("tm-elimtrm", e))?;
                Ok((r, l2.clone()))
            }
        }
    }

    fn not_a(&self, rule: &'static str, env: &Env, what: &str, found: &Type) -> Diagnostic {
        Diagnostic::new(rule, ErrorKind::Mismatch, format!("the head does not have {what}"))
            .with_forms(what.to_string(), env.printer().ty(found))
    }

    /// `Ψ; Γ ⊢_i t : T @ l`.
    pub fn check_term(&self, env: &Env, i: Layer, t: &Term, ty: &Type, l: &Level) -> TcResult<()> {
        self.check_term_inner(env, i, t, ty, l).map_err(|d| d.within(term_head(t)))
    }

    fn check_term_inner(&self, env: &Env, i: Layer, t: &Term, ty: &Type, l: &Level) -> TcResult<()> {
        match t {
            Term::BoxTy(code) => {
                require_m("tm-boxty", i)?;
                match self.whnf_ty(ty)? {
                    Type::CodeTy(ctx, cl) => {
                        lvl_eq(env, "tm-boxty", l, &Level::Zero)?;
                        self.check_type(&env.with_locals(ctx), Layer::C, code, &cl)
                    }
                    other => Err(self.not_a("tm-boxty", env, "a type-code type", &other)),
                }
            }
            Term::BoxTm(code) => {
                require_m("tm-boxtm", i)?;
                match self.whnf_ty(ty)? {
                    Type::CodeTm(ctx, cty, cl) => {
                        lvl_eq(env, "tm-boxtm", l, &Level::Zero)?;
                        self.check_term(&env.with_locals(ctx), Layer::C, code, &cty, &cl)
                    }
                    other => Err(self.not_a("tm-boxtm", env, "a term-code type", &other)),
                }
            }
            Term::Lam(l1, l2, x, s, body) => match self.whnf_ty(ty)? {
                Type::Pi(p1, p2, _, s2, cod) => {
                    not_v("tm-lam", i)?;
                    self.wf_level(env, "tm-lam", l1)?;
                    self.wf_level(env, "tm-lam", l2)?;
                    lvl_eq(env, "tm-lam", &p1, l1)?;
                    lvl_eq(env, "tm-lam", &p2, l2)?;
                    self.check_type(env, i, s, l1)?;
                    self.conv_type(env, i.typeof_layer(), s, &s2).map_err(|d| d.within("domain"))?;
                    let env2 = env.push_local(x.clone(), (**s).clone(), l1.clone());
                    self.check_term(&env2, i, body, &cod, l2)?;
                    lvl_eq(env, "tm-lam", l, &l1.clone().lub(l2.clone()))
                }
                _ => self.check_by_inference(env, i, t, ty, l),
            },
            Term::ULam(bl, ns, body) => match self.whnf_ty(ty)? {
                Type::UPi(ns2, pl, cod) if ns2.len() == ns.len() && !ns.is_empty() => {
                    require_m("tm-ulam", i)?;
                    let env2 = env.push_levels(ns);
                    self.wf_level(&env2, "tm-ulam", bl)?;
                    lvl_eq(&env2, "tm-ulam", &pl, bl)?;
                    self.check_term(&env2, Layer::M, body, &cod, bl)?;
                    lvl_eq(env, "tm-ulam", l, &Level::Omega)
                }
                _ => self.check_by_inference(env, i, t, ty, l),
            },
            Term::CtxLam(bl, g, body) => match self.whnf_ty(ty)? {
                Type::CtxPi(_, pl, cod) => {
                    require_m("tm-ctxlam", i)?;
                    self.wf_level(env, "tm-ctxlam", bl)?;
                    lvl_eq(env, "tm-ctxlam", &pl, bl)?;
                    let env2 = env.push_global(g.clone(), GBinding::Ctx);
                    self.check_term(&env2, Layer::M, body, &cod, bl)?;
                    lvl_eq(env, "tm-ctxlam", l, bl)
                }
                _ => self.check_by_inference(env, i, t, ty, l),
            },
            Term::TyLam(l1, l2, u, ctx, body) => match self.whnf_ty(ty)? {
                Type::TyPi(_, ctx2, p1, p2, cod) => {
                    require_m("tm-tylam", i)?;
                    self.wf_level(env, "tm-tylam", l1)?;
                    self.wf_level(env, "tm-tylam", l2)?;
                    self.check_lctx(env, Layer::D, ctx)?;
                    self.conv_ctx(env, Layer::D, ctx, &ctx2)?;
                    lvl_eq(env, "tm-tylam", &p1, l1)?;
                    lvl_eq(env, "tm-tylam", &p2, l2)?;
                    let b = GBinding::Typ { ctx: ctx.clone(), layer: Layer::D, level: l1.clone() };
                    self.check_term(&env.push_global(u.clone(), b), Layer::M, body, &cod, l2)?;
                    lvl_eq(env, "tm-tylam", l, l2)
                }
                _ => self.check_by_inference(env, i, t, ty, l),
            },
            _ => self.check_by_inference(env, i, t, ty, l),
        }
    }

    fn check_by_inference(&self, env: &Env, i: Layer, t: &Term, ty: &Type, l: &Level) -> TcResult<()> {
        let (found, fl) = self.infer_term_inner(env, i, t)?;
        self.conv_type(env, i.typeof_layer(), &found, ty).map_err(|d| {
            let p = env.printer();
            let mut d = d;
            if d.expected.is_none() {
                d = d.with_forms(p.ty(ty), p.ty(&found));
            }
            Diagnostic { rule: "tm-conv", ..d }
        })?;
        lvl_eq(env, "tm-conv", l, &fl)
    }

    /// `Ψ; Γ ⊢_i δ : Δ`.
    pub fn check_lsubst(&self, env: &Env, i: Layer, delta: &LocalSubst, target: &LocalCtx) -> TcResult<()> {
        if delta.entries.len() != target.len() {
            return Err(Diagnostic::new(
                "lsubst",
                ErrorKind::Base,
                format!(
                    "substitution has {} entries but its target context has {}",
                    delta.entries.len(),
                    target.len()
                ),
            ));
        }
        self.check_ls_base(env, &delta.base, &target.base)?;
        for (p, e) in target.entries.iter().enumerate() {
            let ety = lsubst_apply(&e.ty, &delta.prefix(p)).map_err(|e| subst_err("lsubst", e))?;
            self.check_term(env, i, &delta.entries[p], &ety, &e.level).map_err(|d| d.within("lsubst-entry"))?;
        }
        Ok(())
    }

    pub(crate) fn check_ls_base(&self, env: &Env, base: &LsBase, target: &CtxBase) -> TcResult<()> {
        let gamma = &env.locals;
        let ends = |b: Option<usize>| gamma.base_var() == b;
        let ok = match (base, target) {
            (LsBase::Empty { g, k }, CtxBase::Empty) => ends(*g) && gamma.len() == *k,
            (LsBase::Wk { g, k }, CtxBase::Var(g2)) => g == g2 && ends(Some(*g)) && gamma.len() == *k,
            _ => false,
        };
        if ok {
            Ok(())
        } else {
            let p = env.printer();
            Err(Diagnostic::new(
                "lsubst-base",
                ErrorKind::Base,
                "the substitution base does not match the local context and the target",
            )
            .with_forms(
                format!("a base from {} to {}", p.ctx_shape(gamma), p.base_name(target)),
                p.ls_base(base),
            ))
        }
    }

    /// The premises on motives and cases shared by both recursors.
    pub fn check_recursor(
        &self,
        env: &Env,
        l1: &Level,
        l2: &Level,
        ms: &Motives,
        bs: &Branches,
    ) -> TcResult<()> {
        self.wf_level(env, "rec-motive", l1)?;
        self.wf_level(env, "rec-motive", l2)?;
        let (env_t, lt) = motive_typ_env(env, ms, l1);
        self.check_type(&env_t, Layer::M, &ms.typ, &lt).map_err(|d| d.within("motive-ty"))?;
        let (env_m, lm) = motive_trm_env(env, ms, l2);
        self.check_type(&env_m, Layer::M, &ms.trm, &lm).map_err(|d| d.within("motive-tm"))?;
        for (k, b) in bs.iter() {
            let (env_b, rty, rl) = branch_env(env, ms, l1, l2, k, &b.binders).map_err(|d| d.within(k.keyword()))?;
            self.check_term(&env_b, Layer::M, &b.body, &rty, &rl).map_err(|d| {
                Diagnostic { rule: if d.rule == "tm-conv" { "rec-branch" } else { d.rule }, ..d }.within(k.keyword())
            })?;
        }
        Ok(())
    }
}

/// The context of the type-code motive and its level.
pub fn motive_typ_env(env: &Env, ms: &Motives, l1: &Level) -> (Env, Level) {
    let e = env
        .push_levels(&[Name::new("l")])
        .push_global(Name::new("g"), GBinding::Ctx)
        .push_local(ms.typ_name.clone(), Type::CodeTy(LocalCtx::var(0), Level::Var(0)), Level::Zero);
    (e, shift_levels(l1, 0, 1))
}

/// The context of the term-code motive and its level.
pub fn motive_trm_env(env: &Env, ms: &Motives, l2: &Level) -> (Env, Level) {
    let ut = GBinding::Typ { ctx: LocalCtx::var(0), layer: Layer::D, level: Level::Var(0) };
    let code = Type::CodeTm(
        LocalCtx::var(1),
        Box::new(Type::GVar(0, LocalSubst { base: LsBase::Wk { g: 1, k: 0 }, entries: vec![] })),
        Level::Var(0),
    );
    let e = env
        .push_levels(&[Name::new("l")])
        .push_global(Name::new("g"), GBinding::Ctx)
        .push_global(Name::new("T"), ut)
        .push_local(ms.trm_name.clone(), code, Level::Zero);
    (e, shift_levels(l2, 0, 1))
}

/// The context a recursor case body is checked in, and its expected type
/// and level.
pub fn branch_env(
    env: &Env,
    ms: &Motives,
    l1: &Level,
    l2: &Level,
    kind: BranchKind,
    binders: &[Name],
) -> TcResult<(Env, Type, Level)> {
    let sig: BranchSig = branch_signature(kind);
    let (nl, ng, _) = kind.arity();
    let mut e = env.push_levels(&binders[..nl]);
    for (p, b) in sig.globals.iter().enumerate() {
        e = e.push_global(binders[nl + p].clone(), b.clone());
    }
    let recs = rec_bindings(ms, &sig, l1, l2).map_err(|d| subst_err("rec-branch", d))?;
    for (p, (t, l)) in recs.into_iter().enumerate() {
        e = e.push_local(binders[nl + ng + p].clone(), t, l);
    }
    let (rty, rl) = result_type(ms, &sig, l1, l2).map_err(|d| subst_err("rec-branch", d))?;
    Ok((e, rty, rl))
}
