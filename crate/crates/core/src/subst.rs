//! Substitution for all three sorts of variables.
//!
//! A single traversal walks the syntax while tracking how many level,
//! global and local binders it has crossed. What happens at variables is
//! decided by an [`Action`]: shifting, substituting a whole context, or
//! instantiating only the innermost binders. Scopes with their own local
//! context (box contents, context arguments, the `Δ` of a binding) are
//! skipped by actions on local variables and entered with a fresh local
//! depth by the others.

use crate::syntax::*;
use crate::ulevel::{normalize, Level, UnivSubst};

/// Binders crossed so far, per sort.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Depth {
    pub levels: usize,
    pub globals: usize,
    pub locals: usize,
}

impl Depth {
    fn lv(self, n: usize) -> Depth {
        Depth { levels: self.levels + n, ..self }
    }
    fn gl(self, n: usize) -> Depth {
        Depth { globals: self.globals + n, ..self }
    }
    fn lc(self, n: usize) -> Depth {
        Depth { locals: self.locals + n, ..self }
    }
    fn add(self, (l, g, x): (usize, usize, usize)) -> Depth {
        self.lv(l).gl(g).lc(x)
    }
    fn foreign(self) -> Depth {
        Depth { locals: 0, ..self }
    }
}

/// Substitution failures: a variable with no entry, or an entry of the
/// wrong kind.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SubstError {
    #[error("level variable #{0} has no entry in the substitution")]
    Level(usize),
    #[error("global variable #{0} has no entry in the substitution")]
    Global(usize),
    #[error("local variable #{0} has no entry in the substitution")]
    Local(usize),
    #[error("global variable #{index} is substituted by a {found}, expected a {expected}")]
    Kind { index: usize, expected: &'static str, found: &'static str },
}

type R<T> = Result<T, SubstError>;

#[doc(hidden)]
pub trait Action {
    fn touches_locals(&self) -> bool {
        false
    }
    fn level(&self, _d: Depth, l: &Level) -> R<Level> {
        Ok(l.clone())
    }
    fn local_var(&self, _d: Depth, j: usize) -> R<Term> {
        Ok(Term::LocalVar(j))
    }
    fn gtype_var(&self, _d: Depth, j: usize, delta: LocalSubst) -> R<Type> {
        Ok(Type::GVar(j, delta))
    }
    fn gterm_var(&self, _d: Depth, j: usize, delta: LocalSubst) -> R<Term> {
        Ok(Term::GVar(j, delta))
    }
    /// Replacement for a context whose base is the variable `g`.
    fn ctx_base(&self, _d: Depth, g: usize) -> R<LocalCtx> {
        Ok(LocalCtx::var(g))
    }
    /// Replacement for a substitution base; the traversed entries are
    /// appended to the result.
    fn ls_base(&self, _d: Depth, base: &LsBase) -> R<LocalSubst> {
        Ok(LocalSubst { base: base.clone(), entries: Vec::new() })
    }
}

/// Syntax that the traversal can walk.
pub trait Syn: Sized + Clone {
    #[doc(hidden)]
    fn walk<A: Action>(&self, a: &A, d: Depth) -> R<Self>;
}

fn bx<T>(t: T) -> Box<T> {
    Box::new(t)
}

fn foreign<A: Action, S: Syn>(a: &A, d: Depth, s: &S) -> R<S> {
    if a.touches_locals() {
        Ok(s.clone())
    } else {
        s.walk(a, d.foreign())
    }
}

impl Syn for Level {
    fn walk<A: Action>(&self, a: &A, d: Depth) -> R<Level> {
        a.level(d, self)
    }
}

impl Syn for Type {
    fn walk<A: Action>(&self, a: &A, d: Depth) -> R<Type> {
        let lv = |l: &Level, d: Depth| a.level(d, l);
        Ok(match self {
            Type::Nat => Type::Nat,
            Type::Pi(l, l2, x, s, t) => Type::Pi(
                lv(l, d)?,
                lv(l2, d)?,
                x.clone(),
                bx(s.walk(a, d)?),
                bx(t.walk(a, d.lc(1))?),
            ),
            Type::Ty(l) => Type::Ty(lv(l, d)?),
            Type::UPi(ns, l, t) => {
                let d2 = d.lv(ns.len());
                Type::UPi(ns.clone(), lv(l, d2)?, bx(t.walk(a, d2)?))
            }
            Type::El(l, t) => Type::El(lv(l, d)?, bx(t.walk(a, d)?)),
            Type::GVar(j, delta) => {
                let delta = delta.walk(a, d)?;
                a.gtype_var(d, *j, delta)?
            }
            Type::CtxPi(g, l, t) => Type::CtxPi(g.clone(), lv(l, d)?, bx(t.walk(a, d.gl(1))?)),
            Type::TyPi(u, ctx, l, l2, t) => Type::TyPi(
                u.clone(),
                foreign(a, d, ctx)?,
                lv(l, d)?,
                lv(l2, d)?,
                bx(t.walk(a, d.gl(1))?),
            ),
            Type::CodeTy(ctx, l) => Type::CodeTy(foreign(a, d, ctx)?, lv(l, d)?),
            Type::CodeTm(ctx, t, l) => {
                Type::CodeTm(foreign(a, d, ctx)?, bx(foreign(a, d, &**t)?), lv(l, d)?)
            }
        })
    }
}

impl Syn for Term {
    fn walk<A: Action>(&self, a: &A, d: Depth) -> R<Term> {
        let lv = |l: &Level, d: Depth| a.level(d, l);
        Ok(match self {
            Term::LocalVar(j) => a.local_var(d, *j)?,
            Term::GVar(j, delta) => {
                let delta = delta.walk(a, d)?;
                a.gterm_var(d, *j, delta)?
            }
            Term::NatCode => Term::NatCode,
            Term::Zero => Term::Zero,
            Term::PiCode(l, l2, x, s, t) => Term::PiCode(
                lv(l, d)?,
                lv(l2, d)?,
                x.clone(),
                bx(s.walk(a, d)?),
                bx(t.walk(a, d.lc(1))?),
            ),
            Term::TyCode(l) => Term::TyCode(lv(l, d)?),
            Term::Succ(t) => Term::Succ(bx(t.walk(a, d)?)),
            Term::ElimNat(l, m, s, s2, t) => Term::ElimNat(
                lv(l, d)?,
                bx(m.walk(a, d.lc(1))?),
                bx(s.walk(a, d)?),
                bx(s2.walk(a, d.lc(2))?),
                bx(t.walk(a, d)?),
            ),
            Term::Lam(l, l2, x, s, t) => Term::Lam(
                lv(l, d)?,
                lv(l2, d)?,
                x.clone(),
                bx(s.walk(a, d)?),
                bx(t.walk(a, d.lc(1))?),
            ),
            Term::App(t, l, l2, x, s, ty, arg) => Term::App(
                bx(t.walk(a, d)?),
                lv(l, d)?,
                lv(l2, d)?,
                x.clone(),
                bx(s.walk(a, d)?),
                bx(ty.walk(a, d.lc(1))?),
                bx(arg.walk(a, d)?),
            ),
            Term::ULam(l, ns, t) => {
                let d2 = d.lv(ns.len());
                Term::ULam(lv(l, d2)?, ns.clone(), bx(t.walk(a, d2)?))
            }
            Term::UApp(t, ls) => Term::UApp(
                bx(t.walk(a, d)?),
                ls.iter().map(|l| lv(l, d)).collect::<R<_>>()?,
            ),
            Term::CtxLam(l, g, t) => Term::CtxLam(lv(l, d)?, g.clone(), bx(t.walk(a, d.gl(1))?)),
            Term::CtxApp(t, ctx) => Term::CtxApp(bx(t.walk(a, d)?), foreign(a, d, ctx)?),
            Term::TyLam(l, l2, u, ctx, t) => Term::TyLam(
                lv(l, d)?,
                lv(l2, d)?,
                u.clone(),
                foreign(a, d, ctx)?,
                bx(t.walk(a, d.gl(1))?),
            ),
            Term::TyApp(t, ty) => Term::TyApp(bx(t.walk(a, d)?), bx(foreign(a, d, &**ty)?)),
            Term::BoxTy(ty) => Term::BoxTy(bx(foreign(a, d, &**ty)?)),
            Term::BoxTm(t) => Term::BoxTm(bx(foreign(a, d, &**t)?)),
            Term::LetBoxTy(l2, l, ctx, m, u, body, t) => Term::LetBoxTy(
                lv(l2, d)?,
                lv(l, d)?,
                foreign(a, d, ctx)?,
                bx(m.walk(a, d.lc(1))?),
                u.clone(),
                bx(body.walk(a, d.gl(1))?),
                bx(t.walk(a, d)?),
            ),
            Term::LetBoxTm(l2, l, ctx, ty, m, u, body, t) => Term::LetBoxTm(
                lv(l2, d)?,
                lv(l, d)?,
                foreign(a, d, ctx)?,
                bx(foreign(a, d, &**ty)?),
                bx(m.walk(a, d.lc(1))?),
                u.clone(),
                bx(body.walk(a, d.gl(1))?),
                bx(t.walk(a, d)?),
            ),
            Term::ElimTyp(l1, l2, ms, bs, l, ctx, t) => Term::ElimTyp(
                lv(l1, d)?,
                lv(l2, d)?,
                bx(ms.walk(a, d)?),
                bx(bs.walk(a, d)?),
                lv(l, d)?,
                foreign(a, d, ctx)?,
                bx(t.walk(a, d)?),
            ),
            Term::ElimTrm(l1, l2, ms, bs, l, ctx, ty, t) => Term::ElimTrm(
                lv(l1, d)?,
                lv(l2, d)?,
                bx(ms.walk(a, d)?),
                bx(bs.walk(a, d)?),
                lv(l, d)?,
                foreign(a, d, ctx)?,
                bx(foreign(a, d, &**ty)?),
                bx(t.walk(a, d)?),
            ),
        })
    }
}

impl Syn for Motives {
    fn walk<A: Action>(&self, a: &A, d: Depth) -> R<Motives> {
        Ok(Motives {
            typ_name: self.typ_name.clone(),
            typ: self.typ.walk(a, d.add((1, 1, 1)))?,
            trm_name: self.trm_name.clone(),
            trm: self.trm.walk(a, d.add((1, 2, 1)))?,
        })
    }
}

impl Syn for Branches {
    fn walk<A: Action>(&self, a: &A, d: Depth) -> R<Branches> {
        self.map_bodies(|k, body| body.walk(a, d.add(k.arity())))
    }
}

impl Syn for LocalCtx {
    fn walk<A: Action>(&self, a: &A, d: Depth) -> R<LocalCtx> {
        if a.touches_locals() {
            return Ok(self.clone());
        }
        let d = d.foreign();
        let mut out = match self.base {
            CtxBase::Empty => LocalCtx::empty(),
            CtxBase::Var(g) => a.ctx_base(d, g)?,
        };
        for e in &self.entries {
            out.entries.push(CtxEntry {
                name: e.name.clone(),
                ty: e.ty.walk(a, d)?,
                level: a.level(d, &e.level)?,
            });
        }
        Ok(out)
    }
}

impl Syn for LocalSubst {
    fn walk<A: Action>(&self, a: &A, d: Depth) -> R<LocalSubst> {
        let mut out = a.ls_base(d, &self.base)?;
        for e in &self.entries {
            out.entries.push(e.walk(a, d)?);
        }
        Ok(out)
    }
}

impl Syn for GEntry {
    fn walk<A: Action>(&self, a: &A, d: Depth) -> R<GEntry> {
        Ok(match self {
            GEntry::Ctx(c) => GEntry::Ctx(foreign(a, d, c)?),
            GEntry::Typ(t) => GEntry::Typ(foreign(a, d, t)?),
            GEntry::Trm(t) => GEntry::Trm(foreign(a, d, t)?),
        })
    }
}

impl Syn for GBinding {
    fn walk<A: Action>(&self, a: &A, d: Depth) -> R<GBinding> {
        Ok(match self {
            GBinding::Ctx => GBinding::Ctx,
            GBinding::Typ { ctx, layer, level } => GBinding::Typ {
                ctx: foreign(a, d, ctx)?,
                layer: *layer,
                level: a.level(d, level)?,
            },
            GBinding::Trm { ctx, layer, ty, level } => GBinding::Trm {
                ctx: foreign(a, d, ctx)?,
                layer: *layer,
                ty: foreign(a, d, ty)?,
                level: a.level(d, level)?,
            },
        })
    }
}

impl<S: Syn> Syn for Vec<S> {
    fn walk<A: Action>(&self, a: &A, d: Depth) -> R<Vec<S>> {
        self.iter().map(|s| s.walk(a, d)).collect()
    }
}

// ---------------------------------------------------------------------------
// Actions

struct ShiftLevels(usize);

impl Action for ShiftLevels {
    fn level(&self, d: Depth, l: &Level) -> R<Level> {
        Ok(l.shift(d.levels, self.0))
    }
}

struct ShiftGlobals(usize);

impl ShiftGlobals {
    fn idx(&self, d: Depth, j: usize) -> usize {
        if j >= d.globals {
            j + self.0
        } else {
            j
        }
    }
}

impl Action for ShiftGlobals {
    fn gtype_var(&self, d: Depth, j: usize, delta: LocalSubst) -> R<Type> {
        Ok(Type::GVar(self.idx(d, j), delta))
    }
    fn gterm_var(&self, d: Depth, j: usize, delta: LocalSubst) -> R<Term> {
        Ok(Term::GVar(self.idx(d, j), delta))
    }
    fn ctx_base(&self, d: Depth, g: usize) -> R<LocalCtx> {
        Ok(LocalCtx::var(self.idx(d, g)))
    }
    fn ls_base(&self, d: Depth, base: &LsBase) -> R<LocalSubst> {
        let base = match *base {
            LsBase::Empty { g, k } => LsBase::Empty { g: g.map(|g| self.idx(d, g)), k },
            LsBase::Wk { g, k } => LsBase::Wk { g: self.idx(d, g), k },
        };
        Ok(LocalSubst { base, entries: Vec::new() })
    }
}

struct ShiftLocals(usize);

impl Action for ShiftLocals {
    fn touches_locals(&self) -> bool {
        true
    }
    fn local_var(&self, d: Depth, j: usize) -> R<Term> {
        Ok(Term::LocalVar(if j >= d.locals { j + self.0 } else { j }))
    }
    fn ls_base(&self, _d: Depth, base: &LsBase) -> R<LocalSubst> {
        Ok(LocalSubst { base: with_k(base, base_k(base) + self.0), entries: Vec::new() })
    }
}

fn base_k(b: &LsBase) -> usize {
    match *b {
        LsBase::Empty { k, .. } | LsBase::Wk { k, .. } => k,
    }
}

fn with_k(b: &LsBase, k: usize) -> LsBase {
    match *b {
        LsBase::Empty { g, .. } => LsBase::Empty { g, k },
        LsBase::Wk { g, .. } => LsBase::Wk { g, k },
    }
}

/// Move a piece of syntax from the scope where it was written to one
/// `d` binders deeper.
fn lift<S: Syn>(s: &S, d: Depth) -> S {
    let mut out = s.clone();
    if d.levels > 0 {
        out = infallible(out.walk(&ShiftLevels(d.levels), Depth::default()));
    }
    if d.globals > 0 {
        out = infallible(out.walk(&ShiftGlobals(d.globals), Depth::default()));
    }
    if d.locals > 0 {
        out = infallible(out.walk(&ShiftLocals(d.locals), Depth::default()));
    }
    out
}

fn infallible<T>(r: R<T>) -> T {
    match r {
        Ok(t) => t,
        Err(e) => unreachable!("shifting cannot fail: {e}"),
    }
}

struct SubstLevels<'a>(&'a UnivSubst);

impl Action for SubstLevels<'_> {
    fn level(&self, d: Depth, l: &Level) -> R<Level> {
        l.try_map_vars(&mut |i| {
            if i < d.levels {
                Ok(Level::Var(i))
            } else {
                self.0
                    .lookup(i - d.levels)
                    .map(|l| l.shift(0, d.levels))
                    .ok_or(SubstError::Level(i - d.levels))
            }
        })
    }
}

struct TopLevels<'a>(&'a [Level]);

impl Action for TopLevels<'_> {
    fn level(&self, d: Depth, l: &Level) -> R<Level> {
        let n = self.0.len();
        Ok(l.map_vars(&mut |i| {
            if i < d.levels {
                Level::Var(i)
            } else if i - d.levels < n {
                self.0[n - 1 - (i - d.levels)].shift(0, d.levels)
            } else {
                Level::Var(i - n)
            }
        }))
    }
}

/// How a free global index resolves under a global action.
enum GLookup<'a> {
    /// Bound inside the traversal, or renamed.
    Keep(usize),
    Entry(&'a GEntry),
}

trait GlobalMap {
    fn resolve(&self, d: Depth, j: usize) -> R<GLookup<'_>>;
}

struct SubstGlobals<'a>(&'a GlobalSubst);

impl GlobalMap for SubstGlobals<'_> {
    fn resolve(&self, d: Depth, j: usize) -> R<GLookup<'_>> {
        if j < d.globals {
            return Ok(GLookup::Keep(j));
        }
        self.0.lookup(j - d.globals).map(GLookup::Entry).ok_or(SubstError::Global(j - d.globals))
    }
}

struct TopGlobals<'a>(&'a [GEntry]);

impl GlobalMap for TopGlobals<'_> {
    fn resolve(&self, d: Depth, j: usize) -> R<GLookup<'_>> {
        let n = self.0.len();
        Ok(if j < d.globals {
            GLookup::Keep(j)
        } else if j - d.globals < n {
            GLookup::Entry(&self.0[n - 1 - (j - d.globals)])
        } else {
            GLookup::Keep(j - n)
        })
    }
}

fn kind_name(e: &GEntry) -> &'static str {
    match e {
        GEntry::Ctx(_) => "context",
        GEntry::Typ(_) => "type",
        GEntry::Trm(_) => "term",
    }
}

fn kind_err(j: usize, expected: &'static str, e: &GEntry) -> SubstError {
    SubstError::Kind { index: j, expected, found: kind_name(e) }
}

struct Globals<M>(M);

impl<M: GlobalMap> Globals<M> {
    fn ctx_entry(&self, d: Depth, g: usize) -> R<Result<LocalCtx, usize>> {
        match self.0.resolve(d, g)? {
            GLookup::Keep(g) => Ok(Err(g)),
            GLookup::Entry(GEntry::Ctx(c)) => Ok(Ok(lift(c, d.foreign()))),
            GLookup::Entry(e) => Err(kind_err(g, "context", e)),
        }
    }
}

impl<M: GlobalMap> Action for Globals<M> {
    fn gtype_var(&self, d: Depth, j: usize, delta: LocalSubst) -> R<Type> {
        match self.0.resolve(d, j)? {
            GLookup::Keep(j) => Ok(Type::GVar(j, delta)),
            GLookup::Entry(GEntry::Typ(t)) => {
                lift(t, d.foreign()).walk(&SubstLocals(&delta), Depth::default())
            }
            GLookup::Entry(e) => Err(kind_err(j, "type", e)),
        }
    }
    fn gterm_var(&self, d: Depth, j: usize, delta: LocalSubst) -> R<Term> {
        match self.0.resolve(d, j)? {
            GLookup::Keep(j) => Ok(Term::GVar(j, delta)),
            GLookup::Entry(GEntry::Trm(t)) => {
                lift(t, d.foreign()).walk(&SubstLocals(&delta), Depth::default())
            }
            GLookup::Entry(e) => Err(kind_err(j, "term", e)),
        }
    }
    fn ctx_base(&self, d: Depth, g: usize) -> R<LocalCtx> {
        Ok(match self.ctx_entry(d, g)? {
            Ok(c) => c,
            Err(g) => LocalCtx::var(g),
        })
    }
    fn ls_base(&self, d: Depth, base: &LsBase) -> R<LocalSubst> {
        let keep = |b: LsBase| Ok(LocalSubst { base: b, entries: Vec::new() });
        match *base {
            LsBase::Empty { g: None, k } => keep(LsBase::Empty { g: None, k }),
            LsBase::Empty { g: Some(g), k } => match self.ctx_entry(d, g)? {
                Err(g) => keep(LsBase::Empty { g: Some(g), k }),
                Ok(c) => keep(LsBase::Empty { g: c.base_var(), k: c.len() + k }),
            },
            LsBase::Wk { g, k } => match self.ctx_entry(d, g)? {
                Err(g) => keep(LsBase::Wk { g, k }),
                Ok(c) => Ok(lwk(&c, k)),
            },
        }
    }
}

struct SubstLocals<'a>(&'a LocalSubst);

impl Action for SubstLocals<'_> {
    fn touches_locals(&self) -> bool {
        true
    }
    fn local_var(&self, d: Depth, j: usize) -> R<Term> {
        if j < d.locals {
            return Ok(Term::LocalVar(j));
        }
        self.0.lookup(j - d.locals).map(|t| lift(t, d)).ok_or(SubstError::Local(j - d.locals))
    }
    fn ls_base(&self, d: Depth, base: &LsBase) -> R<LocalSubst> {
        let k = self.0.hat() + d.locals;
        let base = match *base {
            LsBase::Empty { g: None, .. } => {
                LsBase::Empty { g: self.0.check().map(|g| g + d.globals), k }
            }
            LsBase::Empty { g: Some(g), .. } => LsBase::Empty { g: Some(g), k },
            LsBase::Wk { g, .. } => LsBase::Wk { g, k },
        };
        Ok(LocalSubst { base, entries: Vec::new() })
    }
}

struct TopLocals<'a>(&'a [Term]);

impl Action for TopLocals<'_> {
    fn touches_locals(&self) -> bool {
        true
    }
    fn local_var(&self, d: Depth, j: usize) -> R<Term> {
        let n = self.0.len();
        Ok(if j < d.locals {
            Term::LocalVar(j)
        } else if j - d.locals < n {
            lift(&self.0[n - 1 - (j - d.locals)], d)
        } else {
            Term::LocalVar(j - n)
        })
    }
    fn ls_base(&self, _d: Depth, base: &LsBase) -> R<LocalSubst> {
        let k = base_k(base).saturating_sub(self.0.len());
        Ok(LocalSubst { base: with_k(base, k), entries: Vec::new() })
    }
}

struct NormalizeLevels;

impl Action for NormalizeLevels {
    fn level(&self, _d: Depth, l: &Level) -> R<Level> {
        Ok(normalize(l))
    }
}

struct LocalBound(std::cell::Cell<usize>);

impl Action for LocalBound {
    fn touches_locals(&self) -> bool {
        true
    }
    fn local_var(&self, d: Depth, j: usize) -> R<Term> {
        if j >= d.locals {
            self.0.set(self.0.get().max(j - d.locals + 1));
        }
        Ok(Term::LocalVar(j))
    }
    fn ls_base(&self, d: Depth, base: &LsBase) -> R<LocalSubst> {
        self.0.set(self.0.get().max(base_k(base).saturating_sub(d.locals)));
        Ok(LocalSubst { base: base.clone(), entries: Vec::new() })
    }
}

// ---------------------------------------------------------------------------
// Public operations

/// The least length of a local context that `s` can live in: one more
/// than its largest free local variable, or the domain length recorded by
/// a substitution base.
pub fn local_bound<S: Syn>(s: &S) -> usize {
    let a = LocalBound(std::cell::Cell::new(0));
    infallible(s.walk(&a, Depth::default()));
    a.0.get()
}

/// Shift free level variables at or above `cutoff` by `by`.
pub fn shift_levels<S: Syn>(s: &S, cutoff: usize, by: usize) -> S {
    if by == 0 {
        return s.clone();
    }
    infallible(s.walk(&ShiftLevels(by), Depth { levels: cutoff, ..Depth::default() }))
}

/// Shift free global variables at or above `cutoff` by `by`.
pub fn shift_globals<S: Syn>(s: &S, cutoff: usize, by: usize) -> S {
    if by == 0 {
        return s.clone();
    }
    infallible(s.walk(&ShiftGlobals(by), Depth { globals: cutoff, ..Depth::default() }))
}

/// Shift free local variables at or above `cutoff` by `by`, growing the
/// domain size recorded in local substitution bases accordingly.
pub fn shift_locals<S: Syn>(s: &S, cutoff: usize, by: usize) -> S {
    if by == 0 {
        return s.clone();
    }
    infallible(s.walk(&ShiftLocals(by), Depth { locals: cutoff, ..Depth::default() }))
}

/// `x[φ]`.
pub fn usubst_apply_syntax<S: Syn>(s: &S, phi: &UnivSubst) -> Result<S, SubstError> {
    s.walk(&SubstLevels(phi), Depth::default())
}

/// `x[σ]`.
pub fn gsubst_apply<S: Syn>(s: &S, sigma: &GlobalSubst) -> Result<S, SubstError> {
    s.walk(&Globals(SubstGlobals(sigma)), Depth::default())
}

/// `x[δ]`.
pub fn lsubst_apply<S: Syn>(s: &S, delta: &LocalSubst) -> Result<S, SubstError> {
    s.walk(&SubstLocals(delta), Depth::default())
}

/// `δ ∘ δ'`: first `delta`, then `delta2`.
pub fn lsubst_compose(delta: &LocalSubst, delta2: &LocalSubst) -> Result<LocalSubst, SubstError> {
    lsubst_apply(delta, delta2)
}

/// `σ ∘ σ'`: first `sigma`, then `sigma2`.
pub fn gsubst_compose(sigma: &GlobalSubst, sigma2: &GlobalSubst) -> Result<GlobalSubst, SubstError> {
    Ok(GlobalSubst(gsubst_apply(&sigma.0, sigma2)?))
}

/// `wk^k_Ψ : Ψ, Φ ⇒ Ψ` where `Φ` has `k` bindings.
pub fn gwk(psi: &GlobalCtx, k: usize) -> GlobalSubst {
    let n = psi.len();
    let entries = psi
        .0
        .iter()
        .enumerate()
        .map(|(p, e)| {
            let j = n - 1 - p;
            let to_target = |c: &LocalCtx| shift_globals(c, 0, j + 1 + k);
            match &e.binding {
                GBinding::Ctx => GEntry::Ctx(LocalCtx::var(j + k)),
                GBinding::Typ { ctx, .. } => GEntry::Typ(Type::GVar(j + k, lid(&to_target(ctx)))),
                GBinding::Trm { ctx, .. } => GEntry::Trm(Term::GVar(j + k, lid(&to_target(ctx)))),
            }
        })
        .collect();
    GlobalSubst(entries)
}

/// `id_Ψ`.
pub fn gsubst_id(psi: &GlobalCtx) -> GlobalSubst {
    gwk(psi, 0)
}

/// Replace the `entries.len()` innermost level variables (the last entry
/// replaces `Var(0)`) and close the gap.
pub fn subst_top_levels<S: Syn>(s: &S, entries: &[Level]) -> S {
    infallible(s.walk(&TopLevels(entries), Depth::default()))
}

/// Replace the innermost global variables (the last entry replaces index 0).
pub fn subst_top_globals<S: Syn>(s: &S, entries: &[GEntry]) -> Result<S, SubstError> {
    s.walk(&Globals(TopGlobals(entries)), Depth::default())
}

/// Replace the innermost local variables (the last entry replaces index 0).
pub fn subst_top_locals<S: Syn>(s: &S, entries: &[Term]) -> S {
    infallible(s.walk(&TopLocals(entries), Depth::default()))
}

/// Put every level occurring in the syntax into normal form.
pub fn normalize_levels<S: Syn>(s: &S) -> S {
    infallible(s.walk(&NormalizeLevels, Depth::default()))
}

/// `Ψ[φ]`.
pub fn gctx_usubst(psi: &GlobalCtx, phi: &UnivSubst) -> Result<GlobalCtx, SubstError> {
    let v = psi
        .0
        .iter()
        .map(|e| {
            Ok(GlobalEntry { name: e.name.clone(), binding: usubst_apply_syntax(&e.binding, phi)? })
        })
        .collect::<R<_>>()?;
    Ok(GlobalCtx(v))
}

/// Shift every binding of `Ψ` by `by` level variables.
pub fn gctx_shift_levels(psi: &GlobalCtx, by: usize) -> GlobalCtx {
    GlobalCtx(
        psi.0
            .iter()
            .map(|e| GlobalEntry { name: e.name.clone(), binding: shift_levels(&e.binding, 0, by) })
            .collect(),
    )
}

/// The binding of global index `j`, moved into the scope of the whole
/// context.
pub fn gctx_lookup(psi: &GlobalCtx, j: usize) -> Option<(Name, GBinding)> {
    psi.raw(j).map(|e| (e.name.clone(), shift_globals(&e.binding, 0, j + 1)))
}

/// The type and level of local variable `j`, moved into the scope of the
/// whole context.
pub fn lctx_lookup(ctx: &LocalCtx, j: usize) -> Option<(Name, Type, Level)> {
    let n = ctx.len();
    if j >= n {
        return None;
    }
    let e = &ctx.entries[n - 1 - j];
    Some((e.name.clone(), shift_locals(&e.ty, 0, j + 1), e.level.clone()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn nat_ctx(n: usize) -> LocalCtx {
        (0..n).fold(LocalCtx::empty(), |c, i| c.push(Name::new(&format!("x{i}")), Type::Nat, Level::Zero))
    }

    #[test]
    fn local_subst_replaces_variables() {
        // (·, x, y) ⊢ succ y ; δ = (·^1, zero, var0) : (·, z) ⇒ (·, x, y)
        let t = Term::succ(Term::LocalVar(0));
        let d = LocalSubst { base: LsBase::Empty { g: None, k: 1 }, entries: vec![Term::Zero, Term::LocalVar(0)] };
        assert_eq!(lsubst_apply(&t, &d).unwrap(), Term::succ(Term::LocalVar(0)));
        let t2 = Term::LocalVar(1);
        assert_eq!(lsubst_apply(&t2, &d).unwrap(), Term::Zero);
    }

    #[test]
    fn substitution_goes_under_binders() {
        // λ z. x  with x free (index 1 under the binder)
        let t = Term::lam(Level::Zero, Level::Zero, "z", Type::Nat, Term::LocalVar(1));
        let d = LocalSubst { base: LsBase::Empty { g: None, k: 1 }, entries: vec![Term::LocalVar(0)] };
        let r = lsubst_apply(&t, &d).unwrap();
        assert_eq!(r, Term::lam(Level::Zero, Level::Zero, "z", Type::Nat, Term::LocalVar(1)));
        let d2 = LocalSubst { base: LsBase::Empty { g: None, k: 0 }, entries: vec![Term::Zero] };
        let r2 = lsubst_apply(&t, &d2).unwrap();
        assert_eq!(r2, Term::lam(Level::Zero, Level::Zero, "z", Type::Nat, Term::Zero));
    }

    #[test]
    fn composition_base_rules() {
        // wk_g^2 ∘ δ with ˆδ = 5 gives wk_g^5
        let w = LocalSubst { base: LsBase::Wk { g: 0, k: 2 }, entries: vec![] };
        let d = LocalSubst { base: LsBase::Wk { g: 0, k: 5 }, entries: vec![Term::Zero, Term::Zero] };
        assert_eq!(lsubst_compose(&w, &d).unwrap().base, LsBase::Wk { g: 0, k: 5 });
        // ·^k ∘ δ = ·^{ˆδ}_{ˇδ}
        let e = LocalSubst { base: LsBase::Empty { g: None, k: 2 }, entries: vec![] };
        assert_eq!(lsubst_compose(&e, &d).unwrap().base, LsBase::Empty { g: Some(0), k: 5 });
    }

    #[test]
    fn identity_is_neutral() {
        let ctx = nat_ctx(3);
        let t = Term::succ(Term::LocalVar(2));
        assert_eq!(lsubst_apply(&t, &lid(&ctx)).unwrap(), t);
        let g = LocalSubst { base: LsBase::Wk { g: 0, k: 3 }, entries: vec![Term::LocalVar(1)] };
        assert_eq!(lsubst_compose(&lid(&LocalCtx::var(0).push("x".into(), Type::Nat, Level::Zero)), &g).unwrap(), g);
    }

    #[test]
    fn global_subst_instantiates_context_variable() {
        // Ψ = g ; U^{wk_g^1} [ (·, y : Nat) / g ] = U^{·^2, var1}
        let u = Type::GVar(1, LocalSubst { base: LsBase::Wk { g: 0, k: 1 }, entries: vec![] });
        let sigma = GlobalSubst(vec![
            GEntry::Ctx(nat_ctx(1)),
        ]);
        // Shift so that index 1 is a kept global of the target: apply a top
        // substitution for g only.
        let r = subst_top_globals(&u, &sigma.0).unwrap();
        assert_eq!(
            r,
            Type::GVar(0, LocalSubst { base: LsBase::Empty { g: None, k: 2 }, entries: vec![Term::LocalVar(1)] })
        );
    }

    #[test]
    fn gwk_of_context_and_term_binding() {
        let mut psi = GlobalCtx::new();
        psi.push("g".into(), GBinding::Ctx);
        psi.push(
            "u".into(),
            GBinding::Trm { ctx: LocalCtx::var(0), layer: Layer::C, ty: Type::Nat, level: Level::Zero },
        );
        let id = gsubst_id(&psi);
        assert_eq!(
            id.0,
            vec![
                GEntry::Ctx(LocalCtx::var(1)),
                GEntry::Trm(Term::GVar(0, LocalSubst { base: LsBase::Wk { g: 1, k: 0 }, entries: vec![] })),
            ]
        );
        let t = Term::GVar(0, LocalSubst { base: LsBase::Wk { g: 1, k: 2 }, entries: vec![] });
        assert_eq!(gsubst_apply(&t, &id).unwrap(), t);
    }

    #[test]
    fn top_level_substitution() {
        // UPi ℓ'. Ty (ℓ ⊔ ℓ') with ℓ := 1
        let t = Type::UPi(vec!["m".into()], Level::Omega, Box::new(Type::Ty(Level::Var(1).lub(Level::Var(0)))));
        let r = subst_top_levels(&t, &[Level::nat(1)]);
        assert_eq!(
            r,
            Type::UPi(vec!["m".into()], Level::Omega, Box::new(Type::Ty(Level::nat(1).lub(Level::Var(0)))))
        );
    }

    #[test]
    fn kind_mismatch_is_an_error() {
        let t = Term::GVar(0, lid(&LocalCtx::empty()));
        let e = subst_top_globals(&t, &[GEntry::Ctx(LocalCtx::empty())]).unwrap_err();
        assert!(matches!(e, SubstError::Kind { expected: "term", .. }));
    }

    #[test]
    fn lookup_moves_into_scope() {
        let ctx = LocalCtx::empty()
            .push("A".into(), Type::Ty(Level::Zero), Level::nat(1))
            .push("a".into(), Type::el(Level::Zero, Term::LocalVar(0)), Level::Zero)
            .push("n".into(), Type::Nat, Level::Zero);
        let (_, ty, _) = lctx_lookup(&ctx, 1).unwrap();
        assert_eq!(ty, Type::el(Level::Zero, Term::LocalVar(2)));
    }
}
