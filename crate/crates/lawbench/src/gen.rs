//! Type-directed generation of well-typed syntax.
//!
//! Every generator builds its output from typing-rule templates against
//! a given environment, so what comes out checks by construction. When a
//! template reaches a type with no canonical inhabitant and no variable
//! of that type is in scope, the generator backs out and tries another
//! template; a per-subject budget bounds the search.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use delam_core::recursor::motive_instance;
use delam_core::reduce::DEFAULT_FUEL;
use delam_core::subst::{gctx_lookup, gsubst_apply, lctx_lookup, lsubst_apply, shift_globals, shift_levels, shift_locals};
use delam_core::syntax::*;
use delam_core::typing::{branch_env, Checker, Env};
use delam_core::ulevel::{adjust, count, flatten, level_equiv, Level, UnivSubst};

/// Shape of the local contexts a world starts from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CtxShape {
    /// Local contexts over the empty base.
    Closed,
    /// Local contexts over a context variable.
    Open,
    /// Either, chosen per subject.
    Mixed,
}

/// Everything that determines one generated subject.
#[derive(Clone, Copy, Debug)]
pub struct GenConfig {
    pub seed: u64,
    /// Bound on nested eliminations and redexes.
    pub depth: usize,
    pub layer: Layer,
    pub shape: CtxShape,
}

impl GenConfig {
    pub fn new(seed: u64, layer: Layer) -> GenConfig {
        GenConfig { seed, depth: 2, layer, shape: CtxShape::Mixed }
    }
}

/// A well-typed term `Ψ; Γ ⊢_i t : T @ l` together with its judgement.
#[derive(Clone, Debug)]
pub struct Subject {
    pub env: Env,
    pub layer: Layer,
    pub term: Term,
    pub ty: Type,
    pub level: Level,
}

const BUDGET: usize = 4000;
const LEVEL_NAMES: [&str; 3] = ["l", "k", "j"];

fn bx<T>(t: T) -> Box<T> {
    Box::new(t)
}

fn nm(s: &str) -> Name {
    Name::new(s)
}

/// `l - 1` when every component of `l` is a successor.
pub fn pred_level(l: &Level) -> Option<Level> {
    let m = adjust(count(l)?);
    if m.values().any(|v| *v == 0) {
        return None;
    }
    Some(flatten(&m.into_iter().map(|(k, v)| (k, v - 1)).collect()))
}

/// Global indices of the context variables in scope.
fn ctx_vars(env: &Env) -> Vec<usize> {
    (0..env.globals.len()).filter(|j| matches!(gctx_lookup(&env.globals, *j), Some((_, GBinding::Ctx)))).collect()
}

#[derive(Clone, Copy, Debug)]
enum Choice {
    Var,
    Apply,
    Zero,
    Succ,
    Lam,
    NatCode,
    TyCode,
    PiCode,
    ULam,
    CtxLam,
    TyLam,
    BoxTy,
    BoxTm,
    ElimNat,
    BetaApp,
    BetaU,
    BetaCtx,
    BetaTy,
    LetBoxTy,
    LetBoxTm,
    ElimTyp,
    ElimTrm,
}

impl Choice {
    fn weight(self) -> u32 {
        match self {
            Choice::Var | Choice::Apply => 4,
            Choice::Zero | Choice::Succ | Choice::Lam | Choice::NatCode | Choice::TyCode | Choice::PiCode => 4,
            Choice::ULam | Choice::CtxLam | Choice::TyLam | Choice::BoxTy | Choice::BoxTm => 4,
            Choice::ElimTyp | Choice::ElimTrm => 1,
            _ => 2,
        }
    }

    fn is_redex(self) -> bool {
        matches!(
            self,
            Choice::ElimNat
                | Choice::BetaApp
                | Choice::BetaU
                | Choice::BetaCtx
                | Choice::BetaTy
                | Choice::LetBoxTy
                | Choice::LetBoxTm
                | Choice::ElimTyp
                | Choice::ElimTrm
        )
    }
}

/// A generator: a seeded random source and the checker used to compare
/// types while choosing variables.
pub struct Gen {
    pub rng: ChaCha8Rng,
    pub checker: Checker,
    budget: usize,
    /// When set, the next call to [`Gen::tm`] only uses redex templates.
    force_redex: bool,
    /// How many global-variable substitutions are being generated around
    /// the current call.
    var_nest: usize,
}

impl Gen {
    pub fn new(seed: u64) -> Gen {
        Gen { rng: ChaCha8Rng::seed_from_u64(seed), checker: Checker::new(DEFAULT_FUEL), budget: BUDGET, force_redex: false, var_nest: 0 }
    }

    /// Refill the search budget before generating another piece.
    pub fn reset_budget(&mut self) {
        self.budget = BUDGET;
    }

    fn coin(&mut self, p: f64) -> bool {
        self.rng.gen_bool(p)
    }

    fn spend(&mut self) -> bool {
        if self.budget == 0 {
            return false;
        }
        self.budget -= 1;
        true
    }

    /// A level over `nvars` variables. Depth 0 gives `0` or a variable.
    pub fn gen_level(&mut self, nvars: usize, depth: usize) -> Level {
        let leaf = |g: &mut Gen| {
            if nvars > 0 && g.coin(0.6) {
                Level::Var(g.rng.gen_range(0..nvars))
            } else {
                Level::Zero
            }
        };
        if depth == 0 || self.coin(0.3) {
            return leaf(self);
        }
        match self.rng.gen_range(0..3) {
            0 => self.gen_level(nvars, depth - 1).succ(),
            1 => {
                let a = self.gen_level(nvars, depth - 1);
                a.lub(self.gen_level(nvars, depth - 1))
            }
            _ => leaf(self),
        }
    }

    /// A level substitution `L' ⇒ L` with `|L'| = from` and `|L| = to`.
    pub fn gen_usubst(&mut self, from: usize, to: usize) -> UnivSubst {
        UnivSubst((0..to).map(|_| self.gen_level(from, 2)).collect())
    }

    /// Levels used for the types the generator invents: small, and
    /// inhabited by a universe code whenever `Ty` is built at them.
    fn small_level(&mut self, nvars: usize) -> Level {
        match self.rng.gen_range(0..5) {
            0 | 1 => Level::Zero,
            2 => Level::nat(1),
            3 if nvars > 0 => Level::Var(self.rng.gen_range(0..nvars)),
            4 if nvars > 0 => Level::Var(self.rng.gen_range(0..nvars)).succ(),
            _ => Level::Zero,
        }
    }

    /// A level-variable context of 0 to 2 names.
    pub fn gen_univ_ctx(&mut self) -> Vec<Name> {
        let n = self.rng.gen_range(0..=2);
        LEVEL_NAMES[..n].iter().map(|s| nm(s)).collect()
    }

    /// A world: level variables, a global context drawn from binding
    /// templates, and a local context of the requested shape.
    pub fn gen_world(&mut self, shape: CtxShape, layer: Layer) -> Env {
        let levels = self.gen_univ_ctx();
        let mut env = Env::new(levels, GlobalCtx::new());
        env = self.gen_globals(&env, shape == CtxShape::Open);
        let base = match shape {
            CtxShape::Closed => Some(CtxBase::Empty),
            CtxShape::Open => ctx_vars(&env).first().map(|g| CtxBase::Var(*g)),
            CtxShape::Mixed => None,
        };
        let locals = self.gen_local_ctx(&env, base, layer.typeof_layer(), 3);
        env.with_locals(locals)
    }

    /// Extend `env.globals` with a random selection of binding templates.
    pub fn gen_globals(&mut self, env: &Env, need_ctx: bool) -> Env {
        let mut env = Env::new(env.levels.clone(), env.globals.clone());
        let nl = env.levels.len();
        if need_ctx || self.coin(0.8) {
            env = env.push_global(nm("g"), GBinding::Ctx);
        }
        if self.coin(0.7) {
            let ctx = self.gen_local_ctx(&env, None, Layer::D, 1).push(nm("x"), Type::Nat, Level::Zero);
            let level = self.small_level(nl);
            env = env.push_global(nm("U"), GBinding::Typ { ctx, layer: Layer::C, level });
        }
        if self.coin(0.5) {
            let ctx = self.gen_local_ctx(&env, None, Layer::D, 1);
            let level = self.small_level(nl);
            env = env.push_global(nm("V"), GBinding::Typ { ctx, layer: Layer::D, level });
        }
        if self.coin(0.7) {
            let ctx = self.gen_local_ctx(&env, None, Layer::D, 1);
            let inner = env.with_locals(ctx.clone());
            let (ty, level) = self.gen_type(&inner, Layer::C, 1, true);
            env = env.push_global(nm("u"), GBinding::Trm { ctx, layer: Layer::C, ty, level });
        }
        if self.coin(0.5) {
            let ctx = self.gen_local_ctx(&env, None, Layer::D, 1).push(nm("a"), Type::Nat, Level::Zero);
            env = env.push_global(nm("w"), GBinding::Trm { ctx, layer: Layer::V, ty: Type::Nat, level: Level::Zero });
        }
        if self.coin(0.3) {
            env = env.push_global(nm("h"), GBinding::Ctx);
        }
        env
    }

    /// A local context over the global context of `env`, well formed at
    /// layer `i`. `base` fixes the base; otherwise it is random.
    pub fn gen_local_ctx(&mut self, env: &Env, base: Option<CtxBase>, i: Layer, max_len: usize) -> LocalCtx {
        let base = base.unwrap_or_else(|| {
            let vars = ctx_vars(env);
            if !vars.is_empty() && self.coin(0.6) {
                CtxBase::Var(*vars.choose(&mut self.rng).expect("non-empty"))
            } else {
                CtxBase::Empty
            }
        });
        let mut ctx = LocalCtx { base, entries: Vec::new() };
        let n = self.rng.gen_range(0..=max_len);
        let names = ["x", "y", "z", "A", "f"];
        for p in 0..n {
            let here = env.with_locals(ctx.clone());
            let (ty, level) = match self.rng.gen_range(0..6) {
                0 => (Type::Nat, Level::Zero),
                1 => (Type::pi(Level::Zero, Level::Zero, "n", Type::Nat, Type::Nat), Level::Zero),
                2 => (Type::Ty(Level::Zero), Level::nat(1)),
                _ => self.gen_type(&here, i, 1, false),
            };
            ctx = ctx.push(nm(names[p % names.len()]), ty, level);
        }
        ctx
    }

    /// `δ : Γ ⇒ Δ` with `Γ = env.locals`, entries at layer `i`. Fails when
    /// the bases cannot be matched or an entry type has no inhabitant.
    pub fn gen_lsubst(&mut self, env: &Env, i: Layer, target: &LocalCtx, depth: usize) -> Option<LocalSubst> {
        let k = env.locals.len();
        let base = match target.base {
            CtxBase::Empty => LsBase::Empty { g: env.locals.base_var(), k },
            CtxBase::Var(g) if env.locals.base_var() == Some(g) => LsBase::Wk { g, k },
            CtxBase::Var(_) => return None,
        };
        let mut delta = LocalSubst { base, entries: Vec::new() };
        for e in &target.entries {
            let ty = lsubst_apply(&e.ty, &delta).ok()?;
            let t = self.tm(env, i, &ty, &e.level, depth)?;
            delta = delta.push(t);
        }
        Some(delta)
    }

    /// `σ : Ψ' ⇒ Ψ` with `Ψ' = target.globals` and `Ψ = source`, both over
    /// the level context of `target`.
    pub fn gen_gsubst(&mut self, target: &Env, source: &GlobalCtx, depth: usize) -> Option<GlobalSubst> {
        let base = Env::new(target.levels.clone(), target.globals.clone());
        let mut sigma = GlobalSubst(Vec::new());
        for e in &source.0 {
            let b = gsubst_apply(&e.binding, &sigma).ok()?;
            let entry = match b {
                GBinding::Ctx => {
                    let vars = ctx_vars(&base);
                    match vars.choose(&mut self.rng) {
                        Some(j) if self.coin(0.5) => GEntry::Ctx(LocalCtx::var(*j)),
                        _ => GEntry::Ctx(self.gen_local_ctx(&base, None, Layer::D, 2)),
                    }
                }
                GBinding::Typ { ctx, layer, level } => {
                    GEntry::Typ(self.gen_type_at(&base.with_locals(ctx), layer, &level, depth)?)
                }
                GBinding::Trm { ctx, layer, ty, level } => {
                    GEntry::Trm(self.tm(&base.with_locals(ctx), layer, &ty, &level, depth)?)
                }
            };
            sigma.0.push(entry);
        }
        Some(sigma)
    }

    /// A type at a given level, or `None` if no template fits.
    pub fn gen_type_at(&mut self, env: &Env, i: Layer, l: &Level, depth: usize) -> Option<Type> {
        if !self.spend() {
            return None;
        }
        let mut opts: Vec<u8> = vec![0, 1, 4];
        if depth > 0 {
            opts.extend([2, 3, 5]);
        }
        opts.shuffle(&mut self.rng);
        for o in opts {
            let r = match o {
                0 if level_equiv(l, &Level::Zero) => Some(Type::Nat),
                1 => pred_level(l).map(Type::Ty),
                2 => {
                    let env2 = env.push_local(nm("x"), Type::Nat, Level::Zero);
                    self.gen_type_at(&env2, i, l, depth - 1)
                        .map(|b| Type::Pi(Level::Zero, l.clone(), nm("x"), bx(Type::Nat), bx(b)))
                }
                3 => self.gen_type_at(env, i, l, depth - 1).and_then(|s| {
                    let env2 = env.push_local(nm("x"), s.clone(), l.clone());
                    let b = self.gen_type_at(&env2, i, l, depth - 1)?;
                    Some(Type::Pi(l.clone(), l.clone(), nm("x"), bx(s), bx(b)))
                }),
                4 => self.gen_type_var(env, i, Some(l)).map(|(t, _)| t),
                5 if i != Layer::V => {
                    self.tm(env, i, &Type::Ty(l.clone()), &l.clone().succ(), depth - 1).map(|c| Type::El(l.clone(), bx(c)))
                }
                _ => None,
            };
            if r.is_some() {
                return r;
            }
        }
        None
    }

    /// `U^δ` for a type variable usable at layer `i`, optionally at a
    /// fixed level.
    fn gen_type_var(&mut self, env: &Env, i: Layer, level: Option<&Level>) -> Option<(Type, Level)> {
        let mut cands: Vec<(usize, LocalCtx, Level)> = Vec::new();
        for j in 0..env.globals.len() {
            if let Some((_, GBinding::Typ { ctx, layer, level: ul })) = gctx_lookup(&env.globals, j) {
                if layer <= i && level.is_none_or(|l| level_equiv(l, &ul)) {
                    cands.push((j, ctx, ul));
                }
            }
        }
        cands.shuffle(&mut self.rng);
        for (j, ctx, ul) in cands {
            if let Some(delta) = self.gen_lsubst(env, i, &ctx, 0) {
                return Some((Type::GVar(j, delta), ul));
            }
        }
        None
    }

    /// A type and its level. With `inhabited`, the type has a closed
    /// canonical inhabitant in every extension of `env`, so [`Gen::tm`]
    /// always has a template for it.
    pub fn gen_type(&mut self, env: &Env, i: Layer, depth: usize, inhabited: bool) -> (Type, Level) {
        let nl = env.levels.len();
        let mut opts: Vec<u8> = vec![0, 0, 1, 2, 3];
        if !inhabited {
            opts.push(4);
        }
        if i == Layer::M {
            opts.extend([5, 6, 7, 8]);
        }
        opts.shuffle(&mut self.rng);
        for o in opts {
            let r = match o {
                1 => {
                    let l = self.small_level(nl);
                    let ok = !inhabited || level_equiv(&l, &Level::Zero) || pred_level(&l).is_some();
                    ok.then(|| (Type::Ty(l.clone()), l.succ()))
                }
                2 if depth > 0 => {
                    let (s, ls) = self.gen_type(env, i, depth - 1, false);
                    let env2 = env.push_local(nm("x"), s.clone(), ls.clone());
                    let (b, lb) = self.gen_type(&env2, i, depth - 1, inhabited);
                    let l = ls.clone().lub(lb.clone());
                    Some((Type::Pi(ls, lb, nm("x"), bx(s), bx(b)), l))
                }
                3 if depth > 0 => {
                    let l = self.small_level(nl);
                    let code = if inhabited {
                        if level_equiv(&l, &Level::Zero) {
                            Some(Term::NatCode)
                        } else {
                            pred_level(&l).map(Term::TyCode)
                        }
                    } else {
                        self.tm(env, i, &Type::Ty(l.clone()), &l.clone().succ(), depth - 1)
                    };
                    code.map(|c| (Type::El(l.clone(), bx(c)), l))
                }
                4 => self.gen_type_var(env, i, None),
                5 if depth > 0 => {
                    let env2 = env.push_global(nm("g"), GBinding::Ctx);
                    let (b, l) = self.gen_type(&env2, i, depth - 1, inhabited);
                    Some((Type::CtxPi(nm("g"), l.clone(), bx(b)), l))
                }
                6 if depth > 0 => {
                    let ctx = self.gen_local_ctx(env, None, Layer::D, 2);
                    let lu = self.small_level(nl);
                    let b = GBinding::Typ { ctx: ctx.clone(), layer: Layer::D, level: lu.clone() };
                    let (body, l) = self.gen_type(&env.push_global(nm("U"), b), i, depth - 1, inhabited);
                    Some((Type::TyPi(nm("U"), ctx, lu, l.clone(), bx(body)), l))
                }
                7 => {
                    let ctx = self.gen_local_ctx(env, None, Layer::D, 2);
                    let mut l = self.small_level(nl);
                    if inhabited && pred_level(&l).is_none() {
                        l = Level::Zero;
                    }
                    Some((Type::CodeTy(ctx, l), Level::Zero))
                }
                8 => {
                    let ctx = self.gen_local_ctx(env, None, Layer::D, 2);
                    let (t, l) = self.gen_type(&env.with_locals(ctx.clone()), Layer::C, depth.saturating_sub(1), true);
                    Some((Type::CodeTm(ctx, bx(t), l.clone()), Level::Zero))
                }
                _ => None,
            };
            if let Some(r) = r {
                return r;
            }
        }
        (Type::Nat, Level::Zero)
    }

    fn choices(&self, env: &Env, i: Layer, w: &Type, l: &Level, depth: usize) -> Vec<Choice> {
        let mut c = vec![Choice::Var];
        if i == Layer::V {
            return c;
        }
        if depth > 0 && !env.locals.is_empty() {
            c.push(Choice::Apply);
        }
        match w {
            Type::Nat => c.extend([Choice::Zero, Choice::Succ]),
            Type::Pi(..) => c.push(Choice::Lam),
            Type::Ty(a) => {
                if level_equiv(a, &Level::Zero) {
                    c.push(Choice::NatCode);
                }
                if pred_level(a).is_some() {
                    c.push(Choice::TyCode);
                }
                if depth > 0 {
                    c.push(Choice::PiCode);
                }
            }
            Type::UPi(..) => c.push(Choice::ULam),
            Type::CtxPi(..) => c.push(Choice::CtxLam),
            Type::TyPi(..) => c.push(Choice::TyLam),
            Type::CodeTy(..) => c.push(Choice::BoxTy),
            Type::CodeTm(..) => c.push(Choice::BoxTm),
            Type::El(..) | Type::GVar(..) => {}
        }
        if depth > 0 && !l.is_omega() {
            c.extend([Choice::ElimNat, Choice::BetaApp]);
            if i == Layer::M {
                c.extend([
                    Choice::BetaU,
                    Choice::BetaCtx,
                    Choice::BetaTy,
                    Choice::LetBoxTy,
                    Choice::LetBoxTm,
                    Choice::ElimTyp,
                    Choice::ElimTrm,
                ]);
            }
        }
        c
    }

    /// Weighted random order without replacement.
    fn order(&mut self, mut c: Vec<Choice>) -> Vec<Choice> {
        let mut out = Vec::with_capacity(c.len());
        while !c.is_empty() {
            let total: u32 = c.iter().map(|x| x.weight()).sum();
            let mut r = self.rng.gen_range(0..total);
            let mut k = 0;
            while r >= c[k].weight() {
                r -= c[k].weight();
                k += 1;
            }
            out.push(c.remove(k));
        }
        out
    }

    /// A term `Ψ; Γ ⊢_i t : ty @ l`, or `None` if every template dead-ends.
    pub fn tm(&mut self, env: &Env, i: Layer, ty: &Type, l: &Level, depth: usize) -> Option<Term> {
        if !self.spend() {
            return None;
        }
        let w = self.checker.whnf_ty(ty).ok()?;
        let only_redex = std::mem::take(&mut self.force_redex);
        let mut choices = self.choices(env, i, &w, l, depth);
        if only_redex {
            choices.retain(|c| c.is_redex());
        }
        for c in self.order(choices) {
            let Some(t) = self.build(c, env, i, ty, &w, l, depth) else { continue };
            // Context types live at d, but annotations copied from them into
            // a c-term must be well-formed at c.
            if i == Layer::C && self.checker.check_term(env, i, &t, ty, l).is_err() {
                continue;
            }
            return Some(t);
        }
        None
    }

    /// Like [`Gen::tm`] but the head of the result is a redex.
    pub fn redex(&mut self, env: &Env, i: Layer, ty: &Type, l: &Level, depth: usize) -> Option<Term> {
        self.force_redex = true;
        let r = self.tm(env, i, ty, l, depth.max(1));
        self.force_redex = false;
        r
    }

    fn var(&mut self, env: &Env, i: Layer, w: &Type, l: &Level) -> Option<Term> {
        let ti = i.typeof_layer();
        let mut cands: Vec<Term> = Vec::new();
        for j in 0..env.locals.len() {
            let (_, ty, vl) = lctx_lookup(&env.locals, j)?;
            if level_equiv(&vl, l) && self.checker.types_convertible(env, ti, &ty, w) {
                cands.push(Term::LocalVar(j));
            }
        }
        for j in 0..env.globals.len() {
            if self.var_nest >= 2 {
                break;
            }
            if let Some((_, GBinding::Trm { ctx, layer, ty, level })) = gctx_lookup(&env.globals, j) {
                if layer > i || !level_equiv(&level, l) {
                    continue;
                }
                self.var_nest += 1;
                let delta = self.gen_lsubst(env, i, &ctx, 0);
                self.var_nest -= 1;
                if let Some(delta) = delta {
                    let Ok(ty) = lsubst_apply(&ty, &delta) else { continue };
                    if self.checker.types_convertible(env, ti, &ty, w) {
                        cands.push(Term::GVar(j, delta));
                    }
                }
            }
        }
        cands.choose(&mut self.rng).cloned()
    }

    /// Apply a local function variable whose codomain matches.
    fn apply(&mut self, env: &Env, i: Layer, w: &Type, l: &Level, depth: usize) -> Option<Term> {
        let mut js: Vec<usize> = (0..env.locals.len()).collect();
        js.shuffle(&mut self.rng);
        for j in js {
            let (_, fty, _) = lctx_lookup(&env.locals, j)?;
            let Ok(Type::Pi(l1, l2, x, s, b)) = self.checker.whnf_ty(&fty) else { continue };
            if !level_equiv(&l2, l) {
                continue;
            }
            let Some(a) = self.tm(env, i, &s, &l1, depth.saturating_sub(1)) else { continue };
            let res = delam_core::subst::subst_top_locals(&*b, std::slice::from_ref(&a));
            if self.checker.types_convertible(env, i.typeof_layer(), &res, w) {
                return Some(Term::App(bx(Term::LocalVar(j)), l1, l2, x, s, b, bx(a)));
            }
        }
        None
    }

    #[allow(clippy::too_many_arguments)]
    fn build(&mut self, c: Choice, env: &Env, i: Layer, ty: &Type, w: &Type, l: &Level, depth: usize) -> Option<Term> {
        let d1 = depth.saturating_sub(1);
        let nl = env.levels.len();
        match c {
            Choice::Var => self.var(env, i, w, l),
            Choice::Apply => self.apply(env, i, w, l, depth),
            Choice::Zero => Some(Term::Zero),
            Choice::Succ => self.tm(env, i, &Type::Nat, &Level::Zero, d1).map(Term::succ),
            Choice::Lam => {
                let Type::Pi(l1, l2, x, s, b) = w else { return None };
                let body = self.tm(&env.push_local(x.clone(), (**s).clone(), l1.clone()), i, b, l2, depth)?;
                Some(Term::Lam(l1.clone(), l2.clone(), x.clone(), s.clone(), bx(body)))
            }
            Choice::NatCode => Some(Term::NatCode),
            Choice::TyCode => {
                let Type::Ty(a) = w else { return None };
                pred_level(a).map(Term::TyCode)
            }
            Choice::PiCode => {
                let Type::Ty(a) = w else { return None };
                let dom = if self.coin(0.5) { Level::Zero } else { a.clone() };
                let s = self.tm(env, i, &Type::Ty(dom.clone()), &dom.clone().succ(), d1)?;
                let env2 = env.push_local(nm("x"), Type::El(dom.clone(), bx(s.clone())), dom.clone());
                let b = self.tm(&env2, i, &Type::Ty(a.clone()), &a.clone().succ(), d1)?;
                Some(Term::PiCode(dom, a.clone(), nm("x"), bx(s), bx(b)))
            }
            Choice::ULam => {
                let Type::UPi(ns, lb, b) = w else { return None };
                let body = self.tm(&env.push_levels(ns), Layer::M, b, lb, depth)?;
                Some(Term::ULam(lb.clone(), ns.clone(), bx(body)))
            }
            Choice::CtxLam => {
                let Type::CtxPi(g, lb, b) = w else { return None };
                let body = self.tm(&env.push_global(g.clone(), GBinding::Ctx), Layer::M, b, lb, depth)?;
                Some(Term::CtxLam(lb.clone(), g.clone(), bx(body)))
            }
            Choice::TyLam => {
                let Type::TyPi(u, ctx, l1, l2, b) = w else { return None };
                let bind = GBinding::Typ { ctx: ctx.clone(), layer: Layer::D, level: l1.clone() };
                let body = self.tm(&env.push_global(u.clone(), bind), Layer::M, b, l2, depth)?;
                Some(Term::TyLam(l1.clone(), l2.clone(), u.clone(), ctx.clone(), bx(body)))
            }
            Choice::BoxTy => {
                let Type::CodeTy(ctx, cl) = w else { return None };
                let t = self.gen_type_at(&env.with_locals(ctx.clone()), Layer::C, cl, depth)?;
                Some(Term::BoxTy(bx(t)))
            }
            Choice::BoxTm => {
                let Type::CodeTm(ctx, cty, cl) = w else { return None };
                let t = self.tm(&env.with_locals(ctx.clone()), Layer::C, cty, cl, depth)?;
                Some(Term::BoxTm(bx(t)))
            }
            Choice::ElimNat => {
                let m = shift_locals(ty, 0, 1);
                let base = self.tm(env, i, ty, l, d1)?;
                let env2 = env.push_local(nm("x"), Type::Nat, Level::Zero).push_local(nm("y"), m.clone(), l.clone());
                let step = self.tm(&env2, i, &shift_locals(ty, 0, 2), l, d1)?;
                let n = self.tm(env, i, &Type::Nat, &Level::Zero, d1)?;
                Some(Term::ElimNat(l.clone(), bx(m), bx(base), bx(step), bx(n)))
            }
            Choice::BetaApp => {
                let (s, ls) = self.gen_type(env, i, 1, true);
                let a = self.tm(env, i, &s, &ls, d1)?;
                let b = shift_locals(ty, 0, 1);
                let body = self.tm(&env.push_local(nm("x"), s.clone(), ls.clone()), i, &b, l, d1)?;
                let f = Term::Lam(ls.clone(), l.clone(), nm("x"), bx(s.clone()), bx(body));
                Some(Term::App(bx(f), ls, l.clone(), nm("x"), bx(s), bx(b), bx(a)))
            }
            Choice::BetaU => {
                let ns = vec![nm("m")];
                let l_up = shift_levels(l, 0, 1);
                let body = self.tm(&env.push_levels(&ns), Layer::M, &shift_levels(ty, 0, 1), &l_up, d1)?;
                let arg = self.gen_level(nl, 1);
                self.inferable(env, Term::UApp(bx(Term::ULam(l_up, ns, bx(body))), vec![arg]))
            }
            Choice::BetaCtx => {
                let body = self.tm(&env.push_global(nm("g"), GBinding::Ctx), Layer::M, &shift_globals(ty, 0, 1), l, d1)?;
                let ctx = self.gen_local_ctx(env, None, Layer::D, 2);
                self.inferable(env, Term::CtxApp(bx(Term::CtxLam(l.clone(), nm("g"), bx(body))), ctx))
            }
            Choice::BetaTy => {
                let ctx = self.gen_local_ctx(env, None, Layer::D, 2);
                let (a, la) = self.gen_type(&env.with_locals(ctx.clone()), Layer::D, 1, false);
                let bind = GBinding::Typ { ctx: ctx.clone(), layer: Layer::D, level: la.clone() };
                let body = self.tm(&env.push_global(nm("U"), bind), Layer::M, &shift_globals(ty, 0, 1), l, d1)?;
                self.inferable(env, Term::TyApp(bx(Term::TyLam(la, l.clone(), nm("U"), ctx, bx(body))), bx(a)))
            }
            Choice::LetBoxTy => {
                let ctx = self.gen_local_ctx(env, None, Layer::D, 2);
                let mut la = self.small_level(nl);
                if pred_level(&la).is_none() {
                    la = Level::Zero;
                }
                let scrut = self.tm(env, i, &Type::CodeTy(ctx.clone(), la.clone()), &Level::Zero, d1)?;
                let bind = GBinding::Typ { ctx: ctx.clone(), layer: Layer::C, level: la.clone() };
                let body = self.tm(&env.push_global(nm("U"), bind), Layer::M, &shift_globals(ty, 0, 1), l, d1)?;
                let m = shift_locals(ty, 0, 1);
                Some(Term::LetBoxTy(l.clone(), la, ctx, bx(m), nm("U"), bx(body), bx(scrut)))
            }
            Choice::LetBoxTm => {
                let ctx = self.gen_local_ctx(env, None, Layer::D, 2);
                let (s, ls) = self.gen_type(&env.with_locals(ctx.clone()), Layer::C, 1, true);
                let scrut = self.tm(env, i, &Type::CodeTm(ctx.clone(), bx(s.clone()), ls.clone()), &Level::Zero, d1)?;
                let bind = GBinding::Trm { ctx: ctx.clone(), layer: Layer::C, ty: s.clone(), level: ls.clone() };
                let body = self.tm(&env.push_global(nm("u"), bind), Layer::M, &shift_globals(ty, 0, 1), l, d1)?;
                let m = shift_locals(ty, 0, 1);
                Some(Term::LetBoxTm(l.clone(), ls, ctx, bx(s), bx(m), nm("u"), bx(body), bx(scrut)))
            }
            Choice::ElimTyp | Choice::ElimTrm => self.recursor(c, env, i, ty, l, d1),
            }
    }

    /// `t` if its type can be inferred. The heads of level, context and
    /// type applications are inferred, and boxes inside them cannot be.
    fn inferable(&self, env: &Env, t: Term) -> Option<Term> {
        self.checker.infer_term(env, Layer::M, &t).ok().map(|_| t)
    }

    /// A code recursor with constant motives `ty`, every case generated
    /// in its own context.
    fn recursor(&mut self, c: Choice, env: &Env, i: Layer, ty: &Type, l: &Level, depth: usize) -> Option<Term> {
        let nl = env.levels.len();
        let up = |t: &Type, globals: usize| shift_levels(&shift_globals(&shift_locals(t, 0, 1), 0, globals), 0, 1);
        let ms = Motives { typ_name: nm("x"), typ: up(ty, 1), trm_name: nm("x"), trm: up(ty, 2) };
        let mut cases = Vec::with_capacity(13);
        for k in BranchKind::ALL {
            let binders: Vec<Name> = (0..k.binder_count()).map(|p| nm(&format!("b{p}"))).collect();
            let (env_b, rty, rl) = branch_env(env, &ms, l, l, k, &binders).ok()?;
            let body = self.tm(&env_b, Layer::M, &rty, &rl, depth.min(1))?;
            cases.push(Branch { binders, body });
        }
        let bs = Branches::new(cases).ok()?;
        let ctx = self.gen_local_ctx(env, None, Layer::D, 2);
        let t = if let Choice::ElimTyp = c {
            let mut la = self.small_level(nl);
            if pred_level(&la).is_none() {
                la = Level::Zero;
            }
            let s = self.tm(env, i, &Type::CodeTy(ctx.clone(), la.clone()), &Level::Zero, depth)?;
            Term::ElimTyp(l.clone(), l.clone(), bx(ms), bx(bs), la, ctx, bx(s))
        } else {
            let (sty, ls) = self.gen_type(&env.with_locals(ctx.clone()), Layer::C, 1, true);
            let code = Type::CodeTm(ctx.clone(), bx(sty.clone()), ls.clone());
            let s = self.tm(env, i, &code, &Level::Zero, depth)?;
            Term::ElimTrm(l.clone(), l.clone(), bx(ms), bx(bs), ls, ctx, bx(sty), bx(s))
        };
        debug_assert!(motive_instance_is_constant(&t, ty));
        Some(t)
    }

    /// A fresh subject for `cfg`: a world, a type, and a term of it.
    pub fn subject(&mut self, cfg: &GenConfig) -> Subject {
        let env = self.gen_world(cfg.shape, cfg.layer);
        self.subject_in(&env, cfg.layer, cfg.depth, None)
    }

    /// A subject in a given world. `head` restricts the type's head
    /// constructor (by its keyword, such as `"Pi"`).
    pub fn subject_in(&mut self, env: &Env, i: Layer, depth: usize, head: Option<&str>) -> Subject {
        for _ in 0..64 {
            self.budget = BUDGET;
            let (ty, level) = self.top_type(env, i, depth, head);
            if let Some(term) = self.tm(env, i, &ty, &level, depth) {
                return Subject { env: env.clone(), layer: i, term, ty, level };
            }
        }
        let term = if i == Layer::V { Term::LocalVar(0) } else { Term::Zero };
        Subject { env: env.clone(), layer: i, term, ty: Type::Nat, level: Level::Zero }
    }

    /// A reducible subject: its head is a redex.
    pub fn reducible_in(&mut self, env: &Env, i: Layer, depth: usize) -> Option<Subject> {
        for _ in 0..64 {
            self.budget = BUDGET;
            let (ty, level) = self.top_type(env, i, depth, None);
            if let Some(term) = self.redex(env, i, &ty, &level, depth) {
                if delam_core::reduce::step_term(&term).ok().flatten().is_some() {
                    return Some(Subject { env: env.clone(), layer: i, term, ty, level });
                }
            }
        }
        None
    }

    fn top_type(&mut self, env: &Env, i: Layer, depth: usize, head: Option<&str>) -> (Type, Level) {
        let nl = env.levels.len();
        let want = head.map(str::to_string);
        let want_upi = want.as_deref() == Some("UPi") || (want.is_none() && i == Layer::M && self.coin(0.1));
        if want_upi {
            let ns = vec![nm("m")];
            let (b, lb) = self.gen_type(&env.push_levels(&ns), Layer::M, depth.min(2), true);
            return (Type::UPi(ns, lb, bx(b)), Level::Omega);
        }
        for _ in 0..200 {
            let (t, l) = self.gen_type(env, i, depth.min(2), true);
            let ok = match want.as_deref() {
                None => true,
                Some("Pi") => matches!(t, Type::Pi(..)),
                Some("CtxPi") => matches!(t, Type::CtxPi(..)),
                Some("TyPi") => matches!(t, Type::TyPi(..)),
                Some("CodeTm") => matches!(t, Type::CodeTm(..)),
                Some("CodeTy") => matches!(t, Type::CodeTy(..)),
                Some(_) => true,
            };
            if ok {
                return (t, l);
            }
        }
        let _ = nl;
        (Type::pi(Level::Zero, Level::Zero, "x", Type::Nat, Type::Nat), Level::Zero)
    }
}

fn motive_instance_is_constant(t: &Term, ty: &Type) -> bool {
    match t {
        Term::ElimTyp(_, _, ms, _, l, ctx, s) => motive_instance(ms, 0, 0, l, ctx, None, s).as_ref() == Ok(ty),
        Term::ElimTrm(_, _, ms, _, l, ctx, sty, s) => {
            motive_instance(ms, 0, 0, l, ctx, Some(sty), s).as_ref() == Ok(ty)
        }
        _ => true,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn depth_zero_levels_are_zero_or_variables() {
        let mut g = Gen::new(1);
        for _ in 0..200 {
            let l = g.gen_level(2, 0);
            assert!(matches!(l, Level::Zero | Level::Var(0) | Level::Var(1)), "{l:?}");
        }
    }

    #[test]
    fn predecessor_of_successor_levels() {
        let l = Level::Var(0).succ().lub(Level::nat(2));
        let p = pred_level(&l).unwrap();
        assert!(level_equiv(&p.succ(), &l));
        assert_eq!(pred_level(&Level::Var(0)), None);
        assert_eq!(pred_level(&Level::Zero), None);
    }

    #[test]
    fn same_seed_same_subject() {
        let cfg = GenConfig::new(42, Layer::M);
        let a = Gen::new(cfg.seed).subject(&cfg);
        let b = Gen::new(cfg.seed).subject(&cfg);
        assert_eq!(a.term, b.term);
        assert_eq!(a.ty, b.ty);
    }

    #[test]
    fn lsubst_against_one_nat_entry_uses_the_empty_base() {
        let mut g = Gen::new(3);
        let env = Env::new(vec![], GlobalCtx::new());
        let target = LocalCtx::empty().push(nm("x"), Type::Nat, Level::Zero);
        let d = g.gen_lsubst(&env, Layer::C, &target, 1).unwrap();
        assert_eq!(d.base, LsBase::Empty { g: None, k: 0 });
        assert_eq!(d.entries.len(), 1);
        g.checker.check_lsubst(&env, Layer::C, &d, &target).unwrap();
    }
}
