//! Type-directed convertibility at layers `d` and `m`.
//!
//! Both sides are put in weak-head normal form and compared structurally.
//! At function types, level and context quantifiers both sides are
//! η-expanded; at code types two boxes agree when their contents are equal
//! up to renaming and level normalisation. Neutral terms are compared
//! spine-wise, each step returning the type of the neutral so that
//! arguments can be compared at it.

use crate::recursor::motive_instance;
use crate::subst::{
    gctx_lookup, lctx_lookup, lsubst_apply, normalize_levels, shift_globals, shift_levels,
    shift_locals, subst_top_globals, subst_top_levels, subst_top_locals, Syn,
};
use crate::syntax::*;
use crate::typing::{
    branch_env, lvl_eq, motive_at_succ, motive_trm_env, motive_typ_env, require_m, subst_err,
    Checker, Diagnostic, Env, ErrorKind, TcResult,
};
use crate::ulevel::Level;

/// Syntactic equality after normalising every level. Binder names never
/// matter, since [`Name`] equality ignores them.
pub fn alpha_eq_mod_levels<S: Syn + PartialEq>(a: &S, b: &S) -> bool {
    normalize_levels(a) == normalize_levels(b)
}

fn mismatch(env: &Env, what: &str, a: String, b: String) -> Diagnostic {
    let _ = env;
    Diagnostic::new("conv", ErrorKind::Mismatch, format!("{what} are not convertible")).with_forms(a, b)
}

fn ty_mismatch(env: &Env, a: &Type, b: &Type) -> Diagnostic {
    let p = env.printer();
    mismatch(env, "types", p.ty(a), p.ty(b))
}

fn tm_mismatch(env: &Env, a: &Term, b: &Term) -> Diagnostic {
    let p = env.printer();
    mismatch(env, "terms", p.tm(a), p.tm(b))
}

fn same_levels(env: &Env, a: &[&Level], b: &[&Level]) -> TcResult<()> {
    for (x, y) in a.iter().zip(b) {
        lvl_eq(env, "conv", x, y)?;
    }
    Ok(())
}

impl Checker {
    /// `Ψ; Γ ⊢_i T ≈ T'`.
    pub fn conv_type(&self, env: &Env, i: Layer, a: &Type, b: &Type) -> TcResult<()> {
        let a = self.whnf_ty(a)?;
        let b = self.whnf_ty(b)?;
        match (&a, &b) {
            (Type::Nat, Type::Nat) => Ok(()),
            (Type::Ty(l), Type::Ty(l2)) => lvl_eq(env, "conv", l, l2),
            (Type::Pi(l1, l2, x, s, t), Type::Pi(m1, m2, _, s2, t2)) => {
                same_levels(env, &[l1, l2], &[m1, m2])?;
                self.conv_type(env, i, s, s2)?;
                self.conv_type(&env.push_local(x.clone(), (**s).clone(), l1.clone()), i, t, t2)
            }
            (Type::UPi(ns, l, t), Type::UPi(ns2, l2, t2)) if ns.len() == ns2.len() => {
                require_m("conv", i)?;
                let env2 = env.push_levels(ns);
                lvl_eq(&env2, "conv", l, l2)?;
                self.conv_type(&env2, i, t, t2)
            }
            (Type::El(l, x), Type::El(l2, y)) => {
                lvl_eq(env, "conv", l, l2)?;
                self.conv_term(env, i, x, y, &Type::Ty(l.clone()))
            }
            (Type::GVar(j, d), Type::GVar(j2, d2)) if j == j2 => match gctx_lookup(&env.globals, *j) {
                Some((_, GBinding::Typ { ctx, .. })) => self.conv_lsubst(env, i, d, d2, &ctx),
                _ => Err(Diagnostic::new("conv", ErrorKind::Scope, "not a global type variable")),
            },
            (Type::CtxPi(g, l, t), Type::CtxPi(_, l2, t2)) => {
                require_m("conv", i)?;
                lvl_eq(env, "conv", l, l2)?;
                self.conv_type(&env.push_global(g.clone(), GBinding::Ctx), i, t, t2)
            }
            (Type::TyPi(u, c, l1, l2, t), Type::TyPi(_, c2, m1, m2, t2)) => {
                require_m("conv", i)?;
                self.conv_ctx(env, Layer::D, c, c2)?;
                same_levels(env, &[l1, l2], &[m1, m2])?;
                let b = GBinding::Typ { ctx: c.clone(), layer: Layer::D, level: l1.clone() };
                self.conv_type(&env.push_global(u.clone(), b), i, t, t2)
            }
            (Type::CodeTy(c, l), Type::CodeTy(c2, l2)) => {
                require_m("conv", i)?;
                self.conv_ctx(env, Layer::D, c, c2)?;
                lvl_eq(env, "conv", l, l2)
            }
            (Type::CodeTm(c, t, l), Type::CodeTm(c2, t2, l2)) => {
                require_m("conv", i)?;
                self.conv_ctx(env, Layer::D, c, c2)?;
                lvl_eq(env, "conv", l, l2)?;
                self.conv_type(&env.with_locals(c.clone()), Layer::D, t, t2)
            }
            _ => Err(ty_mismatch(env, &a, &b)),
        }
    }

    /// `Ψ ⊢_i Γ ≈ Δ`.
    pub fn conv_ctx(&self, env: &Env, i: Layer, a: &LocalCtx, b: &LocalCtx) -> TcResult<()> {
        if a.base != b.base || a.len() != b.len() {
            let p = env.printer();
            return Err(mismatch(env, "contexts", p.ctx_shape(a), p.ctx_shape(b)));
        }
        for (p, (x, y)) in a.entries.iter().zip(&b.entries).enumerate() {
            lvl_eq(env, "conv", &x.level, &y.level)?;
            self.conv_type(&env.with_locals(a.prefix(p)), i, &x.ty, &y.ty)?;
        }
        Ok(())
    }

    /// `Ψ; Γ ⊢_i δ ≈ δ' : Δ`.
    pub fn conv_lsubst(
        &self,
        env: &Env,
        i: Layer,
        a: &LocalSubst,
        b: &LocalSubst,
        target: &LocalCtx,
    ) -> TcResult<()> {
        if a.base != b.base || a.entries.len() != b.entries.len() || a.entries.len() != target.len() {
            let p = env.printer();
            return Err(mismatch(env, "substitution bases", p.ls_base(&a.base), p.ls_base(&b.base)));
        }
        for (p, e) in target.entries.iter().enumerate() {
            let ty = lsubst_apply(&e.ty, &a.prefix(p)).map_err(|e| subst_err("conv", e))?;
            self.conv_term(env, i, &a.entries[p], &b.entries[p], &ty)?;
        }
        Ok(())
    }

    /// `Ψ; Γ ⊢_i t ≈ t' : T`.
    pub fn conv_term(&self, env: &Env, i: Layer, a: &Term, b: &Term, ty: &Type) -> TcResult<()> {
        match self.whnf_ty(ty)? {
            Type::Pi(l1, l2, x, s, t) => {
                let eta = |f: &Term| {
                    Term::App(
                        Box::new(shift_locals(f, 0, 1)),
                        l1.clone(),
                        l2.clone(),
                        x.clone(),
                        Box::new(shift_locals(&*s, 0, 1)),
                        Box::new(shift_locals(&*t, 1, 1)),
                        Box::new(Term::LocalVar(0)),
                    )
                };
                let env2 = env.push_local(x.clone(), (*s).clone(), l1.clone());
                self.conv_term(&env2, i, &eta(a), &eta(b), &t)
            }
            Type::UPi(ns, _, t) => {
                let n = ns.len();
                let args: Vec<Level> = (0..n).rev().map(Level::Var).collect();
                let eta = |f: &Term| Term::UApp(Box::new(shift_levels(f, 0, n)), args.clone());
                self.conv_term(&env.push_levels(&ns), i, &eta(a), &eta(b), &t)
            }
            Type::CtxPi(g, _, t) => {
                let eta = |f: &Term| Term::CtxApp(Box::new(shift_globals(f, 0, 1)), LocalCtx::var(0));
                self.conv_term(&env.push_global(g, GBinding::Ctx), i, &eta(a), &eta(b), &t)
            }
            Type::TyPi(u, c, l, _, t) => {
                let arg = Type::GVar(0, lid(&shift_globals(&c, 0, 1)));
                let eta = |f: &Term| Term::TyApp(Box::new(shift_globals(f, 0, 1)), Box::new(arg.clone()));
                let env2 = env.push_global(u, GBinding::Typ { ctx: c, layer: Layer::D, level: l });
                self.conv_term(&env2, i, &eta(a), &eta(b), &t)
            }
            Type::Nat => {
                let a = self.whnf_tm(a)?;
                let b = self.whnf_tm(b)?;
                match (&a, &b) {
                    (Term::Zero, Term::Zero) => Ok(()),
                    (Term::Succ(x), Term::Succ(y)) => self.conv_term(env, i, x, y, &Type::Nat),
                    _ => self.conv_neutral_pair(env, i, &a, &b),
                }
            }
            Type::Ty(_) => {
                let a = self.whnf_tm(a)?;
                let b = self.whnf_tm(b)?;
                match (&a, &b) {
                    (Term::NatCode, Term::NatCode) => Ok(()),
                    (Term::TyCode(l), Term::TyCode(l2)) => lvl_eq(env, "conv", l, l2),
                    (Term::PiCode(l1, l2, x, s, t), Term::PiCode(m1, m2, _, s2, t2)) => {
                        same_levels(env, &[l1, l2], &[m1, m2])?;
                        self.conv_term(env, i, s, s2, &Type::Ty(l1.clone()))?;
                        let env2 = env.push_local(x.clone(), Type::El(l1.clone(), s.clone()), l1.clone());
                        self.conv_term(&env2, i, t, t2, &Type::Ty(l2.clone()))
                    }
                    _ => self.conv_neutral_pair(env, i, &a, &b),
                }
            }
            Type::CodeTy(..) | Type::CodeTm(..) => {
                let a = self.whnf_tm(a)?;
                let b = self.whnf_tm(b)?;
                let same = match (&a, &b) {
                    (Term::BoxTy(x), Term::BoxTy(y)) => alpha_eq_mod_levels(&**x, &**y),
                    (Term::BoxTm(x), Term::BoxTm(y)) => alpha_eq_mod_levels(&**x, &**y),
                    _ => return self.conv_neutral_pair(env, i, &a, &b),
                };
                if same {
                    Ok(())
                } else {
                    Err(tm_mismatch(env, &a, &b))
                }
            }
            _ => {
                let a = self.whnf_tm(a)?;
                let b = self.whnf_tm(b)?;
                self.conv_neutral_pair(env, i, &a, &b)
            }
        }
    }

    fn conv_neutral_pair(&self, env: &Env, i: Layer, a: &Term, b: &Term) -> TcResult<()> {
        self.conv_ne(env, i, a, b).map(|_| ()).map_err(|d| {
            if d.expected.is_none() {
                let p = env.printer();
                d.with_forms(p.tm(a), p.tm(b))
            } else {
                d
            }
        })
    }

    /// `Ψ; Γ ⊢_i v ≈ v' : T @ l` for neutral terms in weak-head normal form,
    /// returning the type and level of the left-hand side.
    pub fn conv_ne(&self, env: &Env, i: Layer, a: &Term, b: &Term) -> TcResult<(Type, Level)> {
        let fail = || Err(tm_mismatch(env, a, b));
        match (a, b) {
            (Term::LocalVar(j), Term::LocalVar(j2)) if j == j2 => match lctx_lookup(&env.locals, *j) {
                Some((_, t, l)) => Ok((t, l)),
                None => Err(Diagnostic::new("conv", ErrorKind::Scope, "unbound local variable")),
            },
            (Term::GVar(j, d), Term::GVar(j2, d2)) if j == j2 => match gctx_lookup(&env.globals, *j) {
                Some((_, GBinding::Trm { ctx, ty, level, .. })) => {
                    self.conv_lsubst(env, i, d, d2, &ctx)?;
                    let ty = lsubst_apply(&ty, d).map_err(|e| subst_err("conv", e))?;
                    Ok((ty, level))
                }
                _ => Err(Diagnostic::new("conv", ErrorKind::Scope, "not a global term variable")),
            },
            (Term::ElimNat(l, m, s, s2, n), Term::ElimNat(l2, m2, t, t2, n2)) => {
                lvl_eq(env, "conv", l, l2)?;
                let envx = env.push_local(Name::new("x"), Type::Nat, Level::Zero);
                self.conv_type(&envx, i, m, m2)?;
                self.conv_term(env, i, s, t, &subst_top_locals(&**m, &[Term::Zero]))?;
                let envxy = envx.push_local(Name::new("y"), (**m).clone(), l.clone());
                self.conv_term(&envxy, i, s2, t2, &motive_at_succ(m))?;
                self.conv_ne(env, i, n, n2)?;
                Ok((subst_top_locals(&**m, &[(**n).clone()]), l.clone()))
            }
            (Term::App(f, l1, l2, x, s, t, u), Term::App(f2, m1, m2, _, s2, t2, u2)) => {
                same_levels(env, &[l1, l2], &[m1, m2])?;
                self.conv_type(env, i, s, s2)?;
                self.conv_type(&env.push_local(x.clone(), (**s).clone(), l1.clone()), i, t, t2)?;
                self.conv_ne(env, i, f, f2)?;
                self.conv_term(env, i, u, u2, s)?;
                Ok((subst_top_locals(&**t, &[(**u).clone()]), l2.clone()))
            }
            (Term::UApp(f, ls), Term::UApp(f2, ls2)) if ls.len() == ls2.len() => {
                require_m("conv", i)?;
                let (fty, _) = self.conv_ne(env, i, f, f2)?;
                for (x, y) in ls.iter().zip(ls2) {
                    lvl_eq(env, "conv", x, y)?;
                }
                match self.whnf_ty(&fty)? {
                    Type::UPi(_, l, t) => Ok((subst_top_levels(&*t, ls), subst_top_levels(&l, ls))),
                    _ => fail(),
                }
            }
            (Term::CtxApp(f, c), Term::CtxApp(f2, c2)) => {
                require_m("conv", i)?;
                let (fty, _) = self.conv_ne(env, i, f, f2)?;
                self.conv_ctx(env, Layer::D, c, c2)?;
                match self.whnf_ty(&fty)? {
                    Type::CtxPi(_, l, t) => {
                        let r = subst_top_globals(&*t, &[GEntry::Ctx(c.clone())])
                            .map_err(|e| subst_err("conv", e))?;
                        Ok((r, l))
                    }
                    _ => fail(),
                }
            }
            (Term::TyApp(f, t), Term::TyApp(f2, t2)) => {
                require_m("conv", i)?;
                let (fty, _) = self.conv_ne(env, i, f, f2)?;
                match self.whnf_ty(&fty)? {
                    Type::TyPi(_, c, _, l2, body) => {
                        self.conv_type(&env.with_locals(c), Layer::D, t, t2)?;
                        let r = subst_top_globals(&*body, &[GEntry::Typ((**t).clone())])
                            .map_err(|e| subst_err("conv", e))?;
                        Ok((r, l2))
                    }
                    _ => fail(),
                }
            }
            (Term::LetBoxTy(l2, l, c, m, u, body, s), Term::LetBoxTy(k2, k, c2, m2, _, body2, s2)) => {
                require_m("conv", i)?;
                same_levels(env, &[l2, l], &[k2, k])?;
                self.conv_ctx(env, Layer::D, c, c2)?;
                let code_ty = Type::CodeTy(c.clone(), l.clone());
                let envx = env.push_local(Name::new("x"), code_ty, Level::Zero);
                self.conv_type(&envx, i, m, m2)?;
                self.conv_ne(env, i, s, s2)?;
                let b = GBinding::Typ { ctx: c.clone(), layer: Layer::C, level: l.clone() };
                let uvar = Type::GVar(0, lid(&shift_globals(c, 0, 1)));
                let m_u = subst_top_locals(&shift_globals(&**m, 0, 1), &[Term::BoxTy(Box::new(uvar))]);
                self.conv_term(&env.push_global(u.clone(), b), i, body, body2, &m_u)?;
                Ok((subst_top_locals(&**m, &[(**s).clone()]), l2.clone()))
            }
            (
                Term::LetBoxTm(l2, l, c, t, m, u, body, s),
                Term::LetBoxTm(k2, k, c2, t2, m2, _, body2, s2),
            ) => {
                require_m("conv", i)?;
                same_levels(env, &[l2, l], &[k2, k])?;
                self.conv_ctx(env, Layer::D, c, c2)?;
                self.conv_type(&env.with_locals(c.clone()), Layer::D, t, t2)?;
                let code_ty = Type::CodeTm(c.clone(), t.clone(), l.clone());
                let envx = env.push_local(Name::new("x"), code_ty, Level::Zero);
                self.conv_type(&envx, i, m, m2)?;
                self.conv_ne(env, i, s, s2)?;
                let b = GBinding::Trm { ctx: c.clone(), layer: Layer::C, ty: (**t).clone(), level: l.clone() };
                let uvar = Term::GVar(0, lid(&shift_globals(c, 0, 1)));
                let m_u = subst_top_locals(&shift_globals(&**m, 0, 1), &[Term::BoxTm(Box::new(uvar))]);
                self.conv_term(&env.push_global(u.clone(), b), i, body, body2, &m_u)?;
                Ok((subst_top_locals(&**m, &[(**s).clone()]), l2.clone()))
            }
            (Term::ElimTyp(l1, l2, ms, bs, l, c, s), Term::ElimTyp(k1, k2, ms2, bs2, k, c2, s2)) => {
                require_m("conv", i)?;
                self.conv_recursor(env, [l1, l2], [k1, k2], ms, ms2, bs, bs2)?;
                lvl_eq(env, "conv", l, k)?;
                self.conv_ctx(env, Layer::D, c, c2)?;
                // A scrutinee is either neutral or a box of a global variable.
                self.conv_term(env, i, s, s2, &Type::CodeTy(c.clone(), l.clone()))?;
                let r = motive_instance(ms, 0, 0, l, c, None, s).map_err(|e| subst_err("conv", e))?;
                Ok((r, l1.clone()))
            }
            (
                Term::ElimTrm(l1, l2, ms, bs, l, c, t, s),
                Term::ElimTrm(k1, k2, ms2, bs2, k, c2, t2, s2),
            ) => {
                require_m("conv", i)?;
                self.conv_recursor(env, [l1, l2], [k1, k2], ms, ms2, bs, bs2)?;
                lvl_eq(env, "conv", l, k)?;
                self.conv_ctx(env, Layer::D, c, c2)?;
                self.conv_type(&env.with_locals(c.clone()), Layer::D, t, t2)?;
                self.conv_term(env, i, s, s2, &Type::CodeTm(c.clone(), t.clone(), l.clone()))?;
                let r = motive_instance(ms, 0, 0, l, c, Some(t), s).map_err(|e| subst_err("conv", e))?;
                Ok((r, l2.clone()))
            }
            _ => fail(),
        }
    }

    /// Motives and cases of two recursors.
    #[allow(clippy::too_many_arguments)]
    fn conv_recursor(
        &self,
        env: &Env,
        ls: [&Level; 2],
        ks: [&Level; 2],
        ms: &Motives,
        ms2: &Motives,
        bs: &Branches,
        bs2: &Branches,
    ) -> TcResult<()> {
        same_levels(env, &ls, &ks)?;
        let (env_t, _) = motive_typ_env(env, ms, ls[0]);
        self.conv_type(&env_t, Layer::M, &ms.typ, &ms2.typ)?;
        let (env_m, _) = motive_trm_env(env, ms, ls[1]);
        self.conv_type(&env_m, Layer::M, &ms.trm, &ms2.trm)?;
        for (k, b) in bs.iter() {
            let (env_b, rty, _) = branch_env(env, ms, ls[0], ls[1], k, &b.binders)?;
            self.conv_term(&env_b, Layer::M, &b.body, &bs2.get(k).body, &rty)
                .map_err(|d| Diagnostic { message: format!("{} (in case {})", d.message, k.keyword()), ..d })?;
        }
        Ok(())
    }

    /// Whether two types are convertible.
    pub fn types_convertible(&self, env: &Env, i: Layer, a: &Type, b: &Type) -> bool {
        self.conv_type(env, i, a, b).is_ok()
    }

    /// Whether two terms are convertible at a type.
    pub fn terms_convertible(&self, env: &Env, i: Layer, a: &Term, b: &Term, ty: &Type) -> bool {
        self.conv_term(env, i, a, b, ty).is_ok()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn env() -> Env {
        Env::new(vec![], GlobalCtx::new())
    }

    #[test]
    fn nat_context_matches_decoded_nat_code() {
        let c = Checker::default();
        let a = LocalCtx::empty().push(Name::new("x"), Type::Nat, Level::Zero);
        let b = LocalCtx::empty().push(Name::new("x"), Type::el(Level::Zero, Term::NatCode), Level::Zero);
        assert!(c.conv_ctx(&env(), Layer::D, &a, &b).is_ok());
    }

    #[test]
    fn eta_for_functions() {
        let c = Checker::default();
        let pi = Type::pi(Level::Zero, Level::Zero, "x", Type::Nat, Type::Nat);
        let f = Term::lam(Level::Zero, Level::Zero, "x", Type::Nat, Term::succ(Term::LocalVar(0)));
        let e = env().push_local(Name::new("f"), pi.clone(), Level::Zero);
        let g = Term::LocalVar(0);
        let eta_g = Term::lam(
            Level::Zero,
            Level::Zero,
            "y",
            Type::Nat,
            Term::App(
                Box::new(Term::LocalVar(1)),
                Level::Zero,
                Level::Zero,
                Name::new("x"),
                Box::new(Type::Nat),
                Box::new(Type::Nat),
                Box::new(Term::LocalVar(0)),
            ),
        );
        assert!(c.terms_convertible(&e, Layer::D, &g, &eta_g, &pi));
        assert!(!c.terms_convertible(&e, Layer::D, &g, &shift_locals(&f, 0, 1), &pi));
    }

    #[test]
    fn boxes_compare_syntactically() {
        let c = Checker::default();
        let code = Type::CodeTm(LocalCtx::empty(), Box::new(Type::Nat), Level::Zero);
        let one = Term::BoxTm(Box::new(Term::numeral(1)));
        let redex = Term::BoxTm(Box::new(Term::ElimNat(
            Level::Zero,
            Box::new(Type::Nat),
            Box::new(Term::numeral(1)),
            Box::new(Term::LocalVar(0)),
            Box::new(Term::Zero),
        )));
        assert!(c.terms_convertible(&env(), Layer::M, &one, &one, &code));
        assert!(!c.terms_convertible(&env(), Layer::M, &one, &redex, &code));
    }
}
