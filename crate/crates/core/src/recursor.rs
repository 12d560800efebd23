//! Signatures of the code recursor cases.
//!
//! Each case of the type- and term-code recursors introduces level
//! variables, global variables standing for the parts of the inspected
//! code, and one local variable per recursive call. A [`BranchSig`]
//! records all of these in de Bruijn form, independent of any surrounding
//! context, so that typing, convertibility and reduction share a single
//! description of every case.

use crate::subst::{
    shift_globals, shift_levels, shift_locals, subst_top_globals, subst_top_levels,
    subst_top_locals, Depth, Action, Syn, SubstError,
};
use crate::syntax::*;
use crate::ulevel::Level;

/// A code together with the data needed to instantiate a motive at it:
/// the level and context of the code and, for term codes, its type.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Desc {
    Typ { level: Level, ctx: LocalCtx, code: Type },
    Trm { level: Level, ctx: LocalCtx, ty: Type, code: Term },
}

impl Syn for Desc {
    fn walk<A: Action>(&self, a: &A, d: Depth) -> Result<Desc, SubstError> {
        if a.touches_locals() {
            return Ok(self.clone());
        }
        let d0 = Depth { locals: 0, ..d };
        Ok(match self {
            Desc::Typ { level, ctx, code } => Desc::Typ {
                level: level.walk(a, d0)?,
                ctx: ctx.walk(a, d0)?,
                code: code.walk(a, d0)?,
            },
            Desc::Trm { level, ctx, ty, code } => Desc::Trm {
                level: level.walk(a, d0)?,
                ctx: ctx.walk(a, d0)?,
                ty: ty.walk(a, d0)?,
                code: code.walk(a, d0)?,
            },
        })
    }
}

/// The binders and typing of one recursor case.
#[derive(Clone, Debug)]
pub struct BranchSig {
    pub kind: BranchKind,
    /// Number of level variables.
    pub levels: usize,
    /// Global bindings, oldest first; the first is always the context
    /// variable `g`.
    pub globals: Vec<GBinding>,
    /// One recursive result per local binder, oldest first.
    pub recs: Vec<Desc>,
    /// The code the case handles, whose motive instance is the type of the
    /// case body.
    pub result: Desc,
}

fn wk(g: usize, k: usize, entries: Vec<Term>) -> LocalSubst {
    LocalSubst { base: LsBase::Wk { g, k }, entries }
}

fn gty(j: usize, d: LocalSubst) -> Type {
    Type::GVar(j, d)
}

fn gtm(j: usize, d: LocalSubst) -> Term {
    Term::GVar(j, d)
}

fn var(j: usize) -> Term {
    Term::LocalVar(j)
}

fn ext(g: usize, x: &str, ty: Type, level: Level) -> LocalCtx {
    LocalCtx::var(g).push(Name::new(x), ty, level)
}

fn typ(ctx: LocalCtx, layer: Layer, level: Level) -> GBinding {
    GBinding::Typ { ctx, layer, level }
}

fn trm(ctx: LocalCtx, layer: Layer, ty: Type, level: Level) -> GBinding {
    GBinding::Trm { ctx, layer, ty, level }
}

/// The signature of a recursor case.
pub fn branch_signature(kind: BranchKind) -> BranchSig {
    use BranchKind as K;
    let l = |i| Level::Var(i);
    let c = Layer::C;
    let (levels, globals, recs, result) = match kind {
        K::Nat => (
            0,
            vec![],
            vec![],
            Desc::Typ { level: Level::Zero, ctx: LocalCtx::var(0), code: Type::Nat },
        ),
        K::Pi => {
            // ℓ = 1, ℓ' = 0; globals g = 2, U_S = 1, U_T = 0.
            let us = gty(1, wk(2, 0, vec![]));
            let ut = gty(0, wk(2, 1, vec![var(0)]));
            (
                2,
                vec![
                    typ(LocalCtx::var(0), c, l(1)),
                    typ(ext(1, "x", gty(0, wk(1, 0, vec![])), l(1)), c, l(0)),
                ],
                vec![
                    Desc::Typ { level: l(1), ctx: LocalCtx::var(2), code: us.clone() },
                    Desc::Typ { level: l(0), ctx: ext(2, "x", us.clone(), l(1)), code: ut.clone() },
                ],
                Desc::Typ {
                    level: l(1).lub(l(0)),
                    ctx: LocalCtx::var(2),
                    code: Type::Pi(l(1), l(0), Name::new("x"), Box::new(us), Box::new(ut)),
                },
            )
        }
        K::Ty => (
            1,
            vec![],
            vec![],
            Desc::Typ { level: l(0).succ(), ctx: LocalCtx::var(0), code: Type::Ty(l(0)) },
        ),
        K::El => {
            // g = 1, u_t = 0.
            let ut = gtm(0, wk(1, 0, vec![]));
            (
                1,
                vec![trm(LocalCtx::var(0), c, Type::Ty(l(0)), l(0).succ())],
                vec![Desc::Trm {
                    level: l(0).succ(),
                    ctx: LocalCtx::var(1),
                    ty: Type::Ty(l(0)),
                    code: ut.clone(),
                }],
                Desc::Typ { level: l(0), ctx: LocalCtx::var(1), code: Type::el(l(0), ut) },
            )
        }
        K::Var => (
            // g = 2, U_T = 1, u_x = 0.
            1,
            vec![
                typ(LocalCtx::var(0), Layer::D, l(0)),
                trm(LocalCtx::var(1), Layer::V, gty(0, wk(1, 0, vec![])), l(0)),
            ],
            vec![],
            Desc::Trm {
                level: l(0),
                ctx: LocalCtx::var(2),
                ty: gty(1, wk(2, 0, vec![])),
                code: gtm(0, wk(2, 0, vec![])),
            },
        ),
        K::NatCode => (
            0,
            vec![],
            vec![],
            Desc::Trm {
                level: Level::nat(1),
                ctx: LocalCtx::var(0),
                ty: Type::Ty(Level::Zero),
                code: Term::NatCode,
            },
        ),
        K::PiCode => {
            // ℓ = 1, ℓ' = 0; g = 2, u_s = 1, u_t = 0.
            let us = gtm(1, wk(2, 0, vec![]));
            let ut = gtm(0, wk(2, 1, vec![var(0)]));
            (
                2,
                vec![
                    trm(LocalCtx::var(0), c, Type::Ty(l(1)), l(1).succ()),
                    trm(
                        ext(1, "x", Type::el(l(1), gtm(0, wk(1, 0, vec![]))), l(1)),
                        c,
                        Type::Ty(l(0)),
                        l(0).succ(),
                    ),
                ],
                vec![
                    Desc::Trm {
                        level: l(1).succ(),
                        ctx: LocalCtx::var(2),
                        ty: Type::Ty(l(1)),
                        code: us.clone(),
                    },
                    Desc::Trm {
                        level: l(0).succ(),
                        ctx: ext(2, "x", Type::el(l(1), us.clone()), l(1)),
                        ty: Type::Ty(l(0)),
                        code: ut.clone(),
                    },
                ],
                Desc::Trm {
                    level: l(1).lub(l(0)).succ(),
                    ctx: LocalCtx::var(2),
                    ty: Type::Ty(l(1).lub(l(0))),
                    code: Term::PiCode(l(1), l(0), Name::new("x"), Box::new(us), Box::new(ut)),
                },
            )
        }
        K::TyCode => (
            1,
            vec![],
            vec![],
            Desc::Trm {
                level: l(0).plus(2),
                ctx: LocalCtx::var(0),
                ty: Type::Ty(l(0).succ()),
                code: Term::TyCode(l(0)),
            },
        ),
        K::Zero => (
            0,
            vec![],
            vec![],
            Desc::Trm { level: Level::Zero, ctx: LocalCtx::var(0), ty: Type::Nat, code: Term::Zero },
        ),
        K::Succ => {
            // g = 1, u_t = 0.
            let ut = gtm(0, wk(1, 0, vec![]));
            (
                0,
                vec![trm(LocalCtx::var(0), c, Type::Nat, Level::Zero)],
                vec![Desc::Trm {
                    level: Level::Zero,
                    ctx: LocalCtx::var(1),
                    ty: Type::Nat,
                    code: ut.clone(),
                }],
                Desc::Trm {
                    level: Level::Zero,
                    ctx: LocalCtx::var(1),
                    ty: Type::Nat,
                    code: Term::succ(ut),
                },
            )
        }
        K::ElimNat => {
            // g = 4, U_M = 3, u_s = 2, u_s' = 1, u_t = 0.
            let m_x = gty(3, wk(4, 1, vec![var(0)]));
            let gx = ext(4, "x", Type::Nat, Level::Zero);
            let gxy = gx.clone().push(Name::new("y"), m_x.clone(), l(0));
            let ut = gtm(0, wk(4, 0, vec![]));
            let s2 = gtm(1, wk(4, 2, vec![var(1), var(0)]));
            (
                1,
                vec![
                    typ(ext(0, "x", Type::Nat, Level::Zero), c, l(0)),
                    trm(LocalCtx::var(1), c, gty(0, wk(1, 0, vec![Term::Zero])), l(0)),
                    trm(
                        ext(2, "x", Type::Nat, Level::Zero).push(
                            Name::new("y"),
                            gty(1, wk(2, 1, vec![var(0)])),
                            l(0),
                        ),
                        c,
                        gty(1, wk(2, 2, vec![Term::succ(var(1))])),
                        l(0),
                    ),
                    trm(LocalCtx::var(3), c, Type::Nat, Level::Zero),
                ],
                vec![
                    Desc::Typ { level: l(0), ctx: gx, code: m_x.clone() },
                    Desc::Trm {
                        level: l(0),
                        ctx: LocalCtx::var(4),
                        ty: gty(3, wk(4, 0, vec![Term::Zero])),
                        code: gtm(2, wk(4, 0, vec![])),
                    },
                    Desc::Trm {
                        level: l(0),
                        ctx: gxy,
                        ty: gty(3, wk(4, 2, vec![Term::succ(var(1))])),
                        code: s2.clone(),
                    },
                    Desc::Trm {
                        level: Level::Zero,
                        ctx: LocalCtx::var(4),
                        ty: Type::Nat,
                        code: ut.clone(),
                    },
                ],
                Desc::Trm {
                    level: l(0),
                    ctx: LocalCtx::var(4),
                    ty: gty(3, wk(4, 0, vec![ut.clone()])),
                    code: Term::ElimNat(
                        l(0),
                        Box::new(m_x),
                        Box::new(gtm(2, wk(4, 0, vec![]))),
                        Box::new(s2),
                        Box::new(ut),
                    ),
                },
            )
        }
        K::Lam => {
            // ℓ = 1, ℓ' = 0; g = 3, U_S = 2, U_T = 1, u_t = 0.
            let s = gty(2, wk(3, 0, vec![]));
            let t = gty(1, wk(3, 1, vec![var(0)]));
            let body = gtm(0, wk(3, 1, vec![var(0)]));
            (
                2,
                vec![
                    typ(LocalCtx::var(0), c, l(1)),
                    typ(ext(1, "x", gty(0, wk(1, 0, vec![])), l(1)), Layer::D, l(0)),
                    trm(
                        ext(2, "x", gty(1, wk(2, 0, vec![])), l(1)),
                        c,
                        gty(0, wk(2, 1, vec![var(0)])),
                        l(0),
                    ),
                ],
                vec![
                    Desc::Typ { level: l(1), ctx: LocalCtx::var(3), code: s.clone() },
                    Desc::Trm {
                        level: l(0),
                        ctx: ext(3, "x", s.clone(), l(1)),
                        ty: t.clone(),
                        code: body.clone(),
                    },
                ],
                Desc::Trm {
                    level: l(1).lub(l(0)),
                    ctx: LocalCtx::var(3),
                    ty: Type::Pi(l(1), l(0), Name::new("x"), Box::new(s.clone()), Box::new(t)),
                    code: Term::Lam(l(1), l(0), Name::new("x"), Box::new(s), Box::new(body)),
                },
            )
        }
        K::App => {
            // ℓ = 1, ℓ' = 0; g = 4, U_S = 3, U_T = 2, u_t = 1, u_s = 0.
            let s = gty(3, wk(4, 0, vec![]));
            let t = gty(2, wk(4, 1, vec![var(0)]));
            let pi = Type::Pi(l(1), l(0), Name::new("x"), Box::new(s.clone()), Box::new(t.clone()));
            let f = gtm(1, wk(4, 0, vec![]));
            let a = gtm(0, wk(4, 0, vec![]));
            (
                2,
                vec![
                    typ(LocalCtx::var(0), c, l(1)),
                    typ(ext(1, "x", gty(0, wk(1, 0, vec![])), l(1)), c, l(0)),
                    trm(
                        LocalCtx::var(2),
                        c,
                        Type::Pi(
                            l(1),
                            l(0),
                            Name::new("x"),
                            Box::new(gty(1, wk(2, 0, vec![]))),
                            Box::new(gty(0, wk(2, 1, vec![var(0)]))),
                        ),
                        l(1).lub(l(0)),
                    ),
                    trm(LocalCtx::var(3), c, gty(2, wk(3, 0, vec![])), l(1)),
                ],
                vec![
                    Desc::Typ { level: l(1), ctx: LocalCtx::var(4), code: s.clone() },
                    Desc::Typ { level: l(0), ctx: ext(4, "x", s.clone(), l(1)), code: t.clone() },
                    Desc::Trm {
                        level: l(1).lub(l(0)),
                        ctx: LocalCtx::var(4),
                        ty: pi,
                        code: f.clone(),
                    },
                    Desc::Trm { level: l(1), ctx: LocalCtx::var(4), ty: s.clone(), code: a.clone() },
                ],
                Desc::Trm {
                    level: l(0),
                    ctx: LocalCtx::var(4),
                    ty: gty(2, wk(4, 0, vec![a.clone()])),
                    code: Term::App(
                        Box::new(f),
                        l(1),
                        l(0),
                        Name::new("x"),
                        Box::new(s),
                        Box::new(t),
                        Box::new(a),
                    ),
                },
            )
        }
    };
    let mut all = vec![GBinding::Ctx];
    all.extend(globals);
    BranchSig { kind, levels, globals: all, recs, result }
}

/// `M_Typ[l/ℓ, Δ/g, scrut/x_T]` or `M_Trm[l/ℓ, Δ/g, T/U_T, scrut/x_t]`,
/// for a motive written outside a recursor case and used inside one that
/// binds `extra_levels` level and `extra_globals` global variables.
pub fn motive_instance(
    motives: &Motives,
    extra_levels: usize,
    extra_globals: usize,
    desc_level: &Level,
    ctx: &LocalCtx,
    ty: Option<&Type>,
    scrut: &Term,
) -> Result<Type, SubstError> {
    let (m, bound_globals, entries) = match ty {
        None => (&motives.typ, 1, vec![GEntry::Ctx(ctx.clone())]),
        Some(t) => (&motives.trm, 2, vec![GEntry::Ctx(ctx.clone()), GEntry::Typ(t.clone())]),
    };
    let m = shift_levels(m, 1, extra_levels);
    let m = shift_globals(&m, bound_globals, extra_globals);
    let m = subst_top_levels(&m, std::slice::from_ref(desc_level));
    let m = subst_top_globals(&m, &entries)?;
    Ok(subst_top_locals(&m, std::slice::from_ref(scrut)))
}

/// The motive instance at a code description, with the code boxed.
pub fn desc_instance(
    motives: &Motives,
    extra_levels: usize,
    extra_globals: usize,
    desc: &Desc,
) -> Result<Type, SubstError> {
    match desc {
        Desc::Typ { level, ctx, code } => motive_instance(
            motives,
            extra_levels,
            extra_globals,
            level,
            ctx,
            None,
            &Term::BoxTy(Box::new(code.clone())),
        ),
        Desc::Trm { level, ctx, ty, code } => motive_instance(
            motives,
            extra_levels,
            extra_globals,
            level,
            ctx,
            Some(ty),
            &Term::BoxTm(Box::new(code.clone())),
        ),
    }
}

/// The local bindings a case body is checked under: one per recursive
/// call, typed by the motive instance at the recursive code. Levels are
/// `l1` for type codes and `l2` for term codes, already moved under the
/// case's level binders.
pub fn rec_bindings(
    motives: &Motives,
    sig: &BranchSig,
    l1: &Level,
    l2: &Level,
) -> Result<Vec<(Type, Level)>, SubstError> {
    let e = sig.globals.len();
    sig.recs
        .iter()
        .enumerate()
        .map(|(j, d)| {
            let t = desc_instance(motives, sig.levels, e, d)?;
            let lvl = match d {
                Desc::Typ { .. } => l1,
                Desc::Trm { .. } => l2,
            };
            Ok((shift_locals(&t, 0, j), shift_levels(lvl, 0, sig.levels)))
        })
        .collect()
}

/// The type a case body is checked against, under all its binders.
pub fn result_type(
    motives: &Motives,
    sig: &BranchSig,
    l1: &Level,
    l2: &Level,
) -> Result<(Type, Level), SubstError> {
    let t = desc_instance(motives, sig.levels, sig.globals.len(), &sig.result)?;
    let lvl = match sig.result {
        Desc::Typ { .. } => l1,
        Desc::Trm { .. } => l2,
    };
    Ok((shift_locals(&t, 0, sig.recs.len()), shift_levels(lvl, 0, sig.levels)))
}

/// A recursive call on a code description.
pub fn rec_call(l1: &Level, l2: &Level, ms: &Motives, bs: &Branches, desc: Desc) -> Term {
    match desc {
        Desc::Typ { level, ctx, code } => Term::ElimTyp(
            l1.clone(),
            l2.clone(),
            Box::new(ms.clone()),
            Box::new(bs.clone()),
            level,
            ctx,
            Box::new(Term::BoxTy(Box::new(code))),
        ),
        Desc::Trm { level, ctx, ty, code } => Term::ElimTrm(
            l1.clone(),
            l2.clone(),
            Box::new(ms.clone()),
            Box::new(bs.clone()),
            level,
            ctx,
            Box::new(ty),
            Box::new(Term::BoxTm(Box::new(code))),
        ),
    }
}

/// Instantiate a case: the body with its level and global binders
/// replaced and one recursive call per local binder.
pub fn instantiate_branch(
    l1: &Level,
    l2: &Level,
    ms: &Motives,
    bs: &Branches,
    kind: BranchKind,
    levels: &[Level],
    globals: &[GEntry],
) -> Result<Term, SubstError> {
    let sig = branch_signature(kind);
    let recs = sig
        .recs
        .iter()
        .map(|d| {
            let d = subst_top_levels(d, levels);
            let d = subst_top_globals(&d, globals)?;
            Ok(rec_call(l1, l2, ms, bs, d))
        })
        .collect::<Result<Vec<_>, SubstError>>()?;
    let body = &bs.get(kind).body;
    let body = subst_top_levels(body, levels);
    let body = subst_top_globals(&body, globals)?;
    Ok(subst_top_locals(&body, &recs))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn signatures_match_arities() {
        for k in BranchKind::ALL {
            let s = branch_signature(k);
            assert_eq!((s.levels, s.globals.len(), s.recs.len()), k.arity(), "{k:?}");
            assert_eq!(matches!(s.result, Desc::Typ { .. }), k.is_type_case(), "{k:?}");
        }
    }
}
