//! Weak-head reduction.
//!
//! Reduction is untyped and deterministic: [`step_term`] and [`step_type`]
//! perform one head step, contracting the head redex or stepping the
//! subterm in head position. [`whnf_term`] and [`whnf_type`] iterate the
//! step functions under a [`Fuel`] budget.

use std::cell::Cell;

use crate::recursor::instantiate_branch;
use crate::subst::{subst_top_globals, subst_top_levels, subst_top_locals, SubstError};
use crate::syntax::*;
use crate::ulevel::Level;

/// Default number of reduction steps before giving up.
pub const DEFAULT_FUEL: u64 = 1_000_000;

/// A budget of reduction steps, shared by every reduction of one check.
#[derive(Debug)]
pub struct Fuel {
    left: Cell<u64>,
    limit: u64,
}

impl Fuel {
    pub fn new(limit: u64) -> Fuel {
        Fuel { left: Cell::new(limit), limit }
    }

    pub fn remaining(&self) -> u64 {
        self.left.get()
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }

    fn tick(&self) -> Result<(), ReduceError> {
        let n = self.left.get();
        if n == 0 {
            return Err(ReduceError::FuelExhausted { limit: self.limit });
        }
        self.left.set(n - 1);
        Ok(())
    }
}

impl Default for Fuel {
    fn default() -> Fuel {
        Fuel::new(DEFAULT_FUEL)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ReduceError {
    #[error("reduction did not finish within {limit} steps")]
    FuelExhausted { limit: u64 },
    #[error("ill-formed redex: {0}")]
    Subst(#[from] SubstError),
}

type R<T> = Result<T, ReduceError>;

fn bx<T>(t: T) -> Box<T> {
    Box::new(t)
}

/// One weak-head step on a type, if any applies.
pub fn step_type(t: &Type) -> R<Option<Type>> {
    Ok(match t {
        Type::El(l, code) => match &**code {
            Term::NatCode => Some(Type::Nat),
            Term::TyCode(l2) => Some(Type::Ty(l2.clone())),
            Term::PiCode(a, b, x, s, body) => Some(Type::Pi(
                a.clone(),
                b.clone(),
                x.clone(),
                bx(Type::El(a.clone(), s.clone())),
                bx(Type::El(b.clone(), body.clone())),
            )),
            other => step_term(other)?.map(|c| Type::El(l.clone(), bx(c))),
        },
        _ => None,
    })
}

/// One weak-head step on a term, if any applies.
pub fn step_term(t: &Term) -> R<Option<Term>> {
    Ok(match t {
        Term::ElimNat(l, m, s, s2, n) => match &**n {
            Term::Zero => Some((**s).clone()),
            Term::Succ(p) => {
                let rec = Term::ElimNat(l.clone(), m.clone(), s.clone(), s2.clone(), p.clone());
                Some(subst_top_locals(&**s2, &[(**p).clone(), rec]))
            }
            other => step_term(other)?
                .map(|n| Term::ElimNat(l.clone(), m.clone(), s.clone(), s2.clone(), bx(n))),
        },
        Term::App(f, l, l2, x, s, ty, arg) => match &**f {
            Term::Lam(_, _, _, _, body) => Some(subst_top_locals(&**body, &[(**arg).clone()])),
            other => step_term(other)?.map(|f| {
                Term::App(bx(f), l.clone(), l2.clone(), x.clone(), s.clone(), ty.clone(), arg.clone())
            }),
        },
        Term::UApp(f, ls) => match &**f {
            Term::ULam(_, ns, body) if ns.len() == ls.len() => Some(subst_top_levels(&**body, ls)),
            Term::ULam(..) => None,
            other => step_term(other)?.map(|f| Term::UApp(bx(f), ls.clone())),
        },
        Term::CtxApp(f, ctx) => match &**f {
            Term::CtxLam(_, _, body) => {
                Some(subst_top_globals(&**body, &[GEntry::Ctx(ctx.clone())])?)
            }
            other => step_term(other)?.map(|f| Term::CtxApp(bx(f), ctx.clone())),
        },
        Term::TyApp(f, ty) => match &**f {
            Term::TyLam(_, _, _, _, body) => {
                Some(subst_top_globals(&**body, &[GEntry::Typ((**ty).clone())])?)
            }
            other => step_term(other)?.map(|f| Term::TyApp(bx(f), ty.clone())),
        },
        Term::LetBoxTy(l2, l, ctx, m, u, body, s) => match &**s {
            Term::BoxTy(code) => Some(subst_top_globals(&**body, &[GEntry::Typ((**code).clone())])?),
            other => step_term(other)?.map(|s| {
                Term::LetBoxTy(l2.clone(), l.clone(), ctx.clone(), m.clone(), u.clone(), body.clone(), bx(s))
            }),
        },
        Term::LetBoxTm(l2, l, ctx, ty, m, u, body, s) => match &**s {
            Term::BoxTm(code) => Some(subst_top_globals(&**body, &[GEntry::Trm((**code).clone())])?),
            other => step_term(other)?.map(|s| {
                Term::LetBoxTm(
                    l2.clone(),
                    l.clone(),
                    ctx.clone(),
                    ty.clone(),
                    m.clone(),
                    u.clone(),
                    body.clone(),
                    bx(s),
                )
            }),
        },
        Term::ElimTyp(l1, l2, ms, bs, l, ctx, s) => match &**s {
            Term::BoxTy(code) => match decompose_type_code(ctx, code) {
                Some((k, levels, globals)) => {
                    Some(instantiate_branch(l1, l2, ms, bs, k, &levels, &globals)?)
                }
                None => None,
            },
            other => step_term(other)?.map(|s| {
                Term::ElimTyp(l1.clone(), l2.clone(), ms.clone(), bs.clone(), l.clone(), ctx.clone(), bx(s))
            }),
        },
        Term::ElimTrm(l1, l2, ms, bs, l, ctx, ty, s) => {
            let rebuild = |ty: Box<Type>, s: Box<Term>| {
                Term::ElimTrm(l1.clone(), l2.clone(), ms.clone(), bs.clone(), l.clone(), ctx.clone(), ty, s)
            };
            if let Some(ty2) = step_type(ty)? {
                return Ok(Some(rebuild(bx(ty2), s.clone())));
            }
            match &**s {
                Term::BoxTm(code) => match decompose_term_code(ctx, ty, l, code) {
                    Some((k, levels, globals)) => {
                        Some(instantiate_branch(l1, l2, ms, bs, k, &levels, &globals)?)
                    }
                    None => None,
                },
                other => step_term(other)?.map(|s| rebuild(ty.clone(), bx(s))),
            }
        }
        _ => None,
    })
}

/// The recursor case for a type code with its level and global instances.
pub fn decompose_type_code(
    ctx: &LocalCtx,
    code: &Type,
) -> Option<(BranchKind, Vec<Level>, Vec<GEntry>)> {
    let c = GEntry::Ctx(ctx.clone());
    Some(match code {
        Type::Nat => (BranchKind::Nat, vec![], vec![c]),
        Type::Pi(l, l2, _, s, t) => (
            BranchKind::Pi,
            vec![l.clone(), l2.clone()],
            vec![c, GEntry::Typ((**s).clone()), GEntry::Typ((**t).clone())],
        ),
        Type::Ty(l) => (BranchKind::Ty, vec![l.clone()], vec![c]),
        Type::El(l, t) => (BranchKind::El, vec![l.clone()], vec![c, GEntry::Trm((**t).clone())]),
        _ => return None,
    })
}

/// The recursor case for a term code of type `ty` (already in weak-head
/// normal form) at level `level`.
pub fn decompose_term_code(
    ctx: &LocalCtx,
    ty: &Type,
    level: &Level,
    code: &Term,
) -> Option<(BranchKind, Vec<Level>, Vec<GEntry>)> {
    let c = GEntry::Ctx(ctx.clone());
    let tm = |t: &Term| GEntry::Trm(t.clone());
    let tp = |t: &Type| GEntry::Typ(t.clone());
    Some(match code {
        Term::LocalVar(_) => (BranchKind::Var, vec![level.clone()], vec![c, tp(ty), tm(code)]),
        Term::NatCode => (BranchKind::NatCode, vec![], vec![c]),
        Term::PiCode(l, l2, _, s, t) => {
            (BranchKind::PiCode, vec![l.clone(), l2.clone()], vec![c, tm(s), tm(t)])
        }
        Term::TyCode(l) => (BranchKind::TyCode, vec![l.clone()], vec![c]),
        Term::Zero => (BranchKind::Zero, vec![], vec![c]),
        Term::Succ(t) => (BranchKind::Succ, vec![], vec![c, tm(t)]),
        Term::ElimNat(l, m, s, s2, t) => (
            BranchKind::ElimNat,
            vec![l.clone()],
            vec![c, tp(m), tm(s), tm(s2), tm(t)],
        ),
        Term::Lam(l, l2, _, s, t) => match ty {
            Type::Pi(_, _, _, _, cod) => {
                (BranchKind::Lam, vec![l.clone(), l2.clone()], vec![c, tp(s), tp(cod), tm(t)])
            }
            _ => return None,
        },
        Term::App(f, l, l2, _, s, t, a) => (
            BranchKind::App,
            vec![l.clone(), l2.clone()],
            vec![c, tp(s), tp(t), tm(f), tm(a)],
        ),
        _ => return None,
    })
}

/// Reduce a term to weak-head normal form.
pub fn whnf_term(t: &Term, fuel: &Fuel) -> R<Term> {
    let mut cur = t.clone();
    while let Some(next) = step_term(&cur)? {
        fuel.tick()?;
        cur = next;
    }
    Ok(cur)
}

/// Reduce a type to weak-head normal form.
pub fn whnf_type(t: &Type, fuel: &Fuel) -> R<Type> {
    let mut cur = t.clone();
    while let Some(next) = step_type(&cur)? {
        fuel.tick()?;
        cur = next;
    }
    Ok(cur)
}

/// Reduction sequence of a term, including the start and the normal form.
pub fn trace_term(t: &Term, fuel: &Fuel) -> R<Vec<Term>> {
    let mut out = vec![t.clone()];
    while let Some(next) = step_term(out.last().expect("nonempty"))? {
        fuel.tick()?;
        out.push(next);
    }
    Ok(out)
}

/// Classify a type.
pub fn classify_type(t: &Type) -> Class {
    match t {
        Type::El(_, code) => {
            if matches!(step_type(t), Ok(Some(_))) {
                Class::Reducible
            } else if classify_term(code) == Class::Neutral {
                Class::Neutral
            } else {
                Class::Stuck
            }
        }
        Type::GVar(..) => Class::Neutral,
        _ => Class::Whnf,
    }
}

/// Classify a term.
pub fn classify_term(t: &Term) -> Class {
    match t {
        Term::LocalVar(_) | Term::GVar(..) => Class::Neutral,
        Term::NatCode
        | Term::PiCode(..)
        | Term::TyCode(_)
        | Term::Zero
        | Term::Succ(_)
        | Term::Lam(..)
        | Term::ULam(..)
        | Term::CtxLam(..)
        | Term::TyLam(..)
        | Term::BoxTy(_)
        | Term::BoxTm(_) => Class::Whnf,
        _ => match step_term(t) {
            Ok(Some(_)) => Class::Reducible,
            Err(_) => Class::Stuck,
            Ok(None) => {
                if head_is_neutral(t) {
                    Class::Neutral
                } else {
                    Class::Stuck
                }
            }
        },
    }
}

/// Whether an irreducible eliminator is blocked on a variable.
fn head_is_neutral(t: &Term) -> bool {
    let ne = |s: &Term| classify_term(s) == Class::Neutral;
    match t {
        Term::ElimNat(_, _, _, _, s)
        | Term::App(s, ..)
        | Term::UApp(s, _)
        | Term::CtxApp(s, _)
        | Term::TyApp(s, _)
        | Term::LetBoxTy(.., s)
        | Term::LetBoxTm(.., s) => ne(s),
        Term::ElimTyp(.., s) => match &**s {
            Term::BoxTy(code) => matches!(**code, Type::GVar(..)),
            other => ne(other),
        },
        Term::ElimTrm(.., s) => match &**s {
            Term::BoxTm(code) => matches!(**code, Term::GVar(..)),
            other => ne(other),
        },
        _ => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn add(a: Term, b: Term) -> Term {
        // elimNat^0 (x. Nat) a (x y. succ y) b
        Term::ElimNat(
            Level::Zero,
            bx(Type::Nat),
            bx(a),
            bx(Term::succ(Term::LocalVar(0))),
            bx(b),
        )
    }

    fn nf(t: &Term, fuel: &Fuel) -> Term {
        match whnf_term(t, fuel).unwrap() {
            Term::Succ(p) => Term::succ(nf(&p, fuel)),
            other => other,
        }
    }

    #[test]
    fn addition_by_recursion() {
        let fuel = Fuel::default();
        let t = add(Term::numeral(2), Term::numeral(3));
        assert_eq!(nf(&t, &fuel).as_numeral(), Some(5));
    }

    #[test]
    fn beta_for_functions() {
        let id = Term::lam(Level::Zero, Level::Zero, "x", Type::Nat, Term::succ(Term::LocalVar(0)));
        let app = Term::App(
            bx(id),
            Level::Zero,
            Level::Zero,
            Name::new("x"),
            bx(Type::Nat),
            bx(Type::Nat),
            bx(Term::Zero),
        );
        assert_eq!(whnf_term(&app, &Fuel::default()).unwrap(), Term::succ(Term::Zero));
        assert_eq!(classify_term(&app), Class::Reducible);
    }

    #[test]
    fn el_of_pi_code() {
        let code = Term::PiCode(
            Level::Zero,
            Level::Zero,
            Name::new("x"),
            bx(Term::NatCode),
            bx(Term::NatCode),
        );
        let t = Type::el(Level::Zero, code);
        let w = whnf_type(&t, &Fuel::default()).unwrap();
        assert!(matches!(w, Type::Pi(..)));
    }

    #[test]
    fn neutral_and_stuck() {
        let ne = add(Term::Zero, Term::LocalVar(0));
        assert_eq!(classify_term(&ne), Class::Neutral);
        let stuck = add(Term::Zero, Term::NatCode);
        assert_eq!(classify_term(&stuck), Class::Stuck);
    }

    #[test]
    fn fuel_runs_out() {
        let fuel = Fuel::new(3);
        let t = add(Term::numeral(2), Term::numeral(5));
        let r = (|| -> R<Term> {
            let mut cur = t.clone();
            loop {
                cur = match whnf_term(&cur, &fuel)? {
                    Term::Succ(p) => *p,
                    other => return Ok(other),
                };
            }
        })();
        assert_eq!(r, Err(ReduceError::FuelExhausted { limit: 3 }));
    }
}
