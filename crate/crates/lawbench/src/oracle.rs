//! Oracles that share no code with the kernel's own decision procedures:
//! level evaluation, a canonical form for levels, equality of syntax up
//! to level equivalence, and constructor coverage.

use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet};

use delam_core::syntax::*;
use delam_core::ulevel::Level;

/// Value of a finite level under an assignment; `env[i]` is the value of
/// de Bruijn variable `i`. `None` for omega.
pub fn eval_level(l: &Level, env: &[u64]) -> Option<u64> {
    match l {
        Level::Var(i) => env.get(*i).copied(),
        Level::Zero => Some(0),
        Level::Succ(a) => eval_level(a, env).map(|v| v + 1),
        Level::Lub(a, b) => Some(eval_level(a, env)?.max(eval_level(b, env)?)),
        Level::Omega => None,
    }
}

/// Every assignment of `0..=max` to `n` variables.
pub fn assignments(n: usize, max: u64) -> Vec<Vec<u64>> {
    let mut out = vec![vec![]];
    for _ in 0..n {
        out = out.into_iter().flat_map(|a| (0..=max).map(move |v| [a.clone(), vec![v]].concat())).collect();
    }
    out
}

/// Whether two levels over `n` variables agree on every assignment of
/// values `0..=4`.
pub fn agree_on_small_values(a: &Level, b: &Level, n: usize) -> bool {
    assignments(n, 4).iter().all(|env| eval_level(a, env) == eval_level(b, env))
}

/// A canonical form for finite levels: the largest offset of each
/// variable, and a constant kept only when it exceeds all of them.
fn canon_parts(l: &Level) -> Option<(u64, BTreeMap<usize, u64>)> {
    fn go(l: &Level, off: u64, c: &mut u64, vs: &mut BTreeMap<usize, u64>) -> bool {
        match l {
            Level::Zero => {
                *c = (*c).max(off);
                true
            }
            Level::Var(i) => {
                let e = vs.entry(*i).or_insert(off);
                *e = (*e).max(off);
                *c = (*c).max(off);
                true
            }
            Level::Succ(a) => go(a, off + 1, c, vs),
            Level::Lub(a, b) => go(a, off, c, vs) && go(b, off, c, vs),
            Level::Omega => false,
        }
    }
    let mut c = 0;
    let mut vs = BTreeMap::new();
    go(l, 0, &mut c, &mut vs).then_some((c, vs))
}

/// Rebuild a level from its canonical parts. Omega stays omega.
pub fn canon_level(l: &Level) -> Level {
    let Some((c, vs)) = canon_parts(l) else { return Level::Omega };
    let vmax = vs.values().copied().max();
    let mut acc: Option<Level> = None;
    for (i, off) in vs.iter().rev() {
        let part = Level::Var(*i).plus(*off);
        acc = Some(match acc {
            None => part,
            Some(a) => a.lub(part),
        });
    }
    if vmax.is_none_or(|m| c > m) {
        let k = Level::nat(c);
        acc = Some(match acc {
            None => k,
            Some(a) => a.lub(k),
        });
    }
    acc.unwrap_or(Level::Zero)
}

/// Rebuilds syntax with every level canonicalised and records the
/// constructors it passes.
#[derive(Default)]
pub struct Walker {
    pub seen: RefCell<BTreeSet<&'static str>>,
}

impl Walker {
    fn mark(&self, s: &'static str) {
        self.seen.borrow_mut().insert(s);
    }

    fn lv(&self, l: &Level) -> Level {
        canon_level(l)
    }

    fn lvs(&self, ls: &[Level]) -> Vec<Level> {
        ls.iter().map(|l| self.lv(l)).collect()
    }

    fn bt(&self, t: &Type) -> Box<Type> {
        Box::new(self.ty(t))
    }

    fn bm(&self, t: &Term) -> Box<Term> {
        Box::new(self.tm(t))
    }

    pub fn ty(&self, t: &Type) -> Type {
        match t {
            Type::Nat => {
                self.mark("Type::Nat");
                Type::Nat
            }
            Type::Pi(a, b, x, s, body) => {
                self.mark("Type::Pi");
                Type::Pi(self.lv(a), self.lv(b), x.clone(), self.bt(s), self.bt(body))
            }
            Type::Ty(l) => {
                self.mark("Type::Ty");
                Type::Ty(self.lv(l))
            }
            Type::UPi(ns, l, body) => {
                self.mark("Type::UPi");
                Type::UPi(ns.clone(), self.lv(l), self.bt(body))
            }
            Type::El(l, c) => {
                self.mark("Type::El");
                Type::El(self.lv(l), self.bm(c))
            }
            Type::GVar(j, d) => {
                self.mark("Type::GVar");
                Type::GVar(*j, self.ls(d))
            }
            Type::CtxPi(g, l, body) => {
                self.mark("Type::CtxPi");
                Type::CtxPi(g.clone(), self.lv(l), self.bt(body))
            }
            Type::TyPi(u, ctx, a, b, body) => {
                self.mark("Type::TyPi");
                Type::TyPi(u.clone(), self.ctx(ctx), self.lv(a), self.lv(b), self.bt(body))
            }
            Type::CodeTy(ctx, l) => {
                self.mark("Type::CodeTy");
                Type::CodeTy(self.ctx(ctx), self.lv(l))
            }
            Type::CodeTm(ctx, t, l) => {
                self.mark("Type::CodeTm");
                Type::CodeTm(self.ctx(ctx), self.bt(t), self.lv(l))
            }
        }
    }

    pub fn tm(&self, t: &Term) -> Term {
        match t {
            Term::LocalVar(j) => {
                self.mark("Term::LocalVar");
                Term::LocalVar(*j)
            }
            Term::GVar(j, d) => {
                self.mark("Term::GVar");
                Term::GVar(*j, self.ls(d))
            }
            Term::NatCode => {
                self.mark("Term::NatCode");
                Term::NatCode
            }
            Term::PiCode(a, b, x, s, body) => {
                self.mark("Term::PiCode");
                Term::PiCode(self.lv(a), self.lv(b), x.clone(), self.bm(s), self.bm(body))
            }
            Term::TyCode(l) => {
                self.mark("Term::TyCode");
                Term::TyCode(self.lv(l))
            }
            Term::Zero => {
                self.mark("Term::Zero");
                Term::Zero
            }
            Term::Succ(n) => {
                self.mark("Term::Succ");
                Term::Succ(self.bm(n))
            }
            Term::ElimNat(l, m, s, s2, n) => {
                self.mark("Term::ElimNat");
                Term::ElimNat(self.lv(l), self.bt(m), self.bm(s), self.bm(s2), self.bm(n))
            }
            Term::Lam(a, b, x, s, body) => {
                self.mark("Term::Lam");
                Term::Lam(self.lv(a), self.lv(b), x.clone(), self.bt(s), self.bm(body))
            }
            Term::App(f, a, b, x, s, t, arg) => {
                self.mark("Term::App");
                Term::App(self.bm(f), self.lv(a), self.lv(b), x.clone(), self.bt(s), self.bt(t), self.bm(arg))
            }
            Term::ULam(l, ns, body) => {
                self.mark("Term::ULam");
                Term::ULam(self.lv(l), ns.clone(), self.bm(body))
            }
            Term::UApp(f, ls) => {
                self.mark("Term::UApp");
                Term::UApp(self.bm(f), self.lvs(ls))
            }
            Term::CtxLam(l, g, body) => {
                self.mark("Term::CtxLam");
                Term::CtxLam(self.lv(l), g.clone(), self.bm(body))
            }
            Term::CtxApp(f, ctx) => {
                self.mark("Term::CtxApp");
                Term::CtxApp(self.bm(f), self.ctx(ctx))
            }
            Term::TyLam(a, b, u, ctx, body) => {
                self.mark("Term::TyLam");
                Term::TyLam(self.lv(a), self.lv(b), u.clone(), self.ctx(ctx), self.bm(body))
            }
            Term::TyApp(f, a) => {
                self.mark("Term::TyApp");
                Term::TyApp(self.bm(f), self.bt(a))
            }
            Term::BoxTy(t) => {
                self.mark("Term::BoxTy");
                Term::BoxTy(self.bt(t))
            }
            Term::BoxTm(t) => {
                self.mark("Term::BoxTm");
                Term::BoxTm(self.bm(t))
            }
            Term::LetBoxTy(a, b, ctx, m, u, body, s) => {
                self.mark("Term::LetBoxTy");
                Term::LetBoxTy(self.lv(a), self.lv(b), self.ctx(ctx), self.bt(m), u.clone(), self.bm(body), self.bm(s))
            }
            Term::LetBoxTm(a, b, ctx, t, m, u, body, s) => {
                self.mark("Term::LetBoxTm");
                Term::LetBoxTm(
                    self.lv(a),
                    self.lv(b),
                    self.ctx(ctx),
                    self.bt(t),
                    self.bt(m),
                    u.clone(),
                    self.bm(body),
                    self.bm(s),
                )
            }
            Term::ElimTyp(a, b, ms, bs, l, ctx, s) => {
                self.mark("Term::ElimTyp");
                Term::ElimTyp(
                    self.lv(a),
                    self.lv(b),
                    Box::new(self.motives(ms)),
                    Box::new(self.branches(bs)),
                    self.lv(l),
                    self.ctx(ctx),
                    self.bm(s),
                )
            }
            Term::ElimTrm(a, b, ms, bs, l, ctx, t, s) => {
                self.mark("Term::ElimTrm");
                Term::ElimTrm(
                    self.lv(a),
                    self.lv(b),
                    Box::new(self.motives(ms)),
                    Box::new(self.branches(bs)),
                    self.lv(l),
                    self.ctx(ctx),
                    self.bt(t),
                    self.bm(s),
                )
            }
        }
    }

    fn motives(&self, ms: &Motives) -> Motives {
        Motives { typ_name: ms.typ_name.clone(), typ: self.ty(&ms.typ), trm_name: ms.trm_name.clone(), trm: self.ty(&ms.trm) }
    }

    fn branches(&self, bs: &Branches) -> Branches {
        let v = bs.iter().map(|(_, b)| Branch { binders: b.binders.clone(), body: self.tm(&b.body) }).collect();
        Branches::new(v).expect("rebuilding preserves arities")
    }

    pub fn ctx(&self, c: &LocalCtx) -> LocalCtx {
        LocalCtx {
            base: c.base.clone(),
            entries: c
                .entries
                .iter()
                .map(|e| CtxEntry { name: e.name.clone(), ty: self.ty(&e.ty), level: self.lv(&e.level) })
                .collect(),
        }
    }

    pub fn ls(&self, d: &LocalSubst) -> LocalSubst {
        LocalSubst { base: d.base.clone(), entries: d.entries.iter().map(|t| self.tm(t)).collect() }
    }
}

/// Every constructor name [`Walker`] records.
pub const ALL_CONSTRUCTORS: [&str; 32] = [
    "Type::Nat",
    "Type::Pi",
    "Type::Ty",
    "Type::UPi",
    "Type::El",
    "Type::GVar",
    "Type::CtxPi",
    "Type::TyPi",
    "Type::CodeTy",
    "Type::CodeTm",
    "Term::LocalVar",
    "Term::GVar",
    "Term::NatCode",
    "Term::PiCode",
    "Term::TyCode",
    "Term::Zero",
    "Term::Succ",
    "Term::ElimNat",
    "Term::Lam",
    "Term::App",
    "Term::ULam",
    "Term::UApp",
    "Term::CtxLam",
    "Term::CtxApp",
    "Term::TyLam",
    "Term::TyApp",
    "Term::BoxTy",
    "Term::BoxTm",
    "Term::LetBoxTy",
    "Term::LetBoxTm",
    "Term::ElimTyp",
    "Term::ElimTrm",
];

/// Alpha-equality of terms with levels compared up to equivalence.
pub fn alpha_eq_levels_tm(a: &Term, b: &Term) -> bool {
    let w = Walker::default();
    w.tm(a) == w.tm(b)
}

/// Alpha-equality of types with levels compared up to equivalence.
pub fn alpha_eq_levels_ty(a: &Type, b: &Type) -> bool {
    let w = Walker::default();
    w.ty(a) == w.ty(b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_levels() {
        let l = Level::Var(0).lub(Level::Var(0).succ());
        assert_eq!(canon_level(&l), Level::Var(0).succ());
        assert_eq!(canon_level(&Level::Zero.lub(Level::Zero)), Level::Zero);
        assert_eq!(canon_level(&Level::Var(1).lub(Level::nat(3))), Level::Var(1).lub(Level::nat(3)));
    }

    #[test]
    fn evaluation() {
        let l = Level::Var(0).succ().lub(Level::Var(1));
        assert_eq!(eval_level(&l, &[2, 5]), Some(5));
        assert_eq!(eval_level(&l, &[7, 5]), Some(8));
        assert_eq!(assignments(2, 4).len(), 25);
    }
}
