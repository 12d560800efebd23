//! The law suites.
//!
//! Case `c` of a run with seed `s` draws everything from the seed
//! `s + c`, so any single case can be replayed on its own.

use rand::Rng;

use delam_core::reduce::{classify_term, step_term, trace_term, whnf_term, Fuel};
use delam_core::subst::{
    gsubst_apply, gsubst_compose, gsubst_id, gwk, lsubst_apply, lsubst_compose, shift_globals, shift_levels,
    shift_locals, usubst_apply_syntax, SubstError,
};
use delam_core::surface::Printer;
use delam_core::syntax::*;
use delam_core::typing::{Checker, Env};
use delam_core::ulevel::{level_equiv, Level, UnivSubst};

use crate::gen::{pred_level, CtxShape, Gen, GenConfig, Subject};
use crate::oracle::{agree_on_small_values, alpha_eq_levels_tm, alpha_eq_levels_ty, Walker, ALL_CONSTRUCTORS};
use crate::{Counterexample, LawReport, UnknownSuite};

/// Every suite name accepted by [`run_suite`].
pub const SUITES: &[&str] = &[
    "levels", "usubst", "lsubst", "gsubst", "weaken", "interact", "reduce", "conv", "lift", "static", "coverage", "gen",
];

/// The substitution operation under test. Laws apply local
/// substitutions to terms through this table so a deliberately broken
/// implementation can be swapped in.
#[derive(Clone, Copy)]
pub struct Ops {
    pub lsubst_term: fn(&Term, &LocalSubst) -> Result<Term, SubstError>,
}

impl Ops {
    pub fn reference() -> Ops {
        Ops { lsubst_term: |t, d| lsubst_apply(t, d) }
    }

    /// The mutant of [`mutant_skip_binder_shift`].
    pub fn mutant() -> Ops {
        Ops { lsubst_term: mutant_skip_binder_shift }
    }
}

/// A broken local substitution: under a λ-binder it extends `δ` with the
/// bound variable but does not shift `δ`'s entries past it.
pub fn mutant_skip_binder_shift(t: &Term, delta: &LocalSubst) -> Result<Term, SubstError> {
    Ok(match t {
        Term::Lam(l1, l2, x, s, body) => {
            let base = match delta.base {
                LsBase::Empty { g, k } => LsBase::Empty { g, k: k + 1 },
                LsBase::Wk { g, k } => LsBase::Wk { g, k: k + 1 },
            };
            let mut entries = delta.entries.clone();
            entries.push(Term::LocalVar(0));
            let ext = LocalSubst { base, entries };
            Term::Lam(l1.clone(), l2.clone(), x.clone(), Box::new(lsubst_apply(&**s, delta)?), Box::new(mutant_skip_binder_shift(body, &ext)?))
        }
        Term::App(f, l1, l2, x, s, b, a) => {
            let s2 = Box::new(lsubst_apply(&**s, delta)?);
            let b2 = Box::new(lsubst_apply(&**b, &lift_lsubst(delta))?);
            Term::App(
                Box::new(mutant_skip_binder_shift(f, delta)?),
                l1.clone(),
                l2.clone(),
                x.clone(),
                s2,
                b2,
                Box::new(mutant_skip_binder_shift(a, delta)?),
            )
        }
        Term::Succ(n) => Term::Succ(Box::new(mutant_skip_binder_shift(n, delta)?)),
        _ => lsubst_apply(t, delta)?,
    })
}

/// `δ` extended under one binder: entries shifted past it, then the
/// bound variable.
fn lift_lsubst(delta: &LocalSubst) -> LocalSubst {
    let base = match delta.base {
        LsBase::Empty { g, k } => LsBase::Empty { g, k: k + 1 },
        LsBase::Wk { g, k } => LsBase::Wk { g, k: k + 1 },
    };
    let mut entries: Vec<Term> = delta.entries.iter().map(|e| shift_locals(e, 0, 1)).collect();
    entries.push(Term::LocalVar(0));
    LocalSubst { base, entries }
}

/// Run a suite with the reference operations.
pub fn run_suite(name: &str, cases: usize, seed: u64) -> Result<Vec<LawReport>, UnknownSuite> {
    run_suite_with(name, cases, seed, &Ops::reference())
}

/// Run a suite with the given operations.
pub fn run_suite_with(name: &str, cases: usize, seed: u64, ops: &Ops) -> Result<Vec<LawReport>, UnknownSuite> {
    let r = Runner { cases, seed, ops: *ops };
    Ok(match name {
        "levels" => r.levels(),
        "usubst" => r.usubst(),
        "lsubst" => r.lsubst(),
        "gsubst" => r.gsubst(),
        "weaken" => r.weaken(),
        "interact" => r.interact(),
        "reduce" => r.reduce(),
        "conv" => r.conv(),
        "lift" => r.lift(),
        "static" => r.static_code(),
        "coverage" => r.coverage(),
        "gen" => r.self_check(),
        _ => return Err(UnknownSuite(name.to_string())),
    })
}

type CaseResult = Result<bool, String>;

fn eq_or<T: PartialEq>(a: &T, b: &T, what: impl FnOnce() -> String) -> Result<(), String> {
    if a == b {
        Ok(())
    } else {
        Err(what())
    }
}

fn se(e: SubstError) -> String {
    format!("substitution failed: {e}")
}

fn show_tm(t: &Term) -> String {
    Printer::new().tm(t)
}

fn show_ty(t: &Type) -> String {
    Printer::new().ty(t)
}

fn pick_layer(g: &mut Gen) -> Layer {
    match g.rng.gen_range(0..4) {
        0 => Layer::C,
        1 => Layer::D,
        _ => Layer::M,
    }
}

/// A generator for one case and a subject in a fresh world.
fn case_subject(seed: u64) -> (Gen, Subject) {
    let mut g = Gen::new(seed);
    let layer = pick_layer(&mut g);
    let cfg = GenConfig { seed, depth: 2, layer, shape: CtxShape::Mixed };
    let s = g.subject(&cfg);
    (g, s)
}

/// A local context `Γ'` and `δ : Γ' ⇒ env.locals` with entries at `i`.
/// Random contexts are tried first, then extensions of `env.locals`,
/// and last a weakening.
fn lsubst_into(g: &mut Gen, env: &Env, i: Layer) -> (LocalCtx, LocalSubst) {
    let base = match env.locals.base {
        CtxBase::Var(v) => Some(CtxBase::Var(v)),
        CtxBase::Empty => None,
    };
    for attempt in 0..12 {
        g.reset_budget();
        let gp = if attempt < 6 {
            g.gen_local_ctx(env, base.clone(), i.typeof_layer(), 2)
        } else {
            let mut gp = env.locals.clone();
            for p in 0..g.rng.gen_range(0..=2) {
                let (ty, l) = g.gen_type(&env.with_locals(gp.clone()), i.typeof_layer(), 1, false);
                gp = gp.push(Name::new(["a", "b"][p]), ty, l);
            }
            gp
        };
        if let Some(d) = g.gen_lsubst(&env.with_locals(gp.clone()), i, &env.locals, 1) {
            return (gp, d);
        }
    }
    let gp = env.locals.clone().push(Name::new("a"), Type::Nat, Level::Zero);
    (gp, lwk(&env.locals, 1))
}

/// A global context `Ψ'` over the same levels and `σ : Ψ' ⇒ env.globals`.
/// Random contexts are tried first, then extensions of `env.globals`,
/// and last a weakening.
fn gsubst_into(g: &mut Gen, env: &Env) -> (Env, GlobalSubst) {
    for attempt in 0..12 {
        g.reset_budget();
        let start = if attempt < 6 { GlobalCtx::new() } else { env.globals.clone() };
        let target = g.gen_globals(&Env::new(env.levels.clone(), start), false);
        if let Some(s) = g.gen_gsubst(&target, &env.globals, 1) {
            return (target, s);
        }
    }
    let target = g.gen_globals(&Env::new(env.levels.clone(), env.globals.clone()), false);
    let k = target.globals.len() - env.globals.len();
    (target, gwk(&env.globals, k))
}

struct Runner {
    cases: usize,
    seed: u64,
    ops: Ops,
}

impl Runner {
    fn law(
        &self,
        suite: &'static str,
        law: &'static str,
        cases: usize,
        note: &str,
        mut f: impl FnMut(u64) -> CaseResult,
    ) -> LawReport {
        let (mut failures, mut hits) = (0, 0);
        let mut first = None;
        for c in 0..cases {
            let s = self.seed.wrapping_add(c as u64);
            match f(s) {
                Ok(hit) => hits += usize::from(hit),
                Err(detail) => {
                    failures += 1;
                    first.get_or_insert(Counterexample { seed: s, detail });
                }
            }
        }
        let note = if note.is_empty() { String::new() } else { format!("{hits} {note}") };
        LawReport { suite, law, cases, failures, counterexample: first, note }
    }

    // ---- levels -------------------------------------------------------

    fn levels(&self) -> Vec<LawReport> {
        let n = self.cases;
        let mut out = vec![self.law("levels", "equiv-sound", n, "equivalent pairs", |s| {
            let mut g = Gen::new(s);
            let nv = g.rng.gen_range(0..=3);
            let a = g.gen_level(nv, 3);
            let b = if g.rng.gen_bool(0.5) { rewrite_level(&mut g, &a, 3) } else { g.gen_level(nv, 3) };
            let eq = level_equiv(&a, &b);
            if eq && !agree_on_small_values(&a, &b, nv) {
                return Err(format!("{a:?} and {b:?} judged equivalent but differ on some assignment"));
            }
            Ok(eq)
        })];
        type Rule = fn(&mut Gen, usize) -> (Level, Level);
        let rules: [(&'static str, Rule); 8] = [
            ("rule-unit", |g, nv| {
                let a = g.gen_level(nv, 3);
                (a.clone().lub(Level::Zero), a)
            }),
            ("rule-assoc", |g, nv| {
                let (a, b, c) = (g.gen_level(nv, 2), g.gen_level(nv, 2), g.gen_level(nv, 2));
                (a.clone().lub(b.clone()).lub(c.clone()), a.lub(b.lub(c)))
            }),
            ("rule-comm", |g, nv| {
                let (a, b) = (g.gen_level(nv, 3), g.gen_level(nv, 3));
                (a.clone().lub(b.clone()), b.lub(a))
            }),
            ("rule-idem", |g, nv| {
                let a = g.gen_level(nv, 3);
                (a.clone().lub(a.clone()), a)
            }),
            ("rule-succ-distrib", |g, nv| {
                let (a, b) = (g.gen_level(nv, 3), g.gen_level(nv, 3));
                (a.clone().lub(b.clone()).succ(), a.succ().lub(b.succ()))
            }),
            ("rule-var-absorb", |g, nv| {
                let v = Level::Var(g.rng.gen_range(0..nv.max(1)));
                (v.clone().lub(v.clone().succ()), v.succ())
            }),
            ("rule-absorb", |g, nv| {
                let a = g.gen_level(nv, 3);
                let k = g.rng.gen_range(0..=4);
                (a.clone().lub(a.clone().plus(k)), a.plus(k))
            }),
            ("rule-congruence", |g, nv| {
                let (a, b) = (g.gen_level(nv, 3), g.gen_level(nv, 3));
                let (a2, b2) = (rewrite_level(g, &a, 2), rewrite_level(g, &b, 2));
                if g.rng.gen_bool(0.5) {
                    (a.lub(b), a2.lub(b2))
                } else {
                    (a.succ(), a2.succ())
                }
            }),
        ];
        for (name, rule) in rules {
            out.push(self.law("levels", name, n, "", |s| {
                let mut g = Gen::new(s);
                let nv = g.rng.gen_range(1..=3);
                let (a, b) = rule(&mut g, nv);
                if level_equiv(&a, &b) {
                    Ok(true)
                } else {
                    Err(format!("{a:?} and {b:?} were not judged equivalent"))
                }
            }));
        }
        out
    }

    // ---- universe substitutions ---------------------------------------

    fn usubst(&self) -> Vec<LawReport> {
        let n = self.cases;
        let setup = |s: u64| {
            let (mut g, subj) = case_subject(s);
            let nl = subj.env.levels.len();
            let (n1, n2) = (g.rng.gen_range(0..=2), g.rng.gen_range(0..=2));
            let phi = g.gen_usubst(n1, nl);
            let phi2 = g.gen_usubst(n2, n1);
            let n3 = g.rng.gen_range(0..=2);
            let phi3 = g.gen_usubst(n3, n2);
            (subj, phi, phi2, phi3)
        };
        vec![
            self.law("usubst", "identity", n, "", |s| {
                let (subj, ..) = setup(s);
                let id = UnivSubst::id(subj.env.levels.len());
                let t = usubst_apply_syntax(&subj.term, &id).map_err(se)?;
                let ty = usubst_apply_syntax(&subj.ty, &id).map_err(se)?;
                eq_or(&t, &subj.term, || format!("X[id] != X for {}", show_tm(&subj.term)))?;
                eq_or(&ty, &subj.ty, || format!("T[id] != T for {}", show_ty(&subj.ty)))?;
                Ok(true)
            }),
            self.law("usubst", "compose", n, "", |s| {
                let (subj, phi, phi2, _) = setup(s);
                let lhs = usubst_apply_syntax(&usubst_apply_syntax(&subj.term, &phi).map_err(se)?, &phi2).map_err(se)?;
                let comp = phi.compose(&phi2).map_err(|e| e.to_string())?;
                let rhs = usubst_apply_syntax(&subj.term, &comp).map_err(se)?;
                eq_or(&lhs, &rhs, || format!("X[φ][φ'] != X[φ∘φ'] for {}", show_tm(&subj.term)))?;
                Ok(true)
            }),
            self.law("usubst", "assoc", n, "", |s| {
                let (_, phi, phi2, phi3) = setup(s);
                let e = |x: delam_core::ulevel::LevelError| x.to_string();
                let a = phi.compose(&phi2).map_err(e)?.compose(&phi3).map_err(e)?;
                let b = phi.compose(&phi2.compose(&phi3).map_err(e)?).map_err(e)?;
                eq_or(&a, &b, || format!("(φ1∘φ2)∘φ3 != φ1∘(φ2∘φ3): {a:?} vs {b:?}"))?;
                Ok(true)
            }),
            self.law("usubst", "unit", n, "", |s| {
                let (subj, phi, ..) = setup(s);
                let nl = subj.env.levels.len();
                let e = |x: delam_core::ulevel::LevelError| x.to_string();
                let left = UnivSubst::id(nl).compose(&phi).map_err(e)?;
                eq_or(&left, &phi, || format!("id∘φ != φ: {left:?}"))?;
                Ok(true)
            }),
        ]
    }

    // ---- local substitutions ------------------------------------------

    fn lsubst(&self) -> Vec<LawReport> {
        let n = self.cases;
        let ops = self.ops;
        vec![
            self.law("lsubst", "identity", n, "", |s| {
                let (_, subj) = case_subject(s);
                let id = lid(&subj.env.locals);
                let t = (ops.lsubst_term)(&subj.term, &id).map_err(se)?;
                eq_or(&t, &subj.term, || format!("t[id] != t for {}, got {}", show_tm(&subj.term), show_tm(&t)))?;
                let ty = lsubst_apply(&subj.ty, &id).map_err(se)?;
                eq_or(&ty, &subj.ty, || format!("T[id] != T for {}", show_ty(&subj.ty)))?;
                Ok(true)
            }),
            self.law("lsubst", "compose", n, "cases with non-variable entries", |s| {
                let (mut g, subj) = case_subject(s);
                let (g1, d1) = lsubst_into(&mut g, &subj.env, subj.layer);
                let (_, d2) = lsubst_into(&mut g, &subj.env.with_locals(g1), subj.layer);
                let lhs = (ops.lsubst_term)(&(ops.lsubst_term)(&subj.term, &d1).map_err(se)?, &d2).map_err(se)?;
                let comp = lsubst_compose(&d1, &d2).map_err(se)?;
                let rhs = (ops.lsubst_term)(&subj.term, &comp).map_err(se)?;
                eq_or(&lhs, &rhs, || {
                    format!("t[δ][δ'] != t[δ∘δ'] for t = {}: {} vs {}", show_tm(&subj.term), show_tm(&lhs), show_tm(&rhs))
                })?;
                let tl = lsubst_apply(&lsubst_apply(&subj.ty, &d1).map_err(se)?, &d2).map_err(se)?;
                let tr = lsubst_apply(&subj.ty, &comp).map_err(se)?;
                eq_or(&tl, &tr, || format!("T[δ][δ'] != T[δ∘δ'] for {}", show_ty(&subj.ty)))?;
                Ok(d1.entries.iter().any(|e| !matches!(e, Term::LocalVar(_))))
            }),
            self.law("lsubst", "assoc", n, "", |s| {
                let (mut g, subj) = case_subject(s);
                let (g1, d1) = lsubst_into(&mut g, &subj.env, subj.layer);
                let (g2, d2) = lsubst_into(&mut g, &subj.env.with_locals(g1), subj.layer);
                let (_, d3) = lsubst_into(&mut g, &subj.env.with_locals(g2), subj.layer);
                let a = lsubst_compose(&lsubst_compose(&d1, &d2).map_err(se)?, &d3).map_err(se)?;
                let b = lsubst_compose(&d1, &lsubst_compose(&d2, &d3).map_err(se)?).map_err(se)?;
                eq_or(&a, &b, || "(δ1∘δ2)∘δ3 != δ1∘(δ2∘δ3)".to_string())?;
                Ok(true)
            }),
            self.law("lsubst", "unit", n, "", |s| {
                let (mut g, subj) = case_subject(s);
                let (g1, d) = lsubst_into(&mut g, &subj.env, subj.layer);
                let right = lsubst_compose(&d, &lid(&g1)).map_err(se)?;
                eq_or(&right, &d, || "δ∘id != δ".to_string())?;
                let left = lsubst_compose(&lid(&subj.env.locals), &d).map_err(se)?;
                eq_or(&left, &d, || "id∘δ != δ".to_string())?;
                Ok(true)
            }),
        ]
    }

    // ---- global substitutions -----------------------------------------

    fn gsubst(&self) -> Vec<LawReport> {
        let n = self.cases;
        vec![
            self.law("gsubst", "identity", n, "", |s| {
                let (_, subj) = case_subject(s);
                let id = gsubst_id(&subj.env.globals);
                let t = gsubst_apply(&subj.term, &id).map_err(se)?;
                eq_or(&t, &subj.term, || format!("t[id] != t for {}", show_tm(&subj.term)))?;
                let ty = gsubst_apply(&subj.ty, &id).map_err(se)?;
                eq_or(&ty, &subj.ty, || format!("T[id] != T for {}", show_ty(&subj.ty)))?;
                let c = gsubst_apply(&subj.env.locals, &id).map_err(se)?;
                eq_or(&c, &subj.env.locals, || "Γ[id] != Γ".to_string())?;
                Ok(true)
            }),
            self.law("gsubst", "compose", n, "", |s| {
                let (mut g, subj) = case_subject(s);
                let (e1, s1) = gsubst_into(&mut g, &subj.env);
                let (_, s2) = gsubst_into(&mut g, &e1);
                let comp = gsubst_compose(&s1, &s2).map_err(se)?;
                let lhs = gsubst_apply(&gsubst_apply(&subj.term, &s1).map_err(se)?, &s2).map_err(se)?;
                let rhs = gsubst_apply(&subj.term, &comp).map_err(se)?;
                eq_or(&lhs, &rhs, || format!("t[σ][σ'] != t[σ∘σ'] for {}", show_tm(&subj.term)))?;
                let tl = gsubst_apply(&gsubst_apply(&subj.ty, &s1).map_err(se)?, &s2).map_err(se)?;
                let tr = gsubst_apply(&subj.ty, &comp).map_err(se)?;
                eq_or(&tl, &tr, || format!("T[σ][σ'] != T[σ∘σ'] for {}", show_ty(&subj.ty)))?;
                Ok(true)
            }),
            self.law("gsubst", "assoc", n, "", |s| {
                let (mut g, subj) = case_subject(s);
                let (e1, s1) = gsubst_into(&mut g, &subj.env);
                let (e2, s2) = gsubst_into(&mut g, &e1);
                let (_, s3) = gsubst_into(&mut g, &e2);
                let a = gsubst_compose(&gsubst_compose(&s1, &s2).map_err(se)?, &s3).map_err(se)?;
                let b = gsubst_compose(&s1, &gsubst_compose(&s2, &s3).map_err(se)?).map_err(se)?;
                eq_or(&a, &b, || "(σ1∘σ2)∘σ3 != σ1∘(σ2∘σ3)".to_string())?;
                Ok(true)
            }),
            self.law("gsubst", "unit", n, "", |s| {
                let (mut g, subj) = case_subject(s);
                let (e1, s1) = gsubst_into(&mut g, &subj.env);
                let right = gsubst_compose(&s1, &gsubst_id(&e1.globals)).map_err(se)?;
                eq_or(&right, &s1, || "σ∘id != σ".to_string())?;
                let left = gsubst_compose(&gsubst_id(&subj.env.globals), &s1).map_err(se)?;
                eq_or(&left, &s1, || "id∘σ != σ".to_string())?;
                Ok(true)
            }),
        ]
    }

    // ---- weakenings ---------------------------------------------------

    fn weaken(&self) -> Vec<LawReport> {
        let n = self.cases;
        vec![
            self.law("weaken", "lwk-under-gsubst", n, "", |s| {
                let (mut g, subj) = case_subject(s);
                let (_, sigma) = gsubst_into(&mut g, &subj.env);
                let gamma = &subj.env.locals;
                let gamma_s = gsubst_apply(gamma, &sigma).map_err(se)?;
                for k in 0..3 {
                    let a = gsubst_apply(&lwk(gamma, k), &sigma).map_err(se)?;
                    eq_or(&a, &lwk(&gamma_s, k), || format!("wk^{k}_Γ[σ] != wk^{k}_{{Γ[σ]}}"))?;
                }
                Ok(true)
            }),
            self.law("weaken", "lid-under-gsubst", n, "", |s| {
                let (mut g, subj) = case_subject(s);
                let (_, sigma) = gsubst_into(&mut g, &subj.env);
                let gamma_s = gsubst_apply(&subj.env.locals, &sigma).map_err(se)?;
                let a = gsubst_apply(&lid(&subj.env.locals), &sigma).map_err(se)?;
                eq_or(&a, &lid(&gamma_s), || "id_Γ[σ] != id_{Γ[σ]}".to_string())?;
                Ok(true)
            }),
            self.law("weaken", "lwk-is-shift", n, "", |s| {
                let (mut g, subj) = case_subject(s);
                let k = g.rng.gen_range(0..3);
                let a = lsubst_apply(&subj.term, &lwk(&subj.env.locals, k)).map_err(se)?;
                eq_or(&a, &shift_locals(&subj.term, 0, k), || format!("t[wk^{k}] != shift for {}", show_tm(&subj.term)))?;
                Ok(true)
            }),
            self.law("weaken", "gwk-is-shift", n, "", |s| {
                let (mut g, subj) = case_subject(s);
                let k = g.rng.gen_range(0..3);
                let w = gwk(&subj.env.globals, k);
                let a = gsubst_apply(&subj.term, &w).map_err(se)?;
                eq_or(&a, &shift_globals(&subj.term, 0, k), || format!("t[wk^{k}_Ψ] != shift for {}", show_tm(&subj.term)))?;
                let b = gsubst_apply(&subj.ty, &w).map_err(se)?;
                eq_or(&b, &shift_globals(&subj.ty, 0, k), || format!("T[wk^{k}_Ψ] != shift for {}", show_ty(&subj.ty)))?;
                Ok(true)
            }),
            self.law("weaken", "uwk-is-shift", n, "", |s| {
                let (mut g, subj) = case_subject(s);
                let k = g.rng.gen_range(0..3);
                let w = UnivSubst::wk(subj.env.levels.len(), k);
                let a = usubst_apply_syntax(&subj.term, &w).map_err(se)?;
                eq_or(&a, &shift_levels(&subj.term, 0, k), || format!("t[wk^{k}_L] != shift for {}", show_tm(&subj.term)))?;
                Ok(true)
            }),
        ]
    }

    // ---- interactions -------------------------------------------------

    fn interact(&self) -> Vec<LawReport> {
        let n = self.cases;
        let ops = self.ops;
        vec![
            self.law("interact", "lsubst-usubst", n, "", |s| {
                let (mut g, subj) = case_subject(s);
                let (_, d) = lsubst_into(&mut g, &subj.env, subj.layer);
                let n1 = g.rng.gen_range(0..=2);
                let phi = g.gen_usubst(n1, subj.env.levels.len());
                let lhs = usubst_apply_syntax(&(ops.lsubst_term)(&subj.term, &d).map_err(se)?, &phi).map_err(se)?;
                let dphi = usubst_apply_syntax(&d, &phi).map_err(se)?;
                let rhs = (ops.lsubst_term)(&usubst_apply_syntax(&subj.term, &phi).map_err(se)?, &dphi).map_err(se)?;
                eq_or(&lhs, &rhs, || format!("t[δ][φ] != t[φ][δ[φ]] for {}", show_tm(&subj.term)))?;
                Ok(true)
            }),
            self.law("interact", "gsubst-usubst", n, "", |s| {
                let (mut g, subj) = case_subject(s);
                let (_, sigma) = gsubst_into(&mut g, &subj.env);
                let n1 = g.rng.gen_range(0..=2);
                let phi = g.gen_usubst(n1, subj.env.levels.len());
                let lhs = usubst_apply_syntax(&gsubst_apply(&subj.term, &sigma).map_err(se)?, &phi).map_err(se)?;
                let sphi = GlobalSubst(usubst_apply_syntax(&sigma.0, &phi).map_err(se)?);
                let rhs = gsubst_apply(&usubst_apply_syntax(&subj.term, &phi).map_err(se)?, &sphi).map_err(se)?;
                eq_or(&lhs, &rhs, || format!("t[σ][φ] != t[φ][σ[φ]] for {}", show_tm(&subj.term)))?;
                Ok(true)
            }),
            self.law("interact", "lsubst-gsubst", n, "", |s| {
                let (mut g, subj) = case_subject(s);
                let (_, d) = lsubst_into(&mut g, &subj.env, subj.layer);
                let (_, sigma) = gsubst_into(&mut g, &subj.env);
                let lhs = gsubst_apply(&(ops.lsubst_term)(&subj.term, &d).map_err(se)?, &sigma).map_err(se)?;
                let ds = gsubst_apply(&d, &sigma).map_err(se)?;
                let rhs = (ops.lsubst_term)(&gsubst_apply(&subj.term, &sigma).map_err(se)?, &ds).map_err(se)?;
                eq_or(&lhs, &rhs, || format!("t[δ][σ] != t[σ][δ[σ]] for {}", show_tm(&subj.term)))?;
                Ok(true)
            }),
            self.law("interact", "compose-gsubst", n, "", |s| {
                let (mut g, subj) = case_subject(s);
                let (g1, d1) = lsubst_into(&mut g, &subj.env, subj.layer);
                let (_, d2) = lsubst_into(&mut g, &subj.env.with_locals(g1), subj.layer);
                let (_, sigma) = gsubst_into(&mut g, &subj.env);
                let lhs = gsubst_apply(&lsubst_compose(&d1, &d2).map_err(se)?, &sigma).map_err(se)?;
                let rhs = lsubst_compose(&gsubst_apply(&d1, &sigma).map_err(se)?, &gsubst_apply(&d2, &sigma).map_err(se)?)
                    .map_err(se)?;
                eq_or(&lhs, &rhs, || "(δ∘δ')[σ] != δ[σ]∘δ'[σ]".to_string())?;
                Ok(true)
            }),
        ]
    }

    // ---- reduction ----------------------------------------------------

    fn reduce(&self) -> Vec<LawReport> {
        let n = self.cases;
        vec![
            self.law("reduce", "determinism", n, "", |s| {
                let (_, subj) = reducible_case(s)?;
                let fuel = Fuel::default();
                let a = whnf_term(&subj.term, &fuel).map_err(|e| e.to_string())?;
                let b = whnf_term(&subj.term, &fuel).map_err(|e| e.to_string())?;
                eq_or(&a, &b, || format!("two runs of whnf differ on {}", show_tm(&subj.term)))?;
                let (_, again) = reducible_case(s)?;
                let c = whnf_term(&again.term, &fuel).map_err(|e| e.to_string())?;
                eq_or(&a, &c, || "regenerating from the seed changed the normal form".to_string())?;
                Ok(true)
            }),
            self.law("reduce", "preservation", n, "steps checked", |s| {
                let (g, subj) = reducible_case(s)?;
                let trace = trace_term(&subj.term, &g.checker.fuel).map_err(|e| e.to_string())?;
                let checker = Checker::default();
                for t in &trace[1..] {
                    checker
                        .check_term(&subj.env, subj.layer, t, &subj.ty, &subj.level)
                        .map_err(|d| format!("step {} does not re-check: {d}", show_tm(t)))?;
                }
                Ok(trace.len() > 1)
            }),
            self.law("reduce", "normal-forms-do-not-step", n, "", |s| {
                let (_, subj) = reducible_case(s)?;
                let w = whnf_term(&subj.term, &Fuel::default()).map_err(|e| e.to_string())?;
                if step_term(&w).map_err(|e| e.to_string())?.is_some() {
                    return Err(format!("whnf {} still steps", show_tm(&w)));
                }
                let c = classify_term(&w);
                if !matches!(c, Class::Whnf | Class::Neutral) {
                    return Err(format!("whnf {} is classified {c:?}", show_tm(&w)));
                }
                Ok(true)
            }),
            self.law("reduce", "whnf-convertible", n, "", |s| {
                let (_, subj) = reducible_case(s)?;
                let checker = Checker::default();
                let w = checker.whnf_tm(&subj.term).map_err(|d| d.to_string())?;
                checker
                    .conv_term(&subj.env, subj.layer, &subj.term, &w, &subj.ty)
                    .map_err(|d| format!("{} is not convertible with its whnf: {d}", show_tm(&subj.term)))?;
                Ok(true)
            }),
            self.law("reduce", "stability", n, "", |s| {
                let (mut g, subj) = reducible_case(s)?;
                let (_, d) = lsubst_into(&mut g, &subj.env, subj.layer);
                let fuel = Fuel::default();
                let a = whnf_term(&lsubst_apply(&subj.term, &d).map_err(se)?, &fuel).map_err(|e| e.to_string())?;
                let w = whnf_term(&subj.term, &fuel).map_err(|e| e.to_string())?;
                let b = whnf_term(&lsubst_apply(&w, &d).map_err(se)?, &fuel).map_err(|e| e.to_string())?;
                eq_or(&a, &b, || format!("whnf(t[δ]) != whnf(whnf(t)[δ]) for {}", show_tm(&subj.term)))?;
                Ok(true)
            }),
        ]
    }

    // ---- conversion ---------------------------------------------------

    fn conv(&self) -> Vec<LawReport> {
        let n = self.cases;
        let mut out = vec![
            self.law("conv", "reflexivity", n, "", |s| {
                let (g, subj) = case_subject(s);
                g.checker
                    .conv_term(&subj.env, subj.layer, &subj.term, &subj.term, &subj.ty)
                    .map_err(|d| format!("{} is not convertible with itself: {d}", show_tm(&subj.term)))?;
                g.checker
                    .conv_type(&subj.env, subj.layer.typeof_layer(), &subj.ty, &subj.ty)
                    .map_err(|d| format!("{} is not convertible with itself: {d}", show_ty(&subj.ty)))?;
                Ok(true)
            }),
            self.law("conv", "beta", n, "", |s| {
                let (g, subj) = reducible_case(s)?;
                let next = step_term(&subj.term).map_err(|e| e.to_string())?.ok_or("subject does not step")?;
                g.checker
                    .conv_term(&subj.env, subj.layer, &subj.term, &next, &subj.ty)
                    .map_err(|d| format!("redex {} is not convertible with its reduct: {d}", show_tm(&subj.term)))?;
                Ok(true)
            }),
        ];
        for head in ["Pi", "UPi", "CtxPi", "TyPi"] {
            let name: &'static str = match head {
                "Pi" => "eta-pi",
                "UPi" => "eta-upi",
                "CtxPi" => "eta-ctxpi",
                _ => "eta-typi",
            };
            out.push(self.law("conv", name, n, "neutral functions", |s| {
                let mut g = Gen::new(s);
                let i = if head == "Pi" && g.rng.gen_bool(0.3) { Layer::D } else { Layer::M };
                let env = g.gen_world(CtxShape::Mixed, i);
                let subj = g.subject_in(&env, i, 2, Some(head));
                let f = &subj.term;
                let expanded = eta_expand(f, &subj.ty).ok_or_else(|| format!("subject type {} has the wrong head", show_ty(&subj.ty)))?;
                g.checker
                    .conv_term(&subj.env, i, f, &expanded, &subj.ty)
                    .map_err(|d| format!("{} is not convertible with its eta-expansion: {d}", show_tm(f)))?;
                g.checker
                    .conv_term(&subj.env, i, &expanded, f, &subj.ty)
                    .map_err(|d| format!("the eta-expansion of {} is not convertible with it: {d}", show_tm(f)))?;
                Ok(!matches!(f, Term::Lam(..) | Term::ULam(..) | Term::CtxLam(..) | Term::TyLam(..)))
            }));
        }
        out.push(self.law("conv", "pi-injectivity", n.min(200).max(n / 5), "", |s| {
            let mut g = Gen::new(s);
            let i = if g.rng.gen_bool(0.5) { Layer::D } else { Layer::M };
            let env = g.gen_world(CtxShape::Mixed, i);
            let ti = i.typeof_layer();
            let (p, _) = loop {
                let (t, l) = g.gen_type(&env, i, 2, false);
                if matches!(t, Type::Pi(..)) {
                    break (t, l);
                }
            };
            let q = obfuscate_type(&mut g, &p);
            let (Type::Pi(a1, b1, x, s1, t1), Type::Pi(a2, b2, _, s2, t2)) = (&p, &q) else {
                return Err("obfuscation changed the head".into());
            };
            g.checker
                .conv_type(&env, ti, &p, &q)
                .map_err(|d| format!("generated pair {} / {} is not convertible: {d}", show_ty(&p), show_ty(&q)))?;
            if !level_equiv(a1, a2) || !level_equiv(b1, b2) {
                return Err("levels of convertible Π types differ".into());
            }
            g.checker.conv_type(&env, ti, s1, s2).map_err(|d| format!("domains differ: {d}"))?;
            let env2 = env.push_local(x.clone(), (**s1).clone(), a1.clone());
            g.checker.conv_type(&env2, ti, t1, t2).map_err(|d| format!("codomains differ: {d}"))?;
            Ok(true)
        }));
        out
    }

    // ---- layering -----------------------------------------------------

    fn lift(&self) -> Vec<LawReport> {
        vec![self.law("lift", "c-to-d-and-m", self.cases, "", |s| {
            let mut g = Gen::new(s);
            let cfg = GenConfig { seed: s, depth: 2, layer: Layer::C, shape: CtxShape::Mixed };
            let subj = g.subject(&cfg);
            let checker = Checker::default();
            checker
                .check_term(&subj.env, Layer::C, &subj.term, &subj.ty, &subj.level)
                .map_err(|d| format!("subject does not check at c: {d}"))?;
            for i in [Layer::D, Layer::M] {
                checker
                    .check_type(&subj.env, i.typeof_layer(), &subj.ty, &subj.level)
                    .map_err(|d| format!("type {} does not lift to {i}: {d}", show_ty(&subj.ty)))?;
                checker
                    .check_term(&subj.env, i, &subj.term, &subj.ty, &subj.level)
                    .map_err(|d| format!("{} does not lift to {i}: {d}", show_tm(&subj.term)))?;
            }
            Ok(true)
        })]
    }

    fn static_code(&self) -> Vec<LawReport> {
        vec![self.law("static", "box-conv-is-alpha-mod-levels", self.cases, "pairs judged equal", |s| {
            let mut g = Gen::new(s);
            let env = g.gen_world(CtxShape::Mixed, Layer::M);
            let ctx = g.gen_local_ctx(&env, None, Layer::D, 2);
            let inner = env.with_locals(ctx.clone());
            let checker = Checker::default();
            if g.rng.gen_bool(0.25) {
                let mut l = Level::Zero;
                if g.rng.gen_bool(0.5) && !env.levels.is_empty() {
                    l = Level::Var(0).succ();
                }
                let a = code_type(&mut g, &inner, &l);
                let b = match g.rng.gen_range(0..3) {
                    0 => rewrite_levels_ty(&mut g, &a),
                    1 => code_type(&mut g, &inner, &l),
                    _ => obfuscate_type(&mut g, &a),
                };
                let code = Type::CodeTy(ctx, l);
                let conv = checker.terms_convertible(&env, Layer::M, &Term::BoxTy(Box::new(a.clone())), &Term::BoxTy(Box::new(b.clone())), &code);
                let oracle = alpha_eq_levels_ty(&a, &b);
                return if conv == oracle {
                    Ok(conv)
                } else {
                    Err(format!("boxes of {} and {}: conversion says {conv}, oracle says {oracle}", show_ty(&a), show_ty(&b)))
                };
            }
            let (a, sty, l) = code_term(&mut g, &inner);
            let b = match g.rng.gen_range(0..3) {
                0 => rewrite_levels_tm(&mut g, &a),
                1 => {
                    g.reset_budget();
                    g.tm(&inner, Layer::C, &sty, &l, 2).unwrap_or(Term::Zero)
                }
                _ => wrap_in_redex(&a, &sty, &l),
            };
            let code = Type::CodeTm(ctx, Box::new(sty), l);
            let conv = checker.terms_convertible(&env, Layer::M, &Term::BoxTm(Box::new(a.clone())), &Term::BoxTm(Box::new(b.clone())), &code);
            let oracle = alpha_eq_levels_tm(&a, &b);
            if conv == oracle {
                Ok(conv)
            } else {
                Err(format!("boxes of {} and {}: conversion says {conv}, oracle says {oracle}", show_tm(&a), show_tm(&b)))
            }
        })]
    }

    // ---- generator ----------------------------------------------------

    fn coverage(&self) -> Vec<LawReport> {
        let walker = Walker::default();
        for c in 0..self.cases {
            let (_, subj) = case_subject(self.seed.wrapping_add(c as u64));
            walker.tm(&subj.term);
            walker.ty(&subj.ty);
        }
        let seen = walker.seen.borrow();
        let missing: Vec<&str> = ALL_CONSTRUCTORS.iter().copied().filter(|k| !seen.contains(k)).collect();
        let failures = usize::from(!missing.is_empty());
        vec![LawReport {
            suite: "coverage",
            law: "every-constructor",
            cases: self.cases,
            failures,
            counterexample: (!missing.is_empty())
                .then(|| Counterexample { seed: self.seed, detail: format!("never generated: {}", missing.join(", ")) }),
            note: format!("{}/{} constructors seen", ALL_CONSTRUCTORS.len() - missing.len(), ALL_CONSTRUCTORS.len()),
        }]
    }

    fn self_check(&self) -> Vec<LawReport> {
        let n = self.cases;
        vec![
            self.law("gen", "subjects-check", n, "", |s| {
                let (_, subj) = case_subject(s);
                check_subject(&subj)?;
                Ok(true)
            }),
            self.law("gen", "lsubst-checks", n, "", |s| {
                let (mut g, subj) = case_subject(s);
                let (gp, d) = lsubst_into(&mut g, &subj.env, subj.layer);
                Checker::default()
                    .check_lsubst(&subj.env.with_locals(gp), subj.layer, &d, &subj.env.locals)
                    .map_err(|e| format!("generated substitution is ill-typed: {e}"))?;
                Ok(true)
            }),
            self.law("gen", "gsubst-checks", n, "", |s| {
                let (mut g, subj) = case_subject(s);
                let (target, sigma) = gsubst_into(&mut g, &subj.env);
                check_gsubst(&target, &subj.env.globals, &sigma)?;
                Ok(true)
            }),
            self.law("gen", "reproducible", n, "", |s| {
                let (_, a) = case_subject(s);
                let (_, b) = case_subject(s);
                eq_or(&(a.term, a.ty), &(b.term, b.ty), || "same seed gave different subjects".to_string())?;
                Ok(true)
            }),
        ]
    }
}

/// A type at layer c and level `l`, which is `0` or a successor.
fn code_type(g: &mut Gen, env: &Env, l: &Level) -> Type {
    g.reset_budget();
    g.gen_type_at(env, Layer::C, l, 2).unwrap_or_else(|| match pred_level(l) {
        Some(p) => Type::Ty(p),
        None => Type::Nat,
    })
}

/// A term at layer c with its type and level.
fn code_term(g: &mut Gen, env: &Env) -> (Term, Type, Level) {
    for _ in 0..8 {
        g.reset_budget();
        let (ty, l) = g.gen_type(env, Layer::C, 1, true);
        if let Some(t) = g.tm(env, Layer::C, &ty, &l, 2) {
            return (t, ty, l);
        }
    }
    (Term::Zero, Type::Nat, Level::Zero)
}

/// A reducible subject at layer d or m.
fn reducible_case(seed: u64) -> Result<(Gen, Subject), String> {
    let mut g = Gen::new(seed);
    let i = if g.rng.gen_bool(0.3) { Layer::D } else { Layer::M };
    for _ in 0..8 {
        let env = g.gen_world(CtxShape::Mixed, i);
        if let Some(s) = g.reducible_in(&env, i, 2) {
            return Ok((g, s));
        }
    }
    Err("the generator found no reducible subject for this case".into())
}

/// Check a subject's type and term.
pub fn check_subject(subj: &Subject) -> Result<(), String> {
    let checker = Checker::default();
    let ti = subj.layer.typeof_layer();
    if subj.level != Level::Omega {
        checker.wf_level(&subj.env, "def", &subj.level).map_err(|d| d.to_string())?;
    }
    checker
        .check_type(&subj.env, ti, &subj.ty, &subj.level)
        .map_err(|d| format!("generated type {} is ill-formed: {d}", show_ty(&subj.ty)))?;
    checker
        .check_term(&subj.env, subj.layer, &subj.term, &subj.ty, &subj.level)
        .map_err(|d| format!("generated term {} is ill-typed: {d}", show_tm(&subj.term)))
}

/// `Ψ' ⊢ σ : Ψ`, entry by entry.
fn check_gsubst(target: &Env, source: &GlobalCtx, sigma: &GlobalSubst) -> Result<(), String> {
    if sigma.len() != source.len() {
        return Err("global substitution has the wrong length".into());
    }
    let checker = Checker::default();
    let base = Env::new(target.levels.clone(), target.globals.clone());
    for (p, e) in source.0.iter().enumerate() {
        let prefix = GlobalSubst(sigma.0[..p].to_vec());
        let b = gsubst_apply(&e.binding, &prefix).map_err(se)?;
        let r = match (&b, &sigma.0[p]) {
            (GBinding::Ctx, GEntry::Ctx(c)) => checker.check_lctx(&base, Layer::D, c),
            (GBinding::Typ { ctx, layer, level }, GEntry::Typ(t)) => {
                checker.check_type(&base.with_locals(ctx.clone()), *layer, t, level)
            }
            (GBinding::Trm { ctx, layer, ty, level }, GEntry::Trm(t)) => {
                checker.check_term(&base.with_locals(ctx.clone()), *layer, t, ty, level)
            }
            _ => return Err(format!("entry {p} has the wrong kind")),
        };
        r.map_err(|d| format!("entry {p} is ill-typed: {d}"))?;
    }
    Ok(())
}

/// The η-expansion of `f` at a function type, or `None` at other types.
pub fn eta_expand(f: &Term, ty: &Type) -> Option<Term> {
    Some(match ty {
        Type::Pi(l1, l2, x, s, t) => {
            let app = Term::App(
                Box::new(shift_locals(f, 0, 1)),
                l1.clone(),
                l2.clone(),
                x.clone(),
                Box::new(shift_locals(&**s, 0, 1)),
                Box::new(shift_locals(&**t, 1, 1)),
                Box::new(Term::LocalVar(0)),
            );
            Term::Lam(l1.clone(), l2.clone(), x.clone(), s.clone(), Box::new(app))
        }
        Type::UPi(ns, l, _) => {
            let n = ns.len();
            let args = (0..n).rev().map(Level::Var).collect();
            Term::ULam(l.clone(), ns.clone(), Box::new(Term::UApp(Box::new(shift_levels(f, 0, n)), args)))
        }
        Type::CtxPi(g, l, _) => Term::CtxLam(l.clone(), g.clone(), Box::new(Term::CtxApp(Box::new(shift_globals(f, 0, 1)), LocalCtx::var(0)))),
        Type::TyPi(u, ctx, l1, l2, _) => {
            let ctx1 = shift_globals(ctx, 0, 1);
            let arg = Type::GVar(0, lid(&ctx1));
            Term::TyLam(l1.clone(), l2.clone(), u.clone(), ctx.clone(), Box::new(Term::TyApp(Box::new(shift_globals(f, 0, 1)), Box::new(arg))))
        }
        _ => return None,
    })
}

/// `(λ(z : Nat). t) zero`, which reduces to `t`.
pub fn wrap_in_redex(t: &Term, ty: &Type, l: &Level) -> Term {
    let z = Name::new("z");
    let body = shift_locals(t, 0, 1);
    let cod = shift_locals(ty, 0, 1);
    let lam = Term::Lam(Level::Zero, l.clone(), z.clone(), Box::new(Type::Nat), Box::new(body));
    Term::App(Box::new(lam), Level::Zero, l.clone(), z, Box::new(Type::Nat), Box::new(cod), Box::new(Term::Zero))
}

/// A type convertible with `t` but written differently: base types are
/// replaced by decodings of their codes and codes are wrapped in redexes.
pub fn obfuscate_type(g: &mut Gen, t: &Type) -> Type {
    match t {
        Type::Nat => {
            if g.rng.gen_bool(0.5) {
                Type::El(Level::Zero, Box::new(Term::NatCode))
            } else {
                let code = wrap_in_redex(&Term::NatCode, &Type::Ty(Level::Zero), &Level::nat(1));
                Type::El(Level::Zero, Box::new(code))
            }
        }
        Type::Ty(l) => Type::El(l.clone().succ(), Box::new(Term::TyCode(l.clone()))),
        Type::Pi(a, b, x, s, body) => {
            Type::Pi(a.clone(), b.clone(), x.clone(), Box::new(obfuscate_type(g, s)), Box::new(obfuscate_type(g, body)))
        }
        Type::El(l, c) => {
            let ty = Type::Ty(l.clone());
            Type::El(l.clone(), Box::new(wrap_in_redex(c, &ty, &l.clone().succ())))
        }
        other => other.clone(),
    }
}

/// An equivalent but differently written level.
fn rewrite_level(g: &mut Gen, l: &Level, depth: usize) -> Level {
    if depth == 0 {
        return l.clone();
    }
    let r = match l {
        Level::Lub(a, b) if g.rng.gen_bool(0.5) => rewrite_level(g, b, depth - 1).lub(rewrite_level(g, a, depth - 1)),
        Level::Lub(a, b) => rewrite_level(g, a, depth - 1).lub(rewrite_level(g, b, depth - 1)),
        Level::Succ(a) => match &**a {
            Level::Lub(x, y) if g.rng.gen_bool(0.5) => x.clone().succ().lub(y.clone().succ()),
            _ => rewrite_level(g, a, depth - 1).succ(),
        },
        other => other.clone(),
    };
    match g.rng.gen_range(0..4) {
        0 => r.clone().lub(Level::Zero),
        1 => r.clone().lub(r),
        _ => r,
    }
}

fn rewrite_levels_tm(g: &mut Gen, t: &Term) -> Term {
    let salt: u64 = g.rng.gen();
    map_levels(t, salt)
}

fn rewrite_levels_ty(g: &mut Gen, t: &Type) -> Type {
    let salt: u64 = g.rng.gen();
    map_levels(t, salt)
}

/// Rewrite every level through [`rewrite_level`], seeded by `salt`. A
/// universe substitution that maps each variable to itself joined with
/// zero does exactly that, and also touches every constant occurrence.
fn map_levels<S: delam_core::subst::Syn>(s: &S, salt: u64) -> S {
    let mut g = Gen::new(salt);
    let ident = UnivSubst((0..8).rev().map(|i| rewrite_level(&mut g, &Level::Var(i), 1).lub(Level::Zero)).collect());
    usubst_apply_syntax(s, &ident).unwrap_or_else(|_| s.clone())
}
