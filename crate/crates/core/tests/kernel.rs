//! Kernel behaviour through the public API: single judgments, the surface
//! language, and numeral arithmetic against machine integers.

use delam_core::surface::{check_program, parse_program, parse_term, parse_type, Printer, Program};
use delam_core::syntax::{GBinding, GlobalCtx, Layer, LocalCtx, LocalSubst, LsBase, Name, Term, Type};
use delam_core::typing::{Checker, Env};
use delam_core::ulevel::Level;
use proptest::prelude::*;

fn empty_env() -> Env {
    Env::new(Vec::new(), GlobalCtx::new())
}

fn program(src: &str) -> Program {
    let prog = parse_program(src).unwrap_or_else(|e| panic!("{e}"));
    check_program(&prog, &Checker::default()).unwrap_or_else(|f| panic!("{}", f.diagnostic));
    prog
}

fn numeral(n: u64) -> Term {
    (0..n).fold(Term::Zero, |t, _| Term::succ(t))
}

#[test]
fn zero_is_a_static_natural() {
    let (ty, l) = Checker::default().infer_term(&empty_env(), Layer::C, &Term::Zero).unwrap();
    assert_eq!(ty, Type::Nat);
    assert_eq!(l, Level::Zero);
}

#[test]
fn boxed_code_checks_only_at_m() {
    let code = Term::BoxTm(Box::new(Term::Zero));
    let ty = Type::CodeTm(LocalCtx::empty(), Box::new(Type::Nat), Level::Zero);
    let c = Checker::default();
    assert!(c.check_term(&empty_env(), Layer::M, &code, &ty, &Level::Zero).is_ok());
    assert!(c.check_term(&empty_env(), Layer::D, &code, &ty, &Level::Zero).is_err());
}

#[test]
fn level_polymorphism_is_rejected_below_m() {
    let upi = parse_type("UPi(l, 1+l, Ty l)", &empty_env()).unwrap();
    let c = Checker::default();
    assert_eq!(c.infer_type(&empty_env(), Layer::M, &upi).unwrap(), Level::Omega);
    assert_eq!(c.infer_type(&empty_env(), Layer::D, &upi).unwrap_err().rule, "ty-upi");
}

#[test]
fn term_globals_at_d_are_rejected() {
    let mut psi = GlobalCtx::new();
    psi.push(
        Name::new("u"),
        GBinding::Trm { ctx: LocalCtx::empty(), layer: Layer::D, ty: Type::Nat, level: Level::Zero },
    );
    assert_eq!(Checker::default().check_gctx(&Vec::new(), &psi).unwrap_err().rule, "gctx-trm");
}

#[test]
fn empty_substitution_must_agree_on_the_context_variable() {
    let mut psi = GlobalCtx::new();
    psi.push(Name::new("g"), GBinding::Ctx);
    let env = Env::new(Vec::new(), psi);
    let c = Checker::default();
    let from_g = LocalSubst { base: LsBase::Empty { g: Some(0), k: 0 }, entries: vec![] };
    let closed = LocalSubst { base: LsBase::Empty { g: None, k: 0 }, entries: vec![] };
    // Domain `.` with a base claiming `g`.
    assert_eq!(c.check_lsubst(&env, Layer::C, &from_g, &LocalCtx::empty()).unwrap_err().rule, "lsubst-base");
    assert!(c.check_lsubst(&env, Layer::C, &closed, &LocalCtx::empty()).is_ok());
    // Domain `g` accepts it.
    assert!(c.check_lsubst(&env.with_locals(LocalCtx::var(0)), Layer::C, &from_g, &LocalCtx::empty()).is_ok());
}

#[test]
fn el_applies_to_a_code() {
    let t = parse_type("El 0 Nat", &empty_env()).unwrap();
    assert_eq!(t, Type::El(Level::Zero, Box::new(Term::NatCode)));
}

#[test]
fn recursor_stuck_on_a_global_is_convertible_with_itself() {
    let prog = program(
        "global U : [. |- Ty 0] @ c;
         def s @m : Nat @ 0 := elimTy(0, 0, 0, [.], boxty U) {
             ty l g x => Nat; tm l g T x => Nat
           | nat g => 0 | pi l1 l0 g S T rS rT => 0 | ty l g => 0 | el l g t rt => 0
           | var l g V x => 0 | natc g => 0 | pic l1 l0 g s t rs rt => 0 | tyc l g => 0
           | zero g => 0 | succ g t rt => 0 | elimnat l g M s s1 t rM rs rs1 rt => 0
           | lam l1 l0 g S T t rS rt => 0 | app l1 l0 g S T t s rS rT rt rs => 0 };",
    );
    let s = prog.def("s").unwrap();
    let c = Checker::default();
    let env = prog.env();
    assert!(c.conv_term(&env, Layer::M, &s.body, &s.body, &Type::Nat).is_ok());
    assert!(c.conv_term(&env, Layer::M, &s.body, &Term::Zero, &Type::Nat).is_err());
}

#[test]
fn corpus_round_trips_through_the_printer() {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus/ok");
    let mut seen = 0;
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        let prog = parse_program(&std::fs::read_to_string(&path).unwrap()).unwrap();
        let env = prog.env();
        let printer = Printer::from_env(&env);
        for d in &prog.defs {
            let (ty, tm) = (printer.ty(&d.ty), printer.tm(&d.body));
            assert_eq!(parse_type(&ty, &env).unwrap(), d.ty, "{}: {ty}", path.display());
            assert_eq!(parse_term(&tm, &env).unwrap(), d.body, "{}: {tm}", path.display());
            seen += 1;
        }
    }
    assert!(seen > 100);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn recursion_computes_addition(n in 0u64..20, m in 0u64..20) {
        let env = empty_env();
        let plus = parse_term(&format!("elimNat(0, x. Nat, {n}, x r. succ r, {m})"), &env).unwrap();
        let c = Checker::default();
        c.check_term(&env, Layer::C, &plus, &Type::Nat, &Level::Zero).unwrap();
        prop_assert!(c.conv_term(&env, Layer::D, &plus, &numeral(n + m), &Type::Nat).is_ok());
        prop_assert!(c.conv_term(&env, Layer::D, &plus, &numeral(n + m + 1), &Type::Nat).is_err());
    }

    #[test]
    fn recursion_computes_multiplication(n in 0u64..8, m in 0u64..8) {
        let env = empty_env();
        let times = parse_term(
            &format!("elimNat(0, x. Nat, 0, x r. elimNat(0, y. Nat, r, y s. succ s, {n}), {m})"),
            &env,
        )
        .unwrap();
        let c = Checker::default();
        c.check_term(&env, Layer::M, &times, &Type::Nat, &Level::Zero).unwrap();
        prop_assert!(c.conv_term(&env, Layer::M, &times, &numeral(n * m), &Type::Nat).is_ok());
    }

    #[test]
    fn application_of_the_successor_function(n in 0u64..30) {
        let env = empty_env();
        let t = parse_term(&format!("app(fun(0, 0, x : Nat) => succ x, 0, 0, x : Nat, Nat, {n})"), &env).unwrap();
        prop_assert!(Checker::default().conv_term(&env, Layer::D, &t, &numeral(n + 1), &Type::Nat).is_ok());
    }
}
