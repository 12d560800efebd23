//! The law suites must notice a broken substitution.

use delam_lawbench::{run_suite_with, Ops};

#[test]
fn reference_substitution_passes_the_lsubst_laws() {
    let reports = run_suite_with("lsubst", 200, 7, &Ops::reference()).unwrap();
    for r in &reports {
        assert!(r.passed(), "{r}");
    }
}

#[test]
fn skipping_the_shift_under_binders_is_caught() {
    let reports = run_suite_with("lsubst", 200, 7, &Ops::mutant()).unwrap();
    let failed: Vec<_> = reports.iter().filter(|r| !r.passed()).collect();
    assert!(!failed.is_empty(), "no lsubst law noticed the mutant");
    let c = failed[0].counterexample.as_ref().expect("a failing law records its first case");
    // Replaying the reported seed alone reproduces the failure.
    let replay = run_suite_with("lsubst", 1, c.seed, &Ops::mutant()).unwrap();
    assert!(replay.iter().any(|r| r.law == failed[0].law && !r.passed()));
}
