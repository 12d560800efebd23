//! Randomised law suites for the delam kernel.
//!
//! [`gen`] builds well-typed levels, substitutions and terms from typing
//! templates. [`suites`] turns the algebraic and metatheoretic properties
//! of substitution, reduction and conversion into executable laws, each
//! run over many generated cases. A failing law reports the seed of its
//! first counterexample; rerunning the suite with that seed and
//! `cases = 1` replays it.

use std::fmt;

pub mod gen;
pub mod oracle;
pub mod suites;

pub use gen::{CtxShape, Gen, GenConfig, Subject};
pub use suites::{mutant_skip_binder_shift, run_suite, run_suite_with, Ops, SUITES};

/// The first failing case of a law.
#[derive(Clone, Debug)]
pub struct Counterexample {
    /// Seed that regenerates the case.
    pub seed: u64,
    pub detail: String,
}

/// Outcome of running one law.
#[derive(Clone, Debug)]
pub struct LawReport {
    pub suite: &'static str,
    pub law: &'static str,
    pub cases: usize,
    pub failures: usize,
    pub counterexample: Option<Counterexample>,
    /// Extra counts worth printing, such as how many cases were non-trivial.
    pub note: String,
}

impl LawReport {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

impl fmt::Display for LawReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if self.passed() { "PASS" } else { "FAIL" };
        write!(f, "{status} {}/{}: {} cases", self.suite, self.law, self.cases)?;
        if self.failures > 0 {
            write!(f, ", {} failures", self.failures)?;
        }
        if !self.note.is_empty() {
            write!(f, " ({})", self.note)?;
        }
        if let Some(c) = &self.counterexample {
            write!(f, "\n  first counterexample, seed {}: {}", c.seed, c.detail)?;
        }
        Ok(())
    }
}

/// Unknown suite name.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown suite `{0}`; available: {list}", list = SUITES.join(", "))]
pub struct UnknownSuite(pub String);
