//! Kernel for a dependent layered modal type theory.
//!
//! The theory stratifies programs into four layers: `v` (variables),
//! `c` (static code), `d` (dynamic programs, a Martin-Löf type theory with
//! universe levels) and `m` (meta-programs that build and inspect code of
//! the lower layers). This crate provides the syntax, substitution,
//! weak-head reduction, type checking and convertibility checking, plus a
//! small surface language for writing programs.

pub mod convert;
pub mod recursor;
pub mod reduce;
pub mod subst;
pub mod surface;
pub mod syntax;
pub mod typing;
pub mod ulevel;
