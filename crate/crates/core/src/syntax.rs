//! Abstract syntax of types, terms, contexts and substitutions.
//!
//! Every sort of variable is a de Bruijn index counted from the innermost
//! binder of its own kind: level variables, global (meta) variables and
//! local variables each have separate index spaces. Binder names are kept
//! only for printing; [`Name`] compares equal to every other name, so the
//! derived `PartialEq` on the syntax is α-equivalence.

use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use crate::ulevel::Level;

/// A binder name, ignored by equality and hashing.
#[derive(Clone)]
pub struct Name(pub Arc<str>);

impl Name {
    pub fn new(s: &str) -> Name {
        Name(Arc::from(s))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl PartialEq for Name {
    fn eq(&self, _: &Name) -> bool {
        true
    }
}

impl Eq for Name {}

impl Hash for Name {
    fn hash<H: Hasher>(&self, _: &mut H) {}
}

impl fmt::Debug for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<&str> for Name {
    fn from(s: &str) -> Name {
        Name::new(s)
    }
}

/// The four layers, ordered `V < C < D < M`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Layer {
    /// Variables only.
    V,
    /// Static code.
    C,
    /// Dynamic (ordinary dependent) programs.
    D,
    /// Meta-programs.
    M,
}

impl Layer {
    /// The layer at which the types of a layer-`self` judgement live.
    pub fn typeof_layer(self) -> Layer {
        match self {
            Layer::V | Layer::C | Layer::D => Layer::D,
            Layer::M => Layer::M,
        }
    }

    /// Layers at which convertibility is defined.
    pub fn is_comp(self) -> bool {
        matches!(self, Layer::D | Layer::M)
    }

    pub fn letter(self) -> char {
        match self {
            Layer::V => 'v',
            Layer::C => 'c',
            Layer::D => 'd',
            Layer::M => 'm',
        }
    }

    pub fn from_letter(s: &str) -> Option<Layer> {
        Some(match s {
            "v" => Layer::V,
            "c" => Layer::C,
            "d" => Layer::D,
            "m" => Layer::M,
            _ => return None,
        })
    }
}

impl fmt::Display for Layer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.letter())
    }
}

/// Types.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Type {
    Nat,
    /// `Π^{l,l'}(x : S). T`, with `S` at level `l` and `T` at level `l'`.
    Pi(Level, Level, Name, Box<Type>, Box<Type>),
    /// The universe `Ty l`.
    Ty(Level),
    /// `∀ ℓ⃗ . T @ l`; binds at least one level variable.
    UPi(Vec<Name>, Level, Box<Type>),
    /// Decoding of a code of type `Ty l`.
    El(Level, Box<Term>),
    /// A global type variable under a local substitution, `U^δ`.
    GVar(usize, LocalSubst),
    /// `(g : Ctx) ⇒ T @ l`.
    CtxPi(Name, Level, Box<Type>),
    /// `(U : (Δ ⊢ Ty l)) ⇒ T @ l'`.
    TyPi(Name, LocalCtx, Level, Level, Box<Type>),
    /// Code of a type: `□(Δ ⊢ Ty l)`.
    CodeTy(LocalCtx, Level),
    /// Code of a term: `□(Δ ⊢ T : l)`.
    CodeTm(LocalCtx, Box<Type>, Level),
}

/// Terms.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Term {
    LocalVar(usize),
    /// A global term variable under a local substitution, `u^δ`.
    GVar(usize, LocalSubst),
    /// Code of `Nat` in `Ty 0`.
    NatCode,
    /// Code of a Π-type; `t` is under the binder.
    PiCode(Level, Level, Name, Box<Term>, Box<Term>),
    /// Code of `Ty l` in `Ty (1+l)`.
    TyCode(Level),
    Zero,
    Succ(Box<Term>),
    /// `elimNat^l (x. M) s (x y. s') t`.
    ElimNat(Level, Box<Type>, Box<Term>, Box<Term>, Box<Term>),
    /// `λ^{l,l'}(x : S). t`.
    Lam(Level, Level, Name, Box<Type>, Box<Term>),
    /// `t s` fully annotated with the function type: `App(t, l, l', x, S, T, s)`.
    App(Box<Term>, Level, Level, Name, Box<Type>, Box<Type>, Box<Term>),
    /// `Λ ℓ⃗ . t @ l`.
    ULam(Level, Vec<Name>, Box<Term>),
    /// `t $ l⃗`.
    UApp(Box<Term>, Vec<Level>),
    /// `Λ g . t @ l`.
    CtxLam(Level, Name, Box<Term>),
    /// `t $ Δ`.
    CtxApp(Box<Term>, LocalCtx),
    /// `Λ (U : (Δ ⊢ Ty l)) . t @ l'`: `TyLam(l, l', U, Δ, t)`.
    TyLam(Level, Level, Name, LocalCtx, Box<Term>),
    /// `t $ T`; `T` lives in the bound variable's context.
    TyApp(Box<Term>, Box<Type>),
    /// `box T`; the type lives in some context `Δ` fixed by the expected type.
    BoxTy(Box<Type>),
    /// `box t`.
    BoxTm(Box<Term>),
    /// `letbox_{l'} (x_T. M) U : (Δ ⊢ Ty l) := t in body`:
    /// `LetBoxTy(l', l, Δ, M, U, body, t)`.
    LetBoxTy(Level, Level, LocalCtx, Box<Type>, Name, Box<Term>, Box<Term>),
    /// `LetBoxTm(l', l, Δ, T, M, u, body, t)`.
    LetBoxTm(Level, Level, LocalCtx, Box<Type>, Box<Type>, Name, Box<Term>, Box<Term>),
    /// Recursor on type codes: `ElimTyp(l1, l2, M, b⃗, l, Δ, t)`.
    ElimTyp(Level, Level, Box<Motives>, Box<Branches>, Level, LocalCtx, Box<Term>),
    /// Recursor on term codes: `ElimTrm(l1, l2, M, b⃗, l, Δ, T, t)`.
    ElimTrm(
        Level,
        Level,
        Box<Motives>,
        Box<Branches>,
        Level,
        LocalCtx,
        Box<Type>,
        Box<Term>,
    ),
}

/// The two motives of the code recursors.
///
/// `typ` lives under `ℓ; g : Ctx; x_T : □(g ⊢ Ty ℓ)`;
/// `trm` under `ℓ; g : Ctx, U_T : (g ⊢_d Ty ℓ); x_t : □(g ⊢ U_T^id : ℓ)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Motives {
    pub typ_name: Name,
    pub typ: Type,
    pub trm_name: Name,
    pub trm: Type,
}

/// The thirteen cases of the code recursors.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BranchKind {
    Nat,
    Pi,
    Ty,
    El,
    Var,
    NatCode,
    PiCode,
    TyCode,
    Zero,
    Succ,
    ElimNat,
    Lam,
    App,
}

impl BranchKind {
    pub const ALL: [BranchKind; 13] = [
        BranchKind::Nat,
        BranchKind::Pi,
        BranchKind::Ty,
        BranchKind::El,
        BranchKind::Var,
        BranchKind::NatCode,
        BranchKind::PiCode,
        BranchKind::TyCode,
        BranchKind::Zero,
        BranchKind::Succ,
        BranchKind::ElimNat,
        BranchKind::Lam,
        BranchKind::App,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    /// Number of (level, global, local) binders the case introduces.
    pub fn arity(self) -> (usize, usize, usize) {
        match self {
            BranchKind::Nat => (0, 1, 0),
            BranchKind::Pi => (2, 3, 2),
            BranchKind::Ty => (1, 1, 0),
            BranchKind::El => (1, 2, 1),
            BranchKind::Var => (1, 3, 0),
            BranchKind::NatCode => (0, 1, 0),
            BranchKind::PiCode => (2, 3, 2),
            BranchKind::TyCode => (1, 1, 0),
            BranchKind::Zero => (0, 1, 0),
            BranchKind::Succ => (0, 2, 1),
            BranchKind::ElimNat => (1, 5, 4),
            BranchKind::Lam => (2, 4, 2),
            BranchKind::App => (2, 5, 4),
        }
    }

    /// Total number of binder names a case carries.
    pub fn binder_count(self) -> usize {
        let (a, b, c) = self.arity();
        a + b + c
    }

    /// Whether the case belongs to the type-code recursor.
    pub fn is_type_case(self) -> bool {
        matches!(self, BranchKind::Nat | BranchKind::Pi | BranchKind::Ty | BranchKind::El)
    }

    pub fn keyword(self) -> &'static str {
        match self {
            BranchKind::Nat => "nat",
            BranchKind::Pi => "pi",
            BranchKind::Ty => "ty",
            BranchKind::El => "el",
            BranchKind::Var => "var",
            BranchKind::NatCode => "natc",
            BranchKind::PiCode => "pic",
            BranchKind::TyCode => "tyc",
            BranchKind::Zero => "zero",
            BranchKind::Succ => "succ",
            BranchKind::ElimNat => "elimnat",
            BranchKind::Lam => "lam",
            BranchKind::App => "app",
        }
    }

    pub fn from_keyword(s: &str) -> Option<BranchKind> {
        BranchKind::ALL.into_iter().find(|k| k.keyword() == s)
    }
}

/// One recursor case: binder names (levels, then globals, then locals)
/// and the body under them.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Branch {
    pub binders: Vec<Name>,
    pub body: Term,
}

/// Errors constructing recursor data.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SyntaxError {
    #[error("the {kind} case binds {expected} names but {found} were given")]
    BranchArity { kind: &'static str, expected: usize, found: usize },
    #[error("a recursor needs exactly 13 cases, found {0}")]
    BranchCount(usize),
    #[error("a universe abstraction must bind at least one level variable")]
    EmptyLevelBinder,
}

/// All thirteen cases, indexed by [`BranchKind`].
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Branches(Vec<Branch>);

impl Branches {
    /// Build from cases given in [`BranchKind::ALL`] order, checking binder
    /// counts.
    pub fn new(cases: Vec<Branch>) -> Result<Branches, SyntaxError> {
        if cases.len() != 13 {
            return Err(SyntaxError::BranchCount(cases.len()));
        }
        for (k, b) in BranchKind::ALL.iter().zip(&cases) {
            if b.binders.len() != k.binder_count() {
                return Err(SyntaxError::BranchArity {
                    kind: k.keyword(),
                    expected: k.binder_count(),
                    found: b.binders.len(),
                });
            }
        }
        Ok(Branches(cases))
    }

    pub fn get(&self, k: BranchKind) -> &Branch {
        &self.0[k.index()]
    }

    pub fn iter(&self) -> impl Iterator<Item = (BranchKind, &Branch)> {
        BranchKind::ALL.into_iter().zip(self.0.iter())
    }

    pub(crate) fn map_bodies<E>(
        &self,
        mut f: impl FnMut(BranchKind, &Term) -> Result<Term, E>,
    ) -> Result<Branches, E> {
        let v = self
            .iter()
            .map(|(k, b)| Ok(Branch { binders: b.binders.clone(), body: f(k, &b.body)? }))
            .collect::<Result<_, E>>()?;
        Ok(Branches(v))
    }
}

/// The base of a local context: empty, or a context variable.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum CtxBase {
    Empty,
    Var(usize),
}

/// One local binding `x : T @ l`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CtxEntry {
    pub name: Name,
    pub ty: Type,
    pub level: Level,
}

/// A local context `Γ`: a base followed by entries, oldest first. Local
/// variable `j` is entry `len - 1 - j`; the base contributes no variables.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LocalCtx {
    pub base: CtxBase,
    pub entries: Vec<CtxEntry>,
}

impl LocalCtx {
    pub fn empty() -> LocalCtx {
        LocalCtx { base: CtxBase::Empty, entries: Vec::new() }
    }

    pub fn var(g: usize) -> LocalCtx {
        LocalCtx { base: CtxBase::Var(g), entries: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn push(mut self, name: Name, ty: Type, level: Level) -> LocalCtx {
        self.entries.push(CtxEntry { name, ty, level });
        self
    }

    /// Base variable, if the context ends in one.
    pub fn base_var(&self) -> Option<usize> {
        match self.base {
            CtxBase::Var(g) => Some(g),
            CtxBase::Empty => None,
        }
    }

    /// Prefix with the first `n` entries.
    pub fn prefix(&self, n: usize) -> LocalCtx {
        LocalCtx { base: self.base.clone(), entries: self.entries[..n].to_vec() }
    }
}

/// The base of a local substitution `δ : Γ ⇒ Δ`.
///
/// `k` always counts the entries of the domain `Γ`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum LsBase {
    /// `·^k` (when `g` is `None`) or `·_g^k`: targets the empty context.
    Empty { g: Option<usize>, k: usize },
    /// `wk_g^k`: targets the context variable `g`.
    Wk { g: usize, k: usize },
}

/// A local substitution: a base followed by one term per target entry.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LocalSubst {
    pub base: LsBase,
    pub entries: Vec<Term>,
}

impl LocalSubst {
    /// `ˆδ`: the number of entries of the domain.
    pub fn hat(&self) -> usize {
        match self.base {
            LsBase::Empty { k, .. } | LsBase::Wk { k, .. } => k,
        }
    }

    /// `ˇδ`: the base of the domain.
    pub fn check(&self) -> Option<usize> {
        match self.base {
            LsBase::Empty { g, .. } => g,
            LsBase::Wk { g, .. } => Some(g),
        }
    }

    /// Entry for local variable `j` of the target.
    pub fn lookup(&self, j: usize) -> Option<&Term> {
        let n = self.entries.len();
        if j < n {
            Some(&self.entries[n - 1 - j])
        } else {
            None
        }
    }

    pub fn push(mut self, t: Term) -> LocalSubst {
        self.entries.push(t);
        self
    }

    /// The prefix with the base and the first `n` entries.
    pub fn prefix(&self, n: usize) -> LocalSubst {
        LocalSubst { base: self.base.clone(), entries: self.entries[..n].to_vec() }
    }
}

/// `lwk(Γ, k)`: the weakening from `Γ` extended by `k` further entries
/// back to `Γ`. `lwk(Γ, 0)` is the identity on `Γ`.
pub fn lwk(ctx: &LocalCtx, k: usize) -> LocalSubst {
    let n = ctx.len();
    let base = match ctx.base {
        CtxBase::Empty => LsBase::Empty { g: None, k: n + k },
        CtxBase::Var(g) => LsBase::Wk { g, k: n + k },
    };
    LocalSubst { base, entries: (0..n).rev().map(|j| Term::LocalVar(j + k)).collect() }
}

/// `id_Γ`.
pub fn lid(ctx: &LocalCtx) -> LocalSubst {
    lwk(ctx, 0)
}

/// Layer of a global type binding.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum GBinding {
    /// `g : Ctx`.
    Ctx,
    /// `U : (Δ ⊢_i Ty l)` with `i ∈ {c, d}`.
    Typ { ctx: LocalCtx, layer: Layer, level: Level },
    /// `u : (Δ ⊢_i T : l)` with `i ∈ {v, c}`.
    Trm { ctx: LocalCtx, layer: Layer, ty: Type, level: Level },
}

/// One named global binding.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GlobalEntry {
    pub name: Name,
    pub binding: GBinding,
}

/// The global context `Ψ`, oldest first. Each binding lives in the scope
/// of the bindings before it.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct GlobalCtx(pub Vec<GlobalEntry>);

impl GlobalCtx {
    pub fn new() -> GlobalCtx {
        GlobalCtx(Vec::new())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn push(&mut self, name: Name, binding: GBinding) {
        self.0.push(GlobalEntry { name, binding });
    }

    /// The raw entry for global index `j`, still in its own prefix scope.
    pub fn raw(&self, j: usize) -> Option<&GlobalEntry> {
        let n = self.0.len();
        if j < n {
            Some(&self.0[n - 1 - j])
        } else {
            None
        }
    }

    pub fn names(&self) -> Vec<Name> {
        self.0.iter().map(|e| e.name.clone()).collect()
    }
}

/// One entry of a global substitution.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum GEntry {
    Ctx(LocalCtx),
    Typ(Type),
    Trm(Term),
}

/// A global substitution `σ : Ψ' ⇒ Ψ`, one entry per binding of `Ψ` in
/// context order.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct GlobalSubst(pub Vec<GEntry>);

impl GlobalSubst {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn lookup(&self, j: usize) -> Option<&GEntry> {
        let n = self.0.len();
        if j < n {
            Some(&self.0[n - 1 - j])
        } else {
            None
        }
    }
}

/// Syntactic classification of a term or type.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Class {
    /// Weak-head normal and not neutral.
    Whnf,
    /// Blocked on a variable.
    Neutral,
    /// The head is a redex, or a subterm in head position can step.
    Reducible,
    /// Neither normal nor reducible: ill-typed, or a code with no
    /// recursor case.
    Stuck,
}

impl Type {
    pub fn pi(l: Level, l2: Level, x: &str, s: Type, t: Type) -> Type {
        Type::Pi(l, l2, Name::new(x), Box::new(s), Box::new(t))
    }

    pub fn el(l: Level, t: Term) -> Type {
        Type::El(l, Box::new(t))
    }
}

impl Term {
    pub fn succ(t: Term) -> Term {
        Term::Succ(Box::new(t))
    }

    /// The numeral `n`.
    pub fn numeral(n: u64) -> Term {
        (0..n).fold(Term::Zero, |t, _| Term::succ(t))
    }

    pub fn lam(l: Level, l2: Level, x: &str, s: Type, body: Term) -> Term {
        Term::Lam(l, l2, Name::new(x), Box::new(s), Box::new(body))
    }

    /// If the term is a numeral, its value.
    pub fn as_numeral(&self) -> Option<u64> {
        match self {
            Term::Zero => Some(0),
            Term::Succ(t) => t.as_numeral().map(|n| n + 1),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_do_not_affect_equality() {
        let a = Term::lam(Level::Zero, Level::Zero, "x", Type::Nat, Term::LocalVar(0));
        let b = Term::lam(Level::Zero, Level::Zero, "y", Type::Nat, Term::LocalVar(0));
        assert_eq!(a, b);
    }

    #[test]
    fn lwk_of_extended_context() {
        let ctx = LocalCtx::empty().push(Name::new("x"), Type::Nat, Level::Zero);
        let d = lwk(&ctx, 1);
        assert_eq!(d.base, LsBase::Empty { g: None, k: 2 });
        assert_eq!(d.entries, vec![Term::LocalVar(1)]);
        let g = LocalCtx::var(3).push(Name::new("x"), Type::Nat, Level::Zero);
        let id = lid(&g);
        assert_eq!(id.base, LsBase::Wk { g: 3, k: 1 });
        assert_eq!(id.entries, vec![Term::LocalVar(0)]);
    }

    #[test]
    fn branch_arity_is_checked() {
        let bad = (0..13)
            .map(|_| Branch { binders: vec![], body: Term::Zero })
            .collect::<Vec<_>>();
        assert!(matches!(Branches::new(bad), Err(SyntaxError::BranchArity { kind: "nat", .. })));
        let good = BranchKind::ALL
            .iter()
            .map(|k| Branch {
                binders: (0..k.binder_count()).map(|i| Name::new(&format!("a{i}"))).collect(),
                body: Term::Zero,
            })
            .collect();
        assert!(Branches::new(good).is_ok());
    }

    #[test]
    fn layer_order() {
        assert!(Layer::V < Layer::C && Layer::C < Layer::D && Layer::D < Layer::M);
        assert_eq!(Layer::C.typeof_layer(), Layer::D);
        assert_eq!(Layer::M.typeof_layer(), Layer::M);
    }
}
