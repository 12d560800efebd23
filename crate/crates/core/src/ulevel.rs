//! Universe levels.
//!
//! Level variables are de Bruijn indices counted from the end of the
//! enclosing [`UnivCtx`]: `Var(0)` is the most recently bound variable.
//! Equivalence is decided by the count/adjust/flatten normaliser, which
//! reduces every finite level to a canonical `c ⊔ n₁+ℓ₁ ⊔ … ⊔ nₖ+ℓₖ` form.

use std::collections::BTreeMap;
use std::fmt;

use crate::syntax::Name;

/// A universe level expression.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Level {
    Var(usize),
    Zero,
    Succ(Box<Level>),
    Lub(Box<Level>, Box<Level>),
    /// The limit level, only ever the level of a universe-polymorphic type.
    Omega,
}

impl Level {
    pub fn var(i: usize) -> Level {
        Level::Var(i)
    }

    pub fn succ(self) -> Level {
        Level::Succ(Box::new(self))
    }

    pub fn lub(self, other: Level) -> Level {
        Level::Lub(Box::new(self), Box::new(other))
    }

    /// `n + self`.
    pub fn plus(self, n: u64) -> Level {
        (0..n).fold(self, |l, _| l.succ())
    }

    /// The level `n`.
    pub fn nat(n: u64) -> Level {
        Level::Zero.plus(n)
    }

    pub fn is_omega(&self) -> bool {
        matches!(self, Level::Omega)
    }

    /// True when `Omega` occurs anywhere inside.
    pub fn mentions_omega(&self) -> bool {
        match self {
            Level::Omega => true,
            Level::Var(_) | Level::Zero => false,
            Level::Succ(l) => l.mentions_omega(),
            Level::Lub(a, b) => a.mentions_omega() || b.mentions_omega(),
        }
    }

    /// Largest free variable index plus one.
    pub fn var_bound(&self) -> usize {
        match self {
            Level::Var(i) => i + 1,
            Level::Zero | Level::Omega => 0,
            Level::Succ(l) => l.var_bound(),
            Level::Lub(a, b) => a.var_bound().max(b.var_bound()),
        }
    }

    /// Evaluate under an assignment indexed like the de Bruijn variables
    /// (`env[0]` is the value of `Var(0)`). `None` for `Omega`.
    pub fn eval(&self, env: &[u64]) -> Option<u64> {
        match self {
            Level::Var(i) => env.get(*i).copied(),
            Level::Zero => Some(0),
            Level::Succ(l) => l.eval(env).map(|v| v + 1),
            Level::Lub(a, b) => Some(a.eval(env)?.max(b.eval(env)?)),
            Level::Omega => None,
        }
    }

    /// Rename free variables: `Var(i)` with `i >= cutoff` becomes `Var(i + by)`.
    pub fn shift(&self, cutoff: usize, by: usize) -> Level {
        self.map_vars(&mut |i| if i >= cutoff { Level::Var(i + by) } else { Level::Var(i) })
    }

    pub(crate) fn map_vars(&self, f: &mut impl FnMut(usize) -> Level) -> Level {
        match self {
            Level::Var(i) => f(*i),
            Level::Zero => Level::Zero,
            Level::Omega => Level::Omega,
            Level::Succ(l) => Level::Succ(Box::new(l.map_vars(f))),
            Level::Lub(a, b) => Level::Lub(Box::new(a.map_vars(f)), Box::new(b.map_vars(f))),
        }
    }

    pub(crate) fn try_map_vars<E>(
        &self,
        f: &mut impl FnMut(usize) -> Result<Level, E>,
    ) -> Result<Level, E> {
        Ok(match self {
            Level::Var(i) => f(*i)?,
            Level::Zero => Level::Zero,
            Level::Omega => Level::Omega,
            Level::Succ(l) => Level::Succ(Box::new(l.try_map_vars(f)?)),
            Level::Lub(a, b) => {
                Level::Lub(Box::new(a.try_map_vars(f)?), Box::new(b.try_map_vars(f)?))
            }
        })
    }
}

/// Level variable names, oldest first.
pub type UnivCtx = Vec<Name>;

/// Key of a [`LevelMap`]: the constant part sorts before every variable.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum LevelKey {
    Const,
    Var(usize),
}

/// Finite map from the constant part and level variables to offsets.
pub type LevelMap = BTreeMap<LevelKey, u64>;

/// Offsets of every variable and of the constant part of a finite level.
///
/// Returns `None` for a level mentioning `Omega`.
pub fn count(l: &Level) -> Option<LevelMap> {
    Some(match l {
        Level::Var(i) => BTreeMap::from([(LevelKey::Const, 0), (LevelKey::Var(*i), 0)]),
        Level::Zero => BTreeMap::from([(LevelKey::Const, 0)]),
        Level::Succ(inner) => {
            let mut m = count(inner)?;
            for v in m.values_mut() {
                *v += 1;
            }
            m
        }
        Level::Lub(a, b) => {
            let mut m = count(a)?;
            for (k, v) in count(b)? {
                let e = m.entry(k).or_insert(v);
                *e = (*e).max(v);
            }
            m
        }
        Level::Omega => return None,
    })
}

/// Drop the constant entry when some variable entry already dominates it.
pub fn adjust(mut m: LevelMap) -> LevelMap {
    let var_max = m
        .iter()
        .filter(|(k, _)| matches!(k, LevelKey::Var(_)))
        .map(|(_, v)| *v)
        .max();
    if let (Some(vm), Some(c)) = (var_max, m.get(&LevelKey::Const).copied()) {
        if c <= vm {
            m.remove(&LevelKey::Const);
        }
    }
    m
}

/// Rebuild a level from an adjusted map.
///
/// The constant comes first, then variables in context order (oldest
/// first, i.e. descending de Bruijn index), joined right-associatively.
pub fn flatten(m: &LevelMap) -> Level {
    let mut parts: Vec<Level> = Vec::new();
    if let Some(c) = m.get(&LevelKey::Const) {
        parts.push(Level::nat(*c));
    }
    let mut vars: Vec<(usize, u64)> = m
        .iter()
        .filter_map(|(k, v)| match k {
            LevelKey::Var(i) => Some((*i, *v)),
            LevelKey::Const => None,
        })
        .collect();
    vars.sort_by_key(|v| std::cmp::Reverse(v.0));
    parts.extend(vars.into_iter().map(|(i, n)| Level::Var(i).plus(n)));
    let mut it = parts.into_iter().rev();
    let last = it.next().unwrap_or(Level::Zero);
    it.fold(last, |acc, p| p.lub(acc))
}

/// Canonical form of a level. `Omega` (or anything mentioning it) is
/// returned as `Omega`.
pub fn normalize(l: &Level) -> Level {
    match count(l) {
        Some(m) => flatten(&adjust(m)),
        None => Level::Omega,
    }
}

/// Level equivalence. `Omega` is only equivalent to itself.
pub fn level_equiv(l1: &Level, l2: &Level) -> bool {
    match (count(l1), count(l2)) {
        (Some(a), Some(b)) => adjust(a) == adjust(b),
        (None, None) => true,
        _ => false,
    }
}

/// `l1 ≤ l2`, decided as `l2 ≈ l1 ⊔ l2`.
pub fn level_leq(l1: &Level, l2: &Level) -> bool {
    level_equiv(l2, &l1.clone().lub(l2.clone()))
}

/// `l1 < l2`, decided as `l2 ≈ (1 + l1) ⊔ l2`.
pub fn level_lt(l1: &Level, l2: &Level) -> bool {
    level_equiv(l2, &l1.clone().succ().lub(l2.clone()))
}

/// Errors from level well-formedness checks.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LevelError {
    #[error("level variable #{index} is not bound in a context of {len} level variables")]
    Unbound { index: usize, len: usize },
    #[error("omega is not a valid level here")]
    Omega,
}

/// `L ⊢ l`: every variable is bound and `Omega` does not occur.
pub fn wf_level(len: usize, l: &Level) -> Result<(), LevelError> {
    if l.mentions_omega() {
        return Err(LevelError::Omega);
    }
    let b = l.var_bound();
    if b > len {
        return Err(LevelError::Unbound { index: b - 1, len });
    }
    Ok(())
}

/// A level substitution `L' ⇒ L`: one level per variable of `L`, in
/// context order (oldest first). Entries live in `L'`.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct UnivSubst(pub Vec<Level>);

impl UnivSubst {
    /// The identity on a context of `n` variables.
    pub fn id(n: usize) -> UnivSubst {
        UnivSubst((0..n).rev().map(Level::Var).collect())
    }

    /// The weakening `L, ℓ⃗ ⇒ L` that skips the `k` newest variables.
    pub fn wk(n: usize, k: usize) -> UnivSubst {
        UnivSubst((0..n).rev().map(|i| Level::Var(i + k)).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Entry for the de Bruijn variable `i`.
    pub fn lookup(&self, i: usize) -> Option<&Level> {
        let n = self.0.len();
        if i < n {
            Some(&self.0[n - 1 - i])
        } else {
            None
        }
    }

    /// `φ ∘ φ'`: first `self`, then `other`.
    pub fn compose(&self, other: &UnivSubst) -> Result<UnivSubst, LevelError> {
        let v = self
            .0
            .iter()
            .map(|l| usubst_apply(l, other))
            .collect::<Result<_, _>>()?;
        Ok(UnivSubst(v))
    }
}

/// `l[φ]`.
pub fn usubst_apply(l: &Level, phi: &UnivSubst) -> Result<Level, LevelError> {
    l.try_map_vars(&mut |i| {
        phi.lookup(i)
            .cloned()
            .ok_or(LevelError::Unbound { index: i, len: phi.len() })
    })
}

/// Prints a level against the names of its context.
pub struct LevelDisplay<'a> {
    pub level: &'a Level,
    pub names: &'a [Name],
}

impl LevelDisplay<'_> {
    fn name(&self, i: usize) -> String {
        let n = self.names.len();
        if i < n {
            self.names[n - 1 - i].to_string()
        } else {
            format!("?l{}", i - n)
        }
    }

    fn atomic(l: &Level) -> bool {
        match l {
            Level::Var(_) | Level::Zero | Level::Omega => true,
            Level::Succ(_) => succ_spine(l).1 == &Level::Zero,
            Level::Lub(..) => false,
        }
    }

    fn write(&self, f: &mut fmt::Formatter<'_>, l: &Level) -> fmt::Result {
        match l {
            Level::Var(i) => write!(f, "{}", self.name(*i)),
            Level::Zero => write!(f, "0"),
            Level::Omega => write!(f, "omega"),
            Level::Succ(_) => {
                let (n, base) = succ_spine(l);
                if base == &Level::Zero {
                    write!(f, "{n}")
                } else if Self::atomic(base) {
                    write!(f, "{n}+")?;
                    self.write(f, base)
                } else {
                    write!(f, "{n}+(")?;
                    self.write(f, base)?;
                    write!(f, ")")
                }
            }
            Level::Lub(a, b) => {
                if matches!(**a, Level::Lub(..)) {
                    write!(f, "(")?;
                    self.write(f, a)?;
                    write!(f, ")")?;
                } else {
                    self.write(f, a)?;
                }
                write!(f, " \\/ ")?;
                self.write(f, b)
            }
        }
    }
}

fn succ_spine(l: &Level) -> (u64, &Level) {
    let mut n = 0;
    let mut cur = l;
    while let Level::Succ(inner) = cur {
        n += 1;
        cur = inner;
    }
    (n, cur)
}

impl fmt::Display for LevelDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write(f, self.level)
    }
}

/// True if printing `l` needs no surrounding parentheses in argument
/// position.
pub fn level_is_atomic(l: &Level) -> bool {
    LevelDisplay::atomic(l)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn v(i: usize) -> Level {
        Level::Var(i)
    }

    fn names(xs: &[&str]) -> Vec<Name> {
        xs.iter().map(|s| Name::new(s)).collect()
    }

    /// Brute-force equivalence over every assignment with values up to
    /// two above the largest constant.
    fn semantic_equiv(a: &Level, b: &Level, nvars: usize) -> bool {
        let bound = max_const(a).max(max_const(b)) + 2;
        let mut env = vec![0u64; nvars];
        loop {
            if a.eval(&env) != b.eval(&env) {
                return false;
            }
            let mut i = 0;
            loop {
                if i == nvars {
                    return true;
                }
                if env[i] < bound {
                    env[i] += 1;
                    break;
                }
                env[i] = 0;
                i += 1;
            }
        }
    }

    fn max_const(l: &Level) -> u64 {
        match l {
            Level::Var(_) | Level::Zero | Level::Omega => 0,
            Level::Succ(_) => {
                let (n, b) = succ_spine(l);
                n + max_const(b)
            }
            Level::Lub(a, b) => max_const(a).max(max_const(b)),
        }
    }

    fn arb_level(nvars: usize) -> impl Strategy<Value = Level> {
        let leaf = prop_oneof![
            Just(Level::Zero),
            (0..nvars.max(1)).prop_map(move |i| if nvars == 0 { Level::Zero } else { Level::Var(i) }),
        ];
        leaf.prop_recursive(4, 24, 2, |inner| {
            prop_oneof![
                inner.clone().prop_map(Level::succ),
                (inner.clone(), inner).prop_map(|(a, b)| a.lub(b)),
            ]
        })
    }

    #[test]
    fn count_of_var_and_zero() {
        assert_eq!(
            count(&v(0)).unwrap(),
            BTreeMap::from([(LevelKey::Const, 0), (LevelKey::Var(0), 0)])
        );
        assert_eq!(count(&Level::Zero).unwrap(), BTreeMap::from([(LevelKey::Const, 0)]));
        assert!(count(&Level::Omega).is_none());
    }

    #[test]
    fn lub_with_successor_normalises_to_successor() {
        let l = v(0).lub(v(0).succ());
        assert_eq!(normalize(&l), v(0).succ());
        let shown = LevelDisplay { level: &normalize(&l), names: &names(&["l"]) }.to_string();
        assert_eq!(shown, "1+l");
    }

    #[test]
    fn flatten_puts_constant_first_and_orders_by_context() {
        // L = l1, l2 ; 3 ⊔ l2 ⊔ (1 + l1)
        let l = Level::nat(3).lub(v(0)).lub(v(1).succ());
        let n = normalize(&l);
        let shown = LevelDisplay { level: &n, names: &names(&["l1", "l2"]) }.to_string();
        assert_eq!(shown, "3 \\/ 1+l1 \\/ l2");
    }

    #[test]
    fn omega_only_equivalent_to_itself() {
        assert!(level_equiv(&Level::Omega, &Level::Omega));
        assert!(!level_equiv(&Level::Omega, &Level::Zero));
        assert!(!level_equiv(&v(0), &Level::Omega));
    }

    #[test]
    fn order_relations() {
        assert!(level_leq(&v(0), &v(0).lub(v(1))));
        assert!(level_lt(&v(0), &v(0).succ()));
        assert!(!level_lt(&v(0), &v(0)));
        assert!(level_leq(&Level::Zero, &v(0)));
    }

    #[test]
    fn wf_rejects_unbound_and_omega() {
        assert!(wf_level(1, &v(0)).is_ok());
        assert_eq!(wf_level(1, &v(1)), Err(LevelError::Unbound { index: 1, len: 1 }));
        assert_eq!(wf_level(3, &Level::Omega), Err(LevelError::Omega));
    }

    #[test]
    fn substitution_and_composition() {
        // φ = [1+l', l'] : (l') ⇒ (a, b)
        let phi = UnivSubst(vec![v(0).succ(), v(0)]);
        // a ⊔ b  ↦  1+l' ⊔ l'
        let l = v(1).lub(v(0));
        let r = usubst_apply(&l, &phi).unwrap();
        assert!(level_equiv(&r, &v(0).succ()));
        let psi = UnivSubst(vec![Level::nat(2)]);
        let both = phi.compose(&psi).unwrap();
        assert_eq!(
            usubst_apply(&l, &both).unwrap(),
            usubst_apply(&usubst_apply(&l, &phi).unwrap(), &psi).unwrap()
        );
    }

    proptest! {
        #[test]
        fn equiv_agrees_with_semantics(a in arb_level(3), b in arb_level(3)) {
            prop_assert_eq!(level_equiv(&a, &b), semantic_equiv(&a, &b, 3));
        }

        #[test]
        fn normal_form_is_equivalent_and_idempotent(a in arb_level(3)) {
            let n = normalize(&a);
            prop_assert!(semantic_equiv(&a, &n, 3));
            prop_assert_eq!(normalize(&n), n.clone());
        }

        #[test]
        fn equiv_iff_same_normal_form(a in arb_level(2), b in arb_level(2)) {
            prop_assert_eq!(level_equiv(&a, &b), normalize(&a) == normalize(&b));
        }
    }
}
