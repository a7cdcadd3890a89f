//! First-order terms over ranked nonterminals, and substitution.
//!
//! Terms are immutable, reference-counted trees with structural equality.
//! Every application node caches its hash and size, so terms can be used
//! directly as keys in the memo tables of the game engines.

use std::collections::hash_map::DefaultHasher;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TermError {
    #[error("variable index must be at least 1")]
    ZeroVariable,
    #[error("nonterminal name must be nonempty")]
    EmptyName,
    #[error("`{name}` has arity {arity} but was given {given} children")]
    ArityMismatch {
        name: String,
        arity: usize,
        given: usize,
    },
    #[error("numeral successor `{0}` must be unary")]
    NumeralSuccessor(String),
    #[error("numeral bottom `{0}` must be nullary")]
    NumeralBottom(String),
}

/// The variable `x<index>`, with `index >= 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Var(u32);

impl Var {
    pub fn new(index: u32) -> Result<Self, TermError> {
        if index == 0 {
            Err(TermError::ZeroVariable)
        } else {
            Ok(Var(index))
        }
    }

    pub fn index(self) -> u32 {
        self.0
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "x{}", self.0)
    }
}

/// A ranked function symbol.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Nonterminal {
    name: Arc<str>,
    arity: usize,
}

impl Nonterminal {
    pub fn new(name: impl Into<Arc<str>>, arity: usize) -> Result<Self, TermError> {
        let name = name.into();
        if name.is_empty() {
            return Err(TermError::EmptyName);
        }
        Ok(Nonterminal { name, arity })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn arity(&self) -> usize {
        self.arity
    }
}

impl fmt::Display for Nonterminal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

#[derive(Debug)]
pub struct App {
    head: Nonterminal,
    args: Vec<Term>,
    hash: u64,
    size: usize,
    closed: bool,
}

// Long numeral chains would otherwise be dropped recursively.
impl Drop for App {
    fn drop(&mut self) {
        let mut stack = std::mem::take(&mut self.args);
        while let Some(t) = stack.pop() {
            if let Term::App(arc) = t {
                if let Some(mut inner) = Arc::into_inner(arc) {
                    stack.append(&mut inner.args);
                }
            }
        }
    }
}

impl App {
    pub fn head(&self) -> &Nonterminal {
        &self.head
    }

    pub fn args(&self) -> &[Term] {
        &self.args
    }
}

/// A first-order term: a variable or a nonterminal applied to exactly
/// `arity` subterms.
#[derive(Debug, Clone)]
pub enum Term {
    Var(Var),
    App(Arc<App>),
}

impl Term {
    pub fn var(index: u32) -> Result<Term, TermError> {
        Var::new(index).map(Term::Var)
    }

    pub fn app(head: Nonterminal, args: Vec<Term>) -> Result<Term, TermError> {
        if args.len() != head.arity {
            return Err(TermError::ArityMismatch {
                name: head.name.to_string(),
                arity: head.arity,
                given: args.len(),
            });
        }
        let mut hasher = DefaultHasher::new();
        head.hash(&mut hasher);
        for a in &args {
            a.hash(&mut hasher);
        }
        let size = args.iter().map(Term::size).fold(1usize, usize::saturating_add);
        let closed = args.iter().all(Term::is_closed);
        Ok(Term::App(Arc::new(App {
            head,
            hash: hasher.finish(),
            args,
            size,
            closed,
        })))
    }

    /// A nullary application.
    pub fn constant(head: Nonterminal) -> Result<Term, TermError> {
        Term::app(head, Vec::new())
    }

    pub fn as_var(&self) -> Option<Var> {
        match self {
            Term::Var(v) => Some(*v),
            Term::App(_) => None,
        }
    }

    pub fn head(&self) -> Option<&Nonterminal> {
        match self {
            Term::Var(_) => None,
            Term::App(app) => Some(&app.head),
        }
    }

    pub fn args(&self) -> &[Term] {
        match self {
            Term::Var(_) => &[],
            Term::App(app) => &app.args,
        }
    }

    /// Number of nodes, saturating at `usize::MAX`.
    pub fn size(&self) -> usize {
        match self {
            Term::Var(_) => 1,
            Term::App(app) => app.size,
        }
    }

    pub fn is_closed(&self) -> bool {
        match self {
            Term::Var(_) => false,
            Term::App(app) => app.closed,
        }
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<Var>) {
        match self {
            Term::Var(v) => {
                out.insert(*v);
            }
            Term::App(app) => {
                if !app.closed {
                    for a in &app.args {
                        a.collect_vars(out);
                    }
                }
            }
        }
    }

    /// Every nonterminal occurring in the term, in preorder, with repeats.
    pub fn symbols(&self) -> Vec<&Nonterminal> {
        let mut out = Vec::new();
        let mut stack = vec![self];
        while let Some(t) = stack.pop() {
            if let Term::App(app) = t {
                out.push(&app.head);
                stack.extend(app.args.iter().rev());
            }
        }
        out
    }

    pub fn substitute(&self, s: &Substitution) -> Term {
        if s.is_empty() {
            return self.clone();
        }
        self.map_vars(&|v| s.get(v).cloned())
    }

    /// Replaces `x_i` by `args[i-1]`; variables beyond `args.len()` are kept.
    ///
    /// This is the substitution `{x_i -> args[i-1]}` used when a rule fires
    /// at the root of `A(args)`.
    pub fn instantiate(&self, args: &[Term]) -> Term {
        self.map_vars(&|v| args.get(v.0 as usize - 1).cloned())
    }

    fn map_vars(&self, f: &dyn Fn(Var) -> Option<Term>) -> Term {
        match self {
            Term::Var(v) => f(*v).unwrap_or_else(|| self.clone()),
            Term::App(app) if app.closed => self.clone(),
            Term::App(app) => {
                let args = app.args.iter().map(|a| a.map_vars(f)).collect();
                Term::app(app.head.clone(), args).expect("arity preserved by substitution")
            }
        }
    }
}

impl PartialEq for Term {
    fn eq(&self, other: &Self) -> bool {
        let mut stack = vec![(self, other)];
        while let Some(pair) = stack.pop() {
            match pair {
                (Term::Var(a), Term::Var(b)) if a == b => {}
                (Term::App(a), Term::App(b)) => {
                    if Arc::ptr_eq(a, b) {
                        continue;
                    }
                    if a.hash != b.hash || a.size != b.size || a.head != b.head {
                        return false;
                    }
                    stack.extend(a.args.iter().zip(&b.args));
                }
                _ => return false,
            }
        }
        true
    }
}

impl Eq for Term {}

impl Hash for Term {
    fn hash<H: Hasher>(&self, state: &mut H) {
        match self {
            Term::Var(v) => {
                state.write_u8(0);
                v.hash(state);
            }
            Term::App(app) => {
                state.write_u8(1);
                state.write_u64(app.hash);
            }
        }
    }
}

impl serde::Serialize for Term {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => v.fmt(f),
            Term::App(app) => {
                f.write_str(&app.head.name)?;
                if !app.args.is_empty() {
                    f.write_str("(")?;
                    for (i, a) in app.args.iter().enumerate() {
                        if i > 0 {
                            f.write_str(",")?;
                        }
                        a.fmt(f)?;
                    }
                    f.write_str(")")?;
                }
                Ok(())
            }
        }
    }
}

/// A finite map from variables to terms. Unmapped variables are fixed.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Substitution(BTreeMap<Var, Term>);

impl Substitution {
    pub fn new() -> Self {
        Substitution::default()
    }

    pub fn insert(&mut self, v: Var, t: Term) -> Option<Term> {
        self.0.insert(v, t)
    }

    pub fn get(&self, v: Var) -> Option<&Term> {
        self.0.get(&v)
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Var, &Term)> {
        self.0.iter()
    }

    /// `self` followed by `then`: applying the result equals applying
    /// `self` and then `then`.
    pub fn compose(&self, then: &Substitution) -> Substitution {
        let mut out: BTreeMap<Var, Term> = self
            .0
            .iter()
            .map(|(v, t)| (*v, t.substitute(then)))
            .collect();
        for (v, t) in &then.0 {
            out.entry(*v).or_insert_with(|| t.clone());
        }
        Substitution(out)
    }
}

impl FromIterator<(Var, Term)> for Substitution {
    fn from_iter<I: IntoIterator<Item = (Var, Term)>>(iter: I) -> Self {
        Substitution(iter.into_iter().collect())
    }
}

/// `succ^n(bottom)`, e.g. `I(I(Bot))` for `n = 2`.
pub fn numeral(n: usize, succ: &Nonterminal, bottom: &Nonterminal) -> Result<Term, TermError> {
    if succ.arity != 1 {
        return Err(TermError::NumeralSuccessor(succ.name.to_string()));
    }
    if bottom.arity != 0 {
        return Err(TermError::NumeralBottom(bottom.name.to_string()));
    }
    let mut t = Term::constant(bottom.clone())?;
    for _ in 0..n {
        t = Term::app(succ.clone(), vec![t])?;
    }
    Ok(t)
}

/// Inverse of [`numeral`]: the number of unary wrappers around a nullary
/// leaf, or `None` if the term is not a unary chain over a constant.
pub fn numeral_value(t: &Term) -> Option<usize> {
    let mut n = 0;
    let mut cur = t;
    loop {
        match cur {
            Term::Var(_) => return None,
            Term::App(app) => match app.args.as_slice() {
                [] => return Some(n),
                [inner] => {
                    n += 1;
                    cur = inner;
                }
                _ => return None,
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn nt(name: &str, arity: usize) -> Nonterminal {
        Nonterminal::new(name, arity).unwrap()
    }

    fn x(i: u32) -> Term {
        Term::var(i).unwrap()
    }

    fn c(name: &str) -> Term {
        Term::constant(nt(name, 0)).unwrap()
    }

    fn app(name: &str, args: Vec<Term>) -> Term {
        Term::app(nt(name, args.len()), args).unwrap()
    }

    #[test]
    fn substitute_worked_example() {
        // C(D(x3,B),x2) under {x1->V, x2->x5, x3->U}
        let t = app("C", vec![app("D", vec![x(3), c("B")]), x(2)]);
        let s: Substitution = [
            (Var::new(1).unwrap(), c("V")),
            (Var::new(2).unwrap(), x(5)),
            (Var::new(3).unwrap(), c("U")),
        ]
        .into_iter()
        .collect();
        let expected = app("C", vec![app("D", vec![c("U"), c("B")]), x(5)]);
        assert_eq!(t.substitute(&s), expected);
        assert_eq!(t.substitute(&s).to_string(), "C(D(U,B),x5)");
    }

    #[test]
    fn empty_and_single_substitution() {
        let t = app("C", vec![x(1), c("B")]);
        assert_eq!(t.substitute(&Substitution::new()), t);
        let s: Substitution = [(Var::new(2).unwrap(), c("Bot"))].into_iter().collect();
        assert_eq!(x(2).substitute(&s), c("Bot"));
    }

    #[test]
    fn vars_examples() {
        let t = app("C", vec![app("D", vec![x(3), c("B")]), x(2)]);
        let vs: Vec<u32> = t.vars().into_iter().map(Var::index).collect();
        assert_eq!(vs, vec![2, 3]);
        assert!(c("Bot").vars().is_empty());
        assert_eq!(x(7).vars().into_iter().map(Var::index).collect::<Vec<_>>(), vec![7]);
    }

    #[test]
    fn wrong_child_count_rejected() {
        let err = Term::app(nt("D", 2), vec![c("B")]).unwrap_err();
        assert!(matches!(err, TermError::ArityMismatch { arity: 2, given: 1, .. }));
        assert_eq!(Var::new(0), Err(TermError::ZeroVariable));
        assert_eq!(Nonterminal::new("", 0), Err(TermError::EmptyName));
    }

    #[test]
    fn numerals() {
        let i = nt("I", 1);
        let bot = nt("Bot", 0);
        assert_eq!(numeral(0, &i, &bot).unwrap(), c("Bot"));
        assert_eq!(numeral(2, &i, &bot).unwrap().to_string(), "I(I(Bot))");
        let three = app("I", vec![app("I", vec![app("I", vec![c("Bot")])])]);
        assert_eq!(numeral_value(&three), Some(3));
        assert_eq!(numeral_value(&x(1)), None);
        assert!(numeral(1, &bot, &bot).is_err());
        assert!(numeral(1, &i, &i).is_err());
        for n in 0..1000 {
            assert_eq!(numeral_value(&numeral(n, &i, &bot).unwrap()), Some(n));
        }
    }

    #[test]
    fn equality_is_structural() {
        let a = app("C", vec![x(1), c("B")]);
        let b = app("C", vec![x(1), c("B")]);
        assert_eq!(a, b);
        assert_ne!(a, app("C", vec![x(2), c("B")]));
        // same name, different arity is a different symbol
        assert_ne!(c("C"), app("C", vec![c("B")]));
    }

    #[test]
    fn deep_numerals_compare_and_drop() {
        let (i, bot) = (nt("I", 1), nt("Bot", 0));
        let a = numeral(500_000, &i, &bot).unwrap();
        let b = numeral(500_000, &i, &bot).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, numeral(499_999, &i, &bot).unwrap());
        drop(a);
        drop(b);
    }
}
