//! First-order grammars and the labelled transition systems they induce.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::term::{Nonterminal, Term};

/// An action (terminal) label.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Action(Arc<str>);

impl Action {
    pub fn new(label: impl Into<Arc<str>>) -> Self {
        Action(label.into())
    }

    pub fn label(&self) -> &str {
        &self.0
    }
}

impl serde::Serialize for Action {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.0)
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// A root-rewriting rule `head(x1,...,xm) -action-> rhs`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Rule {
    pub head: Nonterminal,
    pub action: Action,
    pub rhs: Term,
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.head.name())?;
        if self.head.arity() > 0 {
            f.write_str("(")?;
            for i in 1..=self.head.arity() {
                if i > 1 {
                    f.write_str(",")?;
                }
                write!(f, "x{i}")?;
            }
            f.write_str(")")?;
        }
        write!(f, " -{}-> {}", self.action, self.rhs)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    EmptyActionLabel { index: usize },
    DuplicateNonterminal { name: String },
    DuplicateAction { label: String },
    UnknownHead { name: String },
    HeadArity { name: String, declared: usize, used: usize },
    UnknownAction { label: String },
    UnknownSymbol { name: String },
    SymbolArity { name: String, declared: usize, used: usize },
    VariableOutOfRange { var: u32, arity: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::EmptyActionLabel { index } => write!(f, "action #{index} has an empty label"),
            Violation::DuplicateNonterminal { name } => write!(f, "nonterminal `{name}` declared twice"),
            Violation::DuplicateAction { label } => write!(f, "action `{label}` declared twice"),
            Violation::UnknownHead { name } => write!(f, "rule head `{name}` is not declared"),
            Violation::HeadArity { name, declared, used } => {
                write!(f, "rule head `{name}` declared with arity {declared}, used with {used}")
            }
            Violation::UnknownAction { label } => write!(f, "action `{label}` is not declared"),
            Violation::UnknownSymbol { name } => write!(f, "unknown symbol `{name}` in right-hand side"),
            Violation::SymbolArity { name, declared, used } => {
                write!(f, "arity mismatch: `{name}` declared with arity {declared}, used with {used}")
            }
            Violation::VariableOutOfRange { var, arity } => {
                write!(f, "out-of-range variable x{var} (head arity {arity})")
            }
        }
    }
}

/// Violations found by [`validate_grammar`]. Rule-level entries carry the
/// rule's index in declaration order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub declarations: Vec<Violation>,
    pub rules: Vec<(usize, Violation)>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.declarations.is_empty() && self.rules.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for v in &self.declarations {
            writeln!(f, "{v}")?;
        }
        for (i, v) in &self.rules {
            writeln!(f, "rule {i}: {v}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ValidationReport {}

/// Unvalidated grammar data, as read from a file or built by hand.
#[derive(Debug, Clone, Default)]
pub struct GrammarSpec {
    pub nonterminals: Vec<Nonterminal>,
    pub actions: Vec<Action>,
    pub rules: Vec<Rule>,
}

pub fn validate_grammar(spec: &GrammarSpec) -> ValidationReport {
    let mut report = ValidationReport::default();
    let mut declared: HashMap<&str, usize> = HashMap::new();
    for n in &spec.nonterminals {
        if declared.insert(n.name(), n.arity()).is_some() {
            report.declarations.push(Violation::DuplicateNonterminal { name: n.name().to_string() });
        }
    }
    let mut actions = HashSet::new();
    for (index, a) in spec.actions.iter().enumerate() {
        if a.label().is_empty() {
            report.declarations.push(Violation::EmptyActionLabel { index });
        }
        if !actions.insert(a.label()) {
            report.declarations.push(Violation::DuplicateAction { label: a.label().to_string() });
        }
    }
    for (i, rule) in spec.rules.iter().enumerate() {
        let head = &rule.head;
        match declared.get(head.name()) {
            None => report.rules.push((i, Violation::UnknownHead { name: head.name().to_string() })),
            Some(&d) if d != head.arity() => report.rules.push((
                i,
                Violation::HeadArity { name: head.name().to_string(), declared: d, used: head.arity() },
            )),
            _ => {}
        }
        if !actions.contains(rule.action.label()) {
            report.rules.push((i, Violation::UnknownAction { label: rule.action.label().to_string() }));
        }
        let mut seen = HashSet::new();
        for sym in rule.rhs.symbols() {
            if !seen.insert((sym.name(), sym.arity())) {
                continue;
            }
            match declared.get(sym.name()) {
                None => report.rules.push((i, Violation::UnknownSymbol { name: sym.name().to_string() })),
                Some(&d) if d != sym.arity() => report.rules.push((
                    i,
                    Violation::SymbolArity { name: sym.name().to_string(), declared: d, used: sym.arity() },
                )),
                _ => {}
            }
        }
        for v in rule.rhs.vars() {
            if v.index() as usize > head.arity() {
                report
                    .rules
                    .push((i, Violation::VariableOutOfRange { var: v.index(), arity: head.arity() }));
            }
        }
    }
    report
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LtsError {
    #[error("term `{0}` is not closed")]
    OpenTerm(String),
    #[error("unknown nonterminal `{0}`")]
    UnknownSymbol(String),
    #[error("`{name}` is declared with arity {declared} but used with {used}")]
    ArityMismatch { name: String, declared: usize, used: usize },
}

/// One outgoing transition, tagged with the index of the rule that fired.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transition {
    pub action: Action,
    pub target: Term,
    pub rule: usize,
}

/// A validated grammar. Immutable; rules are grouped by head for lookup.
#[derive(Debug, Clone)]
pub struct Grammar {
    nonterminals: Vec<Nonterminal>,
    actions: Vec<Action>,
    rules: Vec<Rule>,
    index: HashMap<Arc<str>, usize>,
    by_head: Vec<Vec<usize>>,
}

impl Grammar {
    /// Validates and builds. Duplicate rules are dropped with a warning.
    pub fn new(spec: GrammarSpec) -> Result<Grammar, ValidationReport> {
        Grammar::build(spec, true)
    }

    /// Validates and builds, keeping duplicate rules as separate entries.
    pub fn with_duplicates(spec: GrammarSpec) -> Result<Grammar, ValidationReport> {
        Grammar::build(spec, false)
    }

    fn build(spec: GrammarSpec, dedup: bool) -> Result<Grammar, ValidationReport> {
        let report = validate_grammar(&spec);
        if !report.is_ok() {
            return Err(report);
        }
        let GrammarSpec { nonterminals, actions, rules } = spec;
        let rules = if dedup {
            let mut seen = HashSet::new();
            let mut kept = Vec::with_capacity(rules.len());
            for (i, r) in rules.into_iter().enumerate() {
                if seen.contains(&r) {
                    log::warn!("dropping duplicate rule {i}: {r}");
                } else {
                    seen.insert(r.clone());
                    kept.push(r);
                }
            }
            kept
        } else {
            rules
        };
        let index: HashMap<Arc<str>, usize> = nonterminals
            .iter()
            .enumerate()
            .map(|(i, n)| (Arc::from(n.name()), i))
            .collect();
        let mut by_head = vec![Vec::new(); nonterminals.len()];
        for (i, r) in rules.iter().enumerate() {
            by_head[index[r.head.name()]].push(i);
        }
        Ok(Grammar { nonterminals, actions, rules, index, by_head })
    }

    pub fn nonterminals(&self) -> &[Nonterminal] {
        &self.nonterminals
    }

    pub fn actions(&self) -> &[Action] {
        &self.actions
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn nonterminal(&self, name: &str) -> Option<&Nonterminal> {
        self.index.get(name).map(|&i| &self.nonterminals[i])
    }

    pub fn action(&self, label: &str) -> Option<&Action> {
        self.actions.iter().find(|a| a.label() == label)
    }

    /// Indices of the rules whose head is `name`, in declaration order.
    pub fn rule_group(&self, name: &str) -> &[usize] {
        self.index.get(name).map(|&i| self.by_head[i].as_slice()).unwrap_or(&[])
    }

    /// Checks that `t` is closed and uses only declared symbols at their
    /// declared arities.
    pub fn check_closed(&self, t: &Term) -> Result<(), LtsError> {
        if !t.is_closed() {
            return Err(LtsError::OpenTerm(t.to_string()));
        }
        for sym in t.symbols() {
            match self.nonterminal(sym.name()) {
                None => return Err(LtsError::UnknownSymbol(sym.name().to_string())),
                Some(d) if d.arity() != sym.arity() => {
                    return Err(LtsError::ArityMismatch {
                        name: sym.name().to_string(),
                        declared: d.arity(),
                        used: sym.arity(),
                    })
                }
                _ => {}
            }
        }
        Ok(())
    }

    /// All transitions of the closed term `t`, in rule declaration order.
    pub fn transitions(&self, t: &Term) -> Result<Vec<Transition>, LtsError> {
        self.check_closed(t)?;
        Ok(self.successors(t))
    }

    /// [`Grammar::transitions`] without the well-formedness check. Callers
    /// must only pass closed terms over this grammar; successors of such
    /// terms are again closed terms over this grammar.
    pub(crate) fn successors(&self, t: &Term) -> Vec<Transition> {
        let Some(head) = t.head() else { return Vec::new() };
        self.rule_group(head.name())
            .iter()
            .map(|&i| {
                let r = &self.rules[i];
                Transition { action: r.action.clone(), target: r.rhs.instantiate(t.args()), rule: i }
            })
            .collect()
    }
}

impl From<&Grammar> for GrammarSpec {
    fn from(g: &Grammar) -> Self {
        GrammarSpec {
            nonterminals: g.nonterminals.clone(),
            actions: g.actions.clone(),
            rules: g.rules.clone(),
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

    fn app(name: &str, args: Vec<Term>) -> Term {
        Term::app(nt(name, args.len()), args).unwrap()
    }

    fn rule(head: &str, arity: usize, action: &str, rhs: Term) -> Rule {
        Rule { head: nt(head, arity), action: Action::new(action), rhs }
    }

    fn example_spec() -> GrammarSpec {
        GrammarSpec {
            nonterminals: vec![nt("A", 3), nt("B", 0), nt("C", 2), nt("D", 2)],
            actions: vec![Action::new("a"), Action::new("b")],
            rules: vec![
                rule("A", 3, "b", app("C", vec![app("D", vec![x(3), app("B", vec![])]), x(2)])),
                rule("A", 3, "b", x(2)),
                rule("D", 2, "a", app("A", vec![app("D", vec![x(2), x(2)]), x(1), app("B", vec![])])),
            ],
        }
    }

    #[test]
    fn example_grammar_validates() {
        assert!(validate_grammar(&example_spec()).is_ok());
        assert!(Grammar::new(example_spec()).is_ok());
    }

    #[test]
    fn out_of_range_variable() {
        let spec = GrammarSpec {
            nonterminals: vec![nt("A", 1)],
            actions: vec![Action::new("a")],
            rules: vec![rule("A", 1, "a", x(2))],
        };
        let report = validate_grammar(&spec);
        assert_eq!(report.rules, vec![(0, Violation::VariableOutOfRange { var: 2, arity: 1 })]);
    }

    #[test]
    fn rhs_arity_mismatch() {
        let spec = GrammarSpec {
            nonterminals: vec![nt("A", 1), nt("D", 2)],
            actions: vec![Action::new("a")],
            rules: vec![rule("A", 1, "a", app("D", vec![x(1)]))],
        };
        let report = validate_grammar(&spec);
        assert_eq!(
            report.rules,
            vec![(0, Violation::SymbolArity { name: "D".into(), declared: 2, used: 1 })]
        );
    }

    #[test]
    fn unknown_symbols_and_actions_reported_with_rule_index() {
        let spec = GrammarSpec {
            nonterminals: vec![nt("A", 0)],
            actions: vec![Action::new("a")],
            rules: vec![rule("A", 0, "a", app("A", vec![])), rule("Z", 0, "c", app("Q", vec![]))],
        };
        let report = validate_grammar(&spec);
        assert!(report.declarations.is_empty());
        assert_eq!(report.rules.len(), 3);
        assert!(report.rules.iter().all(|(i, _)| *i == 1));
    }

    #[test]
    fn duplicates_dropped_unless_requested() {
        let mut spec = example_spec();
        spec.rules.push(spec.rules[1].clone());
        assert_eq!(Grammar::new(spec.clone()).unwrap().rules().len(), 3);
        assert_eq!(Grammar::with_duplicates(spec).unwrap().rules().len(), 4);
    }

    #[test]
    fn transitions_of_example() {
        let g = Grammar::new(example_spec()).unwrap();
        let u1 = app("B", vec![]);
        let u2 = app("D", vec![app("B", vec![]), app("B", vec![])]);
        let u3 = app("C", vec![app("B", vec![]), app("B", vec![])]);
        let t = app("A", vec![u1, u2.clone(), u3.clone()]);
        let ts = g.transitions(&t).unwrap();
        assert_eq!(ts.len(), 2);
        assert_eq!(ts[0].action.label(), "b");
        assert_eq!(ts[0].target, app("C", vec![app("D", vec![u3, app("B", vec![])]), u2.clone()]));
        assert_eq!(ts[1].target, u2);
    }

    #[test]
    fn open_and_unknown_terms_rejected() {
        let g = Grammar::new(example_spec()).unwrap();
        assert!(matches!(g.transitions(&x(1)), Err(LtsError::OpenTerm(_))));
        assert!(matches!(g.transitions(&app("Q", vec![])), Err(LtsError::UnknownSymbol(_))));
        let bad = app("C", vec![app("B", vec![])]);
        assert!(matches!(g.transitions(&bad), Err(LtsError::ArityMismatch { .. })));
    }
}
