use std::collections::HashMap;
use std::fmt::Write;

use super::term::{variable_index, Cursor};
use super::{content, ParseError};
use crate::grammar::{Action, Grammar, GrammarSpec, Rule};
use crate::term::{Nonterminal, Term};

/// Parses a `.fog` grammar:
///
/// ```text
/// nonterminal A 3
/// action b
/// rule A(x1,x2,x3) -b-> C(D(x3,B),x2)
/// ```
///
/// Symbols must be declared before a rule uses them. Duplicate rules are
/// dropped with a warning.
pub fn parse_grammar(text: &str) -> Result<Grammar, ParseError> {
    let mut spec = GrammarSpec::default();
    let mut arities: HashMap<String, usize> = HashMap::new();
    let mut rule_lines = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = content(raw);
        if body.is_empty() {
            continue;
        }
        let (keyword, rest) = body.split_once(char::is_whitespace).unwrap_or((body, ""));
        let err = |m: String| ParseError::new(line, m);
        match keyword {
            "nonterminal" => {
                let fields: Vec<&str> = rest.split_whitespace().collect();
                let [name, arity] = fields[..] else {
                    return Err(err("expected `nonterminal <name> <arity>`".into()));
                };
                check_ident(name).map_err(err)?;
                if variable_index(name).is_some() {
                    return Err(err(format!("`{name}` is reserved for variables")));
                }
                let arity: usize = arity.parse().map_err(|_| err(format!("bad arity `{arity}`")))?;
                if arities.insert(name.to_string(), arity).is_some() {
                    return Err(err(format!("nonterminal `{name}` declared twice")));
                }
                spec.nonterminals.push(Nonterminal::new(name, arity).map_err(|e| err(e.to_string()))?);
            }
            "action" => {
                let fields: Vec<&str> = rest.split_whitespace().collect();
                let [label] = fields[..] else {
                    return Err(err("expected `action <label>`".into()));
                };
                check_ident(label).map_err(err)?;
                if spec.actions.iter().any(|a| a.label() == label) {
                    return Err(err(format!("action `{label}` declared twice")));
                }
                spec.actions.push(Action::new(label));
            }
            "rule" => {
                let rule = parse_rule(rest).map_err(err)?;
                for sym in std::iter::once(&rule.head).chain(rule.rhs.symbols()) {
                    match arities.get(sym.name()) {
                        None => return Err(err(format!("undeclared nonterminal `{}`", sym.name()))),
                        Some(&a) if a != sym.arity() => {
                            return Err(err(format!(
                                "arity mismatch: `{}` declared with arity {a}, used with {}",
                                sym.name(),
                                sym.arity()
                            )))
                        }
                        _ => {}
                    }
                }
                if !spec.actions.iter().any(|a| a == &rule.action) {
                    return Err(err(format!("undeclared action `{}`", rule.action)));
                }
                spec.rules.push(rule);
                rule_lines.push(line);
            }
            other => return Err(err(format!("unknown keyword `{other}`"))),
        }
    }
    Grammar::new(spec).map_err(|report| {
        let line = report.rules.first().map(|(r, _)| rule_lines[*r]).unwrap_or(0);
        ParseError::new(line, report.to_string().trim_end().to_string())
    })
}

fn check_ident(s: &str) -> Result<(), String> {
    let mut chars = s.chars();
    let first_ok = chars.next().is_some_and(|c| c.is_ascii_alphabetic() || c == '_');
    if first_ok && chars.all(|c| c.is_ascii_alphanumeric() || c == '_') {
        Ok(())
    } else {
        Err(format!("invalid identifier `{s}`"))
    }
}

fn parse_rule(text: &str) -> Result<Rule, String> {
    let mut c = Cursor::new(text);
    let lhs = c.term()?;
    let head = lhs.head().cloned().ok_or("rule left-hand side must be a nonterminal")?;
    for (i, arg) in lhs.args().iter().enumerate() {
        if arg.as_var().map(|v| v.index() as usize) != Some(i + 1) {
            return Err(format!("left-hand side must be `{}(x1,...,x{})`", head.name(), head.arity()));
        }
    }
    if !c.eat('-') {
        return Err("expected `-<action>->` after the left-hand side".into());
    }
    let label = c.ident()?;
    if !c.eat_str("->") {
        return Err("expected `->` after the action label".into());
    }
    let rhs: Term = c.term()?;
    if !c.at_end() {
        return Err(format!("unexpected trailing input `{}`", c.rest().trim()));
    }
    Ok(Rule { head, action: Action::new(label), rhs })
}

/// Canonical `.fog` text: nonterminals, then actions, then rules, each in
/// declaration order.
pub fn serialize_grammar(g: &Grammar) -> String {
    let mut out = String::new();
    for n in g.nonterminals() {
        writeln!(out, "nonterminal {} {}", n.name(), n.arity()).unwrap();
    }
    for a in g.actions() {
        writeln!(out, "action {a}").unwrap();
    }
    for r in g.rules() {
        writeln!(out, "rule {r}").unwrap();
    }
    out
}
