//! The polynomial reduction from RCM reachability to non-bisimilarity of
//! first-order grammars, the position encoding it relies on, and the two
//! strategies that witness its correctness.
//!
//! For a machine with dimension `d`, a control state `p` and game counters
//! `((n_1, n'_1), ..., (n_d, n'_d))` (increments and decrements of each
//! counter since its last reset) the game position is the pair
//!
//! ```text
//! A_p(I^n_1 Bot, I^n'_1 Bot, ..., I^n_d Bot, I^n'_d Bot)
//! B_p(I^n_1 Bot, I^n'_1 Bot, ..., I^n_d Bot, I^n'_d Bot)
//! ```
//!
//! so the machine's counter `i` holds `n_i - n'_i`. Decrements go through
//! a forcing gadget (`Ad_q_i`, `B1_q_i`, `B2_q_i`) in which the defender
//! either accepts the decrement or claims it is illegal, which is settled
//! by comparing the two numerals.

mod strategies;
mod verify;

use std::collections::HashMap;
use std::fmt::{self, Write};

use serde::Serialize;
use thiserror::Error;

use crate::grammar::{Action, Grammar, GrammarSpec, Rule};
use crate::rcm::{OpKind, Rcm};
use crate::term::{numeral, numeral_value, Nonterminal, Term};

pub use strategies::{ReductionAttacker, ReductionDefender};
pub use verify::{
    verify_corpus, verify_instance, Agreement, Check, CheckStatus, GroundTruth, VerifyConfig, VerifyReport,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReductionError {
    #[error("unknown state `{0}`")]
    UnknownState(String),
    #[error("expected {expected} counter pairs, got {got}")]
    WrongDimension { expected: usize, got: usize },
    #[error("witness run is not usable: {0}")]
    BadWitness(String),
    #[error(transparent)]
    Rcm(#[from] crate::rcm::RcmError),
}

/// What a nonterminal of the reduced grammar stands for. State and counter
/// fields index into [`SymbolTable::states`] and are 1-based for counters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Role {
    Succ,
    Bottom,
    A(usize),
    B(usize),
    /// `A_(q,i)`
    Forcing(usize, usize),
    /// `B_(q,i,1)`
    Accept(usize, usize),
    /// `B_(q,i,2)`
    Refuse(usize, usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateSymbols {
    pub name: String,
    pub a: Nonterminal,
    pub b: Nonterminal,
    /// `A_(p,i)` for `i = 1..=d`.
    pub forcing: Vec<Nonterminal>,
    /// `B_(p,i,1)`
    pub accept: Vec<Nonterminal>,
    /// `B_(p,i,2)`
    pub refuse: Vec<Nonterminal>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymbolTable {
    pub dim: usize,
    pub succ: Nonterminal,
    pub bottom: Nonterminal,
    pub states: Vec<StateSymbols>,
    /// One action per instruction, in declaration order.
    pub instruction_actions: Vec<Action>,
    pub a: Action,
    pub b: Action,
    state_index: HashMap<String, usize>,
    roles: HashMap<String, Role>,
}

impl SymbolTable {
    pub fn state(&self, name: &str) -> Option<&StateSymbols> {
        self.state_index.get(name).map(|&i| &self.states[i])
    }

    pub fn state_id(&self, name: &str) -> Option<usize> {
        self.state_index.get(name).copied()
    }

    pub fn role(&self, n: &Nonterminal) -> Option<Role> {
        self.roles.get(n.name()).copied()
    }

    pub fn role_of(&self, t: &Term) -> Option<Role> {
        t.head().and_then(|h| self.role(h))
    }

    /// The sidecar mapping: one `state` line per control state and one
    /// `ins` line per instruction.
    pub fn mapping(&self) -> String {
        let mut out = String::new();
        for s in &self.states {
            write!(out, "state {} -> {} {}", s.name, s.a, s.b).unwrap();
            for i in 0..self.dim {
                write!(out, " {} {} {}", s.forcing[i], s.accept[i], s.refuse[i]).unwrap();
            }
            out.push('\n');
        }
        for (k, a) in self.instruction_actions.iter().enumerate() {
            writeln!(out, "ins {k} -> {a}").unwrap();
        }
        out
    }
}

/// The grammar and root terms produced by [`reduce`].
#[derive(Debug, Clone)]
pub struct ReductionOutput {
    pub grammar: Grammar,
    pub left_root: Term,
    pub right_root: Term,
    pub symbols: SymbolTable,
}

/// Game counters: for each machine counter, the number of increments and
/// of decrements since its last reset.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize)]
pub struct GameCounters(pub Vec<(u64, u64)>);

impl GameCounters {
    pub fn zero(dim: usize) -> Self {
        GameCounters(vec![(0, 0); dim])
    }

    /// The machine counter values `n_i - n'_i`, if all are nonnegative.
    pub fn values(&self) -> Option<Vec<u64>> {
        self.0.iter().map(|&(inc, dec)| inc.checked_sub(dec)).collect()
    }
}

impl fmt::Display for GameCounters {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, (n, m)) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "({n},{m})")?;
        }
        f.write_str(")")
    }
}

/// Size of the reduced grammar.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct GrammarSize {
    pub nonterminals: usize,
    pub actions: usize,
    pub rules: usize,
}

impl GrammarSize {
    pub fn of(g: &Grammar) -> Self {
        GrammarSize { nonterminals: g.nonterminals().len(), actions: g.actions().len(), rules: g.rules().len() }
    }

    /// `|N| = 2 + |Q|(2+3d)`, `|Sigma| = |delta| + 2`,
    /// `|R| = 2 + 2 #incr + 2 #reset + 11 #decr`.
    pub fn expected(m: &Rcm) -> Self {
        GrammarSize {
            nonterminals: 2 + m.states().len() * (2 + 3 * m.dim()),
            actions: m.instructions().len() + 2,
            rules: 2 + 2 * m.count(OpKind::Incr) + 2 * m.count(OpKind::Reset) + 11 * m.count(OpKind::Decr),
        }
    }
}

impl fmt::Display for GrammarSize {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "nonterminals {} actions {} rules {}", self.nonterminals, self.actions, self.rules)
    }
}

fn instruction_label(k: usize, ins: &crate::rcm::Instruction) -> String {
    format!("i{k}_{}_{}{}_{}", ins.source, ins.op.kind.keyword(), ins.op.counter, ins.target)
}

fn nt(name: String, arity: usize) -> Nonterminal {
    Nonterminal::new(name, arity).expect("generated names are nonempty")
}

fn app(head: &Nonterminal, args: Vec<Term>) -> Term {
    Term::app(head.clone(), args).expect("generated terms respect arities")
}

/// Builds the grammar for `(m, init, target)`.
///
/// Rules come out in a fixed order: the rule for `I`, then each
/// instruction's rules in declaration order, then the final rule
/// `A_target(x1..x2d) -a-> Bot`. Decrements into the same `(q, i)` emit the
/// same `a`/`b` gadget rules again; these duplicates are kept.
pub fn reduce(m: &Rcm, init: &str, target: &str) -> Result<ReductionOutput, ReductionError> {
    for s in [init, target] {
        if !m.has_state(s) {
            return Err(ReductionError::UnknownState(s.to_string()));
        }
    }
    let d = m.dim();
    let width = 2 * d;
    let succ = nt("I".into(), 1);
    let bottom = nt("Bot".into(), 0);
    let mut roles = HashMap::from([(succ.name().to_string(), Role::Succ), (bottom.name().to_string(), Role::Bottom)]);
    let mut nonterminals = vec![succ.clone(), bottom.clone()];
    let mut states = Vec::new();
    let mut state_index = HashMap::new();
    for (s, p) in m.states().iter().enumerate() {
        let sym = StateSymbols {
            name: p.clone(),
            a: nt(format!("A_{p}"), width),
            b: nt(format!("B_{p}"), width),
            forcing: (1..=d).map(|i| nt(format!("Ad_{p}_{i}"), width)).collect(),
            accept: (1..=d).map(|i| nt(format!("B1_{p}_{i}"), width)).collect(),
            refuse: (1..=d).map(|i| nt(format!("B2_{p}_{i}"), width)).collect(),
        };
        roles.insert(sym.a.name().to_string(), Role::A(s));
        roles.insert(sym.b.name().to_string(), Role::B(s));
        nonterminals.push(sym.a.clone());
        nonterminals.push(sym.b.clone());
        for i in 0..d {
            roles.insert(sym.forcing[i].name().to_string(), Role::Forcing(s, i + 1));
            roles.insert(sym.accept[i].name().to_string(), Role::Accept(s, i + 1));
            roles.insert(sym.refuse[i].name().to_string(), Role::Refuse(s, i + 1));
            nonterminals.push(sym.forcing[i].clone());
            nonterminals.push(sym.accept[i].clone());
            nonterminals.push(sym.refuse[i].clone());
        }
        state_index.insert(p.clone(), s);
        states.push(sym);
    }

    let instruction_actions: Vec<Action> =
        m.instructions().iter().enumerate().map(|(k, ins)| Action::new(instruction_label(k, ins))).collect();
    let a = Action::new("a");
    let b = Action::new("b");
    let mut actions = instruction_actions.clone();
    actions.push(a.clone());
    actions.push(b.clone());

    let xs: Vec<Term> = (1..=width as u32).map(|i| Term::var(i).unwrap()).collect();
    let bot = app(&bottom, vec![]);
    let rule = |head: &Nonterminal, action: &Action, rhs: Term| Rule { head: head.clone(), action: action.clone(), rhs };
    let mut rules = vec![rule(&succ, &a, xs[0].clone())];

    for (ins, action) in m.instructions().iter().zip(&instruction_actions) {
        let p = &states[state_index[&ins.source]];
        let q = &states[state_index[&ins.target]];
        let i = ins.op.counter;
        // 0-based positions of x_{2i-1} and x_{2i}
        let (inc, dec) = (2 * i - 2, 2 * i - 1);
        match ins.op.kind {
            OpKind::Incr => {
                let mut args = xs.clone();
                args[inc] = app(&succ, vec![xs[inc].clone()]);
                rules.push(rule(&p.a, action, app(&q.a, args.clone())));
                rules.push(rule(&p.b, action, app(&q.b, args)));
            }
            OpKind::Reset => {
                let mut args = xs.clone();
                args[inc] = bot.clone();
                args[dec] = bot.clone();
                rules.push(rule(&p.a, action, app(&q.a, args.clone())));
                rules.push(rule(&p.b, action, app(&q.b, args)));
            }
            OpKind::Decr => {
                let (forcing, accept, refuse) = (&q.forcing[i - 1], &q.accept[i - 1], &q.refuse[i - 1]);
                let same = |h: &Nonterminal| app(h, xs.clone());
                rules.push(rule(&p.a, action, same(forcing)));
                rules.push(rule(&p.a, action, same(accept)));
                rules.push(rule(&p.a, action, same(refuse)));
                rules.push(rule(&p.b, action, same(accept)));
                rules.push(rule(&p.b, action, same(refuse)));
                let mut args = xs.clone();
                args[dec] = app(&succ, vec![xs[dec].clone()]);
                rules.push(rule(forcing, &a, app(&q.a, args.clone())));
                rules.push(rule(accept, &a, app(&q.b, args.clone())));
                rules.push(rule(refuse, &a, app(&q.a, args)));
                rules.push(rule(forcing, &b, xs[inc].clone()));
                rules.push(rule(accept, &b, xs[inc].clone()));
                rules.push(rule(refuse, &b, xs[dec].clone()));
            }
        }
    }
    let fin = &states[state_index[target]];
    rules.push(rule(&fin.a, &a, bot.clone()));

    let grammar = Grammar::with_duplicates(GrammarSpec { nonterminals, actions, rules })
        .expect("reduced grammar is well-formed");
    let start = &states[state_index[init]];
    let left_root = app(&start.a, vec![bot.clone(); width]);
    let right_root = app(&start.b, vec![bot; width]);
    let symbols = SymbolTable { dim: d, succ, bottom, states, instruction_actions, a, b, state_index, roles };
    Ok(ReductionOutput { grammar, left_root, right_root, symbols })
}

impl ReductionOutput {
    /// The term pair `(A_p(args), B_p(args))` for state `p` and counters `gc`.
    pub fn encode_position(&self, p: &str, gc: &GameCounters) -> Result<(Term, Term), ReductionError> {
        let sym = self.symbols.state(p).ok_or_else(|| ReductionError::UnknownState(p.to_string()))?;
        if gc.0.len() != self.symbols.dim {
            return Err(ReductionError::WrongDimension { expected: self.symbols.dim, got: gc.0.len() });
        }
        let num = |n: u64| numeral(n as usize, &self.symbols.succ, &self.symbols.bottom).expect("I unary, Bot nullary");
        let args: Vec<Term> = gc.0.iter().flat_map(|&(inc, dec)| [num(inc), num(dec)]).collect();
        Ok((app(&sym.a, args.clone()), app(&sym.b, args)))
    }

    /// Reads the counter pairs off the `2d` numeral arguments of any of the
    /// arity-`2d` nonterminals.
    pub fn decode_counters(&self, t: &Term) -> Option<GameCounters> {
        match self.symbols.role_of(t)? {
            Role::Succ | Role::Bottom => return None,
            _ => {}
        }
        let vals: Option<Vec<u64>> = t.args().iter().map(|a| numeral_value(a).map(|n| n as u64)).collect();
        let vals = vals?;
        Some(GameCounters(vals.chunks(2).map(|c| (c[0], c[1])).collect()))
    }

    /// Inverse of [`ReductionOutput::encode_position`] on either component.
    pub fn decode_position(&self, t: &Term) -> Option<(String, GameCounters)> {
        let s = match self.symbols.role_of(t)? {
            Role::A(s) | Role::B(s) => s,
            _ => return None,
        };
        Some((self.symbols.states[s].name.clone(), self.decode_counters(t)?))
    }

    pub fn size(&self) -> GrammarSize {
        GrammarSize::of(&self.grammar)
    }
}

/// Free-function form of [`ReductionOutput::encode_position`].
pub fn encode_position(out: &ReductionOutput, p: &str, gc: &GameCounters) -> Result<(Term, Term), ReductionError> {
    out.encode_position(p, gc)
}
