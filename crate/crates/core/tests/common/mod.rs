//! Random instance generators shared by the integration suites.
#![allow(dead_code)]

use std::collections::HashSet;

use grammar_bisim::grammar::GrammarSpec;
use grammar_bisim::rcm::{Instruction, OpKind, Operation, Rcm};
use grammar_bisim::{Action, Grammar, Nonterminal, Rule, Term};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const DEFAULT_SEED: u64 = 0x5eed_2024;

/// Seed for every randomized suite; override with `GBISIM_TEST_SEED`.
pub fn seed() -> u64 {
    std::env::var("GBISIM_TEST_SEED").ok().and_then(|s| s.parse().ok()).unwrap_or(DEFAULT_SEED)
}

pub fn rng(stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed());
    r.set_stream(stream);
    r
}

fn random_term(rng: &mut ChaCha8Rng, nts: &[Nonterminal], vars: u32, depth: usize) -> Term {
    let leaves: Vec<&Nonterminal> = nts.iter().filter(|n| n.arity() == 0).collect();
    if vars > 0 && (depth == 0 || rng.gen_bool(0.35)) && rng.gen_bool(0.6) {
        return Term::var(rng.gen_range(1..=vars)).unwrap();
    }
    let head = if depth == 0 { *leaves.choose(rng).unwrap() } else { nts.choose(rng).unwrap() };
    let args = (0..head.arity()).map(|_| random_term(rng, nts, vars, depth.saturating_sub(1))).collect();
    Term::app(head.clone(), args).unwrap()
}

/// A small grammar: 2..=4 nonterminals of arity at most 2 (at least one
/// nullary), one or two actions, up to two rules per nonterminal with
/// right-hand sides of depth at most 2.
pub fn random_grammar(rng: &mut ChaCha8Rng) -> Grammar {
    let n = rng.gen_range(2..=4);
    let nts: Vec<Nonterminal> = (0..n)
        .map(|i| Nonterminal::new(format!("N{i}"), if i == 0 { 0 } else { rng.gen_range(0..=2) }).unwrap())
        .collect();
    let actions: Vec<Action> = ["a", "b"][..rng.gen_range(1..=2)].iter().map(|l| Action::new(*l)).collect();
    let mut rules = Vec::new();
    for head in &nts {
        for _ in 0..rng.gen_range(0..=2) {
            let rhs = random_term(rng, &nts, head.arity() as u32, 2);
            rules.push(Rule { head: head.clone(), action: actions.choose(rng).unwrap().clone(), rhs });
        }
    }
    Grammar::with_duplicates(GrammarSpec { nonterminals: nts, actions, rules }).unwrap()
}

pub fn random_closed_term(rng: &mut ChaCha8Rng, g: &Grammar, depth: usize) -> Term {
    random_term(rng, g.nonterminals(), 0, depth)
}

/// A machine with at most `max_q` states, dimension at most `max_d` and at
/// most `max_ins` distinct instructions; initial state `q0`.
pub fn random_rcm(rng: &mut ChaCha8Rng, max_q: usize, max_d: usize, max_ins: usize) -> (Rcm, String, String) {
    let q = rng.gen_range(1..=max_q);
    let d = rng.gen_range(1..=max_d);
    let states: Vec<String> = (0..q).map(|i| format!("q{i}")).collect();
    let mut seen = HashSet::new();
    let mut ins = Vec::new();
    for _ in 0..rng.gen_range(0..=max_ins) {
        let kind = *[OpKind::Incr, OpKind::Decr, OpKind::Reset].choose(rng).unwrap();
        let i = Instruction {
            source: states.choose(rng).unwrap().clone(),
            op: Operation { kind, counter: rng.gen_range(1..=d) },
            target: states.choose(rng).unwrap().clone(),
        };
        if seen.insert(i.to_string()) {
            ins.push(i);
        }
    }
    let target = states.choose(rng).unwrap().clone();
    (Rcm::new(d, states.clone(), ins).unwrap(), states[0].clone(), target)
}

pub fn numeral_term(n: usize) -> Term {
    let i = Nonterminal::new("I", 1).unwrap();
    let bot = Nonterminal::new("Bot", 0).unwrap();
    grammar_bisim::term::numeral(n, &i, &bot).unwrap()
}
