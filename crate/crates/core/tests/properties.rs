mod common;

use std::collections::BTreeSet;

use grammar_bisim::bisim::{bisim_approx, exact_bisim_finite, Approximants, ExactVerdict, GameSearch, GamePosition, AttackerMove, DefenderMove, Side};
use grammar_bisim::format::{parse_rcm, parse_term, serialize_grammar, serialize_rcm, RcmInstance};
use grammar_bisim::grammar::validate_grammar;
use grammar_bisim::rcm::{reachable_final, OpKind, Reachability};
use grammar_bisim::reduction::{reduce, GameCounters, GrammarSize};
use grammar_bisim::term::{Substitution, Var};
use grammar_bisim::{Grammar, Nonterminal, Term};
use proptest::prelude::*;
use proptest::test_runner::{Config, RngSeed};
use rand::Rng;

fn config(cases: u32) -> Config {
    Config { cases, rng_seed: RngSeed::Fixed(common::seed()), failure_persistence: None, ..Config::default() }
}

fn nt(name: &str, arity: usize) -> Nonterminal {
    Nonterminal::new(name, arity).unwrap()
}

fn term_strategy() -> impl Strategy<Value = Term> {
    let leaf = prop_oneof![
        (1u32..=4).prop_map(|i| Term::var(i).unwrap()),
        Just(Term::constant(nt("K", 0)).unwrap()),
        Just(Term::constant(nt("L", 0)).unwrap()),
    ];
    leaf.prop_recursive(6, 64, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(|t| Term::app(nt("G", 1), vec![t]).unwrap()),
            (inner.clone(), inner).prop_map(|(a, b)| Term::app(nt("F", 2), vec![a, b]).unwrap()),
        ]
    })
}

fn subst_strategy() -> impl Strategy<Value = Substitution> {
    proptest::collection::btree_map(1u32..=4, term_strategy(), 0..=4)
        .prop_map(|m| m.into_iter().map(|(v, t)| (Var::new(v).unwrap(), t)).collect())
}

proptest! {
    #![proptest_config(config(256))]

    #[test]
    fn substitution_composes(t in term_strategy(), s1 in subst_strategy(), s2 in subst_strategy()) {
        prop_assert_eq!(t.substitute(&s1).substitute(&s2), t.substitute(&s1.compose(&s2)));
    }

    #[test]
    fn vars_of_substitution(t in term_strategy(), s in subst_strategy()) {
        let want: BTreeSet<Var> = t
            .vars()
            .into_iter()
            .flat_map(|x| s.get(x).map(|u| u.vars()).unwrap_or_else(|| BTreeSet::from([x])))
            .collect();
        prop_assert_eq!(t.substitute(&s).vars(), want);
    }

    #[test]
    fn empty_substitution_is_identity(t in term_strategy()) {
        prop_assert_eq!(t.substitute(&Substitution::new()), t);
    }

    #[test]
    fn term_text_round_trips(t in term_strategy()) {
        prop_assert_eq!(parse_term(&t.to_string()).unwrap(), t);
    }
}

/// Root rewriting written out directly from the rule list.
fn naive_transitions(g: &Grammar, t: &Term) -> Vec<(String, Term)> {
    fn inst(rhs: &Term, args: &[Term]) -> Term {
        match rhs.as_var() {
            Some(v) => args[v.index() as usize - 1].clone(),
            None => Term::app(rhs.head().unwrap().clone(), rhs.args().iter().map(|a| inst(a, args)).collect()).unwrap(),
        }
    }
    g.rules()
        .iter()
        .filter(|r| Some(&r.head) == t.head())
        .map(|r| (r.action.label().to_string(), inst(&r.rhs, t.args())))
        .collect()
}

#[test]
fn transitions_match_naive_rewriting() {
    let mut rng = common::rng(1);
    for _ in 0..500 {
        let g = common::random_grammar(&mut rng);
        for _ in 0..5 {
            let t = common::random_closed_term(&mut rng, &g, 3);
            let got: Vec<(String, Term)> =
                g.transitions(&t).unwrap().into_iter().map(|tr| (tr.action.label().to_string(), tr.target)).collect();
            assert_eq!(got, naive_transitions(&g, &t));
            assert_eq!(got.len(), g.rule_group(t.head().unwrap().name()).len());
            assert!(got.iter().all(|(_, u)| u.is_closed()));
        }
    }
}

#[test]
fn approximants_monotone_and_consistent_with_search() {
    let mut rng = common::rng(2);
    for _ in 0..200 {
        let g = common::random_grammar(&mut rng);
        let t = common::random_closed_term(&mut rng, &g, 3);
        let u = common::random_closed_term(&mut rng, &g, 3);
        let mut ap = Approximants::new(&g);
        let mut search = GameSearch::new(&g);
        let mut prev = true;
        for k in 0..=5 {
            let now = ap.holds(&t, &u, k).unwrap();
            assert!(prev || !now, "~_{k} holds after a failure below");
            assert_eq!(search.attacker_wins_within(&t, &u, k).unwrap(), !now, "{t} {u} {k}");
            prev = now;
        }
        match exact_bisim_finite(&g, &t, &u, 500).unwrap() {
            ExactVerdict::Bisimilar => assert!(prev),
            ExactVerdict::NotBisimilar | ExactVerdict::Unknown { .. } => {}
        }
    }
}

#[test]
fn short_circuit_never_hides_a_win() {
    let mut rng = common::rng(3);
    for _ in 0..100 {
        let g = common::random_grammar(&mut rng);
        let t = common::random_closed_term(&mut rng, &g, 3);
        assert!(!GameSearch::new(&g).without_short_circuit().attacker_wins_within(&t, &t, 6).unwrap());
    }
}

#[test]
fn reachability_monotone_in_bounds() {
    let mut rng = common::rng(4);
    for _ in 0..300 {
        let (m, init, target) = common::random_rcm(&mut rng, 4, 2, 8);
        let small = reachable_final(&m, &init, &target, 4, 20).unwrap();
        let large = reachable_final(&m, &init, &target, 12, 2000).unwrap();
        if let Reachability::Reached(w) = &small {
            assert!(w.replays(&m));
            assert_eq!(w.last().state, target);
            assert!(w.initial.counters.iter().all(|&c| c == 0));
            match &large {
                Reachability::Reached(w2) => assert_eq!(w2.len(), w.len(), "shortest witness is stable"),
                other => panic!("enlarging bounds lost a hit: {other:?}"),
            }
        }
        if let Reachability::NotWithinBounds { exact: true } = small {
            assert_eq!(large, Reachability::NotWithinBounds { exact: true });
        }
    }
}

#[test]
fn reduction_sizes_validation_and_determinism() {
    let mut rng = common::rng(5);
    for _ in 0..200 {
        let (m, init, target) = common::random_rcm(&mut rng, 6, 3, 12);
        let out = reduce(&m, &init, &target).unwrap();
        assert_eq!(out.size(), GrammarSize::expected(&m));
        assert!(validate_grammar(&(&out.grammar).into()).is_ok());
        let text = serialize_rcm(&RcmInstance { machine: m, init, target });
        let (a, b) = (parse_rcm(&text).unwrap(), parse_rcm(&text).unwrap());
        let (ra, rb) = (reduce(&a.machine, &a.init, &a.target).unwrap(), reduce(&b.machine, &b.init, &b.target).unwrap());
        assert_eq!(serialize_grammar(&ra.grammar), serialize_grammar(&rb.grammar));
        assert_eq!(ra.symbols.mapping(), rb.symbols.mapping());
    }
}

fn random_counters(rng: &mut impl Rng, d: usize) -> GameCounters {
    GameCounters(
        (0..d)
            .map(|_| {
                let dec = rng.gen_range(0..4u64);
                (dec + rng.gen_range(0..4u64), dec)
            })
            .collect(),
    )
}

#[test]
fn encoding_round_trips() {
    let mut rng = common::rng(6);
    for _ in 0..200 {
        let (m, init, target) = common::random_rcm(&mut rng, 4, 3, 6);
        let out = reduce(&m, &init, &target).unwrap();
        let p = &m.states()[rng.gen_range(0..m.states().len())];
        let gc = random_counters(&mut rng, m.dim());
        let (l, r) = out.encode_position(p, &gc).unwrap();
        assert_eq!(out.decode_position(&l), Some((p.clone(), gc.clone())));
        assert_eq!(out.decode_position(&r), Some((p.clone(), gc)));
    }
}

/// One matched instruction round on the encoded pair lands on the encoding
/// of the next game position.
#[test]
fn simulation_fidelity() {
    let mut rng = common::rng(7);
    let mut checked = 0;
    for _ in 0..300 {
        let (m, init, target) = common::random_rcm(&mut rng, 4, 2, 8);
        if m.instructions().is_empty() {
            continue;
        }
        let out = reduce(&m, &init, &target).unwrap();
        let g = &out.grammar;
        let mut gc = random_counters(&mut rng, m.dim());
        let mut state = m.instructions()[0].source.clone();
        for _ in 0..6 {
            let here: Vec<usize> = (0..m.instructions().len()).filter(|&k| m.instructions()[k].source == state).collect();
            let Some(&k) = here.get(rng.gen_range(0..here.len().max(1))) else { break };
            let ins = &m.instructions()[k];
            let action = &out.symbols.instruction_actions[k];
            let i = ins.op.counter - 1;
            let (l, r) = out.encode_position(&state, &gc).unwrap();
            let pos = GamePosition::new(l, r);
            let q = out.symbols.state(&ins.target).unwrap();
            let pick = |side: Side, head: &Nonterminal, from: &Term| {
                let succ = g.transitions(from).unwrap().into_iter().find(|t| &t.action == action && t.target.head() == Some(head)).unwrap();
                AttackerMove { side, action: action.clone(), successor: succ.target }
            };
            let next = match ins.op.kind {
                OpKind::Incr | OpKind::Reset => {
                    let mv = pick(Side::Left, &q.a, &pos.left);
                    let ans = pick(Side::Right, &q.b, &pos.right);
                    if ins.op.kind == OpKind::Incr {
                        gc.0[i].0 += 1;
                    } else {
                        gc.0[i] = (0, 0);
                    }
                    pos.advance(&mv, &DefenderMove { successor: ans.successor })
                }
                OpKind::Decr => {
                    if gc.0[i].0 <= gc.0[i].1 {
                        continue;
                    }
                    let mv = pick(Side::Left, &q.forcing[i], &pos.left);
                    let ans = pick(Side::Right, &q.accept[i], &pos.right);
                    let mid = pos.advance(&mv, &DefenderMove { successor: ans.successor });
                    let step = |t: &Term| g.transitions(t).unwrap().into_iter().find(|x| x.action.label() == "a").unwrap().target;
                    gc.0[i].1 += 1;
                    GamePosition::new(step(&mid.left), step(&mid.right))
                }
            };
            state = ins.target.clone();
            let (l, r) = out.encode_position(&state, &gc).unwrap();
            assert_eq!((next.left, next.right), (l, r));
            checked += 1;
        }
    }
    assert!(checked > 100, "only {checked} rounds checked");
}

#[test]
fn exact_checker_matches_approximants_on_numerals() {
    let g = grammar_bisim::format::parse_grammar("nonterminal I 1\nnonterminal Bot 0\naction a\nrule I(x1) -a-> x1\n").unwrap();
    for n in 0..8 {
        for m in 0..8 {
            let (t, u) = (common::numeral_term(n), common::numeral_term(m));
            let exact = exact_bisim_finite(&g, &t, &u, 100).unwrap() == ExactVerdict::Bisimilar;
            assert_eq!(exact, bisim_approx(&g, &t, &u, 10).unwrap());
        }
    }
}
