//! Sequential against rayon-backed execution on the batch workloads.

use std::fs;
use std::hint::black_box;
use std::path::Path;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use grammar_bisim::bisim::exact_bisim_finite_with;
use grammar_bisim::format::{parse_grammar, parse_rcm, RcmInstance};
use grammar_bisim::par::{self, Exec};
use grammar_bisim::reduction::{verify_corpus, VerifyConfig};
use grammar_bisim::term::numeral;
use grammar_bisim::{Nonterminal, Term};

const MODES: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn corpus() -> Vec<RcmInstance> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    let mut names: Vec<_> = fs::read_dir(&dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "rcm"))
        .filter(|p| !p.file_name().unwrap().to_string_lossy().starts_with("bounded_"))
        .collect();
    names.sort();
    names.iter().map(|p| parse_rcm(&fs::read_to_string(p).unwrap()).unwrap()).collect()
}

fn bench_verify(c: &mut Criterion) {
    let insts = corpus();
    let config = VerifyConfig { depth: 25, state_budget: 20_000 };
    let mut group = c.benchmark_group("verify_corpus");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_function(name, |b| b.iter(|| verify_corpus(black_box(&insts), config, exec)));
    }
    group.finish();
}

fn bench_refinement(c: &mut Criterion) {
    // A(x1,x2) -a-> A(x2,x1) and -b-> x1 over numerals: a finite fragment
    // whose refinement needs about n rounds.
    let g = parse_grammar(
        "nonterminal I 1\nnonterminal Bot 0\nnonterminal A 2\naction a\naction b\n\
         rule I(x1) -a-> x1\nrule A(x1,x2) -a-> A(x2,x1)\nrule A(x1,x2) -b-> x1\n",
    )
    .unwrap();
    let (i, bot, a) = (Nonterminal::new("I", 1).unwrap(), Nonterminal::new("Bot", 0).unwrap(), g.nonterminal("A").unwrap().clone());
    let num = |n| numeral(n, &i, &bot).unwrap();
    let mut group = c.benchmark_group("exact_refinement");
    group.sample_size(10);
    for n in [200usize, 400] {
        let t = Term::app(a.clone(), vec![num(0), num(n)]).unwrap();
        let u = Term::app(a.clone(), vec![num(0), num(n + 1)]).unwrap();
        for (name, exec) in MODES {
            group.bench_with_input(BenchmarkId::new(name, n), &n, |b, _| {
                b.iter(|| exact_bisim_finite_with(&g, black_box(&t), black_box(&u), 1_000_000, exec).unwrap())
            });
        }
    }
    group.finish();
}

fn bench_sweep(c: &mut Criterion) {
    let g = parse_grammar("nonterminal I 1\nnonterminal Bot 0\naction a\nrule I(x1) -a-> x1\n").unwrap();
    let (i, bot) = (Nonterminal::new("I", 1).unwrap(), Nonterminal::new("Bot", 0).unwrap());
    let pairs: Vec<(Term, Term)> =
        (0..24).flat_map(|n| (0..24).map(move |m| (n, m))).map(|(n, m)| (numeral(n, &i, &bot).unwrap(), numeral(m, &i, &bot).unwrap())).collect();
    let mut group = c.benchmark_group("approximant_sweep");
    for (name, exec) in MODES {
        group.bench_function(name, |b| {
            b.iter(|| par::map(exec, &pairs, |(t, u)| grammar_bisim::bisim::bisim_approx(&g, t, u, 20).unwrap()))
        });
    }
    group.finish();
}

criterion_group!(benches, bench_verify, bench_refinement, bench_sweep);
criterion_main!(benches);
