use std::collections::{HashMap, VecDeque};

use serde::Serialize;

use crate::grammar::{Grammar, LtsError};
use crate::par::{self, Exec};
use crate::term::Term;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ExactVerdict {
    Bisimilar,
    NotBisimilar,
    /// The reachable fragment has more than the allowed number of terms.
    Unknown { explored: usize },
}

/// The finite LTS reachable from a set of roots.
#[derive(Debug, Clone)]
pub struct Fragment {
    pub states: Vec<Term>,
    /// Outgoing edges as `(action index, target state)`, sorted.
    pub edges: Vec<Vec<(usize, usize)>>,
}

/// Explores every term reachable from `roots`. Returns `Ok(None)` once more
/// than `state_budget` terms have been found.
pub fn explore_fragment(g: &Grammar, roots: &[Term], state_budget: usize) -> Result<Option<Fragment>, LtsError> {
    for r in roots {
        g.check_closed(r)?;
    }
    let action_index: HashMap<&str, usize> = g.actions().iter().enumerate().map(|(i, a)| (a.label(), i)).collect();
    let mut index: HashMap<Term, usize> = HashMap::new();
    let mut states = Vec::new();
    let mut queue = VecDeque::new();
    for r in roots {
        if !index.contains_key(r) {
            index.insert(r.clone(), states.len());
            queue.push_back(states.len());
            states.push(r.clone());
        }
    }
    if states.len() > state_budget {
        return Ok(None);
    }
    let mut edges: Vec<Vec<(usize, usize)>> = vec![Vec::new(); states.len()];
    while let Some(s) = queue.pop_front() {
        let mut out = Vec::new();
        for tr in g.successors(&states[s]) {
            let target = match index.get(&tr.target) {
                Some(&t) => t,
                None => {
                    if states.len() >= state_budget {
                        return Ok(None);
                    }
                    let t = states.len();
                    index.insert(tr.target.clone(), t);
                    states.push(tr.target);
                    edges.push(Vec::new());
                    queue.push_back(t);
                    t
                }
            };
            out.push((action_index[tr.action.label()], target));
        }
        out.sort_unstable();
        out.dedup();
        edges[s] = out;
    }
    Ok(Some(Fragment { states, edges }))
}

/// Current block plus the sorted `(action, successor block)` pairs.
type Signature = (usize, Vec<(usize, usize)>);

/// Coarsest stable partition of the fragment by signature refinement:
/// states stay together while they have the same block and the same set of
/// `(action, successor block)` pairs. Returns the block of each state.
pub(crate) fn coarsest_partition(fragment: &Fragment, exec: Exec) -> Vec<usize> {
    let n = fragment.states.len();
    let mut block = vec![0usize; n];
    let mut blocks = 1;
    loop {
        let signatures: Vec<Signature> = par::map_range(exec, n, |s| {
            let mut sig: Vec<(usize, usize)> = fragment.edges[s].iter().map(|&(a, t)| (a, block[t])).collect();
            sig.sort_unstable();
            sig.dedup();
            (block[s], sig)
        });
        let mut ids: HashMap<&Signature, usize> = HashMap::new();
        let next: Vec<usize> = signatures
            .iter()
            .map(|sig| {
                let fresh = ids.len();
                *ids.entry(sig).or_insert(fresh)
            })
            .collect();
        let count = ids.len();
        block = next;
        if count == blocks {
            return block;
        }
        blocks = count;
    }
}

/// Decides `t ~ u` when at most `state_budget` terms are reachable from
/// them; otherwise reports [`ExactVerdict::Unknown`].
pub fn exact_bisim_finite(g: &Grammar, t: &Term, u: &Term, state_budget: usize) -> Result<ExactVerdict, LtsError> {
    exact_bisim_finite_with(g, t, u, state_budget, Exec::default())
}

pub fn exact_bisim_finite_with(
    g: &Grammar,
    t: &Term,
    u: &Term,
    state_budget: usize,
    exec: Exec,
) -> Result<ExactVerdict, LtsError> {
    let Some(fragment) = explore_fragment(g, &[t.clone(), u.clone()], state_budget)? else {
        return Ok(ExactVerdict::Unknown { explored: state_budget });
    };
    if t == u {
        return Ok(ExactVerdict::Bisimilar);
    }
    let block = coarsest_partition(&fragment, exec);
    // roots are states 0 and 1
    Ok(if block[0] == block[1] { ExactVerdict::Bisimilar } else { ExactVerdict::NotBisimilar })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::format::{parse_grammar, parse_term};

    fn num(n: usize) -> Term {
        let mut s = "Bot".to_string();
        for _ in 0..n {
            s = format!("I({s})");
        }
        parse_term(&s).unwrap()
    }

    fn numerals() -> Grammar {
        parse_grammar("nonterminal I 1\nnonterminal Bot 0\naction a\nrule I(x1) -a-> x1\n").unwrap()
    }

    #[test]
    fn numerals_bisimilar_iff_equal() {
        let g = numerals();
        assert_eq!(exact_bisim_finite(&g, &num(0), &num(0), 10).unwrap(), ExactVerdict::Bisimilar);
        assert_eq!(exact_bisim_finite(&g, &num(2), &num(3), 10).unwrap(), ExactVerdict::NotBisimilar);
        assert_eq!(exact_bisim_finite(&g, &num(2), &num(3), 3).unwrap(), ExactVerdict::Unknown { explored: 3 });
    }

    #[test]
    fn cycles_of_different_length() {
        let g = parse_grammar(
            "nonterminal P 0\nnonterminal Q1 0\nnonterminal Q2 0\nnonterminal R 0\naction a\naction b\n\
             rule P -a-> P\nrule Q1 -a-> Q2\nrule Q2 -a-> Q1\nrule R -a-> R\nrule R -b-> R\n",
        )
        .unwrap();
        let p = parse_term("P").unwrap();
        assert_eq!(exact_bisim_finite(&g, &p, &parse_term("Q1").unwrap(), 10).unwrap(), ExactVerdict::Bisimilar);
        assert_eq!(exact_bisim_finite(&g, &p, &parse_term("R").unwrap(), 10).unwrap(), ExactVerdict::NotBisimilar);
    }

    #[test]
    fn sequential_and_parallel_partitions_agree() {
        let g = numerals();
        let roots: Vec<Term> = (0..30).map(num).collect();
        let frag = explore_fragment(&g, &roots, 100).unwrap().unwrap();
        assert_eq!(frag.states.len(), 30);
        assert_eq!(coarsest_partition(&frag, Exec::Sequential), coarsest_partition(&frag, Exec::Parallel));
    }
}
