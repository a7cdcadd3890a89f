use std::collections::HashMap;

use serde::Serialize;

use super::{EngineError, Side, Successors, DEFAULT_MEMO_BUDGET};
use crate::grammar::{Action, Grammar};
use crate::term::Term;

/// Stratified bisimilarity `~_k`, memoized on `(t, u, k)`.
///
/// `~_0` relates everything; `t ~_{k+1} u` iff every transition of either
/// term is matched by a same-action transition of the other into `~_k`.
pub struct Approximants<'g> {
    grammar: &'g Grammar,
    succ: Successors<'g>,
    memo: HashMap<(Term, Term, usize), bool>,
    budget: usize,
}

/// The least level at which two terms are told apart, with one play of
/// that length in which the attacker wins against best defence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Distinction {
    pub level: usize,
    pub witness: Vec<(Side, Action)>,
}

impl<'g> Approximants<'g> {
    pub fn new(grammar: &'g Grammar) -> Self {
        Approximants::with_budget(grammar, DEFAULT_MEMO_BUDGET)
    }

    pub fn with_budget(grammar: &'g Grammar, budget: usize) -> Self {
        Approximants { grammar, succ: Successors::new(grammar), memo: HashMap::new(), budget }
    }

    pub fn memo_len(&self) -> usize {
        self.memo.len()
    }

    /// Decides `t ~_k u`.
    pub fn holds(&mut self, t: &Term, u: &Term, k: usize) -> Result<bool, EngineError> {
        self.grammar.check_closed(t)?;
        self.grammar.check_closed(u)?;
        self.eval(t, u, k)
    }

    fn eval(&mut self, t: &Term, u: &Term, k: usize) -> Result<bool, EngineError> {
        if k == 0 || t == u {
            return Ok(true);
        }
        let key = (t.clone(), u.clone(), k);
        if let Some(&v) = self.memo.get(&key) {
            return Ok(v);
        }
        let v = self.matched(t, u, k, false)? && self.matched(u, t, k, true)?;
        if self.memo.len() + self.succ.len() >= self.budget {
            return Err(EngineError::MemoBudget(self.budget));
        }
        self.memo.insert(key, v);
        Ok(v)
    }

    /// Every move of `t` has an answer from `u` into `~_{k-1}`. Successor
    /// pairs keep the orientation of the original query.
    fn matched(&mut self, t: &Term, u: &Term, k: usize, flipped: bool) -> Result<bool, EngineError> {
        let ts = self.succ.of(t);
        let us = self.succ.of(u);
        'moves: for mv in ts.iter() {
            for resp in us.iter().filter(|r| r.action == mv.action) {
                let ok = if flipped {
                    self.eval(&resp.target, &mv.target, k - 1)?
                } else {
                    self.eval(&mv.target, &resp.target, k - 1)?
                };
                if ok {
                    continue 'moves;
                }
            }
            return Ok(false);
        }
        Ok(true)
    }

    /// Smallest `k <= k_max` with `not (t ~_k u)`.
    pub fn level(&mut self, t: &Term, u: &Term, k_max: usize) -> Result<Option<usize>, EngineError> {
        self.grammar.check_closed(t)?;
        self.grammar.check_closed(u)?;
        self.level_unchecked(t, u, k_max)
    }

    fn level_unchecked(&mut self, t: &Term, u: &Term, k_max: usize) -> Result<Option<usize>, EngineError> {
        for k in 1..=k_max {
            if !self.eval(t, u, k)? {
                return Ok(Some(k));
            }
        }
        Ok(None)
    }

    /// [`Approximants::level`] plus a witness action sequence. Attacker
    /// moves are tried left before right, then in rule order; along the
    /// witness the defender answers so as to survive longest.
    pub fn distinguishing_level(&mut self, t: &Term, u: &Term, k_max: usize) -> Result<Option<Distinction>, EngineError> {
        let Some(level) = self.level(t, u, k_max)? else { return Ok(None) };
        let mut witness = Vec::with_capacity(level);
        let (mut l, mut r) = (t.clone(), u.clone());
        let mut k = level;
        loop {
            let (side, action, next) = self.winning_move(&l, &r, k)?;
            witness.push((side, action));
            let Some((nl, nr)) = next else { break };
            k -= 1;
            l = nl;
            r = nr;
        }
        Ok(Some(Distinction { level, witness }))
    }

    /// At a pair with level exactly `k`: an attacker move all of whose
    /// answers land outside `~_{k-1}`, with the longest-surviving answer.
    #[allow(clippy::type_complexity)]
    fn winning_move(&mut self, l: &Term, r: &Term, k: usize) -> Result<(Side, Action, Option<(Term, Term)>), EngineError> {
        for side in [Side::Left, Side::Right] {
            let (mine, theirs) = match side {
                Side::Left => (l, r),
                Side::Right => (r, l),
            };
            let ms = self.succ.of(mine);
            let rs = self.succ.of(theirs);
            'moves: for mv in ms.iter() {
                let mut best: Option<(usize, Term, Term)> = None;
                for resp in rs.iter().filter(|x| x.action == mv.action) {
                    let pair = match side {
                        Side::Left => (mv.target.clone(), resp.target.clone()),
                        Side::Right => (resp.target.clone(), mv.target.clone()),
                    };
                    match self.level_unchecked(&pair.0, &pair.1, k - 1)? {
                        None => continue 'moves,
                        Some(j) => {
                            if best.as_ref().is_none_or(|(b, _, _)| j > *b) {
                                best = Some((j, pair.0, pair.1));
                            }
                        }
                    }
                }
                return Ok((side, mv.action.clone(), best.map(|(_, a, b)| (a, b))));
            }
        }
        unreachable!("a pair outside ~_k has a winning attacker move")
    }
}

/// `t ~_k u` with a fresh memo table.
pub fn bisim_approx(g: &Grammar, t: &Term, u: &Term, k: usize) -> Result<bool, EngineError> {
    Approximants::new(g).holds(t, u, k)
}

pub fn distinguishing_level(g: &Grammar, t: &Term, u: &Term, k_max: usize) -> Result<Option<Distinction>, EngineError> {
    Approximants::new(g).distinguishing_level(t, u, k_max)
}
