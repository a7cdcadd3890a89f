use std::collections::HashMap;

use serde::Serialize;

use super::game::{attacker_moves_with, check_attack, check_defense, defender_moves_with};
use super::{
    AttackerStrategy, DefenderMove, DefenderStrategy, EngineError, GamePosition, Player, Reason, RoundRecord,
    Successors, DEFAULT_MEMO_BUDGET,
};
use crate::grammar::Grammar;
use crate::term::Term;

/// Minimax over the AND/OR game tree, with transposition tables keyed on
/// `(left, right, remaining rounds)`.
///
/// The attacker wins a round when the defender cannot answer. With the
/// equality short-circuit enabled, positions with syntactically equal
/// terms are immediate defender wins.
pub struct GameSearch<'g> {
    grammar: &'g Grammar,
    succ: Successors<'g>,
    short_circuit: bool,
    budget: usize,
    free: HashMap<(Term, Term, usize), bool>,
    vs_defender: HashMap<(Term, Term, usize), bool>,
}

/// Summary of every maximal play of a fixed attacker strategy against all
/// defender answers.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct PlayTree {
    pub plays: usize,
    pub attacker_wins: usize,
    /// First play not won by the attacker, with its end reason.
    pub counterexample: Option<(Vec<RoundRecord>, Player, Reason)>,
    /// First strategy failure, if any (counted as a non-win).
    pub strategy_error: Option<String>,
    pub longest: usize,
}

impl PlayTree {
    pub fn all_attacker_wins(&self) -> bool {
        self.plays > 0 && self.plays == self.attacker_wins
    }
}

impl<'g> GameSearch<'g> {
    pub fn new(grammar: &'g Grammar) -> Self {
        GameSearch {
            grammar,
            succ: Successors::new(grammar),
            short_circuit: true,
            budget: DEFAULT_MEMO_BUDGET,
            free: HashMap::new(),
            vs_defender: HashMap::new(),
        }
    }

    /// Disables the equality short-circuit; equal positions are then played
    /// out like any other.
    pub fn without_short_circuit(mut self) -> Self {
        self.short_circuit = false;
        self
    }

    pub fn with_budget(mut self, budget: usize) -> Self {
        self.budget = budget;
        self
    }

    fn check_budget(&self) -> Result<(), EngineError> {
        if self.free.len() + self.vs_defender.len() + self.succ.len() >= self.budget {
            Err(EngineError::MemoBudget(self.budget))
        } else {
            Ok(())
        }
    }

    /// Can the attacker force a win within `depth` rounds?
    pub fn attacker_wins_within(&mut self, left: &Term, right: &Term, depth: usize) -> Result<bool, EngineError> {
        self.grammar.check_closed(left)?;
        self.grammar.check_closed(right)?;
        self.solve(left, right, depth)
    }

    fn solve(&mut self, left: &Term, right: &Term, depth: usize) -> Result<bool, EngineError> {
        if depth == 0 || (self.short_circuit && left == right) {
            return Ok(false);
        }
        let key = (left.clone(), right.clone(), depth);
        if let Some(&v) = self.free.get(&key) {
            return Ok(v);
        }
        let pos = GamePosition::new(left.clone(), right.clone());
        let mut win = false;
        // OR over attacker moves, AND over defender answers.
        for mv in attacker_moves_with(&mut self.succ, &pos) {
            let answers = defender_moves_with(&mut self.succ, &pos, &mv);
            let mut all_lose = true;
            for d in &answers {
                let next = pos.advance(&mv, d);
                if !self.solve(&next.left, &next.right, depth - 1)? {
                    all_lose = false;
                    break;
                }
            }
            if all_lose {
                win = true;
                break;
            }
        }
        self.check_budget()?;
        self.free.insert(key, win);
        Ok(win)
    }

    /// Smallest `d <= max_depth` within which the attacker can force a win.
    pub fn win_depth(&mut self, left: &Term, right: &Term, max_depth: usize) -> Result<Option<usize>, EngineError> {
        self.grammar.check_closed(left)?;
        self.grammar.check_closed(right)?;
        for d in 1..=max_depth {
            if self.solve(left, right, d)? {
                return Ok(Some(d));
            }
        }
        Ok(None)
    }

    /// Searches all attacker plays of at most `depth` rounds against the
    /// fixed `defender`, returning one play the attacker wins if any.
    ///
    /// Positions are cached, which assumes the defender's answers depend
    /// only on the position and the attacker's move.
    pub fn attacker_beats(
        &mut self,
        defender: &mut dyn DefenderStrategy,
        start: &GamePosition,
        depth: usize,
    ) -> Result<Option<Vec<RoundRecord>>, EngineError> {
        self.grammar.check_closed(&start.left)?;
        self.grammar.check_closed(&start.right)?;
        if !self.beats(defender, start, depth)? {
            return Ok(None);
        }
        // Walk down the cached wins to recover one line.
        let mut line = Vec::new();
        let mut pos = start.clone();
        let mut d = depth;
        'descend: loop {
            for mv in attacker_moves_with(&mut self.succ, &pos) {
                match defender.respond(self.grammar, &pos, &mv)? {
                    None => {
                        line.push(RoundRecord { attack: mv, defense: None });
                        break 'descend;
                    }
                    Some(resp) => {
                        let next = pos.advance(&mv, &resp);
                        if self.beats(defender, &next, d - 1)? {
                            line.push(RoundRecord { attack: mv, defense: Some(resp) });
                            pos = next;
                            d -= 1;
                            continue 'descend;
                        }
                    }
                }
            }
            unreachable!("cached win has a winning move");
        }
        Ok(Some(line))
    }

    fn beats(&mut self, defender: &mut dyn DefenderStrategy, pos: &GamePosition, depth: usize) -> Result<bool, EngineError> {
        if depth == 0 || (self.short_circuit && pos.left == pos.right) {
            return Ok(false);
        }
        let key = (pos.left.clone(), pos.right.clone(), depth);
        if let Some(&v) = self.vs_defender.get(&key) {
            return Ok(v);
        }
        let mut win = false;
        for mv in attacker_moves_with(&mut self.succ, pos) {
            let answers = defender_moves_with(&mut self.succ, pos, &mv);
            match defender.respond(self.grammar, pos, &mv)? {
                None => {
                    win = true;
                    break;
                }
                Some(resp) => {
                    check_defense(&answers, &resp)?;
                    let next = pos.advance(&mv, &resp);
                    if self.beats(defender, &next, depth - 1)? {
                        win = true;
                        break;
                    }
                }
            }
        }
        self.check_budget()?;
        self.vs_defender.insert(key, win);
        Ok(win)
    }

    /// Enumerates every defender answer to the fixed `attacker` for up to
    /// `depth` rounds and tallies who wins each maximal play.
    pub fn enumerate_against(
        &mut self,
        attacker: &mut dyn AttackerStrategy,
        start: &GamePosition,
        depth: usize,
    ) -> Result<PlayTree, EngineError> {
        self.grammar.check_closed(&start.left)?;
        self.grammar.check_closed(&start.right)?;
        let mut tree = PlayTree::default();
        let mut line = Vec::new();
        self.enumerate(attacker, start, depth, &mut line, &mut tree)?;
        Ok(tree)
    }

    fn enumerate(
        &mut self,
        attacker: &mut dyn AttackerStrategy,
        pos: &GamePosition,
        depth: usize,
        line: &mut Vec<RoundRecord>,
        tree: &mut PlayTree,
    ) -> Result<(), EngineError> {
        let finish = |tree: &mut PlayTree, line: &[RoundRecord], winner: Player, reason: Reason| {
            tree.plays += 1;
            tree.longest = tree.longest.max(line.len());
            if winner == Player::Attacker {
                tree.attacker_wins += 1;
            } else if tree.counterexample.is_none() {
                tree.counterexample = Some((line.to_vec(), winner, reason));
            }
        };
        if self.short_circuit && pos.left == pos.right {
            finish(tree, line, Player::Defender, Reason::SyntacticEquality);
            return Ok(());
        }
        if depth == 0 {
            finish(tree, line, Player::Defender, Reason::RoundLimit);
            return Ok(());
        }
        let moves = attacker_moves_with(&mut self.succ, pos);
        let mv = match attacker.choose(self.grammar, pos) {
            Ok(Some(mv)) => mv,
            Ok(None) => {
                let reason = if moves.is_empty() { Reason::AttackerStuck } else { Reason::Resignation };
                finish(tree, line, Player::Defender, reason);
                return Ok(());
            }
            Err(e) => {
                tree.strategy_error.get_or_insert_with(|| e.to_string());
                finish(tree, line, Player::Defender, Reason::Resignation);
                return Ok(());
            }
        };
        check_attack(&moves, &mv)?;
        let answers: Vec<DefenderMove> = defender_moves_with(&mut self.succ, pos, &mv);
        if answers.is_empty() {
            line.push(RoundRecord { attack: mv, defense: None });
            finish(tree, line, Player::Attacker, Reason::DefenderStuck);
            line.pop();
            return Ok(());
        }
        for d in answers {
            let next = pos.advance(&mv, &d);
            line.push(RoundRecord { attack: mv.clone(), defense: Some(d) });
            self.enumerate(attacker, &next, depth - 1, line, tree)?;
            line.pop();
        }
        Ok(())
    }
}
