use std::collections::HashSet;

use super::{
    AttackerMove, DefenderMove, EngineError, GamePosition, GameSearch, PlayOutcome, Player, Reason, RoundRecord, Side,
    StrategyError, Successors,
};
use crate::grammar::Grammar;

/// The attacker half of a strategy pair. Returning `Ok(None)` resigns.
pub trait AttackerStrategy {
    fn choose(&mut self, g: &Grammar, pos: &GamePosition) -> Result<Option<AttackerMove>, StrategyError>;
}

/// The defender half. Returning `Ok(None)` gives up the round, which is a
/// genuine loss only when no matching move exists.
pub trait DefenderStrategy {
    fn respond(
        &mut self,
        g: &Grammar,
        pos: &GamePosition,
        attack: &AttackerMove,
    ) -> Result<Option<DefenderMove>, StrategyError>;
}

impl<T: AttackerStrategy + ?Sized> AttackerStrategy for &mut T {
    fn choose(&mut self, g: &Grammar, pos: &GamePosition) -> Result<Option<AttackerMove>, StrategyError> {
        (**self).choose(g, pos)
    }
}

impl<T: DefenderStrategy + ?Sized> DefenderStrategy for &mut T {
    fn respond(
        &mut self,
        g: &Grammar,
        pos: &GamePosition,
        attack: &AttackerMove,
    ) -> Result<Option<DefenderMove>, StrategyError> {
        (**self).respond(g, pos, attack)
    }
}

pub(crate) fn attacker_moves_with(succ: &mut Successors<'_>, pos: &GamePosition) -> Vec<AttackerMove> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for side in [Side::Left, Side::Right] {
        for t in succ.of(pos.term(side)).iter() {
            let mv = AttackerMove { side, action: t.action.clone(), successor: t.target.clone() };
            if seen.insert(mv.clone()) {
                out.push(mv);
            }
        }
    }
    out
}

pub(crate) fn defender_moves_with(
    succ: &mut Successors<'_>,
    pos: &GamePosition,
    attack: &AttackerMove,
) -> Vec<DefenderMove> {
    let mut out: Vec<DefenderMove> = Vec::new();
    for t in succ.of(pos.term(attack.side.other())).iter() {
        if t.action == attack.action && !out.iter().any(|d| d.successor == t.target) {
            out.push(DefenderMove { successor: t.target.clone() });
        }
    }
    out
}

/// All distinct attacker moves: left side first, then right, each in rule
/// order. Identical moves from duplicate rules appear once.
pub fn attacker_moves(g: &Grammar, pos: &GamePosition) -> Vec<AttackerMove> {
    attacker_moves_with(&mut Successors::new(g), pos)
}

/// All distinct defender answers to `attack`, in rule order.
pub fn defender_moves(g: &Grammar, pos: &GamePosition, attack: &AttackerMove) -> Vec<DefenderMove> {
    defender_moves_with(&mut Successors::new(g), pos, attack)
}

pub(crate) fn check_attack(moves: &[AttackerMove], mv: &AttackerMove) -> Result<(), EngineError> {
    if moves.contains(mv) {
        Ok(())
    } else {
        Err(EngineError::IllegalAttack(format!("{} -{}-> {}", mv.side, mv.action, mv.successor)))
    }
}

pub(crate) fn check_defense(answers: &[DefenderMove], d: &DefenderMove) -> Result<(), EngineError> {
    if answers.contains(d) {
        Ok(())
    } else {
        Err(EngineError::IllegalDefense(d.successor.to_string()))
    }
}

/// Plays the bisimulation game from `start` for at most `max_rounds`
/// rounds. Positions with equal terms end the play in the defender's
/// favour; reaching the round limit is reported as a defender win with
/// reason [`Reason::RoundLimit`].
pub fn play_game(
    g: &Grammar,
    start: GamePosition,
    attacker: &mut dyn AttackerStrategy,
    defender: &mut dyn DefenderStrategy,
    max_rounds: usize,
) -> Result<PlayOutcome, EngineError> {
    g.check_closed(&start.left)?;
    g.check_closed(&start.right)?;
    let mut succ = Successors::new(g);
    let mut trace = Vec::new();
    let mut pos = start;
    let end = |winner, reason, trace| Ok(PlayOutcome { winner, reason, trace });
    loop {
        if pos.left == pos.right {
            return end(Player::Defender, Reason::SyntacticEquality, trace);
        }
        if trace.len() >= max_rounds {
            return end(Player::Defender, Reason::RoundLimit, trace);
        }
        let moves = attacker_moves_with(&mut succ, &pos);
        let Some(mv) = attacker.choose(g, &pos)? else {
            let reason = if moves.is_empty() { Reason::AttackerStuck } else { Reason::Resignation };
            return end(Player::Defender, reason, trace);
        };
        check_attack(&moves, &mv)?;
        let answers = defender_moves_with(&mut succ, &pos, &mv);
        let Some(resp) = defender.respond(g, &pos, &mv)? else {
            let reason = if answers.is_empty() { Reason::DefenderStuck } else { Reason::Resignation };
            trace.push(RoundRecord { attack: mv, defense: None });
            return end(Player::Attacker, reason, trace);
        };
        check_defense(&answers, &resp)?;
        let next = pos.advance(&mv, &resp);
        trace.push(RoundRecord { attack: mv, defense: Some(resp) });
        pos = next;
    }
}

/// Plays the first legal move.
#[derive(Debug, Default, Clone, Copy)]
pub struct FirstMoveAttacker;

impl AttackerStrategy for FirstMoveAttacker {
    fn choose(&mut self, g: &Grammar, pos: &GamePosition) -> Result<Option<AttackerMove>, StrategyError> {
        Ok(attacker_moves(g, pos).into_iter().next())
    }
}

/// Answers with the first legal move.
#[derive(Debug, Default, Clone, Copy)]
pub struct FirstMoveDefender;

impl DefenderStrategy for FirstMoveDefender {
    fn respond(
        &mut self,
        g: &Grammar,
        pos: &GamePosition,
        attack: &AttackerMove,
    ) -> Result<Option<DefenderMove>, StrategyError> {
        Ok(defender_moves(g, pos, attack).into_iter().next())
    }
}

/// Attacker backed by full game-tree search: plays a move that wins
/// fastest within the remaining rounds, and otherwise the first legal move.
/// Rounds are counted from `GamePosition::round`, so plays should start at
/// round 0.
pub struct ExhaustiveAttacker<'g> {
    search: GameSearch<'g>,
    max_rounds: usize,
}

impl<'g> ExhaustiveAttacker<'g> {
    pub fn new(g: &'g Grammar, max_rounds: usize) -> Self {
        ExhaustiveAttacker { search: GameSearch::new(g), max_rounds }
    }
}

impl AttackerStrategy for ExhaustiveAttacker<'_> {
    fn choose(&mut self, g: &Grammar, pos: &GamePosition) -> Result<Option<AttackerMove>, StrategyError> {
        let err = |e: EngineError| StrategyError::Search(e.to_string());
        let moves = attacker_moves(g, pos);
        let remaining = self.max_rounds.saturating_sub(pos.round);
        let Some(depth) = self.search.win_depth(&pos.left, &pos.right, remaining).map_err(err)? else {
            return Ok(moves.into_iter().next());
        };
        for mv in &moves {
            let mut wins = true;
            for d in defender_moves(g, pos, mv) {
                let next = pos.advance(mv, &d);
                if !self.search.attacker_wins_within(&next.left, &next.right, depth - 1).map_err(err)? {
                    wins = false;
                    break;
                }
            }
            if wins {
                return Ok(Some(mv.clone()));
            }
        }
        Err(StrategyError::Search("winning position without a winning move".into()))
    }
}

/// Defender backed by full game-tree search: answers with a move from
/// which the attacker cannot win in the remaining rounds, or failing that
/// the move that delays the attacker's win the longest.
pub struct ExhaustiveDefender<'g> {
    search: GameSearch<'g>,
    max_rounds: usize,
}

impl<'g> ExhaustiveDefender<'g> {
    pub fn new(g: &'g Grammar, max_rounds: usize) -> Self {
        ExhaustiveDefender { search: GameSearch::new(g), max_rounds }
    }
}

impl DefenderStrategy for ExhaustiveDefender<'_> {
    fn respond(
        &mut self,
        g: &Grammar,
        pos: &GamePosition,
        attack: &AttackerMove,
    ) -> Result<Option<DefenderMove>, StrategyError> {
        let err = |e: EngineError| StrategyError::Search(e.to_string());
        let remaining = self.max_rounds.saturating_sub(pos.round + 1);
        let mut best: Option<(usize, DefenderMove)> = None;
        for d in defender_moves(g, pos, attack) {
            let next = pos.advance(attack, &d);
            match self.search.win_depth(&next.left, &next.right, remaining).map_err(err)? {
                None => return Ok(Some(d)),
                Some(k) => {
                    if best.as_ref().is_none_or(|(b, _)| k > *b) {
                        best = Some((k, d));
                    }
                }
            }
        }
        Ok(best.map(|(_, d)| d))
    }
}
