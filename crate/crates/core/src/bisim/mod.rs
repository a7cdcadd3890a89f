//! The bisimulation game on pairs of closed terms, stratified approximants
//! `~_k`, exhaustive game-tree search and an exact checker for finite
//! reachable fragments.

mod approx;
mod exact;
mod game;
mod search;

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::grammar::{Action, Grammar, LtsError, Transition};
use crate::term::Term;

pub use approx::{bisim_approx, distinguishing_level, Approximants, Distinction};
pub use exact::{exact_bisim_finite, exact_bisim_finite_with, explore_fragment, ExactVerdict};
pub use game::{
    attacker_moves, defender_moves, play_game, AttackerStrategy, DefenderStrategy, ExhaustiveAttacker,
    ExhaustiveDefender, FirstMoveAttacker, FirstMoveDefender,
};
pub use search::{GameSearch, PlayTree};

/// Default bound on memo-table entries per query.
pub const DEFAULT_MEMO_BUDGET: usize = 2_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error(transparent)]
    Lts(#[from] LtsError),
    #[error("illegal attacker move: {0}")]
    IllegalAttack(String),
    #[error("illegal defender move: {0}")]
    IllegalDefense(String),
    #[error("memo table exceeded its budget of {0} entries")]
    MemoBudget(usize),
    #[error(transparent)]
    Strategy(#[from] StrategyError),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StrategyError {
    /// The position is not one the strategy was built to handle.
    #[error("position left the strategy's script: {0}")]
    OffScript(String),
    #[error("input error: {0}")]
    Input(String),
    #[error("search failed: {0}")]
    Search(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub fn other(self) -> Side {
        match self {
            Side::Left => Side::Right,
            Side::Right => Side::Left,
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::Left => "left",
            Side::Right => "right",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct GamePosition {
    pub left: Term,
    pub right: Term,
    pub round: usize,
}

impl GamePosition {
    pub fn new(left: Term, right: Term) -> Self {
        GamePosition { left, right, round: 0 }
    }

    pub fn term(&self, side: Side) -> &Term {
        match side {
            Side::Left => &self.left,
            Side::Right => &self.right,
        }
    }

    /// The position after the attacker moved on `attack.side` and the
    /// defender answered on the other side.
    pub fn advance(&self, attack: &AttackerMove, defense: &DefenderMove) -> GamePosition {
        let (left, right) = match attack.side {
            Side::Left => (attack.successor.clone(), defense.successor.clone()),
            Side::Right => (defense.successor.clone(), attack.successor.clone()),
        };
        GamePosition { left, right, round: self.round + 1 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct AttackerMove {
    pub side: Side,
    pub action: Action,
    pub successor: Term,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct DefenderMove {
    pub successor: Term,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Player {
    Attacker,
    Defender,
}

impl fmt::Display for Player {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Player::Attacker => "Attacker",
            Player::Defender => "Defender",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Reason {
    DefenderStuck,
    AttackerStuck,
    SyntacticEquality,
    RoundLimit,
    Resignation,
}

impl fmt::Display for Reason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Reason::DefenderStuck => "defender-stuck",
            Reason::AttackerStuck => "attacker-stuck",
            Reason::SyntacticEquality => "syntactic-equality",
            Reason::RoundLimit => "round-limit",
            Reason::Resignation => "resignation",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RoundRecord {
    pub attack: AttackerMove,
    pub defense: Option<DefenderMove>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PlayOutcome {
    pub winner: Player,
    pub reason: Reason,
    pub trace: Vec<RoundRecord>,
}

impl fmt::Display for PlayOutcome {
    /// One line per round, then the winner line.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, r) in self.trace.iter().enumerate() {
            write!(f, "round {}: ATT {} -{}-> {} ; ", i + 1, r.attack.side, r.attack.action, r.attack.successor)?;
            match &r.defense {
                Some(d) => writeln!(f, "DEF -{}-> {}", r.attack.action, d.successor)?,
                None if i + 1 == self.trace.len() && self.reason == Reason::Resignation => writeln!(f, "DEF resigns")?,
                None => writeln!(f, "DEF stuck")?,
            }
        }
        writeln!(f, "winner: {} ({})", self.winner, self.reason)
    }
}

/// Per-query cache of successor lists.
pub(crate) struct Successors<'g> {
    grammar: &'g Grammar,
    cache: HashMap<Term, Arc<Vec<Transition>>>,
}

impl<'g> Successors<'g> {
    pub(crate) fn new(grammar: &'g Grammar) -> Self {
        Successors { grammar, cache: HashMap::new() }
    }

    pub(crate) fn of(&mut self, t: &Term) -> Arc<Vec<Transition>> {
        if let Some(s) = self.cache.get(t) {
            return s.clone();
        }
        let s = Arc::new(self.grammar.successors(t));
        self.cache.insert(t.clone(), s.clone());
        s
    }

    pub(crate) fn len(&self) -> usize {
        self.cache.len()
    }
}
