//! Reset counter machines: syntax, one-step semantics and bounded
//! breadth-first reachability.

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt;

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RcmError {
    #[error("dimension must be at least 1")]
    ZeroDimension,
    #[error("counter index {index} out of range 1..={dim}")]
    CounterOutOfRange { index: usize, dim: usize },
    #[error("invalid state name `{0}` (allowed: letters, digits, `_`)")]
    BadStateName(String),
    #[error("unknown state `{0}`")]
    UnknownState(String),
    #[error("state `{0}` declared twice")]
    DuplicateState(String),
    #[error("duplicate instruction `{0}`")]
    DuplicateInstruction(String),
    #[error("configuration has {got} counters, machine has dimension {dim}")]
    WrongDimension { got: usize, dim: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OpKind {
    Incr,
    Decr,
    Reset,
}

impl OpKind {
    pub fn keyword(self) -> &'static str {
        match self {
            OpKind::Incr => "incr",
            OpKind::Decr => "decr",
            OpKind::Reset => "reset",
        }
    }
}

/// An operation on counter `counter` (1-based).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct Operation {
    pub kind: OpKind,
    pub counter: usize,
}

impl fmt::Display for Operation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.kind.keyword(), self.counter)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct Instruction {
    pub source: String,
    pub op: Operation,
    pub target: String,
}

impl fmt::Display for Instruction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.source, self.op, self.target)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct Configuration {
    pub state: String,
    pub counters: Vec<u64>,
}

impl Configuration {
    pub fn new(state: impl Into<String>, counters: Vec<u64>) -> Self {
        Configuration { state: state.into(), counters }
    }
}

impl fmt::Display for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, (", self.state)?;
        for (i, c) in self.counters.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{c}")?;
        }
        f.write_str("))")
    }
}

pub(crate) fn valid_state_name(name: &str) -> bool {
    !name.is_empty() && name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// A reset counter machine `(d, Q, delta)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rcm {
    dim: usize,
    states: Vec<String>,
    instructions: Vec<Instruction>,
    state_index: HashMap<String, usize>,
    by_source: Vec<Vec<usize>>,
}

impl Rcm {
    /// Builds a machine over an explicit state set.
    pub fn new(dim: usize, states: Vec<String>, instructions: Vec<Instruction>) -> Result<Rcm, RcmError> {
        if dim == 0 {
            return Err(RcmError::ZeroDimension);
        }
        let mut state_index = HashMap::new();
        for (i, s) in states.iter().enumerate() {
            if !valid_state_name(s) {
                return Err(RcmError::BadStateName(s.clone()));
            }
            if state_index.insert(s.clone(), i).is_some() {
                return Err(RcmError::DuplicateState(s.clone()));
            }
        }
        let mut by_source = vec![Vec::new(); states.len()];
        let mut seen = HashSet::new();
        for (k, ins) in instructions.iter().enumerate() {
            if ins.op.counter == 0 || ins.op.counter > dim {
                return Err(RcmError::CounterOutOfRange { index: ins.op.counter, dim });
            }
            let Some(&src) = state_index.get(&ins.source) else {
                return Err(RcmError::UnknownState(ins.source.clone()));
            };
            if !state_index.contains_key(&ins.target) {
                return Err(RcmError::UnknownState(ins.target.clone()));
            }
            if !seen.insert(ins) {
                return Err(RcmError::DuplicateInstruction(ins.to_string()));
            }
            by_source[src].push(k);
        }
        Ok(Rcm { dim, states, instructions, state_index, by_source })
    }

    /// Builds a machine whose states are those mentioned by the
    /// instructions, followed by any `extra` states, in first-mention order.
    pub fn from_instructions(dim: usize, instructions: Vec<Instruction>, extra: &[&str]) -> Result<Rcm, RcmError> {
        let mut states: Vec<String> = Vec::new();
        let mut seen = HashSet::new();
        let mentions = instructions
            .iter()
            .flat_map(|i| [i.source.as_str(), i.target.as_str()])
            .chain(extra.iter().copied());
        for s in mentions {
            if seen.insert(s.to_string()) {
                states.push(s.to_string());
            }
        }
        Rcm::new(dim, states, instructions)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn instructions(&self) -> &[Instruction] {
        &self.instructions
    }

    pub fn has_state(&self, s: &str) -> bool {
        self.state_index.contains_key(s)
    }

    pub fn count(&self, kind: OpKind) -> usize {
        self.instructions.iter().filter(|i| i.op.kind == kind).count()
    }

    fn check(&self, c: &Configuration) -> Result<usize, RcmError> {
        if c.counters.len() != self.dim {
            return Err(RcmError::WrongDimension { got: c.counters.len(), dim: self.dim });
        }
        self.state_index
            .get(&c.state)
            .copied()
            .ok_or_else(|| RcmError::UnknownState(c.state.clone()))
    }

    fn apply(op: Operation, counters: &[u64]) -> Option<Vec<u64>> {
        let i = op.counter - 1;
        let mut next = counters.to_vec();
        match op.kind {
            OpKind::Incr => next[i] += 1,
            OpKind::Decr => {
                if next[i] == 0 {
                    return None;
                }
                next[i] -= 1;
            }
            OpKind::Reset => next[i] = 0,
        }
        Some(next)
    }

    /// All one-step successors of `c`, tagged with the index of the
    /// instruction used, in instruction declaration order.
    pub fn step(&self, c: &Configuration) -> Result<Vec<(usize, Configuration)>, RcmError> {
        let src = self.check(c)?;
        Ok(self.by_source[src]
            .iter()
            .filter_map(|&k| {
                let ins = &self.instructions[k];
                Rcm::apply(ins.op, &c.counters).map(|counters| (k, Configuration { state: ins.target.clone(), counters }))
            })
            .collect())
    }
}

/// A run from an initial configuration, one entry per executed instruction.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WitnessRun {
    pub initial: Configuration,
    pub steps: Vec<(usize, Configuration)>,
}

impl WitnessRun {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn last(&self) -> &Configuration {
        self.steps.last().map(|(_, c)| c).unwrap_or(&self.initial)
    }

    /// Re-executes the run through [`Rcm::step`], checking every step.
    pub fn replays(&self, m: &Rcm) -> bool {
        let mut cur = &self.initial;
        for (k, next) in &self.steps {
            match m.step(cur) {
                Ok(succ) if succ.iter().any(|(j, c)| j == k && c == next) => cur = next,
                _ => return false,
            }
        }
        true
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Reachability {
    Reached(WitnessRun),
    /// No hit within the bounds. `exact` is set when the search exhausted
    /// the whole reachable set, making the negative answer definitive.
    NotWithinBounds { exact: bool },
    BudgetExceeded,
}

/// Breadth-first search from `(init, 0...0)` for any configuration with
/// state `target`, exploring at most `step_bound` steps and
/// `config_budget` distinct configurations. The returned witness is a
/// shortest run.
pub fn reachable_final(
    m: &Rcm,
    init: &str,
    target: &str,
    step_bound: usize,
    config_budget: usize,
) -> Result<Reachability, RcmError> {
    for s in [init, target] {
        if !m.has_state(s) {
            return Err(RcmError::UnknownState(s.to_string()));
        }
    }
    let start = Configuration::new(init, vec![0; m.dim]);
    if init == target {
        return Ok(Reachability::Reached(WitnessRun { initial: start, steps: Vec::new() }));
    }
    // node -> (parent node, instruction)
    let mut nodes: Vec<(Configuration, Option<(usize, usize)>)> = vec![(start.clone(), None)];
    let mut seen: HashSet<Configuration> = HashSet::from([start]);
    let mut frontier: VecDeque<usize> = VecDeque::from([0]);
    for _ in 0..step_bound {
        let mut next = VecDeque::new();
        while let Some(n) = frontier.pop_front() {
            let succ = m.step(&nodes[n].0)?;
            for (k, c) in succ {
                if seen.contains(&c) {
                    continue;
                }
                if nodes.len() >= config_budget {
                    return Ok(Reachability::BudgetExceeded);
                }
                seen.insert(c.clone());
                let hit = c.state == target;
                nodes.push((c, Some((n, k))));
                if hit {
                    return Ok(Reachability::Reached(rebuild(&nodes, nodes.len() - 1)));
                }
                next.push_back(nodes.len() - 1);
            }
        }
        frontier = next;
        if frontier.is_empty() {
            break;
        }
    }
    Ok(Reachability::NotWithinBounds { exact: frontier.is_empty() })
}

fn rebuild(nodes: &[(Configuration, Option<(usize, usize)>)], mut at: usize) -> WitnessRun {
    let mut steps = Vec::new();
    while let Some((parent, k)) = nodes[at].1 {
        steps.push((k, nodes[at].0.clone()));
        at = parent;
    }
    steps.reverse();
    WitnessRun { initial: nodes[at].0.clone(), steps }
}

/// The breadth-first layers reachable from `(init, 0...0)`: layer `j`
/// holds the configurations first reached after exactly `j` steps.
pub fn bfs_layers(m: &Rcm, init: &str, steps: usize, config_budget: usize) -> Result<Vec<Vec<Configuration>>, RcmError> {
    if !m.has_state(init) {
        return Err(RcmError::UnknownState(init.to_string()));
    }
    let start = Configuration::new(init, vec![0; m.dim]);
    let mut seen = HashSet::from([start.clone()]);
    let mut layers = vec![vec![start]];
    for _ in 0..steps {
        let mut next = Vec::new();
        for c in layers.last().unwrap() {
            for (_, s) in m.step(c)? {
                if seen.len() >= config_budget {
                    layers.push(next);
                    return Ok(layers);
                }
                if seen.insert(s.clone()) {
                    next.push(s);
                }
            }
        }
        if next.is_empty() {
            break;
        }
        layers.push(next);
    }
    Ok(layers)
}
