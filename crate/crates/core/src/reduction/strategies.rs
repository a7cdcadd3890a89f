use std::collections::HashMap;

use super::{GameCounters, ReductionError, ReductionOutput, Role};
use crate::bisim::{
    attacker_moves, defender_moves, AttackerMove, AttackerStrategy, DefenderMove, DefenderStrategy, GamePosition, Side,
    StrategyError,
};
use crate::grammar::{Action, Grammar};
use crate::rcm::{Configuration, OpKind, Rcm, WitnessRun};
use crate::term::{numeral_value, Term};

/// The attacker that replays a witness run of the machine.
///
/// Instruction rounds are played on the `A` side, decrements through
/// `A_p -> A_(q,i)`. When the defender accepts a decrement the attacker
/// plays `a`; when she refuses it he plays `b` and then wins the numeral
/// comparison by playing `a` on the taller numeral. At the final state he
/// plays the final `a` rule, which `B_final` cannot match.
pub struct ReductionAttacker<'a> {
    out: &'a ReductionOutput,
    target: usize,
    /// `(state, counters)` -> instruction index to play there
    script: HashMap<(usize, GameCounters), usize>,
}

impl<'a> ReductionAttacker<'a> {
    pub fn new(out: &'a ReductionOutput, m: &Rcm, init: &str, target: &str, run: &WitnessRun) -> Result<Self, ReductionError> {
        let sym = &out.symbols;
        let target_id = sym.state_id(target).ok_or_else(|| ReductionError::UnknownState(target.to_string()))?;
        if run.initial != Configuration::new(init, vec![0; m.dim()]) {
            return Err(ReductionError::BadWitness(format!("run starts at {}", run.initial)));
        }
        if !run.replays(m) {
            return Err(ReductionError::BadWitness("run does not replay".into()));
        }
        if run.last().state != target {
            return Err(ReductionError::BadWitness(format!("run ends at {}", run.last())));
        }
        let mut script = HashMap::new();
        let mut gc = GameCounters::zero(m.dim());
        let mut state = sym.state_id(init).ok_or_else(|| ReductionError::UnknownState(init.to_string()))?;
        for (k, next) in &run.steps {
            // a later visit overwrites an earlier one, which cuts cycles
            script.insert((state, gc.clone()), *k);
            let op = m.instructions()[*k].op;
            let c = &mut gc.0[op.counter - 1];
            match op.kind {
                OpKind::Incr => c.0 += 1,
                OpKind::Decr => c.1 += 1,
                OpKind::Reset => *c = (0, 0),
            }
            state = sym.state_id(&next.state).expect("witness states belong to the machine");
        }
        Ok(ReductionAttacker { out, target: target_id, script })
    }

    fn plan(&self, pos: &GamePosition) -> Option<(Side, Action, Option<Role>)> {
        let sym = &self.out.symbols;
        let (rl, rr) = (sym.role_of(&pos.left)?, sym.role_of(&pos.right)?);
        let numeral = |r: Role| matches!(r, Role::Succ | Role::Bottom);
        match (rl, rr) {
            (Role::A(s), Role::B(t)) | (Role::B(t), Role::A(s)) if s == t && pos.left.args() == pos.right.args() => {
                let side = if matches!(rl, Role::A(_)) { Side::Left } else { Side::Right };
                if s == self.target {
                    return Some((side, sym.a.clone(), None));
                }
                let gc = self.out.decode_counters(pos.term(side))?;
                let &k = self.script.get(&(s, gc))?;
                let action = sym.instruction_actions[k].clone();
                let want = self.role_after(k).map(|(q, i)| Role::Forcing(q, i));
                Some((side, action, want))
            }
            (Role::Forcing(q, i), Role::Accept(q2, i2)) | (Role::Accept(q2, i2), Role::Forcing(q, i))
                if (q, i) == (q2, i2) =>
            {
                let side = if matches!(rl, Role::Forcing(..)) { Side::Left } else { Side::Right };
                Some((side, sym.a.clone(), None))
            }
            (Role::Forcing(q, i), Role::Refuse(q2, i2)) | (Role::Refuse(q2, i2), Role::Forcing(q, i))
                if (q, i) == (q2, i2) =>
            {
                let side = if matches!(rl, Role::Forcing(..)) { Side::Left } else { Side::Right };
                Some((side, sym.b.clone(), None))
            }
            (l, r) if numeral(l) && numeral(r) => {
                let (m, n) = (numeral_value(&pos.left)?, numeral_value(&pos.right)?);
                let side = match m.cmp(&n) {
                    std::cmp::Ordering::Greater => Side::Left,
                    std::cmp::Ordering::Less => Side::Right,
                    std::cmp::Ordering::Equal => return None,
                };
                Some((side, sym.a.clone(), None))
            }
            _ => None,
        }
    }

    /// For a decrement instruction, the `(target state, counter)` of its
    /// forcing nonterminal.
    fn role_after(&self, k: usize) -> Option<(usize, usize)> {
        let label = &self.out.symbols.instruction_actions[k];
        let rule = self
            .out
            .grammar
            .rules()
            .iter()
            .find(|r| &r.action == label && matches!(self.out.symbols.role_of(&r.rhs), Some(Role::Forcing(..))))?;
        match self.out.symbols.role_of(&rule.rhs)? {
            Role::Forcing(q, i) => Some((q, i)),
            _ => None,
        }
    }
}

impl AttackerStrategy for ReductionAttacker<'_> {
    fn choose(&mut self, g: &Grammar, pos: &GamePosition) -> Result<Option<AttackerMove>, StrategyError> {
        let off = || StrategyError::OffScript(format!("({}, {})", pos.left, pos.right));
        let (side, action, want) = self.plan(pos).ok_or_else(off)?;
        attacker_moves(g, pos)
            .into_iter()
            .find(|m| {
                m.side == side
                    && m.action == action
                    && want.is_none_or(|w| self.out.symbols.role_of(&m.successor) == Some(w))
            })
            .map(Some)
            .ok_or_else(off)
    }
}

/// The defender that never loses on unreachable instances.
///
/// She answers with a syntactically equal term whenever one is available,
/// which punishes every attacker deviation from the `A` side script. On a
/// decrement `A_p -> A_(q,i)` she reads `(n_i, n'_i)` off the `B_p` term and
/// accepts (`B_(q,i,1)`) if `n_i > n'_i`, refusing (`B_(q,i,2)`) otherwise.
/// Every other move is matched by the first answer in rule order.
pub struct ReductionDefender<'a> {
    out: &'a ReductionOutput,
}

impl<'a> ReductionDefender<'a> {
    pub fn new(out: &'a ReductionOutput) -> Self {
        ReductionDefender { out }
    }

    fn counter_pair(&self, t: &Term, i: usize) -> Option<(usize, usize)> {
        let args = t.args();
        Some((numeral_value(args.get(2 * i - 2)?)?, numeral_value(args.get(2 * i - 1)?)?))
    }
}

impl DefenderStrategy for ReductionDefender<'_> {
    fn respond(
        &mut self,
        g: &Grammar,
        pos: &GamePosition,
        attack: &AttackerMove,
    ) -> Result<Option<DefenderMove>, StrategyError> {
        let answers = defender_moves(g, pos, attack);
        if let Some(eq) = answers.iter().find(|d| d.successor == attack.successor) {
            return Ok(Some(eq.clone()));
        }
        let sym = &self.out.symbols;
        if let Some(Role::Forcing(q, i)) = sym.role_of(&attack.successor) {
            let other = pos.term(attack.side.other());
            if let Some((inc, dec)) = self.counter_pair(other, i) {
                if inc < dec {
                    log::debug!("defender at counters ({inc},{dec}) outside the n >= n' invariant");
                }
                let want = if inc > dec { Role::Accept(q, i) } else { Role::Refuse(q, i) };
                if let Some(d) = answers.iter().find(|d| sym.role_of(&d.successor) == Some(want)) {
                    return Ok(Some(d.clone()));
                }
            }
        }
        Ok(answers.into_iter().next())
    }
}
