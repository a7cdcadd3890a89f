//! End-to-end check of the reduction on one instance: bounded search of the
//! machine gives the ground truth, and the game-side tools must agree.

use std::fmt;

use serde::Serialize;

use super::{reduce, GrammarSize, ReductionAttacker, ReductionDefender, ReductionError, ReductionOutput};
use crate::bisim::{exact_bisim_finite, Approximants, ExactVerdict, GamePosition, GameSearch, Player, Reason};
use crate::format::{parse_grammar, serialize_grammar, RcmInstance};
use crate::par::{self, Exec};
use crate::rcm::{reachable_final, Reachability, WitnessRun};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct VerifyConfig {
    /// Round budget for game searches and approximants; also the step bound
    /// of the machine search.
    pub depth: usize,
    /// Configuration budget of the machine search and term budget of the
    /// exact checker.
    pub state_budget: usize,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig { depth: 25, state_budget: 100_000 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckStatus {
    Pass,
    Fail,
    Inconclusive,
}

impl fmt::Display for CheckStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CheckStatus::Pass => "pass",
            CheckStatus::Fail => "fail",
            CheckStatus::Inconclusive => "inconclusive",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub status: CheckStatus,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GroundTruth {
    Reachable { steps: usize },
    /// The whole reachable configuration set was explored.
    UnreachableExact,
    /// No hit within the step bound, but the search did not close.
    UnreachableWithinBounds,
    Unknown,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Agreement {
    Agree,
    Disagree,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VerifyReport {
    pub config: VerifyConfig,
    pub ground_truth: GroundTruth,
    pub checks: Vec<Check>,
    pub agreement: Agreement,
    /// For negative instances: whether bisimilarity itself (not only
    /// `~_k` up to the depth) was established.
    pub exact: bool,
    pub verdict: String,
}

impl VerifyReport {
    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(f, "check {}: {} {}", c.name, c.status, c.detail)?;
        }
        writeln!(f, "verdict: {}", self.verdict)
    }
}

struct Checks(Vec<Check>);

impl Checks {
    fn push(&mut self, name: &'static str, status: CheckStatus, detail: impl Into<String>) -> CheckStatus {
        self.0.push(Check { name, status, detail: detail.into() });
        status
    }
}

/// Runs the full harness on one instance.
pub fn verify_instance(inst: &RcmInstance, config: VerifyConfig) -> Result<VerifyReport, ReductionError> {
    use CheckStatus::*;
    let m = &inst.machine;
    let mut checks = Checks(Vec::new());
    let reach = reachable_final(m, &inst.init, &inst.target, config.depth, config.state_budget)?;
    let (truth, witness): (GroundTruth, Option<&WitnessRun>) = match &reach {
        Reachability::Reached(w) => {
            checks.push("rcm-reach", Pass, format!("reached in {} steps", w.len()));
            (GroundTruth::Reachable { steps: w.len() }, Some(w))
        }
        Reachability::NotWithinBounds { exact: true } => {
            checks.push("rcm-reach", Pass, "unreachable (exact: reachable set exhausted)");
            (GroundTruth::UnreachableExact, None)
        }
        Reachability::NotWithinBounds { exact: false } => {
            checks.push("rcm-reach", Pass, format!("not reached within {} steps (not exact)", config.depth));
            (GroundTruth::UnreachableWithinBounds, None)
        }
        Reachability::BudgetExceeded => {
            checks.push("rcm-reach", Inconclusive, format!("configuration budget {} exceeded", config.state_budget));
            (GroundTruth::Unknown, None)
        }
    };

    let out = reduce(m, &inst.init, &inst.target)?;
    let text = serialize_grammar(&out.grammar);
    match parse_grammar(&text) {
        Ok(_) => checks.push("reduction-valid", Pass, "emitted grammar re-parses and validates"),
        Err(e) => checks.push("reduction-valid", Fail, e.to_string()),
    };
    let (got, want) = (out.size(), GrammarSize::expected(m));
    let status = if got == want { Pass } else { Fail };
    checks.push("size-formulas", status, format!("{got} (expected {want})"));

    let roots = GamePosition::new(out.left_root.clone(), out.right_root.clone());
    let mut exact = false;
    let agreement;
    let verdict;
    match truth {
        GroundTruth::Reachable { .. } => {
            let run = witness.expect("reachable instances carry a witness");
            let strat = attacker_check(&out, inst, run, &roots, config.depth, &mut checks)?;
            let level = match Approximants::new(&out.grammar).distinguishing_level(&out.left_root, &out.right_root, config.depth) {
                Ok(Some(d)) => checks.push("distinguishing-level", Pass, format!("not ~_{} (witness length {})", d.level, d.witness.len())),
                Ok(None) if strat == Pass => checks.push("distinguishing-level", Fail, format!("~_{} holds but the attacker strategy wins", config.depth)),
                Ok(None) => checks.push("distinguishing-level", Inconclusive, format!("no level <= {}", config.depth)),
                Err(e) => checks.push("distinguishing-level", Inconclusive, e.to_string()),
            };
            match exact_bisim_finite(&out.grammar, &out.left_root, &out.right_root, config.state_budget) {
                Ok(ExactVerdict::NotBisimilar) => checks.push("exact-bisim", Pass, "not bisimilar"),
                Ok(ExactVerdict::Bisimilar) => checks.push("exact-bisim", Fail, "bisimilar"),
                Ok(ExactVerdict::Unknown { explored }) => {
                    checks.push("exact-bisim", Inconclusive, format!("fragment exceeds {explored} terms"))
                }
                Err(e) => checks.push("exact-bisim", Fail, e.to_string()),
            };
            agreement = summarize(&checks, level == Pass);
            verdict = format!("NOT BISIMILAR (reachable: YES) {}", agreement_word(agreement));
        }
        GroundTruth::UnreachableExact | GroundTruth::UnreachableWithinBounds => {
            let mut defender = ReductionDefender::new(&out);
            let survive = match GameSearch::new(&out.grammar).attacker_beats(&mut defender, &roots, config.depth) {
                Ok(None) => checks.push("defender-strategy", Pass, format!("survives every attacker play up to {} rounds", config.depth)),
                Ok(Some(line)) => checks.push("defender-strategy", Fail, format!("attacker wins in {} rounds", line.len())),
                Err(e) => checks.push("defender-strategy", Inconclusive, e.to_string()),
            };
            let approx = match Approximants::new(&out.grammar).level(&out.left_root, &out.right_root, config.depth) {
                Ok(None) => checks.push("approximants", Pass, format!("~_k holds for all k <= {}", config.depth)),
                Ok(Some(k)) => checks.push("approximants", Fail, format!("not ~_{k}")),
                Err(e) => checks.push("approximants", Inconclusive, e.to_string()),
            };
            let ex = match exact_bisim_finite(&out.grammar, &out.left_root, &out.right_root, config.state_budget) {
                Ok(ExactVerdict::Bisimilar) => checks.push("exact-bisim", Pass, "bisimilar"),
                Ok(ExactVerdict::NotBisimilar) => checks.push("exact-bisim", Fail, "not bisimilar"),
                Ok(ExactVerdict::Unknown { explored }) => checks.push(
                    "exact-bisim",
                    Inconclusive,
                    format!("fragment exceeds {explored} terms; exactness not established"),
                ),
                Err(e) => checks.push("exact-bisim", Fail, e.to_string()),
            };
            agreement = summarize(&checks, survive == Pass && approx == Pass);
            exact = ex == Pass;
            let reach_word = if truth == GroundTruth::UnreachableExact { "NO" } else { "NO within bounds" };
            verdict = if exact {
                format!("BISIMILAR (reachable: {reach_word}) {}", agreement_word(agreement))
            } else {
                format!(
                    "BISIMILAR UP TO ~_{} (reachable: {reach_word}) {} (exactness not established)",
                    config.depth,
                    agreement_word(agreement)
                )
            };
        }
        GroundTruth::Unknown => {
            agreement = summarize(&checks, false);
            verdict = format!("UNDETERMINED (reachable: UNKNOWN) {}", agreement_word(agreement));
        }
    }
    Ok(VerifyReport { config, ground_truth: truth, checks: checks.0, agreement, exact, verdict })
}

fn attacker_check(
    out: &ReductionOutput,
    inst: &RcmInstance,
    run: &WitnessRun,
    roots: &GamePosition,
    depth: usize,
    checks: &mut Checks,
) -> Result<CheckStatus, ReductionError> {
    use CheckStatus::*;
    let mut attacker = ReductionAttacker::new(out, &inst.machine, &inst.init, &inst.target, run)?;
    let tree = match GameSearch::new(&out.grammar).enumerate_against(&mut attacker, roots, depth) {
        Ok(t) => t,
        Err(e) => return Ok(checks.push("attacker-strategy", Inconclusive, e.to_string())),
    };
    let detail = format!("{}/{} maximal plays won by Attacker (longest {} rounds)", tree.attacker_wins, tree.plays, tree.longest);
    Ok(if tree.all_attacker_wins() {
        checks.push("attacker-strategy", Pass, detail)
    } else if let Some(e) = &tree.strategy_error {
        checks.push("attacker-strategy", Fail, format!("{detail}; strategy error: {e}"))
    } else if matches!(tree.counterexample, Some((_, Player::Defender, Reason::RoundLimit))) {
        checks.push("attacker-strategy", Inconclusive, format!("{detail}; round budget too small"))
    } else {
        checks.push("attacker-strategy", Fail, detail)
    })
}

fn summarize(checks: &Checks, decisive: bool) -> Agreement {
    if checks.0.iter().any(|c| c.status == CheckStatus::Fail) {
        Agreement::Disagree
    } else if decisive {
        Agreement::Agree
    } else {
        Agreement::Inconclusive
    }
}

fn agreement_word(a: Agreement) -> &'static str {
    match a {
        Agreement::Agree => "AGREE",
        Agreement::Disagree => "DISAGREE",
        Agreement::Inconclusive => "INCONCLUSIVE",
    }
}

/// Verifies independent instances as a batch.
pub fn verify_corpus(
    instances: &[RcmInstance],
    config: VerifyConfig,
    exec: Exec,
) -> Vec<Result<VerifyReport, ReductionError>> {
    par::map(exec, instances, |inst| verify_instance(inst, config))
}
