use std::collections::HashSet;
use std::fmt::Write;

use super::{content, ParseError};
use crate::rcm::{valid_state_name, Instruction, OpKind, Operation, Rcm, RcmError};

/// A machine together with its initial and final control states.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RcmInstance {
    pub machine: Rcm,
    pub init: String,
    pub target: String,
}

/// Parses a `.rcm` file:
///
/// ```text
/// dim 1
/// init p0
/// final pf
/// ins p0 incr 1 p1
/// ins p1 decr 1 pf
/// ```
///
/// `dim` must come before any `ins` line. The state set is every state
/// named on an `init`, `final` or `ins` line, in order of first mention.
pub fn parse_rcm(text: &str) -> Result<RcmInstance, ParseError> {
    let mut dim: Option<usize> = None;
    let mut init: Option<String> = None;
    let mut target: Option<String> = None;
    let mut instructions: Vec<Instruction> = Vec::new();
    let mut states: Vec<String> = Vec::new();
    let mut seen_states = HashSet::new();
    let mut seen_ins = HashSet::new();
    let mut last_line = 0;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        last_line = line;
        let body = content(raw);
        if body.is_empty() {
            continue;
        }
        let err = |m: String| ParseError::new(line, m);
        let fields: Vec<&str> = body.split_whitespace().collect();
        let mut mention = |s: &str| -> Result<String, ParseError> {
            if !valid_state_name(s) {
                return Err(err(RcmError::BadStateName(s.into()).to_string()));
            }
            if seen_states.insert(s.to_string()) {
                states.push(s.to_string());
            }
            Ok(s.to_string())
        };
        match fields[..] {
            ["dim", d] => {
                if dim.is_some() {
                    return Err(err("duplicate `dim` line".into()));
                }
                let d: usize = d.parse().map_err(|_| err(format!("bad dimension `{d}`")))?;
                if d == 0 {
                    return Err(err(RcmError::ZeroDimension.to_string()));
                }
                dim = Some(d);
            }
            ["init", s] => {
                if init.is_some() {
                    return Err(err("duplicate `init` line".into()));
                }
                init = Some(mention(s)?);
            }
            ["final", s] => {
                if target.is_some() {
                    return Err(err("duplicate `final` line".into()));
                }
                target = Some(mention(s)?);
            }
            ["ins", p, op, idx, q] => {
                let Some(d) = dim else {
                    return Err(err("`ins` before `dim`".into()));
                };
                let kind = match op {
                    "incr" => OpKind::Incr,
                    "decr" => OpKind::Decr,
                    "reset" => OpKind::Reset,
                    other => return Err(err(format!("unknown operation `{other}`"))),
                };
                let counter: usize = idx.parse().map_err(|_| err(format!("bad counter index `{idx}`")))?;
                if counter == 0 || counter > d {
                    return Err(err(format!("counter index out of range: {counter} not in 1..={d}")));
                }
                let ins = Instruction { source: mention(p)?, op: Operation { kind, counter }, target: mention(q)? };
                if !seen_ins.insert(ins.clone()) {
                    return Err(err(RcmError::DuplicateInstruction(ins.to_string()).to_string()));
                }
                instructions.push(ins);
            }
            _ => return Err(err(format!("unrecognized line `{body}`"))),
        }
    }
    let end = last_line.max(1);
    let dim = dim.ok_or_else(|| ParseError::new(end, "missing `dim` line"))?;
    let init = init.ok_or_else(|| ParseError::new(end, "missing `init` line"))?;
    let target = target.ok_or_else(|| ParseError::new(end, "missing `final` line"))?;
    let machine = Rcm::new(dim, states, instructions).map_err(|e| ParseError::new(end, e.to_string()))?;
    Ok(RcmInstance { machine, init, target })
}

/// Canonical `.rcm` text.
pub fn serialize_rcm(inst: &RcmInstance) -> String {
    let mut out = String::new();
    writeln!(out, "dim {}", inst.machine.dim()).unwrap();
    writeln!(out, "init {}", inst.init).unwrap();
    writeln!(out, "final {}", inst.target).unwrap();
    for ins in inst.machine.instructions() {
        writeln!(out, "ins {ins}").unwrap();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const M1: &str = "dim 1\ninit p0\nfinal pf\nins p0 incr 1 p1\nins p1 decr 1 pf\n";

    #[test]
    fn m1_parses() {
        let inst = parse_rcm(M1).unwrap();
        assert_eq!(inst.machine.dim(), 1);
        assert_eq!(inst.machine.states(), ["p0", "pf", "p1"]);
        assert_eq!(inst.machine.instructions().len(), 2);
        assert_eq!(serialize_rcm(&inst), M1);
    }

    #[test]
    fn empty_input_is_line_one() {
        assert_eq!(parse_rcm("").unwrap_err().line, 1);
    }

    #[test]
    fn counter_out_of_range() {
        let e = parse_rcm("dim 1\ninit p0\nfinal pf\nins p0 decr 2 pf\n").unwrap_err();
        assert_eq!(e.line, 4);
        assert!(e.message.contains("counter index out of range"));
    }

    #[test]
    fn structural_errors() {
        assert!(parse_rcm("dim 1\ninit p0\n").unwrap_err().message.contains("final"));
        assert!(parse_rcm("dim 1\nfinal p0\n").unwrap_err().message.contains("init"));
        assert!(parse_rcm("dim 1\ninit a\ninit b\nfinal c\n").is_err());
        assert!(parse_rcm("init a\nfinal b\nins a incr 1 b\n").unwrap_err().message.contains("before"));
        let dup = "dim 1\ninit a\nfinal b\nins a incr 1 b\nins a incr 1 b\n";
        assert_eq!(parse_rcm(dup).unwrap_err().line, 5);
        assert!(parse_rcm("dim 1\ninit a-b\nfinal b\n").is_err());
        assert!(parse_rcm("dim 1\ninit a\nfinal b\nins a zero 1 b\n").is_err());
    }

    #[test]
    fn comments_and_isolated_states() {
        let inst = parse_rcm("# machine\ndim 2 # two counters\ninit p\nfinal q\n").unwrap();
        assert_eq!(inst.machine.states(), ["p", "q"]);
        assert!(inst.machine.instructions().is_empty());
    }
}
