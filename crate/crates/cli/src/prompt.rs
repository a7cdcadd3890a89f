//! Strategies backed by a human at the terminal. Legal moves are listed on
//! the prompt stream, then one line is read: a move number, or `r` (or end
//! of input) to resign.

use std::io::{BufRead, Write};

use grammar_bisim::bisim::{
    attacker_moves, defender_moves, AttackerMove, AttackerStrategy, DefenderMove, DefenderStrategy, GamePosition,
    StrategyError,
};
use grammar_bisim::Grammar;

pub struct Console<R, W> {
    input: R,
    prompt: W,
}

impl<R: BufRead, W: Write> Console<R, W> {
    pub fn new(input: R, prompt: W) -> Self {
        Console { input, prompt }
    }

    fn pick<T: Clone>(&mut self, title: &str, options: &[(String, T)]) -> Result<Option<T>, StrategyError> {
        let io = |e: std::io::Error| StrategyError::Input(e.to_string());
        loop {
            writeln!(self.prompt, "{title}").map_err(io)?;
            for (i, (label, _)) in options.iter().enumerate() {
                writeln!(self.prompt, "  {i}: {label}").map_err(io)?;
            }
            write!(self.prompt, "move> ").map_err(io)?;
            self.prompt.flush().map_err(io)?;
            let mut line = String::new();
            if self.input.read_line(&mut line).map_err(io)? == 0 {
                return Ok(None);
            }
            let line = line.trim();
            if line == "r" || line == "resign" {
                return Ok(None);
            }
            match line.parse::<usize>().ok().and_then(|i| options.get(i)) {
                Some((_, v)) => return Ok(Some(v.clone())),
                None => writeln!(self.prompt, "expected a number below {} or `r`", options.len()).map_err(io)?,
            }
        }
    }
}

impl<R: BufRead, W: Write> AttackerStrategy for Console<R, W> {
    fn choose(&mut self, g: &Grammar, pos: &GamePosition) -> Result<Option<AttackerMove>, StrategyError> {
        let moves = attacker_moves(g, pos);
        if moves.is_empty() {
            return Ok(None);
        }
        let options: Vec<(String, AttackerMove)> =
            moves.into_iter().map(|m| (format!("{} -{}-> {}", m.side, m.action, m.successor), m)).collect();
        let title = format!("round {}: ({}, {})\nattacker moves:", pos.round + 1, pos.left, pos.right);
        self.pick(&title, &options)
    }
}

impl<R: BufRead, W: Write> DefenderStrategy for Console<R, W> {
    fn respond(
        &mut self,
        g: &Grammar,
        pos: &GamePosition,
        attack: &AttackerMove,
    ) -> Result<Option<DefenderMove>, StrategyError> {
        let answers = defender_moves(g, pos, attack);
        if answers.is_empty() {
            return Ok(None);
        }
        let other = attack.side.other();
        let options: Vec<(String, DefenderMove)> =
            answers.into_iter().map(|d| (format!("{other} -{}-> {}", attack.action, d.successor), d)).collect();
        let title = format!(
            "round {}: attacker played {} -{}-> {}\ndefender answers:",
            pos.round + 1,
            attack.side,
            attack.action,
            attack.successor
        );
        self.pick(&title, &options)
    }
}
