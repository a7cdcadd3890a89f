mod prompt;

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use grammar_bisim::ack::{fast_growing, AckError, DEFAULT_WORK_BUDGET};
use grammar_bisim::bisim::{
    exact_bisim_finite, play_game, Approximants, AttackerStrategy, DefenderStrategy, EngineError, ExactVerdict,
    ExhaustiveAttacker, ExhaustiveDefender, GamePosition, Player,
};
use grammar_bisim::format::{parse_grammar, parse_rcm, parse_term_in, serialize_grammar, RcmInstance};
use grammar_bisim::rcm::{bfs_layers, reachable_final, Reachability};
use grammar_bisim::reduction::{reduce, verify_instance, Agreement, VerifyConfig};
use grammar_bisim::{Grammar, Term};
use num_bigint::BigUint;

/// Exit statuses. Usage and input errors exit with 2 (as clap does).
const OK: u8 = 0;
const NEGATIVE: u8 = 1;
const USAGE: u8 = 2;
const INCONCLUSIVE: u8 = 3;

#[derive(Parser)]
#[command(name = "gbisim", version, about = "First-order grammars, bisimulation games and reset counter machines")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Reduce a reachability instance to a pair of grammar terms.
    Reduce {
        rcm: PathBuf,
        /// Where to write the grammar.
        #[arg(short, long)]
        output: PathBuf,
        /// Where to write the state and instruction mapping.
        #[arg(long)]
        map: Option<PathBuf>,
    },
    /// Reset counter machine tools.
    #[command(subcommand)]
    Rcm(RcmCommand),
    /// Labelled transition system tools.
    #[command(subcommand)]
    Lts(LtsCommand),
    /// Play the bisimulation game.
    #[command(subcommand)]
    Game(GameCommand),
    /// Bisimilarity checks.
    #[command(subcommand)]
    Bisim(BisimCommand),
    /// Check the reduction end to end on one instance.
    Verify {
        rcm: PathBuf,
        #[arg(long, default_value_t = 25)]
        depth: usize,
        #[arg(long, default_value_t = 100_000)]
        state_budget: usize,
        /// Print the report as JSON.
        #[arg(long)]
        json: bool,
    },
    /// The fast-growing function f_k(n), or f_A(n) = f_n(n) with -A.
    Ack {
        #[arg(short = 'A', value_name = "N", conflicts_with_all = ["k", "n"])]
        diagonal: Option<u64>,
        #[arg(required_unless_present = "diagonal")]
        k: Option<u64>,
        #[arg(required_unless_present = "diagonal")]
        n: Option<u64>,
        /// Number of successor applications allowed.
        #[arg(long, default_value_t = DEFAULT_WORK_BUDGET)]
        budget: u64,
    },
}

#[derive(Subcommand)]
enum RcmCommand {
    /// Print the breadth-first layers of configurations.
    Run {
        rcm: PathBuf,
        #[arg(long)]
        steps: usize,
        #[arg(long, default_value_t = 100_000)]
        config_budget: usize,
    },
    /// Search for the final state.
    Reach {
        rcm: PathBuf,
        #[arg(long, default_value_t = 25)]
        step_bound: usize,
        #[arg(long, default_value_t = 100_000)]
        config_budget: usize,
    },
}

#[derive(Subcommand)]
enum LtsCommand {
    /// List the transitions of a closed term.
    Step {
        grammar: PathBuf,
        #[arg(long)]
        term: String,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Driver {
    Exhaustive,
    Prompt,
}

#[derive(Subcommand)]
enum GameCommand {
    /// Play one game and print the trace
    Play {
        grammar: PathBuf,
        #[command(flatten)]
        pair: Pair,
        #[arg(long, value_enum, default_value = "exhaustive")]
        attacker: Driver,
        #[arg(long, value_enum, default_value = "exhaustive")]
        defender: Driver,
        #[arg(long, default_value_t = 25)]
        max_rounds: usize,
        /// Print the outcome as JSON.
        #[arg(long)]
        json: bool,
    },
}

#[derive(Subcommand)]
enum BisimCommand {
    /// Decide t ~_k u for all k up to the depth.
    Approx {
        grammar: PathBuf,
        #[command(flatten)]
        pair: Pair,
        #[arg(long)]
        depth: usize,
    },
    /// Decide t ~ u on a finite reachable fragment.
    Exact {
        grammar: PathBuf,
        #[command(flatten)]
        pair: Pair,
        #[arg(long, default_value_t = 100_000)]
        state_budget: usize,
    },
}

#[derive(Args)]
struct Pair {
    #[arg(long)]
    left: String,
    #[arg(long)]
    right: String,
}

/// A failure with its exit status.
struct Failure(u8, anyhow::Error);

fn usage(e: impl Into<anyhow::Error>) -> Failure {
    Failure(USAGE, e.into())
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display())).map_err(usage)
}

fn load_rcm(path: &Path) -> Result<RcmInstance, Failure> {
    parse_rcm(&read(path)?).map_err(|e| usage(anyhow!("{}: {e}", path.display())))
}

fn load_grammar(path: &Path) -> Result<Grammar, Failure> {
    parse_grammar(&read(path)?).map_err(|e| usage(anyhow!("{}: {e}", path.display())))
}

fn load_pair(g: &Grammar, pair: &Pair) -> Result<(Term, Term), Failure> {
    let term = |s: &str| parse_term_in(g, s).map_err(|e| usage(anyhow!(e)));
    Ok((term(&pair.left)?, term(&pair.right)?))
}

fn engine(e: EngineError) -> Failure {
    match e {
        EngineError::MemoBudget(_) => Failure(INCONCLUSIVE, e.into()),
        _ => usage(e),
    }
}

fn write_file(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).with_context(|| format!("cannot write {}", path.display())).map_err(usage)
}

fn run(cli: Cli, out: &mut dyn Write) -> Result<u8, Failure> {
    let io = |e: io::Error| usage(e);
    match cli.command {
        Command::Reduce { rcm, output, map } => {
            let inst = load_rcm(&rcm)?;
            let red = reduce(&inst.machine, &inst.init, &inst.target).map_err(usage)?;
            write_file(&output, &serialize_grammar(&red.grammar))?;
            if let Some(map) = map {
                write_file(&map, &red.symbols.mapping())?;
            }
            writeln!(out, "{}", red.size()).map_err(io)?;
            writeln!(out, "left {}", red.left_root).map_err(io)?;
            writeln!(out, "right {}", red.right_root).map_err(io)?;
            Ok(OK)
        }
        Command::Rcm(RcmCommand::Run { rcm, steps, config_budget }) => {
            let inst = load_rcm(&rcm)?;
            let layers = bfs_layers(&inst.machine, &inst.init, steps, config_budget).map_err(usage)?;
            for (j, layer) in layers.iter().enumerate() {
                let cs: Vec<String> = layer.iter().map(|c| c.to_string()).collect();
                writeln!(out, "step {j}: {}", cs.join(" ")).map_err(io)?;
            }
            Ok(OK)
        }
        Command::Rcm(RcmCommand::Reach { rcm, step_bound, config_budget }) => {
            let inst = load_rcm(&rcm)?;
            let m = &inst.machine;
            match reachable_final(m, &inst.init, &inst.target, step_bound, config_budget).map_err(usage)? {
                Reachability::Reached(w) => {
                    writeln!(out, "reached in {} steps", w.len()).map_err(io)?;
                    writeln!(out, "  {}", w.initial).map_err(io)?;
                    for (k, c) in &w.steps {
                        writeln!(out, "  {} => {c}", m.instructions()[*k]).map_err(io)?;
                    }
                    Ok(OK)
                }
                Reachability::NotWithinBounds { exact: true } => {
                    writeln!(out, "not reachable (exact: reachable set exhausted)").map_err(io)?;
                    Ok(NEGATIVE)
                }
                Reachability::NotWithinBounds { exact: false } => {
                    writeln!(out, "not reached within {step_bound} steps").map_err(io)?;
                    Ok(NEGATIVE)
                }
                Reachability::BudgetExceeded => {
                    writeln!(out, "configuration budget {config_budget} exceeded").map_err(io)?;
                    Ok(INCONCLUSIVE)
                }
            }
        }
        Command::Lts(LtsCommand::Step { grammar, term }) => {
            let g = load_grammar(&grammar)?;
            let t = parse_term_in(&g, &term).map_err(|e| usage(anyhow!(e)))?;
            for tr in g.transitions(&t).map_err(usage)? {
                writeln!(out, "-{}-> {}", tr.action, tr.target).map_err(io)?;
            }
            Ok(OK)
        }
        Command::Game(GameCommand::Play { grammar, pair, attacker, defender, max_rounds, json }) => {
            let g = load_grammar(&grammar)?;
            let (l, r) = load_pair(&g, &pair)?;
            let stdin = io::stdin();
            let mut att: Box<dyn AttackerStrategy> = match attacker {
                Driver::Exhaustive => Box::new(ExhaustiveAttacker::new(&g, max_rounds)),
                Driver::Prompt => Box::new(prompt::Console::new(stdin.lock(), io::stderr())),
            };
            let mut def: Box<dyn DefenderStrategy> = match defender {
                Driver::Exhaustive => Box::new(ExhaustiveDefender::new(&g, max_rounds)),
                Driver::Prompt => Box::new(prompt::Console::new(stdin.lock(), io::stderr())),
            };
            let outcome =
                play_game(&g, GamePosition::new(l, r), att.as_mut(), def.as_mut(), max_rounds).map_err(engine)?;
            if json {
                writeln!(out, "{}", serde_json::to_string_pretty(&outcome).map_err(usage)?).map_err(io)?;
            } else {
                write!(out, "{outcome}").map_err(io)?;
            }
            Ok(if outcome.winner == Player::Attacker { NEGATIVE } else { OK })
        }
        Command::Bisim(BisimCommand::Approx { grammar, pair, depth }) => {
            let g = load_grammar(&grammar)?;
            let (l, r) = load_pair(&g, &pair)?;
            match Approximants::new(&g).distinguishing_level(&l, &r, depth).map_err(engine)? {
                None => {
                    writeln!(out, "~_{depth} holds").map_err(io)?;
                    Ok(OK)
                }
                Some(d) => {
                    writeln!(out, "not ~_{depth} (level {})", d.level).map_err(io)?;
                    let moves: Vec<String> = d.witness.iter().map(|(s, a)| format!("{s}:{a}")).collect();
                    writeln!(out, "witness {}", moves.join(" ")).map_err(io)?;
                    Ok(NEGATIVE)
                }
            }
        }
        Command::Bisim(BisimCommand::Exact { grammar, pair, state_budget }) => {
            let g = load_grammar(&grammar)?;
            let (l, r) = load_pair(&g, &pair)?;
            match exact_bisim_finite(&g, &l, &r, state_budget).map_err(usage)? {
                ExactVerdict::Bisimilar => {
                    writeln!(out, "bisimilar").map_err(io)?;
                    Ok(OK)
                }
                ExactVerdict::NotBisimilar => {
                    writeln!(out, "not bisimilar").map_err(io)?;
                    Ok(NEGATIVE)
                }
                ExactVerdict::Unknown { explored } => {
                    writeln!(out, "unknown (more than {explored} reachable terms)").map_err(io)?;
                    Ok(INCONCLUSIVE)
                }
            }
        }
        Command::Verify { rcm, depth, state_budget, json } => {
            let inst = load_rcm(&rcm)?;
            let report = verify_instance(&inst, VerifyConfig { depth, state_budget }).map_err(usage)?;
            if json {
                writeln!(out, "{}", serde_json::to_string_pretty(&report).map_err(usage)?).map_err(io)?;
            } else {
                write!(out, "{report}").map_err(io)?;
            }
            Ok(match report.agreement {
                Agreement::Agree => OK,
                Agreement::Disagree => NEGATIVE,
                Agreement::Inconclusive => INCONCLUSIVE,
            })
        }
        Command::Ack { diagonal, k, n, budget } => {
            let (k, n) = match diagonal {
                Some(n) => (n, n),
                None => (k.expect("required by clap"), n.expect("required by clap")),
            };
            match fast_growing(k, &BigUint::from(n), budget) {
                Ok(v) => {
                    writeln!(out, "{v}").map_err(io)?;
                    Ok(OK)
                }
                Err(e @ (AckError::BudgetExceeded(_) | AckError::TooDeep(_))) => {
                    writeln!(out, "{e}").map_err(io)?;
                    Ok(INCONCLUSIVE)
                }
            }
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let stdout = io::stdout();
    match run(cli, &mut stdout.lock()) {
        Ok(code) => ExitCode::from(code),
        Err(Failure(code, e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(code)
        }
    }
}
