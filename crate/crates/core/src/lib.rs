//! First-order grammars as labelled transition systems, the bisimulation
//! game on their terms, reset counter machines, and the reduction from RCM
//! reachability to grammar non-bisimilarity together with the strategies
//! that make it work.
//!
//! ```
//! use grammar_bisim::format::{parse_rcm};
//! use grammar_bisim::reduction::{verify_instance, VerifyConfig, Agreement};
//!
//! let inst = parse_rcm("dim 1\ninit p0\nfinal pf\nins p0 incr 1 p1\nins p1 decr 1 pf\n").unwrap();
//! let report = verify_instance(&inst, VerifyConfig::default()).unwrap();
//! assert_eq!(report.agreement, Agreement::Agree);
//! ```

pub mod ack;
pub mod bisim;
pub mod format;
pub mod grammar;
pub mod par;
pub mod rcm;
pub mod reduction;
pub mod term;

pub use grammar::{Action, Grammar, Rule, Transition};
pub use term::{Nonterminal, Term, Var};
