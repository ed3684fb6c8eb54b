//! Languages, formulas, structures and the reference evaluator.

mod eval;
mod formula;
mod parse;
mod structure;

pub use eval::{eval_oracle, eval_sentence, Compiled};
pub use formula::{Formula, Term};
pub use parse::{is_identifier, parse_formula, ParseError};
pub use structure::{gaifman_graph, is_guarded, Language, LogicError, Relation, Structure};
