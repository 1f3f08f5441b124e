//! Label regular expressions: parsing, Thompson construction and
//! ε-elimination into a transition table.

mod nfa;
mod parse;
mod table;

pub use nfa::{build_nfa, Nfa, NfaTransition, StateId};
pub use parse::{parse_regex, RegexAst};
pub use table::{eliminate_epsilon, table_accepts, TransitionRow, TransitionTable};

use crate::error::RegexError;

/// Parses `src` and runs the full pipeline down to a transition table.
pub fn compile_regex(src: &str) -> Result<TransitionTable, RegexError> {
    let ast = parse_regex(src)?;
    Ok(eliminate_epsilon(&build_nfa(&ast)))
}
