//! First-order terms, literals and clauses, plus unification, subsumption and the
//! problem-file reader.

mod parse;
mod subsume;
mod term;
mod unify;

pub use parse::{parse_problem, print_problem, InputClause, ParseError, Role, INPUT_ORIGIN};
pub use subsume::{is_variant, subsumes};
pub use term::{
    clause_weight, display_literals, is_tautology, literals_max_var, normalize_vars, shift_vars, ArityMismatch, Clause,
    Literal, Signature, Sym, Term,
};
pub use unify::{match_literal, match_term, mgu, unify_terms, Substitution};
