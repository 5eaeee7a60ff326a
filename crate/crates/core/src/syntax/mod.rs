//! Abstract syntax, parsing and printing, substitution and alpha-equivalence.

pub mod alpha;
pub mod env;
pub mod expr;
pub mod parse;
pub mod print;
pub mod sexp;
pub mod subst;

pub use alpha::{alpha_equal, canonical};
pub use env::{Definition, Env, EnvError, Mode, Obligation, SymbolKind};
pub use expr::{Expr, Modality};
pub use parse::{parse_expr, parse_problem, parse_problem_file, ParseError, ProblemFile};
pub use subst::{expand_definitions, free_rigid_vars, is_rigid, substitute};
