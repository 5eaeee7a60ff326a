//! Emitting coalesced obligations for external provers.
//!
//! First-order sequents go to SMT-LIB and TPTP over one uninterpreted sort
//! with two distinct constants `tt` and `ff`: every expression is a term,
//! and a node in formula position is read as `term = tt`. Propositional
//! modal sequents go to a small s-expression format. Each format has an
//! evaluator for its own output so the encodings can be checked against
//! the first-order evaluator on finite structures.

pub mod mlseq;
pub mod solver;
pub mod smt;
pub mod tptp;

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::semantics::{FolStructure, Val};
use crate::syntax::Expr;

pub use mlseq::{emit_ml, parse_mlseq};
pub use smt::{emit_smt, eval_smt};
pub use tptp::{emit_tptp, eval_tptp};

/// Operators with arities and the constants (flexible and free rigid
/// variables) of a first-order sequent.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub(crate) struct Signature {
    pub ops: BTreeMap<String, usize>,
    pub constants: BTreeSet<String>,
}

impl Signature {
    pub fn of<'a>(exprs: impl IntoIterator<Item = &'a Expr>) -> Signature {
        let mut sig = Signature::default();
        for e in exprs {
            e.walk(&mut |n| match n {
                Expr::Op(name, args) => {
                    sig.ops.insert(name.clone(), args.len());
                }
                Expr::Flex(v) => {
                    sig.constants.insert(v.clone());
                }
                _ => {}
            });
            sig.constants.extend(crate::syntax::free_rigid_vars(e));
        }
        sig
    }
}

/// Names the encodings reserve for themselves.
pub(crate) const BUILTIN: [&str; 3] = ["U", "tt", "ff"];

/// Suffix that keeps a user name apart from a reserved one. `#` cannot
/// occur in a parsed name.
pub(crate) const MANGLE: char = '#';

pub(crate) fn unmangle(name: &str) -> &str {
    name.strip_suffix(MANGLE).unwrap_or(name)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CheckError {
    #[error("{0}")]
    Syntax(String),
    #[error("symbol `{0}` has no interpretation in the structure")]
    Unknown(String),
    #[error("unsupported construct `{0}`")]
    Unsupported(String),
}

/// Interpretation of a user symbol of the emitted text.
pub(crate) fn lookup(s: &FolStructure, name: &str, args: &[Val]) -> Result<Val, CheckError> {
    let name = unmangle(name);
    if let Some(t) = s.ops.get(name) {
        if t.arity == args.len() {
            return Ok(t.apply(args, s.universe_size()));
        }
    }
    if args.is_empty() {
        if let Some(&v) = s.xi.get(name) {
            return Ok(v);
        }
    }
    Err(CheckError::Unknown(name.to_string()))
}
