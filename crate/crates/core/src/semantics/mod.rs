//! Kripke semantics: finite models, evaluation, the model file format and
//! bounded countermodel search.

pub mod eval;
pub mod model;
pub mod model_file;
pub mod search;

pub use eval::{eval, eval_expanded, eval_expanded_under, eval_fol, eval_fol_under, eval_under, eval_ml, holds, holds_everywhere, EvalError};
pub use model::{FolStructure, KripkeModel, OpTable, PropModel, Relation, Val};
pub use model_file::{parse_model, print_model, ModelFileError};
pub use search::{find_countermodel, find_fol_countermodel, Bounds, Countermodel, SearchError};
