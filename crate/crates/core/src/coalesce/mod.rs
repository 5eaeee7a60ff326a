//! The two coalescing translations.

pub mod fol;
pub mod ml;
pub mod symbols;

pub use fol::{
    build_witness_structure, coalesce_fol, coalesce_obligation_fol, rewrite_rigid_box, CanonicalOrder, FolCoalescer,
    FolOptions, FolSequent,
};
pub use ml::{build_witness_propmodel, coalesce_ml, coalesce_obligation_ml, hypotheses, MlTranslation};
pub use symbols::{AtomEntry, AtomTable, CoalesceKey, SymbolEntry, SymbolTable};
