//! A workbench for first-order modal logic.
//!
//! Modal subexpressions can be coalesced into fresh first-order symbols
//! ([`coalesce::fol`]) and first-order subexpressions into propositional
//! atoms ([`coalesce::ml`]), so that ordinary first-order provers and
//! propositional modal provers can discharge modal proof obligations. A
//! finite Kripke evaluator ([`semantics`]) serves as the ground truth the
//! translations are checked against.

pub mod coalesce;
pub mod emit;
pub mod fuzz;
pub mod leibniz;
pub mod par;
pub mod prime;
pub mod prover;
pub mod semantics;
pub mod syntax;
