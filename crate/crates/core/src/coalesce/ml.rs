//! Coalescing first-order subexpressions into propositional atoms.
//!
//! Rigid variables, applications, equations and quantified formulas become
//! atoms; flexible variables, `false`, implication and the modalities are
//! kept. Atoms standing for rigid expressions contribute hypotheses
//! `a => nabla a`, valid because rigid values do not change from state to
//! state.

use std::collections::BTreeMap;

use super::symbols::AtomTable;
use crate::semantics::{eval_under, EvalError, KripkeModel, PropModel};
use crate::syntax::{is_rigid, Env, Expr, Obligation};

pub fn coalesce_ml(e: &Expr, table: &mut AtomTable) -> Expr {
    match e {
        Expr::Flex(_) | Expr::False => e.clone(),
        Expr::Implies(a, b) => Expr::implies(coalesce_ml(a, table), coalesce_ml(b, table)),
        Expr::Nabla(b) => Expr::nabla(coalesce_ml(b, table)),
        Expr::Prime(b) => Expr::prime(coalesce_ml(b, table)),
        Expr::Rigid(_) | Expr::Op(..) | Expr::Def(..) | Expr::Eq(..) | Expr::Forall(..) => {
            Expr::flex(table.intern(e).name.clone())
        }
    }
}

/// `a => nabla a` for every atom with a rigid source, and `a => prime a`
/// as well when `with_prime` is set.
pub fn hypotheses(table: &AtomTable, env: &Env, with_prime: bool) -> Vec<Expr> {
    let mut out = Vec::new();
    for atom in table.entries() {
        if !is_rigid(&atom.source, env) {
            continue;
        }
        let a = Expr::flex(atom.name.clone());
        out.push(Expr::implies(a.clone(), Expr::nabla(a.clone())));
        if with_prime {
            out.push(Expr::implies(a.clone(), Expr::prime(a)));
        }
    }
    out
}

/// A coalesced propositional modal sequent. `rigidity` holds the
/// hypotheses generated for rigid atoms, kept apart from the translated
/// hypotheses of the obligation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MlTranslation {
    pub hypotheses: Vec<Expr>,
    pub rigidity: Vec<Expr>,
    pub goal: Expr,
    pub table: AtomTable,
}

impl MlTranslation {
    /// Translated hypotheses followed by the rigidity hypotheses.
    pub fn all_hypotheses(&self) -> Vec<Expr> {
        self.hypotheses.iter().chain(&self.rigidity).cloned().collect()
    }
}

pub fn coalesce_obligation_ml(ob: &Obligation) -> MlTranslation {
    let mut table = AtomTable::new(ob.env.all_names());
    let hyps = ob.hypotheses.iter().map(|h| coalesce_ml(h, &mut table)).collect();
    let goal = coalesce_ml(&ob.goal, &mut table);
    let with_prime = ob.formulas().any(Expr::contains_prime);
    MlTranslation {
        hypotheses: hyps,
        rigidity: hypotheses(&table, &ob.env, with_prime),
        goal,
        table,
    }
}

/// The propositional model of the soundness argument: same states and
/// relations, an atom is true where its source evaluates to tt, and a
/// flexible variable is true where its value is tt.
pub fn build_witness_propmodel(m: &KripkeModel, table: &AtomTable, env: &Env) -> Result<PropModel, EvalError> {
    let n = m.state_count();
    let mut zeta: BTreeMap<String, Vec<bool>> = m
        .zeta
        .iter()
        .map(|(v, vals)| (v.clone(), vals.iter().map(|&x| x == m.tt).collect()))
        .collect();
    for atom in table.entries() {
        let vals = (0..n)
            .map(|w| Ok(eval_under(m, w, &atom.source, env, &[])? == m.tt))
            .collect::<Result<Vec<_>, EvalError>>()?;
        zeta.insert(atom.name.clone(), vals);
    }
    Ok(PropModel {
        r: m.r.clone(),
        prime_r: m.prime_r.clone(),
        zeta,
    })
}

/// Only atoms, `false`, implication and modalities.
pub fn is_propositional(e: &Expr) -> bool {
    !e.any(&|n| matches!(n, Expr::Rigid(_) | Expr::Op(..) | Expr::Def(..) | Expr::Eq(..) | Expr::Forall(..)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{parse_problem, print::pretty};

    fn normalized(t: &MlTranslation, e: &Expr) -> String {
        let mut text = pretty(e);
        for (i, a) in t.table.entries().iter().enumerate().rev() {
            text = text.replace(&a.name, &format!("A{i}"));
        }
        text
    }

    /// `expected` parsed with `A0, A1, ...` and `v` as flexible variables.
    fn same_tree(t: &MlTranslation, e: &Expr, expected: &str) {
        let mut env = Env::new();
        env.declare_flex("v").unwrap();
        for i in 0..t.table.len() {
            env.declare_flex(&format!("A{i}")).unwrap();
        }
        let want = crate::syntax::parse_expr(expected, &mut env).unwrap();
        let names: BTreeMap<&str, String> = t
            .table
            .entries()
            .iter()
            .enumerate()
            .map(|(i, a)| (a.name.as_str(), format!("A{i}")))
            .collect();
        assert_eq!(rename(e, &names), want);
    }

    fn rename(e: &Expr, names: &BTreeMap<&str, String>) -> Expr {
        match e {
            Expr::Flex(a) => Expr::flex(names.get(a.as_str()).cloned().unwrap_or_else(|| a.clone())),
            _ => e.with_children(e.children().into_iter().map(|c| rename(c, names)).collect()),
        }
    }

    #[test]
    fn rigid_equation_shares_one_atom() {
        let ob = parse_problem(
            "(declare-rigid x y)
             (goal (=> (and (= x y) (nabla (delta true))) (nabla (delta (= x y)))))",
        )
        .unwrap();
        let t = coalesce_obligation_ml(&ob);
        assert_eq!(t.table.len(), 1);
        same_tree(&t, &t.goal, "(=> (and A0 (nabla (delta true))) (nabla (delta A0)))");
        assert_eq!(t.rigidity.len(), 1);
        assert_eq!(normalized(&t, &t.rigidity[0]), "(=> A0 (nabla A0))");
        assert!(is_propositional(&t.goal));
    }

    #[test]
    fn flexible_equation_has_no_hypothesis() {
        let ob = parse_problem("(declare-flex v) (goal (=> (= v 0) (nabla (= v 0))))").unwrap();
        let t = coalesce_obligation_ml(&ob);
        assert_eq!(normalized(&t, &t.goal), "(=> A0 (nabla A0))");
        assert!(t.rigidity.is_empty());
    }

    #[test]
    fn rigid_variable_atom() {
        let ob = parse_problem("(declare-rigid x) (declare-flex v) (goal (=> x (=> v (nabla x))))").unwrap();
        let t = coalesce_obligation_ml(&ob);
        assert_eq!(normalized(&t, &t.goal), "(=> A0 (=> v (nabla A0)))");
        assert_eq!(normalized(&t, &t.rigidity[0]), "(=> A0 (nabla A0))");
    }

    #[test]
    fn prime_gets_its_own_hypothesis() {
        let ob = parse_problem("(declare-rigid x) (declare-flex v) (goal (=> (= x 0) (prime (= x 0))))").unwrap();
        let t = coalesce_obligation_ml(&ob);
        assert_eq!(t.rigidity.len(), 2);
        assert_eq!(normalized(&t, &t.rigidity[1]), "(=> A0 (prime A0))");
    }

    #[test]
    fn quantified_atoms_modulo_alpha() {
        let ob = parse_problem(
            "(declare-flex v) (goal (=> (forall x (= x v)) (nabla (forall y (= y v)))))",
        )
        .unwrap();
        let t = coalesce_obligation_ml(&ob);
        assert_eq!(t.table.len(), 1);
        assert_eq!(normalized(&t, &t.goal), "(=> A0 (nabla A0))");
    }
}
