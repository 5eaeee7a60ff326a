//! Action formulas: pushing prime down to flexible variables, replacing
//! primed variables by fresh flexible constants, and the obligations of an
//! invariance proof.
//!
//! The rewrites assume prime is interpreted over a functional relation,
//! the next-state reading of actions.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::coalesce::{CoalesceKey, SymbolTable};
use crate::prover::{Frame, Frames, MlSequent};
use crate::semantics::{FolStructure, KripkeModel, Relation, Val};
use crate::syntax::{canonical, expand_definitions, is_rigid, Env, EnvError, Expr, Mode, Obligation};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PrimeError {
    #[error("`nabla` cannot occur in an action formula")]
    Modal,
    #[error("definition `{0}` must be expanded first")]
    Definition(String),
    #[error("prime cannot be nested")]
    NestedPrime,
    #[error("prime is only replaced when applied to a flexible variable")]
    NotDistributed,
    #[error("{0} must be a state predicate (no nabla, no prime)")]
    NotStatePredicate(&'static str),
    #[error("the safety problem needs ({0} ...)")]
    Missing(&'static str),
    #[error("`{0}` is not a flexible variable")]
    NotFlexible(String),
    #[error("{0}")]
    Env(#[from] EnvError),
}

/// Push every prime down until it applies to a flexible variable only.
/// Primes over rigid subexpressions are dropped.
pub fn distribute_prime(e: &Expr, env: &Env) -> Result<Expr, PrimeError> {
    match e {
        Expr::Prime(body) => push(body, env),
        Expr::Nabla(_) => Err(PrimeError::Modal),
        Expr::Def(d, _) => Err(PrimeError::Definition(d.clone())),
        _ => {
            let kids = e
                .children()
                .into_iter()
                .map(|c| distribute_prime(c, env))
                .collect::<Result<_, _>>()?;
            Ok(e.with_children(kids))
        }
    }
}

/// `prime e`, distributed.
fn push(e: &Expr, env: &Env) -> Result<Expr, PrimeError> {
    match e {
        Expr::Flex(_) => Ok(Expr::prime(e.clone())),
        Expr::Prime(_) => Err(PrimeError::NestedPrime),
        Expr::Nabla(_) => Err(PrimeError::Modal),
        Expr::Def(d, _) => Err(PrimeError::Definition(d.clone())),
        _ if is_rigid(e, env) => Ok(e.clone()),
        _ => {
            let kids = e
                .children()
                .into_iter()
                .map(|c| push(c, env))
                .collect::<Result<_, _>>()?;
            Ok(e.with_children(kids))
        }
    }
}

/// Base name of the fresh constant standing for `v'`.
pub fn primed_name(v: &str) -> String {
    format!("{v}'")
}

/// Replace each `prime v` by the flexible constant `v'` from `table`.
pub fn coalesce_action(e: &Expr, table: &mut SymbolTable) -> Result<Expr, PrimeError> {
    match e {
        Expr::Prime(body) => match &**body {
            Expr::Flex(v) => {
                let key = CoalesceKey::Modal(canonical(e));
                Ok(table.intern_flexible(key, &primed_name(v), e.clone()).apply(Vec::new()))
            }
            _ => Err(PrimeError::NotDistributed),
        },
        Expr::Nabla(_) => Err(PrimeError::Modal),
        Expr::Def(d, _) => Err(PrimeError::Definition(d.clone())),
        _ => {
            let kids = e
                .children()
                .into_iter()
                .map(|c| coalesce_action(c, table))
                .collect::<Result<_, _>>()?;
            Ok(e.with_children(kids))
        }
    }
}

/// Pairs `(v', v)` of the primed constants in `table`.
pub fn primed_variables(table: &SymbolTable) -> Vec<(String, String)> {
    table
        .entries()
        .iter()
        .filter(|s| s.flexible)
        .filter_map(|s| match &s.body {
            Expr::Prime(b) => match &**b {
                Expr::Flex(v) => Some((s.name.clone(), v.clone())),
                _ => None,
            },
            _ => None,
        })
        .collect()
}

/// Expand, distribute and coalesce one action formula.
pub fn translate_action(e: &Expr, env: &Env, table: &mut SymbolTable) -> Result<Expr, PrimeError> {
    let expanded = expand_definitions(e, env);
    let distributed = distribute_prime(&expanded, env)?;
    coalesce_action(&distributed, table)
}

/// The declarations of `env` without definitions, plus the symbols of
/// `table`: operators for coalesced modal and defined subexpressions,
/// flexible variables for primed ones.
pub fn first_order_env(env: &Env, table: &SymbolTable) -> Result<Env, PrimeError> {
    let mut out = Env::new();
    for (op, arity) in env.ops() {
        out.declare_op(op, *arity)?;
    }
    for x in env.rigid_vars() {
        out.declare_rigid(x)?;
    }
    for v in env.flex_vars() {
        out.declare_flex(v)?;
    }
    for entry in table.entries() {
        if entry.flexible {
            out.declare_flex(&entry.name)?;
        } else {
            out.declare_op(&entry.name, entry.arity())?;
        }
    }
    Ok(out)
}

/// The first-order obligation of an action-mode problem, with its table.
pub fn action_obligation(ob: &Obligation) -> Result<(Obligation, SymbolTable), PrimeError> {
    let mut table = SymbolTable::new(ob.env.all_names());
    let hypotheses = ob
        .hypotheses
        .iter()
        .map(|h| translate_action(h, &ob.env, &mut table))
        .collect::<Result<Vec<_>, _>>()?;
    let goal = translate_action(&ob.goal, &ob.env, &mut table)?;
    let env = first_order_env(&ob.env, &table)?;
    let mut out = Obligation::new(env, hypotheses, goal);
    out.mode = Mode::Fol;
    Ok((out, table))
}

/// `N \/ (v1' = v1 /\ ... /\ vk' = vk)`.
pub fn stuttering(next: &Expr, vars: &[String]) -> Expr {
    let unchanged = Expr::and_all(
        vars.iter()
            .map(|v| Expr::eq(Expr::prime(Expr::flex(v.clone())), Expr::flex(v.clone()))),
    );
    Expr::or(next.clone(), unchanged)
}

/// The parts of an invariance proof.
#[derive(Clone, Debug)]
pub struct SafetyProblem {
    pub env: Env,
    pub hypotheses: Vec<Expr>,
    pub init: Expr,
    pub next: Expr,
    pub inv: Expr,
    pub iinv: Expr,
    /// The state variables of the stuttering step; all flexible variables
    /// when empty.
    pub vars: Vec<String>,
}

impl SafetyProblem {
    pub fn from_file(p: crate::syntax::ProblemFile) -> Result<SafetyProblem, PrimeError> {
        Ok(SafetyProblem {
            init: p.init.ok_or(PrimeError::Missing("init"))?,
            next: p.next.ok_or(PrimeError::Missing("next"))?,
            inv: p.inv.ok_or(PrimeError::Missing("inv"))?,
            iinv: p.iinv.ok_or(PrimeError::Missing("iinv"))?,
            vars: p.vars,
            hypotheses: p.hypotheses,
            env: p.env,
        })
    }
}

/// Obligations (1)-(3) as first-order problems, and the temporal glue as a
/// propositional modal sequent over the atoms `Init`, `IInv`, `Next`, `Inv`.
#[derive(Clone, Debug)]
pub struct SafetyObligations {
    pub initiation: Obligation,
    pub consecution: Obligation,
    pub conclusion: Obligation,
    pub table: SymbolTable,
    pub glue: MlSequent,
}

pub fn safety_obligations(p: &SafetyProblem) -> Result<SafetyObligations, PrimeError> {
    let env = &p.env;
    let state = |e: &Expr, what: &'static str| -> Result<Expr, PrimeError> {
        let x = expand_definitions(e, env);
        if x.contains_modal() {
            return Err(PrimeError::NotStatePredicate(what));
        }
        Ok(x)
    };
    let init = state(&p.init, "init")?;
    let inv = state(&p.inv, "inv")?;
    let iinv = state(&p.iinv, "iinv")?;
    let hyps = p
        .hypotheses
        .iter()
        .map(|h| state(h, "an assumption"))
        .collect::<Result<Vec<_>, _>>()?;
    let vars = if p.vars.is_empty() {
        env.flex_vars().to_vec()
    } else {
        for v in &p.vars {
            if !env.is_flex(v) {
                return Err(PrimeError::NotFlexible(v.clone()));
            }
        }
        p.vars.clone()
    };

    let mut table = SymbolTable::new(env.all_names());
    let step = Expr::implies(
        Expr::and(iinv.clone(), stuttering(&p.next, &vars)),
        Expr::prime(iinv.clone()),
    );
    let goal2 = translate_action(&step, env, &mut table)?;
    // Assumptions hold in every state, the next one included.
    let mut hyps2 = hyps.clone();
    for h in &hyps {
        hyps2.push(translate_action(&Expr::prime(h.clone()), env, &mut table)?);
    }
    let fo_env = first_order_env(env, &table)?;
    let plain = |goal: Expr, hypotheses: Vec<Expr>| {
        let mut ob = Obligation::new(fo_env.clone(), hypotheses, goal);
        ob.mode = Mode::Fol;
        ob
    };

    let atom = |n: &str| Expr::flex(n);
    let glue = MlSequent {
        hypotheses: vec![
            Expr::implies(atom("Init"), atom("IInv")),
            Expr::implies(Expr::and(atom("IInv"), atom("Next")), Expr::prime(atom("IInv"))),
            Expr::implies(atom("IInv"), atom("Inv")),
        ],
        goal: Expr::implies(
            Expr::and(atom("Init"), Expr::nabla(atom("Next"))),
            Expr::nabla(atom("Inv")),
        ),
        frames: Frames {
            nabla: Frame::S4,
            prime: Frame::K,
        },
    };
    Ok(SafetyObligations {
        initiation: plain(Expr::implies(init, iinv.clone()), hyps.clone()),
        consecution: plain(goal2, hyps2),
        conclusion: plain(Expr::implies(iinv, inv), hyps),
        table,
        glue,
    })
}

/// Two states: the first carries the unprimed values of `s`, the second the
/// primed ones, and prime leads from the first to the second and from the
/// second to itself. Variables without a value in `s` take the first
/// universe element.
pub fn lift_countermodel(s: &FolStructure, table: &SymbolTable, env: &Env) -> KripkeModel {
    let primed: BTreeMap<String, String> = primed_variables(table).into_iter().map(|(p, v)| (v, p)).collect();
    let default = Val(0);
    let mut zeta = BTreeMap::new();
    for v in env.flex_vars() {
        let now = s.xi.get(v).copied().unwrap_or(default);
        let next = primed
            .get(v)
            .and_then(|p| s.xi.get(p))
            .copied()
            .unwrap_or(now);
        zeta.insert(v.clone(), vec![now, next]);
    }
    let xi = env
        .rigid_vars()
        .iter()
        .filter_map(|x| s.xi.get(x).map(|&v| (x.clone(), v)))
        .collect();
    KripkeModel {
        universe: s.universe.clone(),
        tt: s.tt,
        ff: s.ff,
        ops: s.ops.clone(),
        xi,
        states: vec!["s0".into(), "s1".into()],
        r: Relation::empty(2),
        zeta,
        prime_r: Some(Relation::from_function(&[1, 1])),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{parse_expr, parse_problem_file, print::pretty};

    fn env() -> Env {
        let mut env = Env::new();
        env.declare_op("+", 2).unwrap();
        env.declare_op("1", 0).unwrap();
        env.declare_rigid("x").unwrap();
        env.declare_rigid("y").unwrap();
        env.declare_flex("u").unwrap();
        env.declare_flex("v").unwrap();
        env
    }

    fn dist(text: &str) -> String {
        let mut env = env();
        let e = parse_expr(text, &mut env).unwrap();
        pretty(&distribute_prime(&e, &env).unwrap())
    }

    #[test]
    fn distribution() {
        assert_eq!(dist("(prime (+ x y))"), "(+ x y)");
        assert_eq!(dist("(prime (+ u y))"), "(+ (prime u) y)");
        assert_eq!(dist("(prime v)"), "(prime v)");
        assert_eq!(dist("(prime 1)"), "1");
        assert_eq!(
            dist("(prime (forall x (= (+ x u) v)))"),
            "(forall x (= (+ x (prime u)) (prime v)))"
        );
        let mut env = env();
        let e = parse_expr("(prime (nabla v))", &mut env).unwrap();
        assert_eq!(distribute_prime(&e, &env), Err(PrimeError::Modal));
    }

    #[test]
    fn primed_variables_share_a_constant() {
        let mut env = env();
        let e = parse_expr("(and (= (prime v) (+ v 1)) (= (prime v) (prime u)))", &mut env).unwrap();
        let mut t = SymbolTable::new(env.all_names());
        let out = translate_action(&e, &env, &mut t).unwrap();
        assert_eq!(pretty(&out), "(and (= v' (+ v 1)) (= v' u'))");
        assert_eq!(t.len(), 2);
        assert!(!out.contains_modal());
        let plain = parse_expr("(= v u)", &mut env).unwrap();
        assert_eq!(translate_action(&plain, &env, &mut t).unwrap(), plain);
    }

    #[test]
    fn primed_name_avoids_user_names() {
        let mut env = env();
        env.declare_flex("v'").unwrap();
        let e = parse_expr("(= (prime v) v')", &mut env).unwrap();
        let mut t = SymbolTable::new(env.all_names());
        assert_eq!(pretty(&translate_action(&e, &env, &mut t).unwrap()), "(= v'1 v')");
    }

    #[test]
    fn counter_obligations() {
        let p = parse_problem_file(
            "(declare-op + 2) (declare-op 1 0) (declare-op 0 0) (declare-op <= 2)
             (declare-flex x y)
             (init (and (= x 0) (= y 0)))
             (next (and (= (prime x) (+ x 1)) (= (prime y) y)))
             (iinv (= y 0))
             (inv (= y 0))",
        )
        .unwrap();
        let s = safety_obligations(&SafetyProblem::from_file(p).unwrap()).unwrap();
        assert_eq!(pretty(&s.initiation.goal), "(=> (and (= x 0) (= y 0)) (= y 0))");
        assert_eq!(
            pretty(&s.consecution.goal),
            "(=> (and (= y 0) (or (and (= x' (+ x 1)) (= y' y)) (and (= x' x) (= y' y)))) (= y' 0))"
        );
        assert_eq!(pretty(&s.conclusion.goal), "(=> (= y 0) (= y 0))");
        assert!(s.consecution.env.is_flex("x'"));
    }

    #[test]
    fn lifting_builds_a_functional_successor() {
        let mut env = env();
        let e = parse_expr("(= (prime v) v)", &mut env).unwrap();
        let mut t = SymbolTable::new(env.all_names());
        let c = translate_action(&e, &env, &mut t).unwrap();
        let s = FolStructure {
            universe: crate::semantics::model::standard_universe(3),
            tt: Val(0),
            ff: Val(1),
            ops: BTreeMap::from([
                ("1".to_string(), crate::semantics::OpTable::constant(0, 3, Val(2))),
                ("+".to_string(), crate::semantics::OpTable::constant(2, 3, Val(2))),
            ]),
            xi: BTreeMap::from([
                ("v".to_string(), Val(0)),
                ("v'".to_string(), Val(2)),
                ("x".to_string(), Val(0)),
                ("y".to_string(), Val(0)),
                ("u".to_string(), Val(1)),
            ]),
        };
        assert_eq!(crate::semantics::eval_fol(&s, &c).unwrap(), s.ff);
        let m = lift_countermodel(&s, &t, &env);
        m.validate().unwrap();
        assert_eq!(crate::semantics::eval(&m, 0, &e, &env).unwrap(), m.ff);
    }
}
