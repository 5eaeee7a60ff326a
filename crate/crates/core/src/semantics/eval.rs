//! Exact evaluation of expressions in finite models.

use thiserror::Error;

use super::model::{FolStructure, KripkeModel, PropModel, Relation, Val};
use crate::syntax::{expand_definitions, Env, Expr, Modality};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("rigid variable `{0}` has no value")]
    UnboundRigid(String),
    #[error("flexible variable `{0}` has no value")]
    UnboundFlex(String),
    #[error("operator `{0}` has no interpretation")]
    UnknownOp(String),
    #[error("operator `{name}` is interpreted with arity {table}, applied to {applied}")]
    ArityMismatch {
        name: String,
        table: usize,
        applied: usize,
    },
    #[error("definition `{0}` must be expanded before evaluation")]
    UnexpandedDefinition(String),
    #[error("the model has no accessibility relation for prime")]
    NoPrimeRelation,
    #[error("a first-order structure cannot interpret `{0}`")]
    NotFirstOrder(&'static str),
    #[error("`{0}` is not part of the propositional modal fragment")]
    NotModal(&'static str),
}

/// What an interpretation must supply for the shared evaluator.
trait Interp {
    fn universe_size(&self) -> usize;
    fn tt(&self) -> Val;
    fn ff(&self) -> Val;
    fn op(&self, name: &str, args: &[Val]) -> Result<Val, EvalError>;
    fn rigid(&self, name: &str) -> Result<Val, EvalError>;
    fn flex(&self, name: &str, w: usize) -> Result<Val, EvalError>;
    fn relation(&self, m: Modality) -> Result<&Relation, EvalError>;
}

impl Interp for KripkeModel {
    fn universe_size(&self) -> usize {
        self.universe.len()
    }
    fn tt(&self) -> Val {
        self.tt
    }
    fn ff(&self) -> Val {
        self.ff
    }
    fn op(&self, name: &str, args: &[Val]) -> Result<Val, EvalError> {
        lookup_op(&self.ops, name, args, self.universe.len())
    }
    fn rigid(&self, name: &str) -> Result<Val, EvalError> {
        self.xi
            .get(name)
            .copied()
            .ok_or_else(|| EvalError::UnboundRigid(name.to_string()))
    }
    fn flex(&self, name: &str, w: usize) -> Result<Val, EvalError> {
        self.zeta
            .get(name)
            .and_then(|vals| vals.get(w))
            .copied()
            .ok_or_else(|| EvalError::UnboundFlex(name.to_string()))
    }
    fn relation(&self, m: Modality) -> Result<&Relation, EvalError> {
        KripkeModel::relation(self, m).ok_or(EvalError::NoPrimeRelation)
    }
}

impl Interp for FolStructure {
    fn universe_size(&self) -> usize {
        self.universe.len()
    }
    fn tt(&self) -> Val {
        self.tt
    }
    fn ff(&self) -> Val {
        self.ff
    }
    fn op(&self, name: &str, args: &[Val]) -> Result<Val, EvalError> {
        lookup_op(&self.ops, name, args, self.universe.len())
    }
    fn rigid(&self, name: &str) -> Result<Val, EvalError> {
        self.xi
            .get(name)
            .copied()
            .ok_or_else(|| EvalError::UnboundRigid(name.to_string()))
    }
    fn flex(&self, name: &str, _w: usize) -> Result<Val, EvalError> {
        self.xi
            .get(name)
            .copied()
            .ok_or_else(|| EvalError::UnboundFlex(name.to_string()))
    }
    fn relation(&self, m: Modality) -> Result<&Relation, EvalError> {
        Err(EvalError::NotFirstOrder(match m {
            Modality::Nabla => "nabla",
            Modality::Prime => "prime",
        }))
    }
}

fn lookup_op(
    ops: &std::collections::BTreeMap<String, super::model::OpTable>,
    name: &str,
    args: &[Val],
    universe: usize,
) -> Result<Val, EvalError> {
    let t = ops
        .get(name)
        .ok_or_else(|| EvalError::UnknownOp(name.to_string()))?;
    if t.arity != args.len() {
        return Err(EvalError::ArityMismatch {
            name: name.to_string(),
            table: t.arity,
            applied: args.len(),
        });
    }
    Ok(t.apply(args, universe))
}

fn eval_rec<'e, I: Interp>(
    m: &I,
    w: usize,
    e: &'e Expr,
    scope: &mut Vec<(&'e str, Val)>,
) -> Result<Val, EvalError> {
    let tt = m.tt();
    let ff = m.ff();
    let truth = |b: bool| if b { tt } else { ff };
    match e {
        Expr::Rigid(x) => match scope.iter().rev().find(|(n, _)| *n == x.as_str()) {
            Some(&(_, v)) => Ok(v),
            None => m.rigid(x),
        },
        Expr::Flex(v) => m.flex(v, w),
        Expr::Op(name, args) => {
            let vals = args
                .iter()
                .map(|a| eval_rec(m, w, a, scope))
                .collect::<Result<Vec<_>, _>>()?;
            m.op(name, &vals)
        }
        Expr::Def(name, _) => Err(EvalError::UnexpandedDefinition(name.clone())),
        Expr::Eq(a, b) => {
            let a = eval_rec(m, w, a, scope)?;
            let b = eval_rec(m, w, b, scope)?;
            Ok(truth(a == b))
        }
        Expr::False => Ok(ff),
        Expr::Implies(a, b) => {
            let a = eval_rec(m, w, a, scope)?;
            if a != tt {
                return Ok(tt);
            }
            Ok(truth(eval_rec(m, w, b, scope)? == tt))
        }
        Expr::Forall(x, body) => {
            for d in 0..m.universe_size() {
                scope.push((x.as_str(), Val(d as u16)));
                let v = eval_rec(m, w, body, scope);
                scope.pop();
                if v? != tt {
                    return Ok(ff);
                }
            }
            Ok(tt)
        }
        Expr::Nabla(body) | Expr::Prime(body) => {
            let modality = if matches!(e, Expr::Nabla(_)) {
                Modality::Nabla
            } else {
                Modality::Prime
            };
            let rel = m.relation(modality)?;
            // Next-state reading: with a single prime successor the value
            // carries over unchanged, which agrees with the collapse in
            // formula position.
            if let (Modality::Prime, &[next]) = (modality, rel.successors(w)) {
                return eval_rec(m, next, body, scope);
            }
            for &w2 in rel.successors(w) {
                if eval_rec(m, w2, body, scope)? != tt {
                    return Ok(ff);
                }
            }
            Ok(tt)
        }
    }
}

/// Value of `e` at state `w`. Defined operators are expanded first.
pub fn eval(m: &KripkeModel, w: usize, e: &Expr, env: &Env) -> Result<Val, EvalError> {
    eval_under(m, w, e, env, &[])
}

/// Value of `e` at `w` with extra rigid bindings that override the model's
/// valuation.
pub fn eval_under(
    m: &KripkeModel,
    w: usize,
    e: &Expr,
    env: &Env,
    bindings: &[(String, Val)],
) -> Result<Val, EvalError> {
    if e.contains_def() {
        let expanded = expand_definitions(e, env);
        eval_expanded_under(m, w, &expanded, bindings)
    } else {
        eval_expanded_under(m, w, e, bindings)
    }
}

/// Value of a definition-free expression.
pub fn eval_expanded(m: &KripkeModel, w: usize, e: &Expr) -> Result<Val, EvalError> {
    eval_expanded_under(m, w, e, &[])
}

pub fn eval_expanded_under(
    m: &KripkeModel,
    w: usize,
    e: &Expr,
    bindings: &[(String, Val)],
) -> Result<Val, EvalError> {
    let mut scope: Vec<(&str, Val)> = bindings.iter().map(|(n, v)| (n.as_str(), *v)).collect();
    eval_rec(m, w, e, &mut scope)
}

/// `M, w |= e`.
pub fn holds(m: &KripkeModel, w: usize, e: &Expr, env: &Env) -> Result<bool, EvalError> {
    Ok(eval(m, w, e, env)? == m.tt)
}

/// `e` holds at every state of `m`.
pub fn holds_everywhere(m: &KripkeModel, e: &Expr, env: &Env) -> Result<bool, EvalError> {
    let expanded = expand_definitions(e, env);
    for w in 0..m.state_count() {
        if eval_expanded(m, w, &expanded)? != m.tt {
            return Ok(false);
        }
    }
    Ok(true)
}

/// First-order evaluation; modal operators and unexpanded definitions are
/// rejected.
pub fn eval_fol(s: &FolStructure, e: &Expr) -> Result<Val, EvalError> {
    eval_fol_under(s, e, &[])
}

pub fn eval_fol_under(s: &FolStructure, e: &Expr, bindings: &[(String, Val)]) -> Result<Val, EvalError> {
    let mut scope: Vec<(&str, Val)> = bindings.iter().map(|(n, v)| (n.as_str(), *v)).collect();
    eval_rec(s, 0, e, &mut scope)
}

/// Propositional modal evaluation. Atoms are flexible variables.
pub fn eval_ml(k: &PropModel, w: usize, e: &Expr) -> Result<bool, EvalError> {
    match e {
        Expr::Flex(a) => k
            .zeta
            .get(a)
            .and_then(|vals| vals.get(w))
            .copied()
            .ok_or_else(|| EvalError::UnboundFlex(a.clone())),
        Expr::False => Ok(false),
        Expr::Implies(a, b) => Ok(!eval_ml(k, w, a)? || eval_ml(k, w, b)?),
        Expr::Nabla(body) | Expr::Prime(body) => {
            let modality = if matches!(e, Expr::Nabla(_)) {
                Modality::Nabla
            } else {
                Modality::Prime
            };
            let rel = k.relation(modality).ok_or(EvalError::NoPrimeRelation)?;
            for &w2 in rel.successors(w) {
                if !eval_ml(k, w2, body)? {
                    return Ok(false);
                }
            }
            Ok(true)
        }
        Expr::Rigid(_) => Err(EvalError::NotModal("rigid variable")),
        Expr::Op(..) => Err(EvalError::NotModal("operator application")),
        Expr::Def(..) => Err(EvalError::NotModal("defined operator")),
        Expr::Eq(..) => Err(EvalError::NotModal("=")),
        Expr::Forall(..) => Err(EvalError::NotModal("forall")),
    }
}
