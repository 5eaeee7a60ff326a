//! Coalescing modal subexpressions into fresh first-order operators.
//!
//! `nabla e` under the rigid binders `y` becomes `c(z)`, where `c` names the
//! alpha class of `lambda z: nabla e` and `z` lists the binders of `y` that
//! occur free in `e`. An application `d(e1..en)` of a defined operator
//! becomes `c(e1'..en')` where `c` names `d` together with its epsilon
//! vector: arguments at Leibniz positions and rigid arguments are
//! abstracted, the others are part of the symbol.

use std::collections::BTreeMap;

use super::symbols::{CoalesceKey, SymbolTable};
use crate::leibniz::{classify_args, compute_leibniz, Epsilon, LeibnizTable};
use crate::semantics::{eval_under, EvalError, FolStructure, KripkeModel, OpTable, Val};
use crate::syntax::alpha::{canonical_lambda, lambda_param_name};
use crate::syntax::subst::occurs_free;
use crate::syntax::{free_rigid_vars, is_rigid, Env, Expr, Obligation};

/// Order of the abstracted binders of a coalesced symbol.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum CanonicalOrder {
    /// Innermost binder first, as the binder list grows at each quantifier.
    #[default]
    Binding,
    /// Order of first free occurrence in the coalesced expression.
    Appearance,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct FolOptions {
    pub order: CanonicalOrder,
    /// Rewrite `nabla e` for rigid `e` before coalescing. `Some(true)`
    /// assumes a reflexive frame.
    pub rewrite_rigid_box: Option<bool>,
}

/// Translator state for one obligation.
pub struct FolCoalescer<'a> {
    env: &'a Env,
    leibniz: LeibnizTable,
    opts: FolOptions,
    pub table: SymbolTable,
}

impl<'a> FolCoalescer<'a> {
    pub fn new(env: &'a Env, opts: FolOptions) -> FolCoalescer<'a> {
        FolCoalescer {
            env,
            leibniz: compute_leibniz(env),
            opts,
            table: SymbolTable::new(env.all_names()),
        }
    }

    pub fn with_table(env: &'a Env, opts: FolOptions, table: SymbolTable) -> FolCoalescer<'a> {
        FolCoalescer {
            table,
            ..FolCoalescer::new(env, opts)
        }
    }

    /// Coalesce a closed-off expression (empty binder list).
    pub fn coalesce(&mut self, e: &Expr) -> Expr {
        self.coalesce_under(e, &[])
    }

    /// Coalesce `e` under `binders`, innermost first.
    pub fn coalesce_under(&mut self, e: &Expr, binders: &[String]) -> Expr {
        let e = match self.opts.rewrite_rigid_box {
            Some(reflexive) => rewrite_rigid_box(e, reflexive, self.env),
            None => e.clone(),
        };
        // Kept innermost-last internally so pushing is cheap.
        let mut scope: Vec<String> = binders.iter().rev().cloned().collect();
        self.rec(&e, &mut scope)
    }

    fn rec(&mut self, e: &Expr, scope: &mut Vec<String>) -> Expr {
        match e {
            Expr::Rigid(_) | Expr::Flex(_) | Expr::False => e.clone(),
            Expr::Forall(x, body) => {
                scope.push(x.clone());
                let inner = self.rec(body, scope);
                scope.pop();
                Expr::forall(x.clone(), inner)
            }
            Expr::Nabla(_) | Expr::Prime(_) => {
                let z = self.abstracted(scope, std::slice::from_ref(e));
                let key = CoalesceKey::Modal(canonical_lambda(&z, e));
                let entry = self.table.intern(key, z.clone(), e.clone());
                entry.apply(z.into_iter().map(Expr::Rigid).collect())
            }
            Expr::Def(d, args) => {
                let eps = classify_args(d, args, &self.leibniz, self.env);
                let concrete: Vec<Expr> = eps
                    .iter()
                    .filter_map(|x| match x {
                        Epsilon::Arg(a) => Some(a.clone()),
                        Epsilon::Star => None,
                    })
                    .collect();
                let captured = self.abstracted(scope, &concrete);
                let canon_eps = eps
                    .iter()
                    .map(|x| match x {
                        Epsilon::Star => Epsilon::Star,
                        Epsilon::Arg(a) => Epsilon::Arg(canonical_lambda(&captured, a)),
                    })
                    .collect();
                let key = CoalesceKey::Def {
                    name: d.clone(),
                    eps: canon_eps,
                    captured: captured.len(),
                };
                let mut params: Vec<String> = (0..args.len()).map(lambda_param_name).collect();
                let alphas = eps
                    .iter()
                    .zip(&params)
                    .map(|(x, p)| match x {
                        Epsilon::Star => Expr::rigid(p.clone()),
                        Epsilon::Arg(a) => a.clone(),
                    })
                    .collect();
                params.extend(captured.iter().cloned());
                let body = Expr::def(d.clone(), alphas);
                let mut out_args: Vec<Expr> = args.iter().map(|a| self.rec(a, scope)).collect();
                out_args.extend(captured.iter().cloned().map(Expr::Rigid));
                self.table.intern(key, params, body).apply(out_args)
            }
            _ => {
                let kids = e.children().into_iter().map(|c| self.rec(c, scope)).collect();
                e.with_children(kids)
            }
        }
    }

    /// Binders in scope that occur free in `exprs`, each once.
    fn abstracted(&self, scope: &[String], exprs: &[Expr]) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        match self.opts.order {
            CanonicalOrder::Binding => {
                for y in scope.iter().rev() {
                    if !out.contains(y) && exprs.iter().any(|e| occurs_free(y, e)) {
                        out.push(y.clone());
                    }
                }
            }
            CanonicalOrder::Appearance => {
                for e in exprs {
                    for y in free_rigid_vars(e) {
                        if scope.contains(&y) && !out.contains(&y) {
                            out.push(y);
                        }
                    }
                }
            }
        }
        out
    }
}

/// Translate one expression with a caller-owned table.
pub fn coalesce_fol(e: &Expr, binders: &[String], table: &mut SymbolTable, env: &Env) -> Expr {
    let mut c = FolCoalescer::with_table(env, FolOptions::default(), std::mem::take(table));
    let out = c.coalesce_under(e, binders);
    *table = c.table;
    out
}

/// A coalesced first-order sequent.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FolSequent {
    pub hypotheses: Vec<Expr>,
    pub goal: Expr,
    pub table: SymbolTable,
}

/// Translate hypotheses and goal with one shared table.
pub fn coalesce_obligation_fol(ob: &Obligation, opts: FolOptions) -> FolSequent {
    let mut c = FolCoalescer::new(&ob.env, opts);
    let hypotheses = ob.hypotheses.iter().map(|h| c.coalesce(h)).collect();
    let goal = c.coalesce(&ob.goal);
    FolSequent {
        hypotheses,
        goal,
        table: c.table,
    }
}

/// Replace `nabla e` for rigid `e` by `e` on reflexive frames and by
/// `nabla false \/ e` otherwise.
pub fn rewrite_rigid_box(e: &Expr, reflexive: bool, env: &Env) -> Expr {
    match e {
        Expr::Nabla(body) if is_rigid(body, env) => {
            if reflexive {
                (**body).clone()
            } else {
                Expr::or(Expr::nabla(Expr::False), (**body).clone())
            }
        }
        _ => {
            let kids = e
                .children()
                .into_iter()
                .map(|c| rewrite_rigid_box(c, reflexive, env))
                .collect();
            e.with_children(kids)
        }
    }
}

/// The first-order structure of the soundness argument: rigid variables
/// keep their values, flexible variables take their values at `w`, and each
/// fresh symbol is the value of its lambda body at `w`.
pub fn build_witness_structure(
    m: &KripkeModel,
    w: usize,
    table: &SymbolTable,
    env: &Env,
) -> Result<FolStructure, EvalError> {
    let u = m.universe_size();
    let mut ops = m.ops.clone();
    let mut xi: BTreeMap<String, Val> = m.xi.clone();
    for (v, vals) in &m.zeta {
        xi.insert(v.clone(), vals[w]);
    }
    for entry in table.entries() {
        if entry.flexible {
            xi.insert(entry.name.clone(), eval_under(m, w, &entry.body, env, &[])?);
            continue;
        }
        let table = OpTable::tabulate(entry.arity(), u, |args| {
            let bindings: Vec<(String, Val)> = entry.params.iter().cloned().zip(args.iter().copied()).collect();
            eval_under(m, w, &entry.body, env, &bindings)
        })?;
        ops.insert(entry.name.clone(), table);
    }
    Ok(FolStructure {
        universe: m.universe.clone(),
        tt: m.tt,
        ff: m.ff,
        ops,
        xi,
    })
}

/// No modal node and no defined operator left.
pub fn is_first_order(e: &Expr) -> bool {
    !e.any(&|n| matches!(n, Expr::Nabla(_) | Expr::Prime(_) | Expr::Def(..)))
}
