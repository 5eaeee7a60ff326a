//! Free variables, capture-avoiding substitution, definition expansion and
//! the rigidity test.

use std::collections::{BTreeMap, BTreeSet};

use super::env::Env;
use super::expr::Expr;

/// Free rigid variables in order of first occurrence. Flexible variables
/// are never reported.
pub fn free_rigid_vars(e: &Expr) -> Vec<String> {
    let mut out = Vec::new();
    let mut bound = Vec::new();
    collect_free(e, &mut bound, &mut out);
    out
}

fn collect_free(e: &Expr, bound: &mut Vec<String>, out: &mut Vec<String>) {
    match e {
        Expr::Rigid(x) => {
            if !bound.contains(x) && !out.contains(x) {
                out.push(x.clone());
            }
        }
        Expr::Forall(x, body) => {
            bound.push(x.clone());
            collect_free(body, bound, out);
            bound.pop();
        }
        _ => {
            for c in e.children() {
                collect_free(c, bound, out);
            }
        }
    }
}

pub fn occurs_free(x: &str, e: &Expr) -> bool {
    match e {
        Expr::Rigid(y) => x == y,
        Expr::Forall(y, body) => y != x && occurs_free(x, body),
        _ => e.children().into_iter().any(|c| occurs_free(x, c)),
    }
}

/// `base` itself if unused, otherwise `base` with the smallest numeric
/// suffix not in `avoid`.
pub fn fresh_name(base: &str, avoid: &BTreeSet<String>) -> String {
    if !avoid.contains(base) {
        return base.to_string();
    }
    (1..)
        .map(|k| format!("{base}{k}"))
        .find(|cand| !avoid.contains(cand))
        .unwrap()
}

pub type Substitution = BTreeMap<String, Expr>;

/// Capture-avoiding substitution of rigid variables.
pub fn substitute(e: &Expr, sigma: &Substitution) -> Expr {
    substitute_avoiding(e, sigma, &BTreeSet::new())
}

/// Like [`substitute`], but renamed binders also avoid every name in `avoid`.
pub fn substitute_avoiding(e: &Expr, sigma: &Substitution, avoid: &BTreeSet<String>) -> Expr {
    if sigma.is_empty() {
        return e.clone();
    }
    let mut names = avoid.clone();
    e.names(&mut names);
    for (k, v) in sigma {
        names.insert(k.clone());
        v.names(&mut names);
    }
    subst_rec(e, sigma, &mut names)
}

fn subst_rec(e: &Expr, sigma: &Substitution, names: &mut BTreeSet<String>) -> Expr {
    match e {
        Expr::Rigid(x) => sigma.get(x).cloned().unwrap_or_else(|| e.clone()),
        Expr::Forall(x, body) => {
            let mut inner = sigma.clone();
            inner.remove(x);
            inner.retain(|k, _| occurs_free(k, body));
            if inner.is_empty() {
                return e.clone();
            }
            let captures = inner.values().any(|v| occurs_free(x, v));
            if captures {
                let renamed = fresh_name(x, names);
                names.insert(renamed.clone());
                inner.insert(x.clone(), Expr::Rigid(renamed.clone()));
                Expr::forall(renamed, subst_rec(body, &inner, names))
            } else {
                Expr::forall(x.clone(), subst_rec(body, &inner, names))
            }
        }
        _ => {
            let kids = e
                .children()
                .into_iter()
                .map(|c| subst_rec(c, sigma, names))
                .collect();
            e.with_children(kids)
        }
    }
}

/// Replace every defined-operator application by its definition body with
/// the arguments substituted for the parameters.
pub fn expand_definitions(e: &Expr, env: &Env) -> Expr {
    expand_with(e, env)
}

pub(crate) fn expand_with(e: &Expr, env: &Env) -> Expr {
    if !e.contains_def() {
        return e.clone();
    }
    match e {
        Expr::Def(d, args) => {
            let args: Vec<Expr> = args.iter().map(|a| expand_with(a, env)).collect();
            let def = env
                .definition(d)
                .unwrap_or_else(|| panic!("unresolved definition `{d}`"));
            let body = env.expanded_body(d).unwrap();
            let sigma: Substitution = def.params.iter().cloned().zip(args).collect();
            substitute_avoiding(body, &sigma, &env.all_names())
        }
        _ => {
            let kids = e
                .children()
                .into_iter()
                .map(|c| expand_with(c, env))
                .collect();
            e.with_children(kids)
        }
    }
}

/// No flexible variable, no modal node. Only meaningful on expanded input.
pub fn is_rigid_expanded(e: &Expr) -> bool {
    !e.any(&|n| matches!(n, Expr::Flex(_) | Expr::Nabla(_) | Expr::Prime(_)))
}

/// Rigidity of `e` after full definition expansion, computed without
/// materializing the expansion.
pub fn is_rigid(e: &Expr, env: &Env) -> bool {
    match e {
        Expr::Flex(_) | Expr::Nabla(_) | Expr::Prime(_) => false,
        Expr::Def(d, args) => {
            let (Some(def), Some(body)) = (env.definition(d), env.expanded_body(d)) else {
                return false;
            };
            is_rigid_expanded(body)
                && def
                    .params
                    .iter()
                    .zip(args)
                    .all(|(p, a)| !occurs_free(p, body) || is_rigid(a, env))
        }
        _ => e.children().into_iter().all(|c| is_rigid(c, env)),
    }
}
