//! Alpha-canonical forms.
//!
//! Bound rigid variables are replaced by de Bruijn indices, rendered as the
//! reserved names `#0`, `#1`, ... (innermost binder is `#0`) with every binder
//! renamed to `#`. Lambda parameters of coalescing keys become `@0`, `@1`, ...
//! in parameter order. Neither `#` nor `@` can appear in a parsed identifier,
//! so canonical names never collide with user names.

use super::expr::Expr;

pub const BINDER: &str = "#";

pub fn bound_index_name(i: usize) -> String {
    format!("#{i}")
}

pub fn lambda_param_name(i: usize) -> String {
    format!("@{i}")
}

/// De Bruijn rendering of `e`; free rigid and flexible variables keep
/// their names.
pub fn canonical(e: &Expr) -> Expr {
    canonical_lambda(&[], e)
}

/// De Bruijn rendering of `lambda params: body`. Free occurrences of the
/// i-th parameter become `@i`.
pub fn canonical_lambda(params: &[String], body: &Expr) -> Expr {
    let mut scope = Vec::new();
    canon_rec(body, params, &mut scope)
}

fn canon_rec(e: &Expr, params: &[String], scope: &mut Vec<String>) -> Expr {
    match e {
        Expr::Rigid(x) => {
            if let Some(pos) = scope.iter().rposition(|b| b == x) {
                Expr::Rigid(bound_index_name(scope.len() - 1 - pos))
            } else if let Some(i) = params.iter().position(|p| p == x) {
                Expr::Rigid(lambda_param_name(i))
            } else {
                e.clone()
            }
        }
        Expr::Forall(x, body) => {
            scope.push(x.clone());
            let inner = canon_rec(body, params, scope);
            scope.pop();
            Expr::forall(BINDER, inner)
        }
        _ => {
            let kids = e
                .children()
                .into_iter()
                .map(|c| canon_rec(c, params, scope))
                .collect();
            e.with_children(kids)
        }
    }
}

pub fn alpha_equal(a: &Expr, b: &Expr) -> bool {
    canonical(a) == canonical(b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lambda_keys_identify_renamed_parameters() {
        let a = canonical_lambda(
            &["x".into()],
            &Expr::nabla(Expr::eq(Expr::flex("v"), Expr::rigid("x"))),
        );
        let b = canonical_lambda(
            &["y".into()],
            &Expr::nabla(Expr::eq(Expr::flex("v"), Expr::rigid("y"))),
        );
        assert_eq!(a, b);
    }

    #[test]
    fn renamed_binders_are_equal() {
        let a = Expr::forall("x", Expr::eq(Expr::rigid("x"), Expr::rigid("x")));
        let b = Expr::forall("y", Expr::eq(Expr::rigid("y"), Expr::rigid("y")));
        assert!(alpha_equal(&a, &b));
    }

    #[test]
    fn symmetry_of_equality_is_not_identified() {
        let a = Expr::eq(Expr::rigid("a"), Expr::rigid("b"));
        let b = Expr::eq(Expr::rigid("b"), Expr::rigid("a"));
        assert!(!alpha_equal(&a, &b));
    }

    #[test]
    fn free_and_bound_occurrences_differ() {
        let a = Expr::forall("x", Expr::eq(Expr::rigid("x"), Expr::rigid("y")));
        let b = Expr::forall("y", Expr::eq(Expr::rigid("y"), Expr::rigid("y")));
        assert!(!alpha_equal(&a, &b));
    }

    #[test]
    fn shadowing_uses_innermost_binder() {
        let a = Expr::forall("x", Expr::forall("x", Expr::rigid("x")));
        let b = Expr::forall("x", Expr::forall("y", Expr::rigid("y")));
        let c = Expr::forall("x", Expr::forall("y", Expr::rigid("x")));
        assert!(alpha_equal(&a, &b));
        assert!(!alpha_equal(&a, &c));
    }
}
