//! Printing expressions and obligations in problem-file syntax.

use std::fmt::Write;

use super::env::{Env, Obligation};
use super::expr::Expr;

/// Core-grammar rendering: only `=`, `false`, `=>`, `forall`, `nabla`,
/// `prime`, applications and names.
pub fn raw(e: &Expr) -> String {
    let mut out = String::new();
    write_raw(e, &mut out);
    out
}

fn write_raw(e: &Expr, out: &mut String) {
    match e {
        Expr::Rigid(n) | Expr::Flex(n) => out.push_str(n),
        Expr::Op(n, args) | Expr::Def(n, args) => write_app(n, args, out, write_raw),
        Expr::Eq(a, b) => write_form("=", &[a, b], out, write_raw),
        Expr::False => out.push_str("false"),
        Expr::Implies(a, b) => write_form("=>", &[a, b], out, write_raw),
        Expr::Forall(x, body) => {
            let _ = write!(out, "(forall {x} ");
            write_raw(body, out);
            out.push(')');
        }
        Expr::Nabla(b) => write_form("nabla", &[b], out, write_raw),
        Expr::Prime(b) => write_form("prime", &[b], out, write_raw),
    }
}

fn write_app(name: &str, args: &[Expr], out: &mut String, rec: fn(&Expr, &mut String)) {
    if args.is_empty() {
        out.push_str(name);
        return;
    }
    out.push('(');
    out.push_str(name);
    for a in args {
        out.push(' ');
        rec(a, out);
    }
    out.push(')');
}

fn write_form(head: &str, args: &[&Expr], out: &mut String, rec: fn(&Expr, &mut String)) {
    out.push('(');
    out.push_str(head);
    for a in args {
        out.push(' ');
        rec(a, out);
    }
    out.push(')');
}

/// Rendering with the derived connectives recovered where the core shape
/// matches their desugaring exactly, so parsing the output gives back the
/// same tree.
pub fn pretty(e: &Expr) -> String {
    let mut out = String::new();
    write_pretty(e, &mut out);
    out
}

fn as_not(e: &Expr) -> Option<&Expr> {
    match e {
        Expr::Implies(a, b) if **b == Expr::False => Some(a),
        _ => None,
    }
}

fn as_and(e: &Expr) -> Option<(&Expr, &Expr)> {
    let inner = as_not(e)?;
    match inner {
        Expr::Implies(a, b) => as_not(b).map(|b| (&**a, b)),
        _ => None,
    }
}

fn as_or(e: &Expr) -> Option<(&Expr, &Expr)> {
    match e {
        Expr::Implies(a, b) => as_not(a).map(|a| (a, &**b)),
        _ => None,
    }
}

fn is_true(e: &Expr) -> bool {
    matches!(e, Expr::Implies(a, b) if **a == Expr::False && **b == Expr::False)
}

fn write_pretty(e: &Expr, out: &mut String) {
    if is_true(e) {
        out.push_str("true");
        return;
    }
    if let Some((a, b)) = as_and(e) {
        if let (Expr::Implies(p, q), Expr::Implies(q2, p2)) = (a, b) {
            if p == p2 && q == q2 {
                write_form("iff", &[p, q], out, write_pretty);
                return;
            }
        }
        let mut parts = vec![a];
        let mut rest = b;
        while let Some((x, y)) = as_and(rest) {
            if is_true(rest) {
                break;
            }
            parts.push(x);
            rest = y;
        }
        parts.push(rest);
        write_form("and", &parts, out, write_pretty);
        return;
    }
    if let Some(inner) = as_not(e) {
        match inner {
            Expr::Forall(x, body) => {
                if let Some(b) = as_not(body) {
                    let _ = write!(out, "(exists {x} ");
                    write_pretty(b, out);
                    out.push(')');
                    return;
                }
            }
            Expr::Nabla(body) => {
                if let Some(b) = as_not(body) {
                    write_form("delta", &[b], out, write_pretty);
                    return;
                }
            }
            _ => {}
        }
        write_form("not", &[inner], out, write_pretty);
        return;
    }
    // `(and a b) => c` has the same shape as `or`; keep the implication.
    if let Expr::Implies(l, r) = e {
        if as_and(l).is_some() {
            write_form("=>", &[l, r], out, write_pretty);
            return;
        }
    }
    if let Some((a, b)) = as_or(e) {
        let mut parts = vec![a];
        let mut rest = b;
        while let Some((x, y)) = as_or(rest) {
            if as_not(rest).is_some() {
                break;
            }
            parts.push(x);
            rest = y;
        }
        parts.push(rest);
        write_form("or", &parts, out, write_pretty);
        return;
    }
    match e {
        Expr::Rigid(n) | Expr::Flex(n) => out.push_str(n),
        Expr::Op(n, args) | Expr::Def(n, args) => write_app(n, args, out, write_pretty),
        Expr::Eq(a, b) => write_form("=", &[a, b], out, write_pretty),
        Expr::False => out.push_str("false"),
        Expr::Implies(a, b) => write_form("=>", &[a, b], out, write_pretty),
        Expr::Forall(x, body) => {
            let _ = write!(out, "(forall {x} ");
            write_pretty(body, out);
            out.push(')');
        }
        Expr::Nabla(b) => write_form("nabla", &[b], out, write_pretty),
        Expr::Prime(b) => write_form("prime", &[b], out, write_pretty),
    }
}

/// Declarations and definitions of `env`, one form per line.
pub fn declarations(env: &Env) -> String {
    let mut out = String::new();
    for (name, arity) in env.ops() {
        let _ = writeln!(out, "(declare-op {name} {arity})");
    }
    if !env.rigid_vars().is_empty() {
        let _ = writeln!(out, "(declare-rigid {})", env.rigid_vars().join(" "));
    }
    if !env.flex_vars().is_empty() {
        let _ = writeln!(out, "(declare-flex {})", env.flex_vars().join(" "));
    }
    for d in env.definitions() {
        let sig = std::iter::once(d.name.as_str())
            .chain(d.params.iter().map(String::as_str))
            .collect::<Vec<_>>()
            .join(" ");
        let _ = writeln!(out, "(define ({sig}) {})", pretty(&d.body));
    }
    out
}

/// A complete problem file that parses back to the same obligation.
pub fn obligation(ob: &Obligation) -> String {
    let mut out = declarations(&ob.env);
    if ob.mode != Default::default() {
        let _ = writeln!(out, "(mode {})", ob.mode);
    }
    for h in &ob.hypotheses {
        let _ = writeln!(out, "(assume {})", pretty(h));
    }
    let _ = writeln!(out, "(goal {})", pretty(&ob.goal));
    out
}

#[cfg(test)]
mod tests {
    use super::super::parse::{parse_expr, parse_problem};
    use super::*;

    #[test]
    fn pretty_recovers_sugar() {
        let mut env = Env::new();
        env.declare_flex("p").unwrap();
        env.declare_flex("q").unwrap();
        env.declare_flex("r").unwrap();
        for src in [
            "true",
            "(not p)",
            "(and p q r)",
            "(or p q r)",
            "(iff p q)",
            "(exists x (= x p))",
            "(delta p)",
            "(=> p q)",
            "(not (not p))",
        ] {
            let e = parse_expr(src, &mut env).unwrap();
            assert_eq!(pretty(&e), src);
        }
    }

    #[test]
    fn obligation_round_trip() {
        let src = "(declare-op 0 0)\n(declare-flex u v)\n(define (cst x) (exists y (nabla (= x y))))\n(assume (= u v))\n(goal (iff (cst u) (cst v)))\n";
        let ob = parse_problem(src).unwrap();
        assert_eq!(obligation(&ob), src);
        assert_eq!(parse_problem(&obligation(&ob)).unwrap(), ob);
    }
}
