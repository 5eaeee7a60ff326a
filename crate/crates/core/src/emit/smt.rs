//! SMT-LIB 2 output over one uninterpreted sort, and an evaluator for it.
//!
//! The script asserts the hypotheses and the negated goal, so the sequent
//! is valid exactly when the script is unsatisfiable.

use std::fmt::Write;

use super::{lookup, unmangle, CheckError, Signature, BUILTIN, MANGLE};
use crate::coalesce::SymbolTable;
use crate::semantics::{FolStructure, Val};
use crate::syntax::sexp::{parse_all, Sexp};
use crate::syntax::Expr;

/// Words SMT-LIB gives a meaning of its own, quoted or not.
const SMT_TAKEN: &[&str] = &[
    "true", "false", "not", "=>", "and", "or", "xor", "=", "distinct", "ite", "let", "par", "as",
    "match", "forall", "exists", "_", "!", "Bool",
];

fn is_simple(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || "~!@$%^&*_-+=<>.?/".contains(c) => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || "~!@$%^&*_-+=<>.?/".contains(c))
}

/// The SMT-LIB symbol for a user or coalesced name.
pub fn symbol(name: &str) -> String {
    let mut s = name.replace('\\', "#5c");
    if BUILTIN.contains(&name) || SMT_TAKEN.contains(&name) {
        s.push(MANGLE);
    }
    if is_simple(&s) {
        s
    } else {
        format!("|{s}|")
    }
}

fn original(sym: &str) -> String {
    unmangle(sym).replace("#5c", "\\")
}

fn term(e: &Expr, out: &mut String) {
    match e {
        Expr::Rigid(n) | Expr::Flex(n) => out.push_str(&symbol(n)),
        Expr::Op(n, args) if args.is_empty() => out.push_str(&symbol(n)),
        Expr::Op(n, args) => {
            let _ = write!(out, "({}", symbol(n));
            for a in args {
                out.push(' ');
                term(a, out);
            }
            out.push(')');
        }
        Expr::False => out.push_str("ff"),
        Expr::Eq(..) | Expr::Implies(..) | Expr::Forall(..) => {
            out.push_str("(ite ");
            formula(e, out);
            out.push_str(" tt ff)");
        }
        Expr::Def(..) | Expr::Nabla(_) | Expr::Prime(_) => panic!("not a first-order expression"),
    }
}

fn formula(e: &Expr, out: &mut String) {
    match e {
        Expr::False => out.push_str("false"),
        Expr::Eq(a, b) => {
            out.push_str("(= ");
            term(a, out);
            out.push(' ');
            term(b, out);
            out.push(')');
        }
        Expr::Implies(a, b) => {
            out.push_str("(=> ");
            formula(a, out);
            out.push(' ');
            formula(b, out);
            out.push(')');
        }
        Expr::Forall(x, body) => {
            let _ = write!(out, "(forall (({} U)) ", symbol(x));
            formula(body, out);
            out.push(')');
        }
        _ => {
            out.push_str("(= ");
            term(e, out);
            out.push_str(" tt)");
        }
    }
}

/// Script for the first-order sequent `hypotheses |- goal`. Symbol keys
/// from `table` are listed as comments. Panics on modal input.
pub fn emit_smt(hypotheses: &[Expr], goal: &Expr, table: Option<&SymbolTable>) -> String {
    let sig = Signature::of(hypotheses.iter().chain([goal]));
    let mut out = String::from("; the sequent is valid iff this script is unsat\n");
    if let Some(t) = table {
        for e in t.entries() {
            let _ = writeln!(out, "; {} := {}", e.name, e.key);
        }
    }
    out.push_str("(set-logic UF)\n(declare-sort U 0)\n(declare-fun tt () U)\n(declare-fun ff () U)\n");
    out.push_str("(assert (not (= tt ff)))\n");
    for (name, &arity) in &sig.ops {
        let _ = writeln!(out, "(declare-fun {} ({}) U)", symbol(name), vec!["U"; arity].join(" "));
    }
    for c in &sig.constants {
        if !sig.ops.contains_key(c) {
            let _ = writeln!(out, "(declare-fun {} () U)", symbol(c));
        }
    }
    for h in hypotheses {
        out.push_str("(assert ");
        formula(h, &mut out);
        out.push_str(")\n");
    }
    out.push_str("(assert (not ");
    formula(goal, &mut out);
    out.push_str("))\n(check-sat)\n");
    out
}

struct Script<'a> {
    s: &'a FolStructure,
    declared: std::collections::BTreeMap<String, usize>,
}

fn syntax(e: &Sexp, msg: &str) -> CheckError {
    CheckError::Syntax(format!("{}: {msg}", e.pos()))
}

impl Script<'_> {
    fn apply(&self, name: &str, args: &[Val]) -> Result<Val, CheckError> {
        match name {
            "tt" => return Ok(self.s.tt),
            "ff" => return Ok(self.s.ff),
            _ => {}
        }
        if self.declared.get(name) != Some(&args.len()) {
            return Err(CheckError::Unknown(name.to_string()));
        }
        lookup(self.s, &original(name), args)
    }

    fn term(&self, e: &Sexp, scope: &mut Vec<(String, Val)>) -> Result<Val, CheckError> {
        match e {
            Sexp::Atom(a, _) => {
                if let Some((_, v)) = scope.iter().rev().find(|(n, _)| n == a) {
                    return Ok(*v);
                }
                self.apply(a, &[])
            }
            Sexp::List(items, _) => {
                let head = items.first().and_then(Sexp::atom).ok_or_else(|| syntax(e, "bad term"))?;
                if head == "ite" && items.len() == 4 {
                    return if self.formula(&items[1], scope)? {
                        self.term(&items[2], scope)
                    } else {
                        self.term(&items[3], scope)
                    };
                }
                let args = items[1..].iter().map(|a| self.term(a, scope)).collect::<Result<Vec<_>, _>>()?;
                self.apply(head, &args)
            }
        }
    }

    fn formula(&self, e: &Sexp, scope: &mut Vec<(String, Val)>) -> Result<bool, CheckError> {
        match e {
            Sexp::Atom(a, _) => match a.as_str() {
                "true" => Ok(true),
                "false" => Ok(false),
                _ => Err(CheckError::Unsupported(a.clone())),
            },
            Sexp::List(items, _) => {
                let head = items.first().and_then(Sexp::atom).ok_or_else(|| syntax(e, "bad formula"))?;
                let args = &items[1..];
                match (head, args.len()) {
                    ("not", 1) => Ok(!self.formula(&args[0], scope)?),
                    ("=>", 2) => Ok(!self.formula(&args[0], scope)? || self.formula(&args[1], scope)?),
                    ("and", _) => {
                        for a in args {
                            if !self.formula(a, scope)? {
                                return Ok(false);
                            }
                        }
                        Ok(true)
                    }
                    ("or", _) => {
                        for a in args {
                            if self.formula(a, scope)? {
                                return Ok(true);
                            }
                        }
                        Ok(false)
                    }
                    ("=", 2) => Ok(self.term(&args[0], scope)? == self.term(&args[1], scope)?),
                    ("forall", 2) => {
                        let binders = args[0].list().ok_or_else(|| syntax(e, "bad binder list"))?;
                        let mut names = Vec::new();
                        for b in binders {
                            match b.list() {
                                Some([Sexp::Atom(x, _), Sexp::Atom(sort, _)]) if sort == "U" => names.push(x.clone()),
                                _ => return Err(syntax(b, "bad binder")),
                            }
                        }
                        self.forall(&names, &args[1], scope)
                    }
                    _ => Err(CheckError::Unsupported(head.to_string())),
                }
            }
        }
    }

    fn forall(&self, names: &[String], body: &Sexp, scope: &mut Vec<(String, Val)>) -> Result<bool, CheckError> {
        let Some((x, rest)) = names.split_first() else {
            return self.formula(body, scope);
        };
        for d in 0..self.s.universe_size() {
            scope.push((x.clone(), Val(d as u16)));
            let ok = self.forall(rest, body, scope);
            scope.pop();
            if !ok? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// Whether `s`, with `tt` and `ff` read as the structure's truth values,
/// satisfies every assertion of an emitted script.
pub fn eval_smt(script: &str, s: &FolStructure) -> Result<bool, CheckError> {
    let forms = parse_all(script).map_err(|e| CheckError::Syntax(e.to_string()))?;
    let mut sc = Script {
        s,
        declared: Default::default(),
    };
    let mut asserts = Vec::new();
    for f in &forms {
        let items = f.list().ok_or_else(|| syntax(f, "expected a command"))?;
        match items.first().and_then(Sexp::atom) {
            Some("set-logic" | "set-info" | "set-option" | "check-sat" | "exit" | "declare-sort") => {}
            Some("declare-fun") => match items {
                [_, Sexp::Atom(name, _), Sexp::List(args, _), Sexp::Atom(_, _)] => {
                    sc.declared.insert(name.clone(), args.len());
                }
                _ => return Err(syntax(f, "bad declare-fun")),
            },
            Some("assert") if items.len() == 2 => asserts.push(&items[1]),
            _ => return Err(syntax(f, "unsupported command")),
        }
    }
    for a in asserts {
        if !sc.formula(a, &mut Vec::new())? {
            return Ok(false);
        }
    }
    Ok(true)
}
