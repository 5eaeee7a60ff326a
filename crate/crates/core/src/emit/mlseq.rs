//! The propositional modal sequent format.
//!
//! ```text
//! (frame nabla s4)
//! (frame prime k)
//! (global-hypotheses
//!   (=> p (nabla p)))
//! (goal (=> p (nabla (nabla p))))
//! ```
//!
//! Output uses only the core connectives; input may use the derived ones.

use std::fmt::Write;

use thiserror::Error;

use crate::prover::{Frame, Frames, MlSequent};
use crate::syntax::print::raw;
use crate::syntax::sexp::{is_ident, parse_all, Sexp, SyntaxError};
use crate::syntax::Expr;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MlseqError {
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
    #[error("{pos}: {msg}")]
    Form { pos: crate::syntax::sexp::Pos, msg: String },
}

fn err(s: &Sexp, msg: impl Into<String>) -> MlseqError {
    MlseqError::Form {
        pos: s.pos(),
        msg: msg.into(),
    }
}

pub fn emit_ml(s: &MlSequent) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "(frame nabla {})", s.frames.nabla);
    let _ = writeln!(out, "(frame prime {})", s.frames.prime);
    if s.hypotheses.is_empty() {
        out.push_str("(global-hypotheses)\n");
    } else {
        out.push_str("(global-hypotheses");
        for h in &s.hypotheses {
            let _ = write!(out, "\n  {}", raw(h));
        }
        out.push_str(")\n");
    }
    let _ = writeln!(out, "(goal {})", raw(&s.goal));
    out
}

const KEYWORDS: &[&str] = &[
    "false", "true", "not", "and", "or", "iff", "=>", "nabla", "delta", "prime",
];

fn formula(s: &Sexp) -> Result<Expr, MlseqError> {
    match s {
        Sexp::Atom(a, _) => match a.as_str() {
            "false" => Ok(Expr::False),
            "true" => Ok(Expr::truth()),
            a if KEYWORDS.contains(&a) || !is_ident(a) => Err(err(s, format!("`{a}` is not an atom"))),
            a => Ok(Expr::flex(a)),
        },
        Sexp::List(items, _) => {
            let head = items.first().and_then(Sexp::atom).ok_or_else(|| err(s, "expected a connective"))?;
            let args = items[1..].iter().map(formula).collect::<Result<Vec<_>, _>>()?;
            let n = args.len();
            let mut args = args.into_iter();
            let mut one = || args.next().unwrap();
            match (head, n) {
                ("not", 1) => Ok(Expr::not(one())),
                ("nabla", 1) => Ok(Expr::nabla(one())),
                ("delta", 1) => Ok(Expr::delta(one())),
                ("prime", 1) => Ok(Expr::prime(one())),
                ("=>", 2) => {
                    let a = one();
                    Ok(Expr::implies(a, one()))
                }
                ("iff", 2) => {
                    let a = one();
                    Ok(Expr::iff(a, one()))
                }
                ("and", n) if n >= 2 => Ok(Expr::and_all(args)),
                ("or", n) if n >= 2 => Ok(Expr::or_all(args)),
                _ => Err(err(s, format!("bad use of `{head}`"))),
            }
        }
    }
}

pub fn parse_mlseq(text: &str) -> Result<MlSequent, MlseqError> {
    let mut frames = Frames::default();
    let mut hypotheses = Vec::new();
    let mut goal = None;
    for form in parse_all(text)? {
        let items = form.expect_list("a form")?;
        match (items.first().and_then(Sexp::atom), &items[1..]) {
            (Some("frame"), [m, f]) => {
                let frame: Frame = f
                    .expect_atom("a frame")?
                    .parse()
                    .map_err(|_| err(f, "expected k, t, k4 or s4"))?;
                match m.expect_atom("a modality")? {
                    "nabla" => frames.nabla = frame,
                    "prime" => frames.prime = frame,
                    _ => return Err(err(m, "expected nabla or prime")),
                }
            }
            (Some("global-hypotheses"), hs) => {
                for h in hs {
                    hypotheses.push(formula(h)?);
                }
            }
            (Some("goal"), [g]) if goal.is_none() => goal = Some(formula(g)?),
            _ => return Err(err(&form, "unexpected form")),
        }
    }
    let goal = goal.ok_or_else(|| MlseqError::Form {
        pos: Default::default(),
        msg: "missing goal".into(),
    })?;
    Ok(MlSequent {
        hypotheses,
        goal,
        frames,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let src = "(frame nabla s4)\n(frame prime k)\n(global-hypotheses\n  (=> p (nabla p))\n  (=> a0__1f (prime a0__1f)))\n(goal (=> (=> p false) (nabla (=> (nabla (=> q false)) false))))\n";
        let s = parse_mlseq(src).unwrap();
        assert_eq!(s.frames.nabla, Frame::S4);
        assert_eq!(emit_ml(&s), src);
        let empty = "(frame nabla k)\n(frame prime k)\n(global-hypotheses)\n(goal (=> false false))\n";
        assert_eq!(emit_ml(&parse_mlseq(empty).unwrap()), empty);
    }

    #[test]
    fn derived_forms_are_accepted() {
        let s = parse_mlseq("(goal (iff (and p q r) (not (or p (delta q)))))").unwrap();
        let p = Expr::flex("p");
        let q = Expr::flex("q");
        let expected = Expr::iff(
            Expr::and_all([p.clone(), q.clone(), Expr::flex("r")]),
            Expr::not(Expr::or(p, Expr::delta(q))),
        );
        assert_eq!(s.goal, expected);
        assert!(parse_mlseq("(goal (= p q))").is_err());
        assert!(parse_mlseq("(frame nabla s5) (goal p)").is_err());
    }
}
