//! Reader for problem files.
//!
//! ```text
//! (declare-op name arity)   (declare-rigid x ...)   (declare-flex v ...)
//! (define (d x1 .. xn) body)
//! (assume expr)   (goal expr)   (mode fol|ml|action)
//! (init expr) (next expr) (inv expr) (iinv expr) (vars v ...)   ; safety specs
//! ```
//!
//! `(symbols ...)`, `(atoms ...)` and `(hypotheses ...)` blocks written by
//! the translators are metadata and are skipped.

use thiserror::Error;

use super::env::{Env, EnvError, Mode, Obligation, SymbolKind};
use super::expr::Expr;
use super::sexp::{self, Pos, Sexp, SyntaxError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("{0}")]
    Syntax(#[from] SyntaxError),
    #[error("{pos}: unknown symbol `{name}`")]
    UnknownSymbol { name: String, pos: Pos },
    #[error("{pos}: `{name}` expects {expected} argument(s), found {found}")]
    Arity {
        name: String,
        expected: usize,
        found: usize,
        pos: Pos,
    },
    #[error("{pos}: prime cannot be nested")]
    NestedPrime { pos: Pos },
    #[error("{pos}: `{name}` is reserved")]
    Reserved { name: String, pos: Pos },
    #[error("{pos}: {source}")]
    Env { pos: Pos, source: EnvError },
    #[error("missing (goal ...) form")]
    MissingGoal,
}

impl ParseError {
    pub fn pos(&self) -> Option<Pos> {
        match self {
            ParseError::Syntax(e) => Some(e.pos),
            ParseError::UnknownSymbol { pos, .. }
            | ParseError::Arity { pos, .. }
            | ParseError::NestedPrime { pos }
            | ParseError::Reserved { pos, .. }
            | ParseError::Env { pos, .. } => Some(*pos),
            ParseError::MissingGoal => None,
        }
    }
}

const RESERVED: &[&str] = &[
    "=", "=>", "not", "and", "or", "iff", "forall", "exists", "nabla", "delta", "prime", "true",
    "false", "lambda",
];

pub fn is_reserved(name: &str) -> bool {
    RESERVED.contains(&name)
}

fn is_numeral(name: &str) -> bool {
    !name.is_empty() && name.bytes().all(|b| b.is_ascii_digit())
}

/// Everything a problem file can contain.
#[derive(Clone, Debug, Default)]
pub struct ProblemFile {
    pub env: Env,
    pub hypotheses: Vec<Expr>,
    pub goal: Option<Expr>,
    pub mode: Mode,
    pub init: Option<Expr>,
    pub next: Option<Expr>,
    pub inv: Option<Expr>,
    pub iinv: Option<Expr>,
    pub vars: Vec<String>,
}

impl ProblemFile {
    pub fn into_obligation(self) -> Result<Obligation, ParseError> {
        let goal = self.goal.ok_or(ParseError::MissingGoal)?;
        Ok(Obligation {
            hypotheses: self.hypotheses,
            goal,
            env: self.env,
            mode: self.mode,
        })
    }
}

/// Parse a problem file into a resolved obligation.
pub fn parse_problem(text: &str) -> Result<Obligation, ParseError> {
    parse_problem_file(text)?.into_obligation()
}

pub fn parse_problem_file(text: &str) -> Result<ProblemFile, ParseError> {
    let mut pf = ProblemFile::default();
    for form in sexp::parse_all(text)? {
        let items = form.expect_list("a top-level form")?;
        let head = form
            .head()
            .ok_or_else(|| SyntaxError::new(form.pos(), "expected a form keyword"))?;
        let args = &items[1..];
        let env_err = |source| ParseError::Env {
            pos: form.pos(),
            source,
        };
        match head {
            "declare-op" => {
                expect_len(&form, args, 2)?;
                let name = declared_name(&args[0])?;
                let arity_text = args[1].expect_atom("an arity")?;
                let arity: usize = arity_text
                    .parse()
                    .map_err(|_| SyntaxError::new(args[1].pos(), "arity must be a natural number"))?;
                pf.env.declare_op(name, arity).map_err(env_err)?;
            }
            "declare-rigid" | "declare-flex" => {
                for a in args {
                    let name = declared_name(a)?;
                    let res = if head == "declare-rigid" {
                        pf.env.declare_rigid(name)
                    } else {
                        pf.env.declare_flex(name)
                    };
                    res.map_err(|source| ParseError::Env {
                        pos: a.pos(),
                        source,
                    })?;
                }
            }
            "define" => {
                expect_len(&form, args, 2)?;
                let (name, params) = match &args[0] {
                    Sexp::Atom(name, _) => (name.as_str(), Vec::new()),
                    Sexp::List(sig, pos) => {
                        let Some((name, rest)) = sig.split_first() else {
                            return Err(SyntaxError::new(*pos, "empty definition signature").into());
                        };
                        let params = rest
                            .iter()
                            .map(|p| declared_name(p).map(str::to_string))
                            .collect::<Result<Vec<_>, _>>()?;
                        (name.expect_atom("a definition name")?, params)
                    }
                };
                check_declarable(name, args[0].pos())?;
                let mut scope = params.clone();
                let body = parse_expr_in(&args[1], &mut pf.env, &mut scope)?;
                pf.env.define(name, params, body).map_err(env_err)?;
            }
            "assume" => {
                expect_len(&form, args, 1)?;
                let e = parse_expr_in(&args[0], &mut pf.env, &mut Vec::new())?;
                pf.hypotheses.push(e);
            }
            "goal" | "init" | "next" | "inv" | "iinv" => {
                expect_len(&form, args, 1)?;
                let e = parse_expr_in(&args[0], &mut pf.env, &mut Vec::new())?;
                let slot = match head {
                    "goal" => &mut pf.goal,
                    "init" => &mut pf.init,
                    "next" => &mut pf.next,
                    "inv" => &mut pf.inv,
                    _ => &mut pf.iinv,
                };
                if slot.is_some() {
                    return Err(SyntaxError::new(form.pos(), format!("duplicate ({head} ...) form")).into());
                }
                *slot = Some(e);
            }
            "vars" => {
                for a in args {
                    let name = a.expect_atom("a flexible variable")?;
                    if !pf.env.is_flex(name) {
                        return Err(ParseError::UnknownSymbol {
                            name: name.to_string(),
                            pos: a.pos(),
                        });
                    }
                    pf.vars.push(name.to_string());
                }
            }
            "mode" => {
                expect_len(&form, args, 1)?;
                pf.mode = match args[0].expect_atom("a mode")? {
                    "fol" => Mode::Fol,
                    "ml" => Mode::Ml,
                    "action" => Mode::Action,
                    other => {
                        return Err(SyntaxError::new(args[0].pos(), format!("unknown mode `{other}`")).into())
                    }
                };
            }
            "symbols" | "atoms" | "hypotheses" => {}
            other => {
                return Err(SyntaxError::new(form.pos(), format!("unknown form `{other}`")).into());
            }
        }
    }
    Ok(pf)
}

fn expect_len(form: &Sexp, args: &[Sexp], n: usize) -> Result<(), ParseError> {
    if args.len() != n {
        let head = form.head().unwrap_or("form");
        return Err(SyntaxError::new(
            form.pos(),
            format!("`{head}` takes {n} argument(s), found {}", args.len()),
        )
        .into());
    }
    Ok(())
}

fn check_declarable(name: &str, pos: Pos) -> Result<(), ParseError> {
    if is_reserved(name) {
        return Err(ParseError::Reserved {
            name: name.to_string(),
            pos,
        });
    }
    Ok(())
}

fn declared_name(s: &Sexp) -> Result<&str, ParseError> {
    let name = s.expect_atom("a name")?;
    if !sexp::is_ident(name) {
        return Err(SyntaxError::new(s.pos(), format!("`{name}` is not a valid identifier")).into());
    }
    check_declarable(name, s.pos())?;
    Ok(name)
}

/// Parse a single expression against `env`. Numerals are declared as
/// 0-ary operators on first use.
pub fn parse_expr(text: &str, env: &mut Env) -> Result<Expr, ParseError> {
    let forms = sexp::parse_all(text)?;
    match forms.as_slice() {
        [one] => parse_expr_in(one, env, &mut Vec::new()),
        _ => Err(SyntaxError::new(Pos { line: 1, col: 1 }, "expected exactly one expression").into()),
    }
}

fn parse_expr_in(s: &Sexp, env: &mut Env, scope: &mut Vec<String>) -> Result<Expr, ParseError> {
    match s {
        Sexp::Atom(name, pos) => resolve_name(name, *pos, env, scope),
        Sexp::List(items, pos) => {
            let Some((head, args)) = items.split_first() else {
                return Err(SyntaxError::new(*pos, "empty expression").into());
            };
            let head = head.expect_atom("an operator")?;
            let arity = |n: usize| -> Result<(), ParseError> {
                if args.len() != n {
                    return Err(ParseError::Arity {
                        name: head.to_string(),
                        expected: n,
                        found: args.len(),
                        pos: *pos,
                    });
                }
                Ok(())
            };
            match head {
                "=" => {
                    arity(2)?;
                    let a = parse_expr_in(&args[0], env, scope)?;
                    let b = parse_expr_in(&args[1], env, scope)?;
                    Ok(Expr::eq(a, b))
                }
                "=>" => {
                    if args.len() < 2 {
                        arity(2)?;
                    }
                    let mut parts = args
                        .iter()
                        .map(|a| parse_expr_in(a, env, scope))
                        .collect::<Result<Vec<_>, _>>()?;
                    let mut acc = parts.pop().unwrap();
                    while let Some(prev) = parts.pop() {
                        acc = Expr::implies(prev, acc);
                    }
                    Ok(acc)
                }
                "not" => {
                    arity(1)?;
                    Ok(Expr::not(parse_expr_in(&args[0], env, scope)?))
                }
                "and" | "or" => {
                    let parts = args
                        .iter()
                        .map(|a| parse_expr_in(a, env, scope))
                        .collect::<Result<Vec<_>, _>>()?;
                    Ok(if head == "and" {
                        Expr::and_all(parts)
                    } else {
                        Expr::or_all(parts)
                    })
                }
                "iff" => {
                    arity(2)?;
                    let a = parse_expr_in(&args[0], env, scope)?;
                    let b = parse_expr_in(&args[1], env, scope)?;
                    Ok(Expr::iff(a, b))
                }
                "forall" | "exists" => {
                    arity(2)?;
                    let vars: Vec<&Sexp> = match &args[0] {
                        Sexp::List(vs, _) => vs.iter().collect(),
                        atom => vec![atom],
                    };
                    let mut names = Vec::new();
                    for v in vars {
                        let name = declared_name(v)?;
                        match env.kind(name) {
                            None | Some(SymbolKind::Rigid) => {}
                            Some(_) => {
                                return Err(SyntaxError::new(
                                    v.pos(),
                                    format!("cannot bind `{name}`: only rigid variables can be quantified"),
                                )
                                .into())
                            }
                        }
                        names.push(name.to_string());
                    }
                    let depth = scope.len();
                    scope.extend(names.iter().cloned());
                    let body = parse_expr_in(&args[1], env, scope);
                    scope.truncate(depth);
                    let mut body = body?;
                    for name in names.into_iter().rev() {
                        body = if head == "forall" {
                            Expr::forall(name, body)
                        } else {
                            Expr::exists(name, body)
                        };
                    }
                    Ok(body)
                }
                "nabla" | "delta" | "prime" => {
                    arity(1)?;
                    let body = parse_expr_in(&args[0], env, scope)?;
                    Ok(match head {
                        "nabla" => Expr::nabla(body),
                        "delta" => Expr::delta(body),
                        _ => {
                            if body.contains_prime() {
                                return Err(ParseError::NestedPrime { pos: *pos });
                            }
                            Expr::prime(body)
                        }
                    })
                }
                name => {
                    let kind = env.kind(name);
                    let parsed = args
                        .iter()
                        .map(|a| parse_expr_in(a, env, scope))
                        .collect::<Result<Vec<_>, _>>()?;
                    match kind {
                        Some(SymbolKind::Op(n)) => {
                            arity(n)?;
                            Ok(Expr::op(name, parsed))
                        }
                        Some(SymbolKind::Def(n)) => {
                            arity(n)?;
                            Ok(Expr::def(name, parsed))
                        }
                        Some(_) => Err(SyntaxError::new(
                            *pos,
                            format!("`{name}` is a variable, not an operator"),
                        )
                        .into()),
                        None => Err(ParseError::UnknownSymbol {
                            name: name.to_string(),
                            pos: *pos,
                        }),
                    }
                }
            }
        }
    }
}

fn resolve_name(name: &str, pos: Pos, env: &mut Env, scope: &[String]) -> Result<Expr, ParseError> {
    match name {
        "false" => return Ok(Expr::False),
        "true" => return Ok(Expr::truth()),
        _ => {}
    }
    if scope.iter().any(|b| b == name) {
        return Ok(Expr::rigid(name));
    }
    let arity_err = |expected| ParseError::Arity {
        name: name.to_string(),
        expected,
        found: 0,
        pos,
    };
    match env.kind(name) {
        Some(SymbolKind::Rigid) => Ok(Expr::rigid(name)),
        Some(SymbolKind::Flex) => Ok(Expr::flex(name)),
        Some(SymbolKind::Op(0)) => Ok(Expr::constant(name)),
        Some(SymbolKind::Def(0)) => Ok(Expr::def(name, Vec::new())),
        Some(SymbolKind::Op(n)) | Some(SymbolKind::Def(n)) => Err(arity_err(n)),
        None if is_numeral(name) => {
            env.declare_op(name, 0)
                .map_err(|source| ParseError::Env { pos, source })?;
            Ok(Expr::constant(name))
        }
        None if is_reserved(name) => Err(ParseError::Reserved {
            name: name.to_string(),
            pos,
        }),
        None => Err(ParseError::UnknownSymbol {
            name: name.to_string(),
            pos,
        }),
    }
}
