//! TPTP first-order form output, and an evaluator for it.
//!
//! FOF has no conditional terms, so a formula node in term position
//! becomes an application of an auxiliary function of its free bound
//! variables, defined by an axiom `def_k` to be `tt` where the formula
//! holds and `ff` elsewhere.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write;

use super::{lookup, unmangle, CheckError, BUILTIN, MANGLE};
use crate::coalesce::SymbolTable;
use crate::semantics::{FolStructure, Val};
use crate::syntax::subst::occurs_free;
use crate::syntax::Expr;

const AUX_PREFIX: &str = "ite#";

/// The quoted functor for a user or coalesced name.
pub fn functor(name: &str) -> String {
    let mut s = name.replace('\\', "\\\\").replace('\'', "\\'");
    if BUILTIN.contains(&name) {
        s.push(MANGLE);
    }
    format!("'{s}'")
}

struct Emitter {
    /// Variable names of the enclosing binders, outermost first.
    scope: Vec<String>,
    defs: Vec<String>,
    memo: HashMap<(String, Vec<String>), String>,
}

impl Emitter {
    fn var(&self, x: &str) -> Option<String> {
        self.scope.iter().rposition(|y| y == x).map(|i| format!("V{i}"))
    }

    fn term(&mut self, e: &Expr) -> String {
        match e {
            Expr::Rigid(n) => self.var(n).unwrap_or_else(|| functor(n)),
            Expr::Flex(n) => functor(n),
            Expr::Op(n, args) if args.is_empty() => functor(n),
            Expr::Op(n, args) => {
                let args: Vec<String> = args.iter().map(|a| self.term(a)).collect();
                format!("{}({})", functor(n), args.join(","))
            }
            Expr::False => "ff".into(),
            Expr::Eq(..) | Expr::Implies(..) | Expr::Forall(..) => {
                let phi = self.formula(e);
                // Innermost binding of each name, outermost first.
                let vars: Vec<String> = (0..self.scope.len())
                    .filter(|&i| {
                        let x = &self.scope[i];
                        self.scope[i + 1..].iter().all(|y| y != x) && occurs_free(x, e)
                    })
                    .map(|i| format!("V{i}"))
                    .collect();
                let key = (phi.clone(), vars.clone());
                let name = match self.memo.get(&key) {
                    Some(n) => n.clone(),
                    None => {
                        let k = self.defs.len();
                        let name = format!("'{AUX_PREFIX}{k}'");
                        let app = apply(&name, &vars);
                        let body = format!("((({phi}) => ({app} = tt)) & ((~ ({phi})) => ({app} = ff)))");
                        let def = if vars.is_empty() {
                            body
                        } else {
                            format!("(! [{}] : {body})", vars.join(","))
                        };
                        self.defs.push(format!("fof(def_{k}, axiom, {def})."));
                        self.memo.insert(key, name.clone());
                        name
                    }
                };
                apply(&name, &vars)
            }
            Expr::Def(..) | Expr::Nabla(_) | Expr::Prime(_) => panic!("not a first-order expression"),
        }
    }

    fn formula(&mut self, e: &Expr) -> String {
        match e {
            Expr::False => "$false".into(),
            Expr::Eq(a, b) => format!("({} = {})", self.term(a), self.term(b)),
            Expr::Implies(a, b) => format!("({} => {})", self.formula(a), self.formula(b)),
            Expr::Forall(x, body) => {
                let v = format!("V{}", self.scope.len());
                self.scope.push(x.clone());
                let b = self.formula(body);
                self.scope.pop();
                format!("(! [{v}] : {b})")
            }
            _ => format!("({} = tt)", self.term(e)),
        }
    }
}

fn apply(name: &str, args: &[String]) -> String {
    if args.is_empty() {
        name.to_string()
    } else {
        format!("{name}({})", args.join(","))
    }
}

/// Problem for the first-order sequent `hypotheses |- goal`: hypotheses are
/// axioms and the goal is the conjecture. Panics on modal input.
pub fn emit_tptp(hypotheses: &[Expr], goal: &Expr, table: Option<&SymbolTable>) -> String {
    let mut em = Emitter {
        scope: Vec::new(),
        defs: Vec::new(),
        memo: HashMap::new(),
    };
    let hyps: Vec<String> = hypotheses.iter().map(|h| em.formula(h)).collect();
    let g = em.formula(goal);
    let mut out = String::from("% the sequent is valid iff the conjecture is a theorem\n");
    if let Some(t) = table {
        for e in t.entries() {
            let _ = writeln!(out, "% {} := {}", e.name, e.key);
        }
    }
    out.push_str("fof(tt_ff, axiom, (tt != ff)).\n");
    for d in &em.defs {
        out.push_str(d);
        out.push('\n');
    }
    for (i, h) in hyps.iter().enumerate() {
        let _ = writeln!(out, "fof(hyp_{i}, axiom, {h}).");
    }
    let _ = writeln!(out, "fof(goal, conjecture, {g}).");
    out
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Word(String),
    Upper(String),
    Quoted(String),
    Dollar(String),
    Sym(&'static str),
}

fn lex(text: &str) -> Result<Vec<Tok>, CheckError> {
    let mut out = Vec::new();
    let mut it = text.chars().peekable();
    while let Some(&c) = it.peek() {
        if c.is_whitespace() {
            it.next();
        } else if c == '%' {
            while it.next().is_some_and(|c| c != '\n') {}
        } else if c == '\'' {
            it.next();
            let mut s = String::new();
            loop {
                match it.next() {
                    Some('\\') => s.push(it.next().ok_or_else(|| CheckError::Syntax("dangling escape".into()))?),
                    Some('\'') => break,
                    Some(c) => s.push(c),
                    None => return Err(CheckError::Syntax("unterminated quoted name".into())),
                }
            }
            out.push(Tok::Quoted(s));
        } else if c.is_alphanumeric() || c == '_' || c == '$' {
            let mut s = String::new();
            while let Some(&c) = it.peek() {
                if c.is_alphanumeric() || c == '_' || (c == '$' && s.is_empty()) {
                    s.push(c);
                    it.next();
                } else {
                    break;
                }
            }
            out.push(if let Some(rest) = s.strip_prefix('$') {
                Tok::Dollar(rest.to_string())
            } else if s.starts_with(|c: char| c.is_uppercase()) {
                Tok::Upper(s)
            } else {
                Tok::Word(s)
            });
        } else {
            let rest: String = it.clone().take(3).collect();
            let sym = ["<=>", "=>", "!=", "(", ")", "[", "]", ",", ".", ":", "!", "?", "~", "&", "|", "="]
                .into_iter()
                .find(|s| rest.starts_with(s))
                .ok_or_else(|| CheckError::Syntax(format!("unexpected character `{c}`")))?;
            for _ in 0..sym.chars().count() {
                it.next();
            }
            out.push(Tok::Sym(sym));
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Term {
    Var(String),
    App(String, Vec<Term>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Form {
    Const(bool),
    Eq(Term, Term, bool),
    Not(Box<Form>),
    Bin(&'static str, Box<Form>, Box<Form>),
    Quant(bool, Vec<String>, Box<Form>),
}

struct Parser {
    toks: Vec<Tok>,
    at: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at)
    }

    fn next(&mut self) -> Result<Tok, CheckError> {
        let t = self.toks.get(self.at).cloned().ok_or_else(|| CheckError::Syntax("unexpected end".into()))?;
        self.at += 1;
        Ok(t)
    }

    fn expect(&mut self, s: &'static str) -> Result<(), CheckError> {
        match self.next()? {
            Tok::Sym(t) if t == s => Ok(()),
            t => Err(CheckError::Syntax(format!("expected `{s}`, found {t:?}"))),
        }
    }

    fn eat(&mut self, s: &'static str) -> bool {
        if self.peek() == Some(&Tok::Sym(s)) {
            self.at += 1;
            true
        } else {
            false
        }
    }

    fn name(&mut self) -> Result<String, CheckError> {
        match self.next()? {
            Tok::Word(w) | Tok::Quoted(w) => Ok(w),
            t => Err(CheckError::Syntax(format!("expected a name, found {t:?}"))),
        }
    }

    fn annotated(&mut self) -> Result<(String, String, Form), CheckError> {
        match self.next()? {
            Tok::Word(w) if w == "fof" => {}
            t => return Err(CheckError::Unsupported(format!("{t:?}"))),
        }
        self.expect("(")?;
        let name = self.name()?;
        self.expect(",")?;
        let role = self.name()?;
        self.expect(",")?;
        let f = self.formula()?;
        self.expect(")")?;
        self.expect(".")?;
        Ok((name, role, f))
    }

    fn formula(&mut self) -> Result<Form, CheckError> {
        let lhs = self.unitary()?;
        for op in ["<=>", "=>", "&", "|"] {
            if self.eat(op) {
                let rhs = self.unitary()?;
                let mut acc = Form::Bin(op, Box::new(lhs), Box::new(rhs));
                while matches!(op, "&" | "|") && self.eat(op) {
                    acc = Form::Bin(op, Box::new(acc), Box::new(self.unitary()?));
                }
                return Ok(acc);
            }
        }
        Ok(lhs)
    }

    fn unitary(&mut self) -> Result<Form, CheckError> {
        match self.peek() {
            Some(Tok::Sym("(")) => {
                self.at += 1;
                let f = self.formula()?;
                self.expect(")")?;
                Ok(f)
            }
            Some(Tok::Sym("~")) => {
                self.at += 1;
                Ok(Form::Not(Box::new(self.unitary()?)))
            }
            Some(Tok::Sym(q @ ("!" | "?"))) => {
                let forall = *q == "!";
                self.at += 1;
                self.expect("[")?;
                let mut vars = Vec::new();
                loop {
                    match self.next()? {
                        Tok::Upper(v) => vars.push(v),
                        t => return Err(CheckError::Syntax(format!("expected a variable, found {t:?}"))),
                    }
                    if !self.eat(",") {
                        break;
                    }
                }
                self.expect("]")?;
                self.expect(":")?;
                Ok(Form::Quant(forall, vars, Box::new(self.unitary()?)))
            }
            Some(Tok::Dollar(d)) if d == "true" || d == "false" => {
                let b = d == "true";
                self.at += 1;
                Ok(Form::Const(b))
            }
            _ => {
                let a = self.term()?;
                let positive = if self.eat("=") {
                    true
                } else if self.eat("!=") {
                    false
                } else {
                    return Err(CheckError::Unsupported("predicate atom".into()));
                };
                Ok(Form::Eq(a, self.term()?, positive))
            }
        }
    }

    fn term(&mut self) -> Result<Term, CheckError> {
        match self.next()? {
            Tok::Upper(v) => Ok(Term::Var(v)),
            Tok::Word(f) | Tok::Quoted(f) => {
                let mut args = Vec::new();
                if self.eat("(") {
                    loop {
                        args.push(self.term()?);
                        if !self.eat(",") {
                            break;
                        }
                    }
                    self.expect(")")?;
                }
                Ok(Term::App(f, args))
            }
            t => Err(CheckError::Syntax(format!("expected a term, found {t:?}"))),
        }
    }
}

struct Problem<'a> {
    s: &'a FolStructure,
    aux: BTreeMap<String, (Vec<String>, Form)>,
}

impl Problem<'_> {
    fn term(&self, t: &Term, scope: &mut Vec<(String, Val)>) -> Result<Val, CheckError> {
        match t {
            Term::Var(v) => scope
                .iter()
                .rev()
                .find(|(n, _)| n == v)
                .map(|(_, d)| *d)
                .ok_or_else(|| CheckError::Syntax(format!("unbound variable {v}"))),
            Term::App(f, args) => {
                let args = args.iter().map(|a| self.term(a, scope)).collect::<Result<Vec<_>, _>>()?;
                match (f.as_str(), args.is_empty()) {
                    ("tt", true) => return Ok(self.s.tt),
                    ("ff", true) => return Ok(self.s.ff),
                    _ => {}
                }
                if let Some((params, phi)) = self.aux.get(f) {
                    if params.len() != args.len() {
                        return Err(CheckError::Unknown(f.clone()));
                    }
                    let mut inner: Vec<(String, Val)> = params.iter().cloned().zip(args).collect();
                    let holds = self.formula(phi, &mut inner)?;
                    return Ok(if holds { self.s.tt } else { self.s.ff });
                }
                lookup(self.s, unmangle(f), &args)
            }
        }
    }

    fn formula(&self, f: &Form, scope: &mut Vec<(String, Val)>) -> Result<bool, CheckError> {
        Ok(match f {
            Form::Const(b) => *b,
            Form::Eq(a, b, pos) => (self.term(a, scope)? == self.term(b, scope)?) == *pos,
            Form::Not(a) => !self.formula(a, scope)?,
            Form::Bin(op, a, b) => {
                let a = self.formula(a, scope)?;
                let b = self.formula(b, scope)?;
                match *op {
                    "&" => a && b,
                    "|" => a || b,
                    "=>" => !a || b,
                    _ => a == b,
                }
            }
            Form::Quant(forall, vars, body) => self.quant(*forall, vars, body, scope)?,
        })
    }

    fn quant(&self, forall: bool, vars: &[String], body: &Form, scope: &mut Vec<(String, Val)>) -> Result<bool, CheckError> {
        let Some((x, rest)) = vars.split_first() else {
            return self.formula(body, scope);
        };
        for d in 0..self.s.universe_size() {
            scope.push((x.clone(), Val(d as u16)));
            let r = self.quant(forall, rest, body, scope);
            scope.pop();
            if r? != forall {
                return Ok(!forall);
            }
        }
        Ok(forall)
    }
}

/// Recover `(params, phi)` from an auxiliary definition axiom.
fn aux_definition(f: &Form) -> Option<(String, Vec<String>, Form)> {
    let (params, body) = match f {
        Form::Quant(true, vs, b) => (vs.clone(), &**b),
        other => (Vec::new(), other),
    };
    let Form::Bin("&", pos, _) = body else { return None };
    let Form::Bin("=>", phi, head) = &**pos else { return None };
    let Form::Eq(Term::App(name, _), _, true) = &**head else { return None };
    Some((name.clone(), params, (**phi).clone()))
}

/// Whether `s` satisfies every axiom and falsifies the conjecture of an
/// emitted problem. Auxiliary functions are read off their definitions.
pub fn eval_tptp(problem: &str, s: &FolStructure) -> Result<bool, CheckError> {
    let mut p = Parser { toks: lex(problem)?, at: 0 };
    let mut units = Vec::new();
    while p.peek().is_some() {
        units.push(p.annotated()?);
    }
    let mut pr = Problem { s, aux: BTreeMap::new() };
    for (name, _, f) in &units {
        if name.starts_with("def_") {
            let (f, params, phi) = aux_definition(f).ok_or_else(|| CheckError::Syntax(format!("malformed {name}")))?;
            if !f.starts_with(AUX_PREFIX) {
                return Err(CheckError::Syntax(format!("{name} defines `{f}`")));
            }
            pr.aux.insert(f, (params, phi));
        }
    }
    for (_, role, f) in &units {
        let holds = pr.formula(f, &mut Vec::new())?;
        match role.as_str() {
            "axiom" | "hypothesis" if !holds => return Ok(false),
            "conjecture" if holds => return Ok(false),
            "axiom" | "hypothesis" | "conjecture" => {}
            other => return Err(CheckError::Unsupported(format!("role {other}"))),
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::semantics::model::standard_universe;
    use crate::semantics::{eval_fol, OpTable};
    use crate::syntax::{parse_expr, Env};

    #[test]
    fn functors_are_quoted() {
        assert_eq!(functor("x'"), "'x\\''");
        assert_eq!(functor("ff"), "'ff#'");
        assert_eq!(functor("0"), "'0'");
    }

    #[test]
    fn term_position_formulas_get_definitions() {
        let mut env = Env::new();
        env.declare_op("f", 1).unwrap();
        let g = parse_expr("(forall y (= (f (= y y)) y))", &mut env).unwrap();
        let out = emit_tptp(&[], &g, None);
        assert!(out.contains("fof(def_0, axiom, (! [V0] : ((((V0 = V0)) => ('ite#0'(V0) = tt))"), "{out}");
        assert!(out.contains("fof(goal, conjecture, (! [V0] : ('f'('ite#0'(V0)) = V0)))."), "{out}");
    }

    #[test]
    fn problem_agrees_with_evaluator() {
        let mut env = Env::new();
        env.declare_op("f", 1).unwrap();
        env.declare_flex("x").unwrap();
        let mut ops = BTreeMap::new();
        ops.insert("f".to_string(), OpTable {
            arity: 1,
            values: vec![Val(1), Val(0), Val(0)],
        });
        let s = FolStructure {
            universe: standard_universe(3),
            tt: Val(0),
            ff: Val(1),
            ops,
            xi: [("x".to_string(), Val(2))].into(),
        };
        for (h, g) in [
            ("(= (f x) x)", "(= x (f (f x)))"),
            ("(forall y (= (f (forall z (= y z))) y))", "(exists y (= (f y) y))"),
            ("(forall y (= (f (= y x)) (f (=> (= y y) false))))", "false"),
        ] {
            let h = parse_expr(h, &mut env).unwrap();
            let g = parse_expr(g, &mut env).unwrap();
            let text = emit_tptp(std::slice::from_ref(&h), &g, None);
            let direct = eval_fol(&s, &h).unwrap() == s.tt && eval_fol(&s, &g).unwrap() != s.tt;
            assert_eq!(eval_tptp(&text, &s).unwrap(), direct, "{text}");
        }
    }
}
