//! The s-expression model file format.
//!
//! ```text
//! (model
//!   (universe tt ff a)
//!   (tt tt)
//!   (ff ff)
//!   (op f (row tt a) (row ff ff) (row a tt))
//!   (xi (x a))
//!   (states s0 s1)
//!   (R (s0 s1))
//!   (zeta (v s0 a) (v s1 tt))
//!   (primeR (s0 s1) (s1 s1)))
//! ```
//!
//! A row lists the arguments followed by the result. [`print_model`] writes
//! every section in this fixed order, so printing a parsed printout
//! reproduces it byte for byte.

use std::collections::BTreeMap;
use std::fmt::Write;

use thiserror::Error;

use super::model::{decode_row, KripkeModel, ModelError, OpTable, Relation, Val};
use crate::syntax::sexp::{self, Pos, Sexp, SyntaxError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelFileError {
    #[error("{0}")]
    Syntax(#[from] SyntaxError),
    #[error("{0}")]
    Invalid(#[from] ModelError),
}

fn err(pos: Pos, msg: impl Into<String>) -> ModelFileError {
    SyntaxError::new(pos, msg).into()
}

pub fn print_model(m: &KripkeModel) -> String {
    let name = |v: Val| m.universe[v.index()].as_str();
    let u = m.universe_size();
    let mut out = String::from("(model\n");
    let _ = writeln!(out, "  (universe {})", m.universe.join(" "));
    let _ = writeln!(out, "  (tt {})", name(m.tt));
    let _ = writeln!(out, "  (ff {})", name(m.ff));
    for (op, t) in &m.ops {
        let _ = write!(out, "  (op {op}");
        let mut args = vec![Val(0); t.arity];
        for (row, v) in t.values.iter().enumerate() {
            decode_row(row, u, &mut args);
            out.push_str(" (row");
            for a in &args {
                let _ = write!(out, " {}", name(*a));
            }
            let _ = write!(out, " {})", name(*v));
        }
        out.push_str(")\n");
    }
    out.push_str("  (xi");
    for (x, v) in &m.xi {
        let _ = write!(out, " ({x} {})", name(*v));
    }
    out.push_str(")\n");
    let _ = writeln!(out, "  (states {})", m.states.join(" "));
    let write_rel = |out: &mut String, label: &str, r: &Relation| {
        let _ = write!(out, "  ({label}");
        for (a, b) in r.pairs() {
            let _ = write!(out, " ({} {})", m.states[a], m.states[b]);
        }
        out.push(')');
    };
    write_rel(&mut out, "R", &m.r);
    out.push('\n');
    out.push_str("  (zeta");
    for (v, vals) in &m.zeta {
        for (w, val) in vals.iter().enumerate() {
            let _ = write!(out, " ({v} {} {})", m.states[w], name(*val));
        }
    }
    out.push(')');
    if let Some(p) = &m.prime_r {
        out.push('\n');
        write_rel(&mut out, "primeR", p);
    }
    out.push_str(")\n");
    out
}

pub fn parse_model(text: &str) -> Result<KripkeModel, ModelFileError> {
    let forms = sexp::parse_all(text)?;
    let [form] = forms.as_slice() else {
        return Err(err(Pos { line: 1, col: 1 }, "expected a single (model ...) form"));
    };
    if form.head() != Some("model") {
        return Err(err(form.pos(), "expected (model ...)"));
    }
    let sections = &form.list().unwrap()[1..];
    let section = |key: &str| sections.iter().find(|s| s.head() == Some(key));
    let atoms = |s: &Sexp| -> Result<Vec<String>, ModelFileError> {
        s.list().unwrap()[1..]
            .iter()
            .map(|a| Ok(a.expect_atom("a name")?.to_string()))
            .collect()
    };
    for s in sections {
        let known = ["universe", "tt", "ff", "op", "xi", "states", "R", "zeta", "primeR"];
        match s.head() {
            Some(h) if known.contains(&h) => {}
            _ => return Err(err(s.pos(), "unknown model section")),
        }
    }

    let uni_sec = section("universe").ok_or_else(|| err(form.pos(), "missing (universe ...)"))?;
    let universe = atoms(uni_sec)?;
    let elem = |a: &Sexp| -> Result<Val, ModelFileError> {
        let n = a.expect_atom("a universe element")?;
        universe
            .iter()
            .position(|u| u == n)
            .map(|i| Val(i as u16))
            .ok_or_else(|| err(a.pos(), format!("`{n}` is not in the universe")))
    };
    let single = |key: &str| -> Result<Val, ModelFileError> {
        let s = section(key).ok_or_else(|| err(form.pos(), format!("missing ({key} ...)")))?;
        match s.list().unwrap() {
            [_, v] => elem(v),
            _ => Err(err(s.pos(), format!("({key} ...) takes one element"))),
        }
    };
    let tt = single("tt")?;
    let ff = single("ff")?;
    let u = universe.len();

    let mut ops = BTreeMap::new();
    for s in sections.iter().filter(|s| s.head() == Some("op")) {
        let items = s.list().unwrap();
        let name = items
            .get(1)
            .ok_or_else(|| err(s.pos(), "(op ...) needs a name"))?
            .expect_atom("an operator name")?;
        let rows = &items[2..];
        let first = rows.first().ok_or_else(|| err(s.pos(), "operator table has no rows"))?;
        let arity = first.expect_list("a row")?.len().saturating_sub(2);
        let mut values: Vec<Option<Val>> = vec![None; u.pow(arity as u32)];
        for row in rows {
            let cells = row.expect_list("a row")?;
            if row.head() != Some("row") || cells.len() != arity + 2 {
                return Err(err(row.pos(), format!("expected (row a1 .. a{arity} result)")));
            }
            let args = cells[1..=arity].iter().map(elem).collect::<Result<Vec<_>, _>>()?;
            let idx = args.iter().fold(0, |acc, a| acc * u + a.index());
            if values[idx].is_some() {
                return Err(err(row.pos(), "duplicate row"));
            }
            values[idx] = Some(elem(&cells[arity + 1])?);
        }
        let values = values
            .into_iter()
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| ModelError::PartialTable(name.to_string()))?;
        if ops.insert(name.to_string(), OpTable { arity, values }).is_some() {
            return Err(err(s.pos(), format!("duplicate table for `{name}`")));
        }
    }

    let mut xi = BTreeMap::new();
    if let Some(s) = section("xi") {
        for b in &s.list().unwrap()[1..] {
            match b.expect_list("(x value)")? {
                [x, v] => {
                    xi.insert(x.expect_atom("a variable")?.to_string(), elem(v)?);
                }
                _ => return Err(err(b.pos(), "expected (x value)")),
            }
        }
    }

    let st_sec = section("states").ok_or_else(|| err(form.pos(), "missing (states ...)"))?;
    let states = atoms(st_sec)?;
    let n = states.len();
    let state = |a: &Sexp| -> Result<usize, ModelFileError> {
        let s = a.expect_atom("a state")?;
        states
            .iter()
            .position(|x| x == s)
            .ok_or_else(|| err(a.pos(), format!("unknown state `{s}`")))
    };
    let relation = |key: &str| -> Result<Option<Relation>, ModelFileError> {
        let Some(s) = section(key) else {
            return Ok(None);
        };
        let mut r = Relation::empty(n);
        for p in &s.list().unwrap()[1..] {
            match p.expect_list("a state pair")? {
                [a, b] => r.insert(state(a)?, state(b)?),
                _ => return Err(err(p.pos(), "expected (s t)")),
            }
        }
        Ok(Some(r))
    };
    let r = relation("R")?.unwrap_or_else(|| Relation::empty(n));
    let prime_r = relation("primeR")?;

    let mut partial: BTreeMap<String, Vec<Option<Val>>> = BTreeMap::new();
    if let Some(s) = section("zeta") {
        for t in &s.list().unwrap()[1..] {
            match t.expect_list("(v state value)")? {
                [v, w, val] => {
                    let slot = partial
                        .entry(v.expect_atom("a flexible variable")?.to_string())
                        .or_insert_with(|| vec![None; n]);
                    slot[state(w)?] = Some(elem(val)?);
                }
                _ => return Err(err(t.pos(), "expected (v state value)")),
            }
        }
    }
    let zeta = partial
        .into_iter()
        .map(|(v, vals)| {
            vals.into_iter()
                .collect::<Option<Vec<_>>>()
                .map(|vals| (v.clone(), vals))
                .ok_or(ModelError::PartialValuation(v))
        })
        .collect::<Result<BTreeMap<_, _>, _>>()?;

    let m = KripkeModel {
        universe,
        tt,
        ff,
        ops,
        xi,
        states,
        r,
        zeta,
        prime_r,
    };
    m.validate()?;
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = "(model
  (universe tt ff a)
  (tt tt)
  (ff ff)
  (op 0 (row a))
  (op f (row tt ff) (row ff a) (row a tt))
  (xi (x a))
  (states s0 s1)
  (R (s0 s1))
  (zeta (v s0 a) (v s1 tt))
  (primeR (s0 s1) (s1 s1)))
";

    #[test]
    fn sample_round_trips_bit_exact() {
        let m = parse_model(SAMPLE).unwrap();
        assert_eq!(m.ops["f"].apply(&[Val(2)], 3), Val(0));
        assert_eq!(m.zeta["v"], vec![Val(2), Val(0)]);
        assert!(m.prime_r.as_ref().unwrap().is_functional());
        assert_eq!(print_model(&m), SAMPLE);
    }

    #[test]
    fn rejects_bad_models() {
        let same = SAMPLE.replace("(ff ff)", "(ff tt)");
        assert!(matches!(parse_model(&same), Err(ModelFileError::Invalid(ModelError::BadTruthValues))));
        let partial = SAMPLE.replace(" (row a tt)", "");
        assert!(matches!(parse_model(&partial), Err(ModelFileError::Invalid(ModelError::PartialTable(_)))));
        let unknown = SAMPLE.replace("(s0 s1))\n  (zeta", "(s0 s9))\n  (zeta");
        assert!(matches!(parse_model(&unknown), Err(ModelFileError::Syntax(_))));
        let no_states = SAMPLE.replace("(states s0 s1)", "(states)");
        assert!(parse_model(&no_states).is_err());
    }
}
