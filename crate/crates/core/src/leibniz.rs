//! Leibniz argument positions of defined operators.
//!
//! Position `i` of `d(x1..xn) == body` is Leibniz when `xi` never occurs
//! inside a non-Leibniz argument position in `body`. The only non-Leibniz
//! positions of the core language are the operands of `nabla` and `prime`;
//! defined operators contribute their own table entries. Definitions are
//! processed in declaration order so every nested operator already has an
//! entry when it is reached.

use std::collections::BTreeMap;
use std::fmt;

use crate::syntax::{is_rigid, Env, Expr};

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LeibnizTable {
    positions: BTreeMap<String, Vec<bool>>,
}

impl LeibnizTable {
    /// Positions of a defined operator, in parameter order.
    pub fn get(&self, def: &str) -> Option<&[bool]> {
        self.positions.get(def).map(Vec::as_slice)
    }

    /// Whether argument `i` of `op` is Leibniz. Primitive operators and
    /// unknown symbols are Leibniz everywhere.
    pub fn is_leibniz(&self, op: &str, i: usize) -> bool {
        self.positions
            .get(op)
            .and_then(|v| v.get(i).copied())
            .unwrap_or(true)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &[bool])> {
        self.positions.iter().map(|(k, v)| (k.as_str(), v.as_slice()))
    }
}

/// Compute the table for every definition of `env`.
pub fn compute_leibniz(env: &Env) -> LeibnizTable {
    let mut table = LeibnizTable::default();
    for def in env.definitions() {
        let positions = def
            .params
            .iter()
            .map(|p| !under_non_leibniz(&def.body, p, false, &table))
            .collect();
        table.positions.insert(def.name.clone(), positions);
    }
    table
}

/// Does a free occurrence of `x` in `e` sit inside a non-Leibniz position?
fn under_non_leibniz(e: &Expr, x: &str, under: bool, table: &LeibnizTable) -> bool {
    match e {
        Expr::Rigid(y) => under && y == x,
        Expr::Forall(y, body) => y != x && under_non_leibniz(body, x, under, table),
        Expr::Nabla(body) | Expr::Prime(body) => under_non_leibniz(body, x, true, table),
        Expr::Def(d, args) => args
            .iter()
            .enumerate()
            .any(|(j, a)| under_non_leibniz(a, x, under || !table.is_leibniz(d, j), table)),
        _ => e
            .children()
            .into_iter()
            .any(|c| under_non_leibniz(c, x, under, table)),
    }
}

/// One entry of an epsilon vector.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Epsilon {
    /// The argument may be abstracted: its position is Leibniz or it is rigid.
    Star,
    /// The argument must stay part of the coalesced symbol.
    Arg(Expr),
}

impl fmt::Display for Epsilon {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Epsilon::Star => f.write_str("*"),
            Epsilon::Arg(e) => f.write_str(&crate::syntax::print::pretty(e)),
        }
    }
}

/// Classify the arguments of an application of defined operator `d`.
pub fn classify_args(d: &str, args: &[Expr], table: &LeibnizTable, env: &Env) -> Vec<Epsilon> {
    args.iter()
        .enumerate()
        .map(|(i, a)| {
            if table.is_leibniz(d, i) || is_rigid(a, env) {
                Epsilon::Star
            } else {
                Epsilon::Arg(a.clone())
            }
        })
        .collect()
}

/// `d: L N L` per definition, as printed by the `leibniz` subcommand.
pub fn render_table(env: &Env, table: &LeibnizTable) -> String {
    let mut out = String::new();
    for def in env.definitions() {
        out.push_str(&def.name);
        out.push(':');
        for &l in table.get(&def.name).unwrap_or(&[]) {
            out.push_str(if l { " L" } else { " N" });
        }
        out.push('\n');
    }
    out
}
