//! Declarations, operator definitions and obligations.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use super::expr::Expr;
use super::subst;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SymbolKind {
    Op(usize),
    Def(usize),
    Rigid,
    Flex,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EnvError {
    #[error("name `{0}` is already declared")]
    Duplicate(String),
    #[error("parameters of `{0}` are not pairwise distinct")]
    RepeatedParam(String),
    #[error("parameter `{param}` of `{def}` clashes with a declared symbol")]
    ParamClash { def: String, param: String },
    #[error("body of `{def}` has free rigid variable(s) {vars:?} outside its parameters")]
    StrayFreeVars { def: String, vars: Vec<String> },
    #[error("body of `{0}` nests prime inside prime")]
    NestedPrime(String),
}

/// `name(params) == body`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Definition {
    pub name: String,
    pub params: Vec<String>,
    pub body: Expr,
}

impl Definition {
    pub fn arity(&self) -> usize {
        self.params.len()
    }
}

/// Declared rigid/flexible variables, primitive operators with arities,
/// and an ordered, acyclic list of definitions.
///
/// Definitions may only mention symbols declared before them, so the
/// declaration order is a topological order.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Env {
    ops: Vec<(String, usize)>,
    defs: Vec<Definition>,
    /// Full expansion of each definition body, in the same order as `defs`.
    expanded: Vec<Expr>,
    rigid: Vec<String>,
    flex: Vec<String>,
    kinds: BTreeMap<String, SymbolKind>,
}

impl Env {
    pub fn new() -> Env {
        Env::default()
    }

    fn claim(&mut self, name: &str, kind: SymbolKind) -> Result<(), EnvError> {
        if self.kinds.contains_key(name) {
            return Err(EnvError::Duplicate(name.to_string()));
        }
        self.kinds.insert(name.to_string(), kind);
        Ok(())
    }

    pub fn declare_op(&mut self, name: &str, arity: usize) -> Result<(), EnvError> {
        self.claim(name, SymbolKind::Op(arity))?;
        self.ops.push((name.to_string(), arity));
        Ok(())
    }

    pub fn declare_rigid(&mut self, name: &str) -> Result<(), EnvError> {
        self.claim(name, SymbolKind::Rigid)?;
        self.rigid.push(name.to_string());
        Ok(())
    }

    pub fn declare_flex(&mut self, name: &str) -> Result<(), EnvError> {
        self.claim(name, SymbolKind::Flex)?;
        self.flex.push(name.to_string());
        Ok(())
    }

    /// Add a definition. The body must already be resolved against this
    /// environment (every `Def` node names an earlier definition).
    pub fn define(&mut self, name: &str, params: Vec<String>, body: Expr) -> Result<(), EnvError> {
        if self.kinds.contains_key(name) {
            return Err(EnvError::Duplicate(name.to_string()));
        }
        let distinct: BTreeSet<&String> = params.iter().collect();
        if distinct.len() != params.len() {
            return Err(EnvError::RepeatedParam(name.to_string()));
        }
        for p in &params {
            match self.kinds.get(p) {
                None | Some(SymbolKind::Rigid) => {}
                Some(_) => {
                    return Err(EnvError::ParamClash {
                        def: name.to_string(),
                        param: p.clone(),
                    })
                }
            }
        }
        let stray: Vec<String> = subst::free_rigid_vars(&body)
            .into_iter()
            .filter(|v| !params.contains(v))
            .collect();
        if !stray.is_empty() {
            return Err(EnvError::StrayFreeVars {
                def: name.to_string(),
                vars: stray,
            });
        }
        if body.has_nested_prime() {
            return Err(EnvError::NestedPrime(name.to_string()));
        }
        let expanded = subst::expand_with(&body, self);
        self.kinds.insert(name.to_string(), SymbolKind::Def(params.len()));
        self.defs.push(Definition {
            name: name.to_string(),
            params,
            body,
        });
        self.expanded.push(expanded);
        Ok(())
    }

    pub fn kind(&self, name: &str) -> Option<SymbolKind> {
        self.kinds.get(name).copied()
    }

    pub fn op_arity(&self, name: &str) -> Option<usize> {
        match self.kind(name) {
            Some(SymbolKind::Op(n)) => Some(n),
            _ => None,
        }
    }

    pub fn ops(&self) -> &[(String, usize)] {
        &self.ops
    }

    pub fn definitions(&self) -> &[Definition] {
        &self.defs
    }

    pub fn definition(&self, name: &str) -> Option<&Definition> {
        self.def_index(name).map(|i| &self.defs[i])
    }

    pub fn def_index(&self, name: &str) -> Option<usize> {
        self.defs.iter().position(|d| d.name == name)
    }

    /// The definition body with every nested definition expanded.
    pub fn expanded_body(&self, name: &str) -> Option<&Expr> {
        self.def_index(name).map(|i| &self.expanded[i])
    }

    pub fn rigid_vars(&self) -> &[String] {
        &self.rigid
    }

    pub fn flex_vars(&self) -> &[String] {
        &self.flex
    }

    pub fn is_flex(&self, name: &str) -> bool {
        matches!(self.kind(name), Some(SymbolKind::Flex))
    }

    /// Every declared name, plus definition parameters.
    pub fn all_names(&self) -> BTreeSet<String> {
        let mut out: BTreeSet<String> = self.kinds.keys().cloned().collect();
        for d in &self.defs {
            out.extend(d.params.iter().cloned());
            d.body.names(&mut out);
        }
        out
    }
}

/// Which translation an obligation is meant for.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Mode {
    #[default]
    Fol,
    Ml,
    Action,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Fol => "fol",
            Mode::Ml => "ml",
            Mode::Action => "action",
        })
    }
}

/// A sequent `hypotheses |= goal` under global consequence.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Obligation {
    pub hypotheses: Vec<Expr>,
    pub goal: Expr,
    pub env: Env,
    pub mode: Mode,
}

impl Obligation {
    pub fn new(env: Env, hypotheses: Vec<Expr>, goal: Expr) -> Obligation {
        Obligation {
            hypotheses,
            goal,
            env,
            mode: Mode::Fol,
        }
    }

    /// Hypotheses followed by the goal.
    pub fn formulas(&self) -> impl Iterator<Item = &Expr> {
        self.hypotheses.iter().chain(std::iter::once(&self.goal))
    }
}
