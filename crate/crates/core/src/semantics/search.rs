//! Bounded exhaustive countermodel search.
//!
//! Models are enumerated block by block: universe size from 2 upward, then
//! state count from 1 upward, and inside a block by a mixed-radix index over
//! the relations, operator tables and valuations. The lowest-index
//! countermodel is returned in both sequential and parallel mode.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use super::eval::{eval_expanded, eval_fol, EvalError};
use super::model::{standard_universe, FolStructure, KripkeModel, OpTable, Relation, Val};
use crate::par::{self, Exec};
use crate::syntax::{expand_definitions, free_rigid_vars, Expr, Obligation};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Bounds {
    pub max_universe: usize,
    pub max_states: usize,
    /// Cap on the number of candidate models examined.
    pub max_models: u64,
    /// Restrict the prime relation to total functions.
    pub functional_prime: bool,
    pub exec: Exec,
}

impl Default for Bounds {
    fn default() -> Bounds {
        Bounds {
            max_universe: 2,
            max_states: 2,
            max_models: 20_000_000,
            functional_prime: false,
            exec: Exec::default(),
        }
    }
}

impl Bounds {
    pub fn new(max_universe: usize, max_states: usize) -> Bounds {
        Bounds {
            max_universe,
            max_states,
            ..Bounds::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SearchError {
    #[error("search space of {required} models exceeds the cap of {limit}")]
    ResourceCap { required: u128, limit: u64 },
    #[error("evaluation failed: {0}")]
    Eval(#[from] EvalError),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Countermodel {
    pub model: KripkeModel,
    pub state: usize,
}

/// Symbols a model must interpret.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Signature {
    pub ops: BTreeMap<String, usize>,
    pub flex: BTreeSet<String>,
    pub rigid: BTreeSet<String>,
    pub uses_prime: bool,
}

impl Signature {
    /// Signature of definition-free expressions.
    pub fn of<'a>(exprs: impl IntoIterator<Item = &'a Expr>) -> Signature {
        let mut sig = Signature::default();
        for e in exprs {
            sig.rigid.extend(free_rigid_vars(e));
            e.walk(&mut |n| match n {
                Expr::Op(name, args) => {
                    sig.ops.insert(name.clone(), args.len());
                }
                Expr::Flex(v) => {
                    sig.flex.insert(v.clone());
                }
                Expr::Prime(_) => sig.uses_prime = true,
                _ => {}
            });
        }
        sig
    }
}

/// One block of the enumeration: a fixed universe size and state count.
struct Block<'a> {
    sig: &'a Signature,
    universe: usize,
    states: usize,
    prime_choices: u64,
    functional_prime: bool,
    /// Number of base-`universe` digits used by tables and valuations.
    value_digits: usize,
}

impl<'a> Block<'a> {
    fn new(sig: &'a Signature, universe: usize, states: usize, functional_prime: bool, modal: bool) -> Block<'a> {
        let value_digits = sig.ops.values().map(|&a| universe.pow(a as u32)).sum::<usize>()
            + sig.rigid.len()
            + if modal { sig.flex.len() * states } else { sig.flex.len() };
        let prime_choices = match (sig.uses_prime && modal, functional_prime) {
            (false, _) => 1,
            (true, true) => (states as u64).pow(states as u32),
            (true, false) => 1u64 << (states * states),
        };
        Block {
            sig,
            universe,
            states,
            prime_choices,
            functional_prime,
            value_digits,
        }
    }

    fn relation_choices(&self) -> u128 {
        1u128 << (self.states * self.states)
    }

    fn size(&self, modal: bool) -> Option<u128> {
        let values = (self.universe as u128).checked_pow(self.value_digits as u32)?;
        let rels = if modal { self.relation_choices() } else { 1 };
        values.checked_mul(rels)?.checked_mul(self.prime_choices as u128)
    }

    /// Split an index into base-`universe` digits (least significant first).
    fn value_digits_of(&self, mut idx: u64) -> Vec<Val> {
        let u = self.universe as u64;
        (0..self.value_digits)
            .map(|_| {
                let d = idx % u;
                idx /= u;
                Val(d as u16)
            })
            .collect()
    }

    fn tables(&self, digits: &mut impl Iterator<Item = Val>) -> BTreeMap<String, OpTable> {
        self.sig
            .ops
            .iter()
            .map(|(name, &arity)| {
                let rows = self.universe.pow(arity as u32);
                let values = digits.by_ref().take(rows).collect();
                (name.clone(), OpTable { arity, values })
            })
            .collect()
    }

    fn kripke(&self, idx: u64) -> KripkeModel {
        let value_space = (self.universe as u64).pow(self.value_digits as u32);
        let mut rest = idx;
        let values = rest % value_space;
        rest /= value_space;
        let prime_idx = rest % self.prime_choices;
        rest /= self.prime_choices;
        let r = Relation::from_bits(self.states, rest);
        let prime_r = self.sig.uses_prime.then(|| {
            if self.functional_prime {
                let mut p = prime_idx;
                let succ: Vec<usize> = (0..self.states)
                    .map(|_| {
                        let s = (p % self.states as u64) as usize;
                        p /= self.states as u64;
                        s
                    })
                    .collect();
                Relation::from_function(&succ)
            } else {
                Relation::from_bits(self.states, prime_idx)
            }
        });
        let mut digits = self.value_digits_of(values).into_iter();
        let ops = self.tables(&mut digits);
        let xi = self
            .sig
            .rigid
            .iter()
            .map(|x| (x.clone(), digits.next().unwrap()))
            .collect();
        let zeta = self
            .sig
            .flex
            .iter()
            .map(|v| (v.clone(), digits.by_ref().take(self.states).collect()))
            .collect();
        KripkeModel {
            universe: standard_universe(self.universe),
            tt: Val(0),
            ff: Val(1),
            ops,
            xi,
            states: (0..self.states).map(|i| format!("s{i}")).collect(),
            r,
            zeta,
            prime_r,
        }
    }

    fn fol(&self, idx: u64) -> FolStructure {
        let mut digits = self.value_digits_of(idx).into_iter();
        let ops = self.tables(&mut digits);
        let xi = self
            .sig
            .rigid
            .iter()
            .chain(self.sig.flex.iter())
            .map(|x| (x.clone(), digits.next().unwrap()))
            .collect();
        FolStructure {
            universe: standard_universe(self.universe),
            tt: Val(0),
            ff: Val(1),
            ops,
            xi,
        }
    }
}

fn plan<'a>(
    sig: &'a Signature,
    bounds: &Bounds,
    modal: bool,
) -> Result<Vec<(Block<'a>, u64)>, SearchError> {
    let max_u = bounds.max_universe.max(2);
    let max_s = if modal { bounds.max_states.max(1) } else { 1 };
    let mut blocks = Vec::new();
    let mut total: u128 = 0;
    for u in 2..=max_u {
        for n in 1..=max_s {
            let block = Block::new(sig, u, n, bounds.functional_prime, modal);
            let size = block.size(modal).unwrap_or(u128::MAX);
            total = total.saturating_add(size);
            if total > bounds.max_models as u128 {
                return Err(SearchError::ResourceCap {
                    required: total,
                    limit: bounds.max_models,
                });
            }
            blocks.push((block, size as u64));
        }
    }
    Ok(blocks)
}

/// Search for a Kripke model in which every hypothesis holds at every state
/// and the goal fails at some state. `None` means no countermodel exists
/// within the bounds.
pub fn find_countermodel(ob: &Obligation, bounds: &Bounds) -> Result<Option<Countermodel>, SearchError> {
    let hyps: Vec<Expr> = ob.hypotheses.iter().map(|h| expand_definitions(h, &ob.env)).collect();
    let goal = expand_definitions(&ob.goal, &ob.env);
    find_countermodel_expanded(&hyps, &goal, bounds)
}

pub fn find_countermodel_expanded(
    hyps: &[Expr],
    goal: &Expr,
    bounds: &Bounds,
) -> Result<Option<Countermodel>, SearchError> {
    let sig = Signature::of(hyps.iter().chain(std::iter::once(goal)));
    for (block, size) in plan(&sig, bounds, true)? {
        let found = par::find_first(0, size, bounds.exec, |idx| {
            let m = block.kripke(idx);
            check_kripke(&m, hyps, goal).transpose()
        });
        if let Some((idx, res)) = found {
            let state = res?;
            return Ok(Some(Countermodel {
                model: block.kripke(idx),
                state,
            }));
        }
    }
    Ok(None)
}

/// `Some(w)` when `m` is a countermodel falsifying the goal at `w`.
fn check_kripke(m: &KripkeModel, hyps: &[Expr], goal: &Expr) -> Result<Option<usize>, EvalError> {
    for h in hyps {
        for w in 0..m.state_count() {
            if eval_expanded(m, w, h)? != m.tt {
                return Ok(None);
            }
        }
    }
    for w in 0..m.state_count() {
        if eval_expanded(m, w, goal)? != m.tt {
            return Ok(Some(w));
        }
    }
    Ok(None)
}

/// Search for a first-order structure satisfying every hypothesis and
/// falsifying the goal. Flexible variables are ordinary variables here.
pub fn find_fol_countermodel(
    hyps: &[Expr],
    goal: &Expr,
    bounds: &Bounds,
) -> Result<Option<FolStructure>, SearchError> {
    let sig = Signature::of(hyps.iter().chain(std::iter::once(goal)));
    for (block, size) in plan(&sig, bounds, false)? {
        let found = par::find_first(0, size, bounds.exec, |idx| {
            let s = block.fol(idx);
            let check = || -> Result<bool, EvalError> {
                for h in hyps {
                    if eval_fol(&s, h)? != s.tt {
                        return Ok(false);
                    }
                }
                Ok(eval_fol(&s, goal)? != s.tt)
            };
            match check() {
                Ok(true) => Some(Ok(())),
                Ok(false) => None,
                Err(e) => Some(Err(e)),
            }
        });
        if let Some((idx, res)) = found {
            res?;
            return Ok(Some(block.fol(idx)));
        }
    }
    Ok(None)
}

/// Every Kripke model within the bounds, in enumeration order.
pub fn enumerate_models(sig: &Signature, bounds: &Bounds) -> Result<Vec<KripkeModel>, SearchError> {
    let mut out = Vec::new();
    for (block, size) in plan(sig, bounds, true)? {
        out.extend((0..size).map(|i| block.kripke(i)));
    }
    Ok(out)
}
