//! Exhaustive countermodel search over small propositional Kripke models.
//!
//! A [`Family`] is a hash-consed set of formulas. For every model up to the
//! state bound each node gets a bit mask of the states where it holds,
//! computed from its children, so one pass over the models answers every
//! sequent over the family at once.

use std::collections::{BTreeMap, HashMap};

use super::{Frame, Frames};
use crate::par::{self, Exec};
use crate::semantics::{PropModel, Relation};
use crate::syntax::{Expr, Modality};

/// States per model are capped so a mask fits in a byte and relations in
/// 64 bits.
pub const MAX_STATES: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
enum FNode {
    Atom(usize),
    False,
    Imp(usize, usize),
    Box(Modality, usize),
}

#[derive(Clone, Debug, Default)]
pub struct Family {
    nodes: Vec<FNode>,
    index: HashMap<FNode, usize>,
    atoms: Vec<String>,
    uses_prime: bool,
}

impl Family {
    pub fn new() -> Family {
        Family::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn atoms(&self) -> &[String] {
        &self.atoms
    }

    fn intern(&mut self, n: FNode) -> usize {
        if let Some(&i) = self.index.get(&n) {
            return i;
        }
        self.nodes.push(n);
        self.index.insert(n, self.nodes.len() - 1);
        self.nodes.len() - 1
    }

    /// Add a formula of the propositional modal fragment; returns its node.
    /// Panics on anything else.
    pub fn add(&mut self, e: &Expr) -> usize {
        let n = match e {
            Expr::Flex(a) => {
                let i = match self.atoms.iter().position(|x| x == a) {
                    Some(i) => i,
                    None => {
                        self.atoms.push(a.clone());
                        self.atoms.len() - 1
                    }
                };
                FNode::Atom(i)
            }
            Expr::False => FNode::False,
            Expr::Implies(a, b) => FNode::Imp(self.add(a), self.add(b)),
            Expr::Nabla(b) => FNode::Box(Modality::Nabla, self.add(b)),
            Expr::Prime(b) => {
                self.uses_prime = true;
                FNode::Box(Modality::Prime, self.add(b))
            }
            other => panic!("not a propositional modal formula: {other:?}"),
        };
        self.intern(n)
    }

    /// State masks of every node in one model.
    fn masks(&self, n: usize, succ: &[[u8; MAX_STATES]; 2], val: &[u8], out: &mut Vec<u8>) {
        let full = ((1u16 << n) - 1) as u8;
        out.clear();
        for node in &self.nodes {
            let m = match *node {
                FNode::Atom(a) => val[a],
                FNode::False => 0,
                FNode::Imp(a, b) => (!out[a] | out[b]) & full,
                FNode::Box(md, a) => {
                    let s = &succ[md as usize];
                    let inner = out[a];
                    (0..n).filter(|&w| s[w] & !inner == 0).fold(0, |acc, w| acc | 1 << w)
                }
            };
            out.push(m);
        }
    }
}

/// A sequent over family nodes: hypotheses and goal.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NodeSequent {
    pub hypotheses: Vec<usize>,
    pub goal: usize,
}

struct Space {
    rels: [Vec<u64>; 2],
    vals: u64,
}

fn relations(n: usize, frame: Frame, used: bool) -> Vec<u64> {
    if !used {
        return vec![0];
    }
    (0..1u64 << (n * n))
        .filter(|&bits| frame.admits(&Relation::from_bits(n, bits)))
        .collect()
}

fn succ_masks(n: usize, bits: u64) -> [u8; MAX_STATES] {
    let mut s = [0u8; MAX_STATES];
    for (i, row) in s.iter_mut().enumerate().take(n) {
        *row = ((bits >> (i * n)) & ((1 << n) - 1)) as u8;
    }
    s
}

fn decode_vals(n: usize, atoms: usize, mut idx: u64, out: &mut Vec<u8>) {
    out.clear();
    for _ in 0..atoms {
        out.push((idx & ((1 << n) - 1)) as u8);
        idx >>= n;
    }
}

/// For each sequent, whether some model with at most `max_states` states
/// (in the frame classes) refutes it.
pub fn refutable(family: &Family, sequents: &[NodeSequent], max_states: usize, frames: Frames, exec: Exec) -> Vec<bool> {
    assert!(max_states <= 4, "state bound too large for exhaustive search");
    let mut found = vec![false; sequents.len()];
    for n in 1..=max_states {
        let space = Space {
            rels: [
                relations(n, frames.nabla, true),
                relations(n, frames.prime, family.uses_prime),
            ],
            vals: 1u64 << (n * family.atoms.len()),
        };
        let pairs = (space.rels[0].len() * space.rels[1].len()) as u64;
        let parts = par::map_indices(pairs, exec, |k| {
            let mut local = vec![false; sequents.len()];
            let r0 = space.rels[0][(k as usize) % space.rels[0].len()];
            let r1 = space.rels[1][(k as usize) / space.rels[0].len()];
            let succ = [succ_masks(n, r0), succ_masks(n, r1)];
            let full = ((1u16 << n) - 1) as u8;
            let (mut vals, mut masks) = (Vec::new(), Vec::new());
            for v in 0..space.vals {
                decode_vals(n, family.atoms.len(), v, &mut vals);
                family.masks(n, &succ, &vals, &mut masks);
                for (i, s) in sequents.iter().enumerate() {
                    if !local[i] && masks[s.goal] != full && s.hypotheses.iter().all(|&h| masks[h] == full) {
                        local[i] = true;
                    }
                }
            }
            local
        });
        for part in parts {
            for (f, p) in found.iter_mut().zip(part) {
                *f |= p;
            }
        }
    }
    found
}

/// The first countermodel of one sequent in enumeration order.
pub fn find_countermodel(
    hypotheses: &[Expr],
    goal: &Expr,
    max_states: usize,
    frames: Frames,
) -> Option<(PropModel, usize)> {
    let mut fam = Family::new();
    let hyps: Vec<usize> = hypotheses.iter().map(|h| fam.add(h)).collect();
    let g = fam.add(goal);
    for n in 1..=max_states {
        let r0s = relations(n, frames.nabla, true);
        let r1s = relations(n, frames.prime, fam.uses_prime);
        let full = ((1u16 << n) - 1) as u8;
        let (mut vals, mut masks) = (Vec::new(), Vec::new());
        for &r1 in &r1s {
            for &r0 in &r0s {
                let succ = [succ_masks(n, r0), succ_masks(n, r1)];
                for v in 0..1u64 << (n * fam.atoms.len()) {
                    decode_vals(n, fam.atoms.len(), v, &mut vals);
                    fam.masks(n, &succ, &vals, &mut masks);
                    if masks[g] == full || !hyps.iter().all(|&h| masks[h] == full) {
                        continue;
                    }
                    let state = (0..n).find(|&w| masks[g] >> w & 1 == 0).unwrap();
                    let zeta: BTreeMap<String, Vec<bool>> = fam
                        .atoms
                        .iter()
                        .zip(&vals)
                        .map(|(a, &m)| (a.clone(), (0..n).map(|w| m >> w & 1 == 1).collect()))
                        .collect();
                    let model = PropModel {
                        r: Relation::from_bits(n, r0),
                        prime_r: fam.uses_prime.then(|| Relation::from_bits(n, r1)),
                        zeta,
                    };
                    return Some((model, state));
                }
            }
        }
    }
    None
}

/// Every formula over `atoms` built from atoms, `false`, implication and
/// `nabla`, with at most `max_size` nodes and modal depth at most
/// `max_depth`, smallest first.
pub fn formulas_up_to(atoms: &[&str], max_size: usize, max_depth: usize) -> Vec<Expr> {
    // by_size[s] holds the formulas with exactly s nodes.
    let mut by_size: Vec<Vec<Expr>> = vec![Vec::new(); max_size + 1];
    if max_size >= 1 {
        by_size[1] = atoms.iter().map(|a| Expr::flex(*a)).chain([Expr::False]).collect();
    }
    for s in 2..=max_size {
        let mut here: Vec<Expr> = by_size[s - 1].iter().map(|e| Expr::nabla(e.clone())).collect();
        for l in 1..s - 1 {
            let r = s - 1 - l;
            for a in &by_size[l] {
                for b in &by_size[r] {
                    here.push(Expr::implies(a.clone(), b.clone()));
                }
            }
        }
        here.retain(|e| e.modal_depth() <= max_depth);
        by_size[s] = here;
    }
    by_size.into_iter().flatten().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prover::{is_countermodel, MlSequent};

    #[test]
    fn family_sizes() {
        let f = formulas_up_to(&["p", "q"], 4, 2);
        let counts: Vec<usize> = (1..=4).map(|s| f.iter().filter(|e| e.size() == s).count()).collect();
        assert_eq!(counts, vec![3, 3, 12, 27]);
    }

    #[test]
    fn refutes_only_invalid_formulas() {
        let p = Expr::flex("p");
        let valid = Expr::implies(p.clone(), p.clone());
        let invalid = Expr::implies(p.clone(), Expr::nabla(p.clone()));
        let mut fam = Family::new();
        let seqs = [valid, invalid]
            .iter()
            .map(|g| NodeSequent {
                hypotheses: vec![],
                goal: fam.add(g),
            })
            .collect::<Vec<_>>();
        let out = refutable(&fam, &seqs, 2, Frames::default(), Exec::Sequential);
        assert_eq!(out, vec![false, true]);
    }

    #[test]
    fn found_countermodels_verify() {
        let p = Expr::flex("p");
        let goal = Expr::implies(Expr::nabla(p.clone()), p.clone());
        let (k, w) = find_countermodel(&[], &goal, 2, Frames::default()).unwrap();
        assert!(is_countermodel(&MlSequent::new(vec![], goal.clone()), &k, w).unwrap());
        let frames = Frames {
            nabla: Frame::T,
            ..Frames::default()
        };
        assert!(find_countermodel(&[], &goal, 3, frames).is_none());
    }
}
