//! A tableau decision procedure for propositional multi-modal logic with
//! global hypotheses.
//!
//! Both modalities are normal; each has its own frame condition (K, T, K4
//! or S4). Hypotheses are added to every world, and a world whose initial
//! label is contained in the saturated label of a world on the current path
//! is not expanded: the edge is redirected to that ancestor. Countermodels
//! are rebuilt from the open tableau and checked with the evaluator before
//! they are returned.

pub mod oracle;

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;

use thiserror::Error;

use crate::semantics::{eval_ml, EvalError, PropModel, Relation};
use crate::syntax::{Expr, Modality};

/// Frame condition of one modality.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct Frame {
    pub reflexive: bool,
    pub transitive: bool,
}

impl Frame {
    pub const K: Frame = Frame {
        reflexive: false,
        transitive: false,
    };
    pub const T: Frame = Frame {
        reflexive: true,
        transitive: false,
    };
    pub const K4: Frame = Frame {
        reflexive: false,
        transitive: true,
    };
    pub const S4: Frame = Frame {
        reflexive: true,
        transitive: true,
    };

    pub fn name(self) -> &'static str {
        match (self.reflexive, self.transitive) {
            (false, false) => "k",
            (true, false) => "t",
            (false, true) => "k4",
            (true, true) => "s4",
        }
    }

    /// Whether `r` belongs to the frame class.
    pub fn admits(self, r: &Relation) -> bool {
        (!self.reflexive || r.is_reflexive()) && (!self.transitive || r.is_transitive())
    }

    pub fn close(self, r: &mut Relation) {
        if self.reflexive {
            r.reflexive_closure();
        }
        if self.transitive {
            r.transitive_closure();
        }
    }
}

impl std::str::FromStr for Frame {
    type Err = String;

    fn from_str(s: &str) -> Result<Frame, String> {
        match s.to_ascii_lowercase().as_str() {
            "k" => Ok(Frame::K),
            "t" => Ok(Frame::T),
            "k4" => Ok(Frame::K4),
            "s4" => Ok(Frame::S4),
            _ => Err(format!("unknown frame `{s}` (expected k, t, k4 or s4)")),
        }
    }
}

impl fmt::Display for Frame {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Frames {
    pub nabla: Frame,
    pub prime: Frame,
}

impl Frames {
    pub fn get(&self, m: Modality) -> Frame {
        match m {
            Modality::Nabla => self.nabla,
            Modality::Prime => self.prime,
        }
    }
}

/// `hypotheses |= goal` where hypotheses hold at every world.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MlSequent {
    pub hypotheses: Vec<Expr>,
    pub goal: Expr,
    pub frames: Frames,
}

impl MlSequent {
    pub fn new(hypotheses: Vec<Expr>, goal: Expr) -> MlSequent {
        MlSequent {
            hypotheses,
            goal,
            frames: Frames::default(),
        }
    }

    pub fn formulas(&self) -> impl Iterator<Item = &Expr> {
        self.hypotheses.iter().chain(std::iter::once(&self.goal))
    }

    pub fn uses_prime(&self) -> bool {
        self.formulas().any(Expr::contains_prime)
    }

    /// Atom names in order of first occurrence.
    pub fn atoms(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for f in self.formulas() {
            f.walk(&mut |e| {
                if let Expr::Flex(a) = e {
                    if !out.contains(a) {
                        out.push(a.clone());
                    }
                }
            });
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Proved,
    Countermodel { model: PropModel, state: usize },
    ResourceOut,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Limits {
    /// Worlds created over the whole search, including abandoned branches.
    pub max_worlds: usize,
}

impl Default for Limits {
    fn default() -> Limits {
        Limits { max_worlds: 200_000 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProverError {
    #[error("{0}")]
    NotModal(#[from] EvalError),
    #[error("internal error: the constructed countermodel does not refute the sequent")]
    Unverified,
}

type Id = u32;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
enum Node {
    Top,
    Bot,
    Lit(u32, bool),
    And(Id, Id),
    Or(Id, Id),
    Box(Modality, Id),
    Dia(Modality, Id),
}

#[derive(Default)]
struct Arena {
    nodes: Vec<Node>,
    index: HashMap<Node, Id>,
    atoms: Vec<String>,
    atom_index: HashMap<String, u32>,
}

impl Arena {
    fn intern(&mut self, n: Node) -> Id {
        if let Some(&id) = self.index.get(&n) {
            return id;
        }
        let id = self.nodes.len() as Id;
        self.nodes.push(n);
        self.index.insert(n, id);
        id
    }

    fn node(&self, id: Id) -> Node {
        self.nodes[id as usize]
    }

    fn atom(&mut self, name: &str) -> u32 {
        if let Some(&a) = self.atom_index.get(name) {
            return a;
        }
        let a = self.atoms.len() as u32;
        self.atoms.push(name.to_string());
        self.atom_index.insert(name.to_string(), a);
        // Both polarities exist so complements can be looked up.
        self.intern(Node::Lit(a, true));
        self.intern(Node::Lit(a, false));
        a
    }

    /// Negation normal form of `e` (of its negation when `!positive`).
    fn nnf(&mut self, e: &Expr, positive: bool) -> Result<Id, EvalError> {
        let node = match e {
            Expr::Flex(name) => Node::Lit(self.atom(name), positive),
            Expr::False => {
                if positive {
                    Node::Bot
                } else {
                    Node::Top
                }
            }
            Expr::Implies(a, b) => {
                if positive {
                    Node::Or(self.nnf(a, false)?, self.nnf(b, true)?)
                } else {
                    Node::And(self.nnf(a, true)?, self.nnf(b, false)?)
                }
            }
            Expr::Nabla(b) | Expr::Prime(b) => {
                let m = if matches!(e, Expr::Nabla(_)) {
                    Modality::Nabla
                } else {
                    Modality::Prime
                };
                let inner = self.nnf(b, positive)?;
                if positive {
                    Node::Box(m, inner)
                } else {
                    Node::Dia(m, inner)
                }
            }
            Expr::Rigid(_) => return Err(EvalError::NotModal("rigid variable")),
            Expr::Op(..) => return Err(EvalError::NotModal("operator application")),
            Expr::Def(..) => return Err(EvalError::NotModal("defined operator")),
            Expr::Eq(..) => return Err(EvalError::NotModal("=")),
            Expr::Forall(..) => return Err(EvalError::NotModal("forall")),
        };
        Ok(self.intern(node))
    }
}

type Label = BTreeSet<Id>;

struct World {
    label: Label,
    edges: Vec<(Modality, usize)>,
}

enum Outcome {
    Sat(usize),
    Unsat,
    Out,
}

struct Tableau {
    arena: Arena,
    hyps: Vec<Id>,
    frames: Frames,
    worlds: Vec<World>,
    path: Vec<usize>,
    unsat: HashSet<Label>,
    created: usize,
    limits: Limits,
}

impl Tableau {
    fn sat(&mut self, init: Label) -> Outcome {
        if self.unsat.contains(&init) {
            return Outcome::Unsat;
        }
        if self.created >= self.limits.max_worlds {
            return Outcome::Out;
        }
        self.created += 1;
        let me = self.worlds.len();
        self.worlds.push(World {
            label: init.clone(),
            edges: Vec::new(),
        });
        self.path.push(me);
        let mut label = Label::new();
        let mut todo = Vec::new();
        let mut consistent = true;
        for &f in &init {
            consistent &= self.add(&mut label, &mut todo, f);
        }
        let out = if consistent {
            self.branch(me, label, todo)
        } else {
            Outcome::Unsat
        };
        self.path.pop();
        match out {
            Outcome::Sat(_) => Outcome::Sat(me),
            Outcome::Unsat => {
                self.worlds.truncate(me);
                self.unsat.insert(init);
                Outcome::Unsat
            }
            Outcome::Out => {
                self.worlds.truncate(me);
                Outcome::Out
            }
        }
    }

    /// Add `f` to the label; false on an immediate clash.
    fn add(&self, label: &mut Label, todo: &mut Vec<Id>, f: Id) -> bool {
        match self.arena.node(f) {
            Node::Bot => return false,
            Node::Lit(a, p) if label.contains(&self.arena.index[&Node::Lit(a, !p)]) => return false,
            _ => {}
        }
        if label.insert(f) {
            todo.push(f);
        }
        true
    }

    fn branch(&mut self, me: usize, mut label: Label, mut todo: Vec<Id>) -> Outcome {
        while let Some(f) = todo.pop() {
            match self.arena.node(f) {
                Node::Top | Node::Bot | Node::Lit(..) | Node::Dia(..) => {}
                Node::And(a, b) => {
                    if !(self.add(&mut label, &mut todo, a) && self.add(&mut label, &mut todo, b)) {
                        return Outcome::Unsat;
                    }
                }
                Node::Or(a, b) => {
                    if label.contains(&a) || label.contains(&b) {
                        continue;
                    }
                    let (mut left, mut left_todo) = (label.clone(), todo.clone());
                    if self.add(&mut left, &mut left_todo, a) {
                        match self.branch(me, left, left_todo) {
                            Outcome::Unsat => self.worlds.truncate(me + 1),
                            other => return other,
                        }
                    }
                    if !self.add(&mut label, &mut todo, b) {
                        return Outcome::Unsat;
                    }
                }
                Node::Box(m, a) => {
                    if self.frames.get(m).reflexive && !self.add(&mut label, &mut todo, a) {
                        return Outcome::Unsat;
                    }
                }
            }
        }
        self.expand_successors(me, label)
    }

    fn expand_successors(&mut self, me: usize, label: Label) -> Outcome {
        let diamonds: Vec<(Modality, Id)> = label
            .iter()
            .filter_map(|&f| match self.arena.node(f) {
                Node::Dia(m, a) => Some((m, a)),
                _ => None,
            })
            .collect();
        self.worlds[me].label = label;
        self.worlds[me].edges.clear();
        let mut edges = Vec::new();
        for (m, a) in diamonds {
            let mut child: Label = self.hyps.iter().copied().collect();
            child.insert(a);
            for &f in &self.worlds[me].label {
                if let Node::Box(m2, b) = self.arena.node(f) {
                    if m2 == m {
                        child.insert(b);
                        if self.frames.get(m).transitive {
                            child.insert(f);
                        }
                    }
                }
            }
            if let Some(&anc) = self.path.iter().find(|&&w| child.is_subset(&self.worlds[w].label)) {
                edges.push((m, anc));
                continue;
            }
            match self.sat(child) {
                Outcome::Sat(w) => edges.push((m, w)),
                Outcome::Unsat => {
                    self.worlds.truncate(me + 1);
                    return Outcome::Unsat;
                }
                Outcome::Out => return Outcome::Out,
            }
        }
        self.worlds[me].edges = edges;
        Outcome::Sat(me)
    }

    fn model(&self, uses_prime: bool) -> PropModel {
        let n = self.worlds.len();
        let mut rel = BTreeMap::new();
        for m in [Modality::Nabla, Modality::Prime] {
            let mut r = Relation::from_pairs(
                n,
                self.worlds
                    .iter()
                    .enumerate()
                    .flat_map(|(w, world)| world.edges.iter().filter(|e| e.0 == m).map(move |e| (w, e.1))),
            );
            self.frames.get(m).close(&mut r);
            rel.insert(m, r);
        }
        let zeta = self
            .arena
            .atoms
            .iter()
            .enumerate()
            .map(|(a, name)| {
                let pos = self.arena.index[&Node::Lit(a as u32, true)];
                (name.clone(), self.worlds.iter().map(|w| w.label.contains(&pos)).collect())
            })
            .collect();
        let prime_r = rel.remove(&Modality::Prime).filter(|_| uses_prime);
        PropModel {
            r: rel.remove(&Modality::Nabla).unwrap(),
            prime_r,
            zeta,
        }
    }
}

/// Decide the sequent. Countermodels are re-checked with the evaluator.
pub fn prove_ml(s: &MlSequent, limits: Limits) -> Result<Verdict, ProverError> {
    let mut arena = Arena::default();
    for a in s.atoms() {
        arena.atom(&a);
    }
    let hyps = s
        .hypotheses
        .iter()
        .map(|h| arena.nnf(h, true))
        .collect::<Result<Vec<_>, _>>()?;
    let refuted = arena.nnf(&s.goal, false)?;
    let mut t = Tableau {
        arena,
        hyps,
        frames: s.frames,
        worlds: Vec::new(),
        path: Vec::new(),
        unsat: HashSet::new(),
        created: 0,
        limits,
    };
    let mut root: Label = t.hyps.iter().copied().collect();
    root.insert(refuted);
    match t.sat(root) {
        Outcome::Unsat => Ok(Verdict::Proved),
        Outcome::Out => Ok(Verdict::ResourceOut),
        Outcome::Sat(state) => {
            let model = t.model(s.uses_prime());
            if !is_countermodel(s, &model, state)? {
                return Err(ProverError::Unverified);
            }
            Ok(Verdict::Countermodel { model, state })
        }
    }
}

/// Hypotheses hold everywhere, the goal fails at `state`, and the
/// relations belong to the frame classes.
pub fn is_countermodel(s: &MlSequent, k: &PropModel, state: usize) -> Result<bool, EvalError> {
    if !s.frames.nabla.admits(&k.r) {
        return Ok(false);
    }
    if let Some(p) = &k.prime_r {
        if !s.frames.prime.admits(p) {
            return Ok(false);
        }
    }
    for h in &s.hypotheses {
        for w in 0..k.state_count() {
            if !eval_ml(k, w, h)? {
                return Ok(false);
            }
        }
    }
    Ok(!eval_ml(k, state, &s.goal)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{parse_expr, Env};

    fn ml(text: &str) -> Expr {
        let mut env = Env::new();
        for a in ["p", "q", "r", "a"] {
            env.declare_flex(a).unwrap();
        }
        parse_expr(text, &mut env).unwrap()
    }

    fn verdict(hyps: &[&str], goal: &str, frame: Frame) -> Verdict {
        let mut s = MlSequent::new(hyps.iter().map(|h| ml(h)).collect(), ml(goal));
        s.frames.nabla = frame;
        prove_ml(&s, Limits::default()).unwrap()
    }

    fn proved(hyps: &[&str], goal: &str, frame: Frame) -> bool {
        match verdict(hyps, goal, frame) {
            Verdict::Proved => true,
            Verdict::Countermodel { .. } => false,
            Verdict::ResourceOut => panic!("resource out on {goal}"),
        }
    }

    #[test]
    fn rigid_hypothesis_proves_the_box_delta_law() {
        let goal = "(=> (and a (nabla (delta true))) (nabla (delta a)))";
        assert!(proved(&["(=> a (nabla a))"], goal, Frame::K));
        assert!(!proved(&[], goal, Frame::K));
    }

    #[test]
    fn flexible_equation_is_refuted() {
        match verdict(&[], "(=> a (nabla a))", Frame::K) {
            Verdict::Countermodel { model, state } => {
                assert!(model.zeta["a"][state]);
                assert!(model.state_count() >= 2);
            }
            v => panic!("{v:?}"),
        }
    }

    #[test]
    fn frame_axioms() {
        let t_axiom = "(=> (nabla p) p)";
        let four = "(=> (nabla p) (nabla (nabla p)))";
        assert!(!proved(&[], t_axiom, Frame::K));
        assert!(proved(&[], t_axiom, Frame::T));
        assert!(!proved(&[], four, Frame::K));
        assert!(!proved(&[], four, Frame::T));
        assert!(proved(&[], four, Frame::K4));
        assert!(proved(&[], four, Frame::S4));
        assert!(proved(&[], "(=> (nabla (=> p q)) (=> (nabla p) (nabla q)))", Frame::K));
    }

    #[test]
    fn global_hypotheses_reach_every_world() {
        // p everywhere makes every box of p true.
        assert!(proved(&["p"], "(nabla (nabla p))", Frame::K));
        // Locally that would fail.
        assert!(!proved(&[], "(=> p (nabla (nabla p)))", Frame::K));
        // A hypothesis forcing infinite chains still terminates.
        assert!(!proved(&["(delta p)"], "q", Frame::K));
        assert!(proved(&["(delta p)", "(nabla (not p))"], "false", Frame::K));
    }

    #[test]
    fn modalities_are_independent() {
        let mut s = MlSequent::new(vec![ml("(nabla p)")], ml("(prime p)"));
        assert!(matches!(prove_ml(&s, Limits::default()).unwrap(), Verdict::Countermodel { .. }));
        s.frames.prime = Frame::T;
        s.hypotheses = vec![ml("p")];
        assert!(matches!(prove_ml(&s, Limits::default()).unwrap(), Verdict::Proved));
    }

    #[test]
    fn resource_limit_is_reported() {
        let s = MlSequent::new(vec![], ml("(=> p (nabla p))"));
        assert_eq!(prove_ml(&s, Limits { max_worlds: 1 }).unwrap(), Verdict::ResourceOut);
    }

    #[test]
    fn non_modal_input_is_rejected() {
        let mut env = Env::new();
        let e = parse_expr("(= 0 0)", &mut env).unwrap();
        assert!(prove_ml(&MlSequent::new(vec![], e), Limits::default()).is_err());
    }
}
