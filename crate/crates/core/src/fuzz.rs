//! Seeded random checks of the translations against the Kripke evaluator.
//!
//! Iteration `i` of a run with seed `s` draws from the ChaCha8 stream `i` of
//! key `s`, so any single iteration replays on its own and sharded runs
//! agree with sequential ones.

use std::fmt;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::coalesce::{
    build_witness_propmodel, build_witness_structure, coalesce_ml, hypotheses, AtomTable, CanonicalOrder,
    FolCoalescer, FolOptions, SymbolTable,
};
use crate::leibniz::compute_leibniz;
use crate::par::{self, Exec};
use crate::prime::{distribute_prime, first_order_env, lift_countermodel, translate_action};
use crate::semantics::model::standard_universe;
use crate::semantics::{eval, eval_fol, eval_ml, FolStructure, KripkeModel, OpTable, Relation, Val};
use crate::syntax::print::pretty;
use crate::syntax::subst::fresh_name;
use crate::syntax::{is_rigid, Env, Expr};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Property {
    /// The first-order witness structure gives a coalesced expression the
    /// value the original has at the chosen state.
    FolWitness,
    /// The propositional witness model makes a coalesced formula true
    /// exactly where the original is tt, and satisfies every rigidity
    /// hypothesis everywhere.
    MlWitness,
    /// A rigid argument may be replaced by a variable holding its value.
    RigidArgument,
    /// So may any argument at a Leibniz position.
    LeibnizArgument,
    /// Distributing prime preserves values under a functional relation.
    PrimeDistribution,
    /// Countermodels of an action formula and of its first-order
    /// translation map to each other.
    ActionLift,
}

impl Property {
    pub const ALL: [Property; 6] = [
        Property::FolWitness,
        Property::MlWitness,
        Property::RigidArgument,
        Property::LeibnizArgument,
        Property::PrimeDistribution,
        Property::ActionLift,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Property::FolWitness => "fol-witness",
            Property::MlWitness => "ml-witness",
            Property::RigidArgument => "rigid-argument",
            Property::LeibnizArgument => "leibniz-argument",
            Property::PrimeDistribution => "prime-distribution",
            Property::ActionLift => "action-lift",
        }
    }
}

impl fmt::Display for Property {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Size limits of the random instances.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Scale {
    pub max_universe: usize,
    pub max_states: usize,
    pub max_depth: usize,
}

impl Default for Scale {
    fn default() -> Scale {
        Scale {
            max_universe: 3,
            max_states: 3,
            max_depth: 3,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Discrepancy {
    pub iteration: u64,
    pub property: Property,
    pub detail: String,
}

impl fmt::Display for Discrepancy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "iteration {} [{}]: {}", self.iteration, self.property, self.detail)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Report {
    pub seed: u64,
    pub start: u64,
    pub iterations: u64,
    pub checks: u64,
    /// Sorted by iteration.
    pub discrepancies: Vec<Discrepancy>,
}

impl Report {
    pub fn first(&self) -> Option<&Discrepancy> {
        self.discrepancies.first()
    }
}

/// The random stream of one iteration.
pub fn stream(seed: u64, iteration: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(iteration);
    rng
}

/// Run `props` on iterations `start..start + iters`.
pub fn run(props: &[Property], seed: u64, start: u64, iters: u64, scale: Scale, exec: Exec) -> Report {
    let per_iter = par::map_indices(iters, exec, |k| {
        let i = start + k;
        props
            .iter()
            .filter_map(|&p| {
                check(p, seed, i, scale).err().map(|detail| Discrepancy {
                    iteration: i,
                    property: p,
                    detail,
                })
            })
            .collect::<Vec<_>>()
    });
    Report {
        seed,
        start,
        iterations: iters,
        checks: iters * props.len() as u64,
        discrepancies: per_iter.into_iter().flatten().collect(),
    }
}

/// One property on one iteration.
pub fn check(p: Property, seed: u64, iteration: u64, scale: Scale) -> Result<(), String> {
    let mut rng = stream(seed, iteration);
    rng = ChaCha8Rng::from_rng(&mut rng);
    rng.set_stream(p as u64);
    let mut g = Gen { rng, scale };
    match p {
        Property::FolWitness => g.fol_witness(),
        Property::MlWitness => g.ml_witness(),
        Property::RigidArgument => g.argument_lemma(true),
        Property::LeibnizArgument => g.argument_lemma(false),
        Property::PrimeDistribution => g.prime_distribution(),
        Property::ActionLift => g.action_lift(),
    }
}

const BINDERS: [&str; 3] = ["a", "b", "x"];

#[derive(Clone, Copy)]
struct Shape {
    flex: bool,
    nabla: bool,
    prime: bool,
    defs: bool,
    free_rigid: bool,
}

impl Shape {
    const ANY: Shape = Shape {
        flex: true,
        nabla: true,
        prime: true,
        defs: true,
        free_rigid: true,
    };
    const ACTION: Shape = Shape {
        nabla: false,
        defs: false,
        ..Shape::ANY
    };
    const RIGID: Shape = Shape {
        flex: false,
        nabla: false,
        prime: false,
        defs: false,
        free_rigid: true,
    };
}

struct Gen {
    rng: ChaCha8Rng,
    scale: Scale,
}

fn err(e: impl fmt::Display) -> String {
    e.to_string()
}

impl Gen {
    fn env(&mut self) -> Env {
        let mut env = Env::new();
        for (op, n) in [("0", 0), ("1", 0), ("f", 1), ("g", 2)] {
            env.declare_op(op, n).unwrap();
        }
        env.declare_rigid("x").unwrap();
        env.declare_flex("u").unwrap();
        env.declare_flex("v").unwrap();
        if self.rng.random_bool(0.5) {
            let body = Expr::exists("y", Expr::nabla(Expr::eq(Expr::rigid("p"), Expr::rigid("y"))));
            env.define("cst", vec!["p".into()], body).unwrap();
        }
        for k in 0..self.rng.random_range(1..=2) {
            let params: Vec<String> = ["p", "q"][..self.rng.random_range(1..=2)].iter().map(|s| s.to_string()).collect();
            let shape = Shape {
                prime: false,
                free_rigid: false,
                ..Shape::ANY
            };
            let mut scope = params.clone();
            let body = self.expr(&env, shape, &mut scope, 2, false);
            env.define(&format!("d{k}"), params, body).unwrap();
        }
        env
    }

    fn expr(&mut self, env: &Env, shape: Shape, scope: &mut Vec<String>, depth: usize, under_prime: bool) -> Expr {
        if depth == 0 || self.rng.random_bool(0.25) {
            return self.leaf(env, shape, scope);
        }
        let defs: Vec<(String, usize)> = if shape.defs {
            env.definitions().iter().map(|d| (d.name.clone(), d.params.len())).collect()
        } else {
            Vec::new()
        };
        loop {
            let d = depth - 1;
            match self.rng.random_range(0..8) {
                0 => return Expr::op("f", vec![self.expr(env, shape, scope, d, under_prime)]),
                1 => {
                    let a = self.expr(env, shape, scope, d, under_prime);
                    return Expr::op("g", vec![a, self.expr(env, shape, scope, d, under_prime)]);
                }
                2 if !defs.is_empty() => {
                    let (name, n) = defs.choose(&mut self.rng).unwrap().clone();
                    let args = (0..n).map(|_| self.expr(env, shape, scope, d, under_prime)).collect();
                    return Expr::def(name, args);
                }
                3 => {
                    let a = self.expr(env, shape, scope, d, under_prime);
                    return Expr::eq(a, self.expr(env, shape, scope, d, under_prime));
                }
                4 => {
                    let a = self.expr(env, shape, scope, d, under_prime);
                    return Expr::implies(a, self.expr(env, shape, scope, d, under_prime));
                }
                5 => {
                    let x = BINDERS.choose(&mut self.rng).unwrap().to_string();
                    scope.push(x.clone());
                    let body = self.expr(env, shape, scope, d, under_prime);
                    scope.pop();
                    return Expr::forall(x, body);
                }
                6 if shape.nabla => return Expr::nabla(self.expr(env, shape, scope, d, under_prime)),
                7 if shape.prime && !under_prime => return Expr::prime(self.expr(env, shape, scope, d, true)),
                _ => {}
            }
        }
    }

    fn leaf(&mut self, _env: &Env, shape: Shape, scope: &[String]) -> Expr {
        loop {
            match self.rng.random_range(0..6) {
                0 if !scope.is_empty() => return Expr::rigid(scope.choose(&mut self.rng).unwrap().clone()),
                1 if shape.free_rigid => return Expr::rigid("x"),
                2 if shape.flex => return Expr::flex(*["u", "v"].choose(&mut self.rng).unwrap()),
                3 => return Expr::constant(*["0", "1"].choose(&mut self.rng).unwrap()),
                4 => return Expr::False,
                5 if !scope.is_empty() && shape.free_rigid => return Expr::rigid(scope.last().unwrap().clone()),
                _ => {}
            }
        }
    }

    fn universe(&mut self) -> (Vec<String>, Val, Val) {
        let n = self.rng.random_range(2..=self.scale.max_universe.max(2));
        let tt = self.rng.random_range(0..n);
        let ff = (tt + self.rng.random_range(1..n)) % n;
        (standard_universe(n), Val(tt as u16), Val(ff as u16))
    }

    fn value(&mut self, n: usize) -> Val {
        Val(self.rng.random_range(0..n) as u16)
    }

    fn table(&mut self, arity: usize, n: usize) -> OpTable {
        OpTable {
            arity,
            values: (0..n.pow(arity as u32)).map(|_| self.value(n)).collect(),
        }
    }

    fn model(&mut self, env: &Env, functional_prime: bool) -> KripkeModel {
        let (universe, tt, ff) = self.universe();
        let n = universe.len();
        let s = self.rng.random_range(1..=self.scale.max_states.max(1));
        let ops = env
            .ops()
            .iter()
            .map(|(op, k)| (op.clone(), self.table(*k, n)))
            .collect();
        let xi = env.rigid_vars().iter().map(|x| (x.clone(), self.value(n))).collect();
        let zeta = env
            .flex_vars()
            .iter()
            .map(|v| (v.clone(), (0..s).map(|_| self.value(n)).collect()))
            .collect();
        let r = Relation::from_bits(s, self.rng.random_range(0..1u64 << (s * s)));
        let prime_r = if functional_prime {
            Relation::from_function(&(0..s).map(|_| self.rng.random_range(0..s)).collect::<Vec<_>>())
        } else {
            Relation::from_bits(s, self.rng.random_range(0..1u64 << (s * s)))
        };
        KripkeModel {
            universe,
            tt,
            ff,
            ops,
            xi,
            states: (0..s).map(|i| format!("s{i}")).collect(),
            r,
            zeta,
            prime_r: Some(prime_r),
        }
    }

    fn structure(&mut self, env: &Env) -> FolStructure {
        let (universe, tt, ff) = self.universe();
        let n = universe.len();
        let ops = env
            .ops()
            .iter()
            .map(|(op, k)| (op.clone(), self.table(*k, n)))
            .collect();
        let xi = env
            .rigid_vars()
            .iter()
            .chain(env.flex_vars())
            .map(|x| (x.clone(), self.value(n)))
            .collect();
        FolStructure {
            universe,
            tt,
            ff,
            ops,
            xi,
        }
    }

    fn fol_witness(&mut self) -> Result<(), String> {
        let env = self.env();
        let e = self.expr(&env, Shape::ANY, &mut Vec::new(), self.scale.max_depth, false);
        let m = self.model(&env, false);
        let w = self.rng.random_range(0..m.state_count());
        let order = if self.rng.random_bool(0.5) {
            CanonicalOrder::Binding
        } else {
            CanonicalOrder::Appearance
        };
        let mut c = FolCoalescer::new(&env, FolOptions { order, ..Default::default() });
        let fo = c.coalesce(&e);
        if !crate::coalesce::fol::is_first_order(&fo) {
            return Err(format!("{} left modal nodes in {}", pretty(&e), pretty(&fo)));
        }
        let s = build_witness_structure(&m, w, &c.table, &env).map_err(err)?;
        let want = eval(&m, w, &e, &env).map_err(err)?;
        let got = eval_fol(&s, &fo).map_err(err)?;
        if want != got {
            return Err(format!("{} at s{w}: Kripke {want:?}, first-order {got:?} for {}", pretty(&e), pretty(&fo)));
        }
        Ok(())
    }

    fn ml_witness(&mut self) -> Result<(), String> {
        let env = self.env();
        let e = self.expr(&env, Shape::ANY, &mut Vec::new(), self.scale.max_depth, false);
        let m = self.model(&env, false);
        let mut table = AtomTable::new(env.all_names());
        let ml = coalesce_ml(&e, &mut table);
        let k = build_witness_propmodel(&m, &table, &env).map_err(err)?;
        for w in 0..m.state_count() {
            let want = eval(&m, w, &e, &env).map_err(err)? == m.tt;
            let got = eval_ml(&k, w, &ml).map_err(err)?;
            if want != got {
                return Err(format!("{} at s{w}: Kripke {want}, modal {got} for {}", pretty(&e), pretty(&ml)));
            }
            for h in hypotheses(&table, &env, e.contains_prime()) {
                if !eval_ml(&k, w, &h).map_err(err)? {
                    return Err(format!("hypothesis {} fails at s{w}", pretty(&h)));
                }
            }
        }
        Ok(())
    }

    /// Replace one argument of a defined application by a fresh rigid
    /// variable holding its value at the state.
    fn argument_lemma(&mut self, rigid: bool) -> Result<(), String> {
        let env = self.env();
        let table = compute_leibniz(&env);
        let candidates: Vec<(String, usize, usize)> = env
            .definitions()
            .iter()
            .flat_map(|d| (0..d.params.len()).map(move |i| (d.name.clone(), d.params.len(), i)))
            .filter(|(d, _, i)| rigid || table.is_leibniz(d, *i))
            .collect();
        let Some((d, n, i)) = candidates.choose(&mut self.rng).cloned() else {
            return Ok(());
        };
        let depth = self.scale.max_depth;
        let mut args: Vec<Expr> = (0..n).map(|_| self.expr(&env, Shape::ANY, &mut Vec::new(), depth, false)).collect();
        if rigid {
            args[i] = self.expr(&env, Shape::RIGID, &mut Vec::new(), depth, false);
            if !is_rigid(&args[i], &env) {
                return Err(format!("generated {} is not rigid", pretty(&args[i])));
            }
        }
        let m = self.model(&env, false);
        let w = self.rng.random_range(0..m.state_count());
        let z = fresh_name("z", &env.all_names());
        let mut env2 = env.clone();
        env2.declare_rigid(&z).map_err(err)?;
        let mut m2 = m.clone();
        m2.xi.insert(z.clone(), eval(&m, w, &args[i], &env).map_err(err)?);
        let original = Expr::def(d.clone(), args.clone());
        let mut replaced_args = args;
        replaced_args[i] = Expr::rigid(z);
        let replaced = Expr::def(d, replaced_args);
        let want = eval(&m, w, &original, &env).map_err(err)?;
        let got = eval(&m2, w, &replaced, &env2).map_err(err)?;
        if want != got {
            return Err(format!("{} at s{w}: {want:?}, with argument {i} replaced {got:?}", pretty(&original)));
        }
        Ok(())
    }

    fn action_env(&mut self) -> Env {
        let mut env = Env::new();
        for (op, n) in [("0", 0), ("1", 0), ("f", 1), ("g", 2)] {
            env.declare_op(op, n).unwrap();
        }
        env.declare_rigid("x").unwrap();
        env.declare_flex("u").unwrap();
        env.declare_flex("v").unwrap();
        env
    }

    fn prime_distribution(&mut self) -> Result<(), String> {
        let env = self.action_env();
        let e = self.expr(&env, Shape::ACTION, &mut Vec::new(), self.scale.max_depth, false);
        let d = distribute_prime(&e, &env).map_err(err)?;
        let m = self.model(&env, true);
        for w in 0..m.state_count() {
            let a = eval(&m, w, &e, &env).map_err(err)?;
            let b = eval(&m, w, &d, &env).map_err(err)?;
            if a != b {
                return Err(format!("{} at s{w}: {a:?}, distributed {} gives {b:?}", pretty(&e), pretty(&d)));
            }
        }
        Ok(())
    }

    fn action_lift(&mut self) -> Result<(), String> {
        let env = self.action_env();
        let e = self.expr(&env, Shape::ACTION, &mut Vec::new(), self.scale.max_depth, false);
        let mut table = SymbolTable::new(env.all_names());
        let fo = translate_action(&e, &env, &mut table).map_err(err)?;
        if fo.contains_prime() {
            return Err(format!("prime left in {}", pretty(&fo)));
        }
        // Kripke to first order.
        let m = self.model(&env, true);
        let w = self.rng.random_range(0..m.state_count());
        let s = build_witness_structure(&m, w, &table, &env).map_err(err)?;
        let (want, got) = (eval(&m, w, &e, &env).map_err(err)?, eval_fol(&s, &fo).map_err(err)?);
        if (want == m.tt) != (got == s.tt) {
            return Err(format!("{} at s{w}: Kripke {want:?}, first-order {got:?}", pretty(&e)));
        }
        // First order to Kripke.
        let fo_env = first_order_env(&env, &table).map_err(err)?;
        let s = self.structure(&fo_env);
        let k = lift_countermodel(&s, &table, &env);
        let (want, got) = (eval_fol(&s, &fo).map_err(err)?, eval(&k, 0, &e, &env).map_err(err)?);
        if (want == s.tt) != (got == k.tt) {
            return Err(format!("{}: first-order {want:?}, lifted {got:?}", pretty(&fo)));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn iterations_replay() {
        let a = stream(7, 3).random::<u64>();
        assert_eq!(a, stream(7, 3).random::<u64>());
        assert_ne!(a, stream(7, 4).random::<u64>());
    }

    #[test]
    fn short_run_is_clean() {
        let r = run(&Property::ALL, 1, 0, 300, Scale::default(), Exec::Parallel);
        assert_eq!(r.first(), None);
        assert_eq!(r.checks, 1800);
    }

    #[test]
    fn sharding_does_not_change_reports() {
        let a = run(&Property::ALL, 5, 0, 64, Scale::default(), Exec::Parallel);
        let b = run(&Property::ALL, 5, 0, 64, Scale::default(), Exec::Sequential);
        assert_eq!(a, b);
    }
}
