use std::collections::BTreeMap;

use foml::coalesce::{coalesce_fol, coalesce_ml, AtomTable, SymbolTable};
use foml::emit::{emit_ml, emit_smt, emit_tptp, eval_smt, eval_tptp, parse_mlseq};
use foml::leibniz::compute_leibniz;
use foml::prover::{Frame, Frames, MlSequent};
use foml::semantics::model::standard_universe;
use foml::semantics::{eval_fol, FolStructure, OpTable, Val};
use foml::syntax::print::{pretty, raw};
use foml::syntax::subst::Substitution;
use foml::syntax::{alpha_equal, expand_definitions, free_rigid_vars, is_rigid, parse_expr, parse_problem, substitute, Env, Expr};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const PRELUDE: &str = "
    (declare-op 0 0) (declare-op f 1) (declare-op g 2)
    (declare-rigid x) (declare-flex u v)
    (define (cst p) (exists w (nabla (= p w))))
    (define (d2 p q) (=> (= p (f q)) (prime q)))
    (define (flat p) (= (g p p) 0))
    (goal true)";

fn env() -> Env {
    parse_problem(PRELUDE).unwrap().env
}

fn leaf() -> impl Strategy<Value = Expr> {
    prop_oneof![
        prop_oneof![Just("x"), Just("y"), Just("z")].prop_map(Expr::rigid),
        prop_oneof![Just("u"), Just("v")].prop_map(Expr::flex),
        Just(Expr::constant("0")),
        Just(Expr::False),
    ]
}

fn body() -> impl Strategy<Value = Expr> {
    leaf().prop_recursive(4, 24, 2, |inner| {
        let binder = prop_oneof![Just("y"), Just("z")];
        prop_oneof![
            inner.clone().prop_map(|a| Expr::op("f", vec![a])),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::op("g", vec![a, b])),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::eq(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::implies(a, b)),
            (binder, inner.clone()).prop_map(|(y, a)| Expr::forall(y, a)),
            inner.clone().prop_map(Expr::nabla),
            inner.clone().prop_map(Expr::prime),
            inner.clone().prop_map(|a| Expr::def("cst", vec![a])),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::def("d2", vec![a, b])),
            inner.prop_map(|a| Expr::def("flat", vec![a])),
        ]
    })
}

/// Closed apart from the declared rigid `x`, with no prime under prime.
fn expr() -> impl Strategy<Value = Expr> {
    body().prop_map(|e| Expr::forall("y", Expr::forall("z", unnest(&e, false))))
}

fn unnest(e: &Expr, primed: bool) -> Expr {
    match e {
        Expr::Prime(b) if primed => unnest(b, true),
        Expr::Prime(b) => Expr::prime(unnest(b, true)),
        Expr::Op(n, a) => Expr::Op(n.clone(), a.iter().map(|x| unnest(x, primed)).collect()),
        Expr::Def(n, a) => Expr::Def(n.clone(), a.iter().map(|x| unnest(x, primed)).collect()),
        Expr::Eq(a, b) => Expr::eq(unnest(a, primed), unnest(b, primed)),
        Expr::Implies(a, b) => Expr::implies(unnest(a, primed), unnest(b, primed)),
        Expr::Forall(y, b) => Expr::forall(y.clone(), unnest(b, primed)),
        Expr::Nabla(b) => Expr::nabla(unnest(b, primed)),
        _ => e.clone(),
    }
}

/// Modal-free and definition-free, with `p` as the only free variable.
fn plain_body() -> impl Strategy<Value = Expr> {
    prop_oneof![Just(Expr::rigid("p")), Just(Expr::rigid("z")), Just(Expr::constant("0")), Just(Expr::False)]
        .prop_recursive(4, 24, 2, |inner| {
            prop_oneof![
                inner.clone().prop_map(|a| Expr::op("f", vec![a])),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::op("g", vec![a, b])),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::eq(a, b)),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::implies(a, b)),
                inner.prop_map(|a| Expr::forall("z", a)),
            ]
        })
        .prop_map(|e| Expr::forall("z", e))
}

/// Swap the names `y` and `z` everywhere. Both are always bound, so the
/// result is an alpha-variant.
fn swap(e: &Expr) -> Expr {
    let s = |n: &String| match n.as_str() {
        "y" => "z".to_string(),
        "z" => "y".to_string(),
        _ => n.clone(),
    };
    match e {
        Expr::Rigid(n) => Expr::Rigid(s(n)),
        Expr::Flex(_) | Expr::False => e.clone(),
        Expr::Op(n, a) => Expr::Op(n.clone(), a.iter().map(swap).collect()),
        Expr::Def(n, a) => Expr::Def(n.clone(), a.iter().map(swap).collect()),
        Expr::Eq(a, b) => Expr::eq(swap(a), swap(b)),
        Expr::Implies(a, b) => Expr::implies(swap(a), swap(b)),
        Expr::Forall(y, b) => Expr::forall(s(y), swap(b)),
        Expr::Nabla(b) => Expr::nabla(swap(b)),
        Expr::Prime(b) => Expr::prime(swap(b)),
    }
}

fn has(e: &Expr, pred: fn(&Expr) -> bool) -> bool {
    let mut found = false;
    e.walk(&mut |n| found |= pred(n));
    found
}

/// Random interpretation of every symbol of `exprs`.
fn structure(exprs: &[&Expr], seed: u64) -> FolStructure {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(2..=3usize);
    let mut ops = BTreeMap::new();
    let mut xi = BTreeMap::new();
    for e in exprs {
        e.walk(&mut |node| match node {
            Expr::Op(name, args) => {
                ops.entry(name.clone()).or_insert_with(|| OpTable {
                    arity: args.len(),
                    values: (0..n.pow(args.len() as u32)).map(|_| Val(rng.random_range(0..n) as u16)).collect(),
                });
            }
            Expr::Flex(name) => {
                xi.entry(name.clone()).or_insert_with(|| Val(rng.random_range(0..n) as u16));
            }
            _ => {}
        });
        for r in free_rigid_vars(e) {
            xi.entry(r).or_insert_with(|| Val(rng.random_range(0..n) as u16));
        }
    }
    FolStructure {
        universe: standard_universe(n),
        tt: Val(0),
        ff: Val(1),
        ops,
        xi,
    }
}

fn ml_formula() -> impl Strategy<Value = Expr> {
    let atom = prop_oneof![Just("p"), Just("q"), Just("a0__1f")].prop_map(Expr::flex);
    prop_oneof![atom, Just(Expr::False)].prop_recursive(4, 20, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::implies(a, b)),
            inner.clone().prop_map(Expr::nabla),
            inner.prop_map(Expr::prime),
        ]
    })
}

fn frame() -> impl Strategy<Value = Frame> {
    prop_oneof![Just(Frame::K), Just(Frame::T), Just(Frame::K4), Just(Frame::S4)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn print_parse_round_trip(e in expr()) {
        let mut env = env();
        let back = parse_expr(&pretty(&e), &mut env).unwrap();
        prop_assert!(alpha_equal(&back, &e), "{}", pretty(&e));
        let back = parse_expr(&raw(&e), &mut env).unwrap();
        prop_assert_eq!(back, e);
    }

    #[test]
    fn substitution_respects_alpha(e in expr(), t in body()) {
        let mut sigma = Substitution::new();
        sigma.insert("x".to_string(), t);
        let a = substitute(&e, &sigma);
        let b = substitute(&swap(&e), &sigma);
        prop_assert!(alpha_equal(&e, &swap(&e)));
        prop_assert!(alpha_equal(&a, &b), "{} vs {}", pretty(&a), pretty(&b));
    }

    #[test]
    fn expansion_is_idempotent(e in expr()) {
        let env = env();
        let once = expand_definitions(&e, &env);
        prop_assert!(!once.contains_def());
        prop_assert_eq!(expand_definitions(&once, &env), once);
    }

    #[test]
    fn rigidity_scanner(e in expr()) {
        let env = env();
        let x = expand_definitions(&e, &env);
        let scan = !has(&x, |n| matches!(n, Expr::Flex(_) | Expr::Nabla(_) | Expr::Prime(_)));
        prop_assert_eq!(is_rigid(&e, &env), scan);
    }

    #[test]
    fn fol_coalescing_is_alpha_stable_pure_and_shared(e in expr()) {
        let env = env();
        let mut table = SymbolTable::new(env.all_names());
        let a = coalesce_fol(&e, &[], &mut table, &env);
        let n = table.len();
        let b = coalesce_fol(&swap(&e), &[], &mut table, &env);
        prop_assert_eq!(table.len(), n);
        prop_assert!(alpha_equal(&a, &b));
        prop_assert_eq!(coalesce_fol(&e, &[], &mut table, &env), a.clone());
        prop_assert_eq!(table.len(), n);
        prop_assert!(!has(&a, |n| matches!(n, Expr::Nabla(_) | Expr::Prime(_) | Expr::Def(..))));
    }

    #[test]
    fn ml_coalescing_is_pure_and_shared(e in expr()) {
        let mut table = AtomTable::new(env().all_names());
        let a = coalesce_ml(&e, &mut table);
        let n = table.len();
        prop_assert_eq!(coalesce_ml(&swap(&e), &mut table), a.clone());
        prop_assert_eq!(table.len(), n);
        prop_assert!(!has(&a, |n| matches!(n, Expr::Eq(..) | Expr::Forall(..) | Expr::Op(..) | Expr::Def(..) | Expr::Rigid(_))));
    }

    #[test]
    fn emitted_encodings_agree_with_the_evaluator(h in expr(), g in expr(), seed in any::<u64>()) {
        let env = env();
        let mut table = SymbolTable::new(env.all_names());
        let h = coalesce_fol(&h, &[], &mut table, &env);
        let g = coalesce_fol(&g, &[], &mut table, &env);
        let s = structure(&[&h, &g], seed);
        let direct = eval_fol(&s, &h).unwrap() == s.tt && eval_fol(&s, &g).unwrap() != s.tt;
        let hyps = std::slice::from_ref(&h);
        let smt = emit_smt(hyps, &g, Some(&table));
        prop_assert_eq!(eval_smt(&smt, &s).unwrap(), direct, "{}", smt);
        let tptp = emit_tptp(hyps, &g, Some(&table));
        prop_assert_eq!(eval_tptp(&tptp, &s).unwrap(), direct, "{}", tptp);
        prop_assert_eq!(emit_smt(hyps, &g, Some(&table)), smt);
        prop_assert_eq!(emit_tptp(hyps, &g, Some(&table)), tptp);
    }

    #[test]
    fn mlseq_round_trip(
        hyps in proptest::collection::vec(ml_formula(), 0..3),
        goal in ml_formula(),
        nabla in frame(),
        prime in frame(),
    ) {
        let s = MlSequent { hypotheses: hyps, goal, frames: Frames { nabla, prime } };
        let text = emit_ml(&s);
        let back = parse_mlseq(&text).unwrap();
        prop_assert_eq!(&back, &s);
        prop_assert_eq!(emit_ml(&back), text);
    }

    #[test]
    fn modal_free_definitions_are_leibniz(body in plain_body()) {
        let mut env = env();
        env.define("m", vec!["p".to_string()], body).unwrap();
        let table = compute_leibniz(&env);
        prop_assert_eq!(table.get("m"), Some(&[true][..]));
    }
}
