//! Acceptance suite: one pass/fail line per criterion.
//!
//! Runs as a plain binary so each criterion reports on its own line even
//! when an earlier one fails. Exits non-zero when any criterion fails.

use std::time::{Duration, Instant};

use foml::coalesce::{coalesce_obligation_fol, coalesce_obligation_ml, FolOptions, FolSequent, MlTranslation};
use foml::fuzz::{self, Property, Scale};
use foml::leibniz::compute_leibniz;
use foml::par::Exec;
use foml::prime::{safety_obligations, SafetyProblem};
use foml::prover::oracle::{formulas_up_to, refutable, Family, NodeSequent};
use foml::prover::{is_countermodel, prove_ml, Frame, Frames, Limits, MlSequent, Verdict};
use foml::semantics::search::{enumerate_models, Signature};
use foml::semantics::{find_countermodel, find_fol_countermodel, holds, holds_everywhere, Bounds};
use foml::syntax::print::pretty;
use foml::syntax::{expand_definitions, parse_problem, parse_problem_file, Expr, Obligation};

/// Wall-clock limit for each golden example.
const GOLDEN_LIMIT: Duration = Duration::from_secs(1);
/// Random instances for the witness properties.
const WITNESS_ITERS: u64 = 10_000;
/// Random instances for the argument lemmas and the refutation lifting.
const LEMMA_ITERS: u64 = 1_000;
/// Allowed discrepancies in every randomized check.
const MAX_DISCREPANCIES: usize = 0;
/// Exhaustive validity bounds.
const ORACLE_UNIVERSE: usize = 2;
const ORACLE_STATES: usize = 2;
/// States of the enumeration the prover is compared with.
const PROVER_ORACLE_STATES: usize = 3;
/// Minimum size of the prover sweep.
const PROVER_SWEEP_MIN: usize = 2_000;
/// Bounded search for the safety obligations.
const SAFETY_UNIVERSE: usize = 3;
const SEED: u64 = 1;

const COUNTER: &str = include_str!("../../../problems/counter.foml");
const BARCAN: &str = "(declare-op P 2) (declare-flex v) (goal (iff (forall x (nabla (P x v))) (nabla (forall x (P x v)))))";
const RIGID_BOX: &str = "(goal (forall (x y) (=> (= x y) (nabla (= x y)))))";
const FLEX_BOX: &str = "(declare-flex v) (goal (=> (= v 0) (nabla (= v 0))))";
const EX_BOX: &str = "(declare-flex v) (goal (iff (exists (x z) (nabla (= v x))) (exists y (nabla (= v y)))))";
const BOUND_BOX: &str = "(goal (forall a (=> (nabla (= a 1)) (= a 1))))";
const BOX_EQ: &str = "(declare-rigid x y) (goal (=> (and (= x y) (nabla (delta true))) (nabla (delta (= x y)))))";
const CST: &str = "(define (cst x) (exists y (nabla (= x y))))";

type Outcome = Result<String, String>;
type Criterion = fn() -> Outcome;
type Check = Box<dyn Fn() -> Result<(), String>>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn problem(src: &str) -> Obligation {
    parse_problem(src).unwrap_or_else(|e| panic!("{src}: {e}"))
}

fn fol(src: &str) -> FolSequent {
    coalesce_obligation_fol(&problem(src), FolOptions::default())
}

/// Fresh symbols renamed `C0, C1, ...` in table order.
fn fol_text(s: &FolSequent, e: &Expr) -> String {
    let mut text = pretty(e);
    for (i, entry) in s.table.entries().iter().enumerate().rev() {
        text = text.replace(&entry.name, &format!("C{i}"));
    }
    text
}

/// Fresh atoms renamed `A0, A1, ...` in table order.
fn ml_text(t: &MlTranslation, e: &Expr) -> String {
    let mut text = pretty(e);
    for (i, entry) in t.table.entries().iter().enumerate().rev() {
        text = text.replace(&entry.name, &format!("A{i}"));
    }
    text
}

fn expect_text(what: &str, got: String, want: &str) -> Result<(), String> {
    ensure(got == want, || format!("{what}: got {got}, want {want}"))
}

fn golden() -> Outcome {
    let cases: Vec<(&str, Check)> = vec![
        ("flexible box, first-order", Box::new(|| {
            let s = fol(FLEX_BOX);
            expect_text("goal", fol_text(&s, &s.goal), "(=> (= v 0) C0)")?;
            ensure(s.table.len() == 1 && s.table.entries()[0].arity() == 0, || "one 0-ary symbol".into())
        })),
        ("flexible box, modal", Box::new(|| {
            let t = coalesce_obligation_ml(&problem(FLEX_BOX));
            expect_text("goal", ml_text(&t, &t.goal), "(=> A0 (nabla A0))")?;
            ensure(t.rigidity.is_empty(), || "no rigidity hypothesis expected".into())
        })),
        ("renamed binders share a symbol", Box::new(|| {
            let s = fol(EX_BOX);
            expect_text("goal", fol_text(&s, &s.goal), "(iff (exists x (exists z (C0 x))) (exists y (C0 y)))")?;
            ensure(s.table.len() == 1 && s.table.entries()[0].arity() == 1, || "one arity-1 symbol".into())
        })),
        ("bound variable is abstracted", Box::new(|| {
            let s = fol(BOUND_BOX);
            expect_text("goal", fol_text(&s, &s.goal), "(forall a (=> (C0 a) (= a 1)))")
        })),
        ("rigid equality, modal", Box::new(|| {
            let t = coalesce_obligation_ml(&problem(BOX_EQ));
            expect_text("goal", ml_text(&t, &t.goal), "(=> (and A0 (nabla (delta true))) (nabla (delta A0)))")?;
            ensure(t.table.len() == 1 && t.rigidity.len() == 1, || "one atom, one hypothesis".into())?;
            expect_text("hypothesis", ml_text(&t, &t.rigidity[0]), "(=> A0 (nabla A0))")
        })),
        ("cst on flexible arguments", Box::new(|| {
            let s = fol(&format!("(declare-flex u v) {CST} (goal (=> (= u v) (iff (cst u) (cst v))))"));
            expect_text("goal", fol_text(&s, &s.goal), "(=> (= u v) (iff (C0 u) (C1 v)))")?;
            ensure(s.table.len() == 2, || "two distinct symbols".into())
        })),
        ("cst on rigid arguments", Box::new(|| {
            let s = fol(&format!("{CST} (goal (forall (x y) (=> (= x y) (iff (cst x) (cst y)))))"));
            expect_text("goal", fol_text(&s, &s.goal), "(forall x (forall y (=> (= x y) (iff (C0 x) (C0 y)))))")?;
            ensure(s.table.len() == 1, || "one shared symbol".into())
        })),
        ("Leibniz table of cst", Box::new(|| {
            let ob = problem(&format!("{CST} (goal true)"));
            let t = compute_leibniz(&ob.env);
            ensure(t.get("cst") == Some(&[false][..]), || format!("got {:?}", t.get("cst")))
        })),
    ];
    let mut slowest = Duration::ZERO;
    for (name, case) in &cases {
        let t = Instant::now();
        case().map_err(|e| format!("{name}: {e}"))?;
        let dt = t.elapsed();
        ensure(dt < GOLDEN_LIMIT, || format!("{name}: took {dt:?}"))?;
        slowest = slowest.max(dt);
    }
    Ok(format!("{} examples, slowest {slowest:?}", cases.len()))
}

#[allow(clippy::absurd_extreme_comparisons)]
fn randomized(props: &[Property], iters: u64) -> Outcome {
    let t = Instant::now();
    let report = fuzz::run(props, SEED, 0, iters, Scale::default(), Exec::Parallel);
    let n = report.discrepancies.len();
    ensure(n <= MAX_DISCREPANCIES, || {
        format!("{n} discrepancies, first {}", report.first().unwrap())
    })?;
    Ok(format!("{} checks, {n} discrepancies, {:?}", report.checks, t.elapsed()))
}

/// Holds at every state of every model within the bounds, by two routes:
/// the countermodel search and a direct sweep of the enumeration.
fn valid_everywhere(src: &str) -> Result<usize, String> {
    let ob = problem(src);
    let bounds = Bounds::new(ORACLE_UNIVERSE, ORACLE_STATES);
    if let Some(c) = find_countermodel(&ob, &bounds).map_err(|e| e.to_string())? {
        return Err(format!("countermodel at s{}", c.state));
    }
    let goal = expand_definitions(&ob.goal, &ob.env);
    let models = enumerate_models(&Signature::of([&goal]), &bounds).map_err(|e| e.to_string())?;
    for m in &models {
        if !holds_everywhere(m, &goal, &ob.env).map_err(|e| e.to_string())? {
            return Err("enumeration found a refuting model".into());
        }
    }
    Ok(models.len())
}

fn oracle() -> Outcome {
    let barcan = valid_everywhere(BARCAN).map_err(|e| format!("Barcan: {e}"))?;
    let rigid = valid_everywhere(RIGID_BOX).map_err(|e| format!("rigid box: {e}"))?;
    let ob = problem(FLEX_BOX);
    let c = find_countermodel(&ob, &Bounds::new(ORACLE_UNIVERSE, ORACLE_STATES))
        .map_err(|e| e.to_string())?
        .ok_or("flexible box not refuted")?;
    ensure(c.model.state_count() <= ORACLE_STATES, || "countermodel too large".into())?;
    let refutes = !holds(&c.model, c.state, &ob.goal, &ob.env).map_err(|e| e.to_string())?;
    ensure(refutes, || "reported countermodel satisfies the goal".into())?;
    Ok(format!(
        "Barcan on {barcan} models, rigid box on {rigid} models, flexible box refuted with {} states",
        c.model.state_count()
    ))
}

fn prover() -> Outcome {
    let t = coalesce_obligation_ml(&problem(BOX_EQ));
    let frames = Frames::default();
    let with = MlSequent {
        hypotheses: t.all_hypotheses(),
        goal: t.goal.clone(),
        frames,
    };
    let without = MlSequent {
        hypotheses: t.hypotheses.clone(),
        goal: t.goal.clone(),
        frames,
    };
    let v = prove_ml(&with, Limits::default()).map_err(|e| e.to_string())?;
    ensure(v == Verdict::Proved, || format!("with hypothesis: {v:?}"))?;
    match prove_ml(&without, Limits::default()).map_err(|e| e.to_string())? {
        Verdict::Countermodel { model, state } => {
            let ok = is_countermodel(&without, &model, state).map_err(|e| e.to_string())?;
            ensure(ok, || "countermodel does not refute".into())?;
        }
        v => return Err(format!("without hypothesis: {v:?}")),
    }

    let mut cases: Vec<(Vec<Expr>, Expr)> = formulas_up_to(&["p", "q"], 6, 2)
        .into_iter()
        .map(|g| (vec![], g))
        .collect();
    let small = formulas_up_to(&["p", "q"], 4, 2);
    for h in &small {
        for g in &small {
            cases.push((vec![h.clone()], g.clone()));
        }
    }
    ensure(cases.len() >= PROVER_SWEEP_MIN, || format!("only {} cases", cases.len()))?;
    let mut fam = Family::new();
    let seqs: Vec<NodeSequent> = cases
        .iter()
        .map(|(h, g)| NodeSequent {
            hypotheses: h.iter().map(|x| fam.add(x)).collect(),
            goal: fam.add(g),
        })
        .collect();
    let mut total = 0;
    for frame in [Frame::K, Frame::T, Frame::K4, Frame::S4] {
        let frames = Frames { nabla: frame, prime: Frame::K };
        let refuted = refutable(&fam, &seqs, PROVER_ORACLE_STATES, frames, Exec::Parallel);
        for ((h, g), r) in cases.iter().zip(refuted) {
            let s = MlSequent {
                hypotheses: h.clone(),
                goal: g.clone(),
                frames,
            };
            let v = prove_ml(&s, Limits::default()).map_err(|e| e.to_string())?;
            let agrees = match v {
                Verdict::Proved => !r,
                Verdict::Countermodel { .. } => r,
                Verdict::ResourceOut => false,
            };
            ensure(agrees, || format!("{frame}: {} |- {}: {v:?}", h.len(), pretty(g)))?;
            total += 1;
        }
    }
    Ok(format!("box-eq proved with H, refuted without; {total} sequents agree with enumeration"))
}

fn safety() -> Outcome {
    let pf = parse_problem_file(COUNTER).map_err(|e| e.to_string())?;
    ensure(pf.env.flex_vars().len() == 2, || "counter must have two flexible variables".into())?;
    let p = SafetyProblem::from_file(pf).map_err(|e| e.to_string())?;
    let obs = safety_obligations(&p).map_err(|e| e.to_string())?;
    let primed = obs.consecution.goal.any(&|e| matches!(e, Expr::Flex(v) if v.ends_with('\'')));
    ensure(primed, || "consecution mentions no primed variable".into())?;
    let bounds = Bounds::new(SAFETY_UNIVERSE, 1);
    for (name, ob) in [
        ("initiation", &obs.initiation),
        ("consecution", &obs.consecution),
        ("conclusion", &obs.conclusion),
    ] {
        let found = find_fol_countermodel(&ob.hypotheses, &ob.goal, &bounds).map_err(|e| e.to_string())?;
        ensure(found.is_none(), || format!("{name} has a countermodel"))?;
    }
    let lift = randomized(&[Property::ActionLift], LEMMA_ITERS)?;
    Ok(format!("three obligations valid up to {SAFETY_UNIVERSE} elements; lifting: {lift}"))
}

fn incompleteness() -> Outcome {
    let ob = problem(BARCAN);
    let t = coalesce_obligation_ml(&ob);
    for frame in [Frame::K, Frame::S4] {
        let s = MlSequent {
            hypotheses: t.all_hypotheses(),
            goal: t.goal.clone(),
            frames: Frames { nabla: frame, prime: Frame::K },
        };
        let v = prove_ml(&s, Limits::default()).map_err(|e| e.to_string())?;
        ensure(matches!(v, Verdict::Countermodel { .. }), || format!("Barcan in {frame}: {v:?}"))?;
    }
    let bounds = Bounds::new(ORACLE_UNIVERSE, 1);
    let s = coalesce_obligation_fol(&ob, FolOptions::default());
    let barcan = find_fol_countermodel(&s.hypotheses, &s.goal, &bounds).map_err(|e| e.to_string())?;
    ensure(barcan.is_some(), || "coalesced Barcan is first-order valid within bounds".into())?;
    let s = fol(&format!("(declare-flex u v) {CST} (goal (=> (= u v) (iff (cst u) (cst v))))"));
    let cst = find_fol_countermodel(&s.hypotheses, &s.goal, &bounds).map_err(|e| e.to_string())?;
    ensure(cst.is_some(), || "flexible cst obligation has no countermodel".into())?;
    Ok("Barcan unprovable in both translations; flexible cst refuted".into())
}

fn main() {
    let criteria: [(&str, Criterion); 8] = [
        ("golden examples", golden),
        ("first-order witness", || randomized(&[Property::FolWitness], WITNESS_ITERS)),
        ("modal witness", || randomized(&[Property::MlWitness], WITNESS_ITERS)),
        ("validity oracle", oracle),
        ("argument lemmas", || {
            randomized(&[Property::RigidArgument, Property::LeibnizArgument], LEMMA_ITERS)
        }),
        ("modal prover", prover),
        ("prime pipeline", safety),
        ("incompleteness", incompleteness),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(detail) => println!("criterion {} ({name}): PASS  {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {} ({name}): FAIL  {detail}", i + 1);
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
