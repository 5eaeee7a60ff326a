use foml::par::Exec;
use foml::prover::oracle::{formulas_up_to, refutable, Family, NodeSequent};
use foml::prover::{prove_ml, Frame, Frames, Limits, MlSequent, Verdict};
use foml::syntax::Expr;

fn family() -> Vec<(Vec<Expr>, Expr)> {
    let mut out: Vec<(Vec<Expr>, Expr)> = formulas_up_to(&["p", "q"], 6, 2)
        .into_iter()
        .map(|g| (vec![], g))
        .collect();
    let small = formulas_up_to(&["p", "q"], 4, 2);
    for h in &small {
        for g in &small {
            out.push((vec![h.clone()], g.clone()));
        }
    }
    out
}

fn sweep(frame: Frame) {
    let cases = family();
    let mut fam = Family::new();
    let seqs: Vec<NodeSequent> = cases
        .iter()
        .map(|(h, g)| NodeSequent {
            hypotheses: h.iter().map(|x| fam.add(x)).collect(),
            goal: fam.add(g),
        })
        .collect();
    let frames = Frames { nabla: frame, prime: Frame::K };
    let oracle = refutable(&fam, &seqs, 3, frames, Exec::Parallel);
    let mut bad = Vec::new();
    for ((h, g), refuted) in cases.iter().zip(&oracle) {
        let s = MlSequent { hypotheses: h.clone(), goal: g.clone(), frames };
        let v = prove_ml(&s, Limits::default()).unwrap();
        let agrees = match &v {
            Verdict::Proved => !refuted,
            Verdict::Countermodel { .. } => *refuted,
            Verdict::ResourceOut => false,
        };
        if !agrees {
            bad.push(format!("{h:?} |- {g:?}: {v:?}"));
        }
    }
    assert!(cases.len() > 2000);
    assert!(bad.is_empty(), "{} disagreements in {frame}, first: {}", bad.len(), bad[0]);
}

#[test]
fn agrees_with_enumeration_k() {
    sweep(Frame::K);
}

#[test]
fn agrees_with_enumeration_t() {
    sweep(Frame::T);
}

#[test]
fn agrees_with_enumeration_k4() {
    sweep(Frame::K4);
}

#[test]
fn agrees_with_enumeration_s4() {
    sweep(Frame::S4);
}
