use std::path::Path;

use foml::coalesce::{coalesce_obligation_fol, FolOptions};
use foml::prime::action_obligation;
use foml::semantics::{find_countermodel, find_fol_countermodel, Bounds};
use foml::syntax::{parse_problem, Mode, Obligation};

fn load(name: &str) -> Obligation {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../problems").join(name);
    let text = std::fs::read_to_string(&path).unwrap();
    parse_problem(&text).unwrap_or_else(|e| panic!("{name}: {e}"))
}

/// Modal validity within small bounds, and whether the first-order
/// coalescing is refuted.
fn verdicts(name: &str) -> (bool, bool) {
    let ob = load(name);
    let bounds = Bounds::new(2, 2);
    let valid = find_countermodel(&ob, &bounds).unwrap().is_none();
    let fo = if ob.mode == Mode::Action {
        action_obligation(&ob).unwrap().0
    } else {
        let s = coalesce_obligation_fol(&ob, FolOptions::default());
        Obligation::new(ob.env.clone(), s.hypotheses, s.goal)
    };
    let refuted = find_fol_countermodel(&fo.hypotheses, &fo.goal, &Bounds::new(2, 1))
        .unwrap()
        .is_some();
    (valid, refuted)
}

#[test]
fn problem_files() {
    for (name, valid, refuted) in [
        ("eq3.foml", true, false),
        ("not-box.foml", false, true),
        ("box-eq.foml", true, true),
        ("cst-flex.foml", false, true),
        ("cst-rigid.foml", true, false),
        ("barcan.foml", true, true),
        ("step.foml", true, false),
    ] {
        assert_eq!(verdicts(name), (valid, refuted), "{name}");
    }
}

#[test]
fn counter_is_a_safety_problem() {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../problems/counter.foml");
    let pf = foml::syntax::parse_problem_file(&std::fs::read_to_string(path).unwrap()).unwrap();
    assert!(pf.goal.is_none());
    assert!(pf.init.is_some() && pf.next.is_some() && pf.inv.is_some() && pf.iinv.is_some());
}
