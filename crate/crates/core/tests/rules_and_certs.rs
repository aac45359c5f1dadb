//! Rule-conclusion examples, certificate rejection shapes, and
//! zero-conclusion refuters.

use comu::cert::{tableau_from_json, verify_closed};
use comu::logic::Logic;
use comu::parse::parse;
use comu::sequent::Sequent;
use comu::session::{Blueprint, Bounds, Session};
use comu::tabgame::{decide_sat, Verdict};

#[test]
fn disjunction_conclusions_in_order() {
    // ρ({A∨B, C}, A∨B) = ({A,C}, {B,C})
    let logic = Logic::Kripke;
    let root = Sequent::new(vec![
        parse("a | b", logic).unwrap(),
        parse("c", logic).unwrap(),
    ]);
    let mut session = Session::new(logic, &root, Bounds::default()).unwrap();
    let seq = session.root_seq();
    let bps = session.blueprints_for(seq);
    let disj = bps
        .iter()
        .copied()
        .find(|&b| matches!(session.blueprint(b), Blueprint::Disj(_)))
        .unwrap();
    let conclusions = session.conclusions(seq, disj);
    assert_eq!(conclusions.len(), 2);
    let left = session.to_sequent(conclusions[0]);
    let right = session.to_sequent(conclusions[1]);
    assert_eq!(
        left,
        Sequent::new(vec![parse("a", logic).unwrap(), parse("c", logic).unwrap()])
    );
    assert_eq!(
        right,
        Sequent::new(vec![parse("b", logic).unwrap(), parse("c", logic).unwrap()])
    );
}

#[test]
fn unfolding_conclusion_substitutes() {
    // ρ({μX.◇X}, fix) = ({◇(μX.◇X)})
    let logic = Logic::Kripke;
    let f = parse("mu X. dia X", logic).unwrap();
    let root = Sequent::singleton(f.clone());
    let mut session = Session::new(logic, &root, Bounds::default()).unwrap();
    let seq = session.root_seq();
    let unfold = session.blueprints_for(seq)[0];
    let conclusions = session.conclusions(seq, unfold);
    assert_eq!(conclusions.len(), 1);
    assert_eq!(
        session.to_sequent(conclusions[0]),
        Sequent::singleton(f.unfold().unwrap())
    );
}

#[test]
fn axiom_has_no_conclusions() {
    let logic = Logic::Kripke;
    let root = Sequent::new(vec![
        parse("p", logic).unwrap(),
        parse("~p", logic).unwrap(),
    ]);
    let mut session = Session::new(logic, &root, Bounds::default()).unwrap();
    let seq = session.root_seq();
    let bps = session.blueprints_for(seq);
    let clash = bps
        .iter()
        .copied()
        .find(|&b| session.blueprint(b).is_clash())
        .unwrap();
    assert!(session.conclusions(seq, clash).is_empty());
}

#[test]
fn contradiction_tableau_is_two_nodes() {
    let logic = Logic::Kripke;
    let f = parse("p & ~p", logic).unwrap();
    let out = decide_sat(&f, logic, Bounds::default()).unwrap();
    let tableau = out.tableau.unwrap();
    assert_eq!(tableau.nodes.len(), 2, "conjunction node plus axiom leaf");
    assert!(tableau.nodes[1].edges.is_empty());
}

/// A hand-built tableau that loops on a greatest fixpoint only: structurally
/// a tableau, but the loop carries no bad trace, so it is not closed.
#[test]
fn nu_only_loop_is_rejected() {
    let logic = Logic::Kripke;
    let f = parse("nu X. dia X", logic).unwrap();
    let json = r#"{
        "root": 0,
        "nodes": [
            {"id": 0, "label": ["nu X. dia X"], "annotation": {"kind": "fix", "principal": "nu X. dia X"}},
            {"id": 1, "label": ["dia (nu X. dia X)"], "annotation": {"kind": "modal", "schema": "K", "dias": [{"atom": "dia (nu X. dia X)"}]}}
        ],
        "edges": [
            {"from": 0, "to": 1, "conclusionIndex": 1},
            {"from": 1, "to": 0, "conclusionIndex": 1}
        ]
    }"#;
    let tableau = tableau_from_json(json, logic).unwrap();
    let err = verify_closed(&tableau, &f, logic, Bounds::default()).unwrap_err();
    assert!(err.to_string().contains("no bad trace"), "{err}");
}

#[test]
fn removed_annotation_is_rejected() {
    let logic = Logic::Kripke;
    let f = parse("(box p) & dia ~p", logic).unwrap();
    let out = decide_sat(&f, logic, Bounds::default()).unwrap();
    assert_eq!(out.verdict, Verdict::Unsat);
    let mut tableau = out.tableau.unwrap();
    // strip the root annotation: successors without an annotation
    tableau.nodes[0].annotation = None;
    let err = verify_closed(&tableau, &f, logic, Bounds::default()).unwrap_err();
    assert!(err.to_string().contains("annotation"), "{err}");
}

#[test]
fn zero_conclusion_probabilistic_refuter() {
    // [0]p is unsatisfiable: a rule instance with an empty conclusion set
    // closes the tableau at the root
    let logic = Logic::Probabilistic;
    let f = parse("[0] p", logic).unwrap();
    let out = decide_sat(&f, logic, Bounds::default()).unwrap();
    assert_eq!(out.verdict, Verdict::Unsat);
    let tableau = out.tableau.unwrap();
    verify_closed(&tableau, &f, logic, Bounds::default()).unwrap();
    assert_eq!(tableau.nodes.len(), 1);
    assert!(tableau.nodes[0].edges.is_empty());
    // the graded [0] reads differently (at most 0 outside): satisfiable
    let g = parse("[0] p", Logic::Graded).unwrap();
    let out = decide_sat(&g, Logic::Graded, Bounds::default()).unwrap();
    assert_eq!(out.verdict, Verdict::Sat);
}

#[test]
fn probability_one_diamond_round_trip() {
    let logic = Logic::Probabilistic;
    let f = parse("<1> p & [1/2] q", logic).unwrap();
    let out = decide_sat(&f, logic, Bounds::default()).unwrap();
    assert_eq!(out.verdict, Verdict::Sat);
    let model = out.model.unwrap();
    let truth = comu::semantics::eval(&model, &f).unwrap();
    assert!(truth & (1 << model.root.unwrap()) != 0);
}

#[test]
fn npw_has_one_extra_state() {
    let logic = Logic::Kripke;
    let f = parse("mu X. p | dia X", logic).unwrap();
    let root = Sequent::singleton(f);
    let session = Session::new(logic, &root, Bounds::default()).unwrap();
    let npw = comu::trace::BadTraceNpw::build(&session);
    assert_eq!(npw.n_states(), session.closure.len() + 1);
}
