//! Semantics: evaluation, liftings, model JSON, and game adequacy.

use comu::formula::Formula;
use comu::gen::{random_formula_bounded, random_model, FormulaGen};
use comu::logic::{Logic, Modality, Rational};
use comu::model_json::{from_json, to_json};
use comu::parse::parse;
use comu::semantics::{
    check_via_game, eval, lifting_member, CoalgebraModel, StateStructure,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn kripke_model(transitions: &[u64], valuation: &[(&str, u64)]) -> CoalgebraModel {
    let model = CoalgebraModel {
        logic: Logic::Kripke,
        states: (0..transitions.len()).map(|i| format!("s{i}")).collect(),
        valuation: valuation
            .iter()
            .map(|(k, v)| (k.to_string(), *v))
            .collect(),
        structure: transitions
            .iter()
            .map(|t| StateStructure::Kripke(*t))
            .collect(),
        root: None,
    };
    model.validate().unwrap();
    model
}

#[test]
fn lifting_examples() {
    // kripke box: {x} ⊆ {x,y}
    let v = StateStructure::Kripke(0b01);
    assert!(lifting_member(&v, Modality::Box, 0b11, 0b11).unwrap());
    assert!(!lifting_member(&v, Modality::Box, 0b10, 0b11).unwrap());
    // graded <1>: multiset {x:1, y:1} has 2 > 1 elements in {x,y}, 1 in {x}
    let v = StateStructure::Graded(vec![(0, 1), (1, 1)]);
    assert!(lifting_member(&v, Modality::GradedDia(1), 0b11, 0b11).unwrap());
    assert!(!lifting_member(&v, Modality::GradedDia(1), 0b01, 0b11).unwrap());
    // monotone box: family generated by {{x}} contains {x,y} by upward closure
    let v = StateStructure::Monotone(vec![0b01]);
    assert!(lifting_member(&v, Modality::Box, 0b11, 0b11).unwrap());
    assert!(!lifting_member(&v, Modality::Box, 0b10, 0b11).unwrap());
}

#[test]
fn eval_base_and_fixpoints() {
    // states {x,y}, x→{x}, y→{}, h(p)={x}: eval(nu X.(p ∧ ◇X)) = {x}
    let model = kripke_model(&[0b01, 0b00], &[("p", 0b01)]);
    let f = parse("p", Logic::Kripke).unwrap();
    assert_eq!(eval(&model, &f).unwrap(), 0b01);

    let f = parse("nu X. p & dia X", Logic::Kripke).unwrap();
    assert_eq!(eval(&model, &f).unwrap(), 0b01);

    // mu X. dia X is empty on every kripke model
    let f = parse("mu X. dia X", Logic::Kripke).unwrap();
    assert_eq!(eval(&model, &f).unwrap(), 0);
    let model2 = kripke_model(&[0b11, 0b01], &[]);
    assert_eq!(eval(&model2, &f).unwrap(), 0);
}

#[test]
fn eval_respects_negation() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for logic in [
        Logic::Kripke,
        Logic::Graded,
        Logic::Probabilistic,
        Logic::Coalition { agents: 2 },
        Logic::Monotone,
    ] {
        let cfg = FormulaGen::new(logic);
        for _ in 0..40 {
            let f = random_formula_bounded(&mut rng, &cfg, 10);
            let model = random_model(&mut rng, logic, 3, &["p", "q"]);
            let pos = eval(&model, &f).unwrap();
            let neg = eval(&model, &f.negate()).unwrap();
            assert_eq!(
                neg,
                model.all_states() & !pos,
                "negation duality failed for {f} ({logic})"
            );
        }
    }
}

#[test]
fn lifting_monotone_in_argument() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    use rand::Rng;
    for logic in [
        Logic::Kripke,
        Logic::Graded,
        Logic::Probabilistic,
        Logic::Coalition { agents: 2 },
        Logic::Monotone,
    ] {
        for _ in 0..60 {
            let model = random_model(&mut rng, logic, 3, &[]);
            let all = model.all_states();
            let u = rng.gen_range(0..=all);
            let extra = rng.gen_range(0..=all);
            let v = u | extra;
            let op = match logic {
                Logic::Kripke | Logic::Monotone => Modality::Box,
                Logic::Graded => Modality::GradedDia(rng.gen_range(0..=2)),
                Logic::Probabilistic => {
                    Modality::ProbDia(Rational::new(1, rng.gen_range(1..=3)))
                }
                Logic::Coalition { .. } => {
                    Modality::CoalBox(comu::logic::AgentSet::from_agents([1]))
                }
            };
            for s in &model.structure {
                if lifting_member(s, op, u, all).unwrap() {
                    assert!(
                        lifting_member(s, op, v, all).unwrap(),
                        "monotonicity failed for {op} ({logic})"
                    );
                }
            }
        }
    }
}

#[test]
fn game_positions_match_table() {
    use comu::closure::{Closure, PriorityMap};
    use comu::pgame::{solve, Player};
    use comu::semantics::{build_mc_game, McPosition};
    use comu::sequent::Sequent;

    let model = kripke_model(&[0b01, 0b00], &[("p", 0b01)]);
    let f = parse("p & dia p", Logic::Kripke).unwrap();
    let cl = Closure::build(&Sequent::singleton(f.clone()));
    let pm = PriorityMap::build(&cl);
    let fid = cl.lookup(&f).unwrap();
    let game = build_mc_game(&model, &cl, &pm, &[(fid, 0)], 5).unwrap();
    let sol = solve(&game.arena);
    // (p ∧ ◇p, x) is won by Exists: x ⊨ p and x→x.
    let root = game.position_id(McPosition::Formula(fid, 0)).unwrap();
    assert_eq!(sol.winner[root as usize], Player::Exists);
    // (p, x) with x ∈ h(p) is a Forall dead end.
    let pid = cl.lookup(&parse("p", Logic::Kripke).unwrap()).unwrap();
    let ppos = game.position_id(McPosition::Formula(pid, 0)).unwrap();
    assert_eq!(game.arena.position(ppos).owner, Player::Forall);
    assert!(game.arena.position(ppos).moves.is_empty());
}

#[test]
fn adequacy_on_random_pairs() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for logic in [
        Logic::Kripke,
        Logic::Graded,
        Logic::Probabilistic,
        Logic::Coalition { agents: 2 },
        Logic::Monotone,
    ] {
        let cfg = FormulaGen::new(logic);
        for _ in 0..25 {
            let f = random_formula_bounded(&mut rng, &cfg, 8);
            let model = random_model(&mut rng, logic, 3, &["p", "q"]);
            let direct = eval(&model, &f).unwrap();
            let via_game = check_via_game(&model, &f, 5).unwrap();
            assert_eq!(direct, via_game, "adequacy failed for {f} ({logic})");
        }
    }
}

#[test]
fn model_json_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for logic in [
        Logic::Kripke,
        Logic::Graded,
        Logic::Probabilistic,
        Logic::Coalition { agents: 3 },
        Logic::Monotone,
    ] {
        for _ in 0..20 {
            let model = random_model(&mut rng, logic, 3, &["p", "q"]);
            let text = to_json(&model);
            let back = from_json(&text).unwrap();
            assert_eq!(model.states, back.states);
            assert_eq!(model.valuation, back.valuation);
            assert_eq!(model.structure, back.structure);
            // semantic agreement on a few formulas
            let cfg = FormulaGen::new(logic);
            let f = random_formula_bounded(&mut rng, &cfg, 8);
            assert_eq!(eval(&model, &f).unwrap(), eval(&back, &f).unwrap());
        }
    }
}

#[test]
fn model_json_rejects_unknown_fields_and_bad_mass() {
    let bad = r#"{"kind":"kripke","states":["s0"],"valuation":{},"transitions":{"s0":[]},"extra":1}"#;
    assert!(from_json(bad).is_err());
    let bad_mass = r#"{"kind":"probabilistic","states":["s0"],"valuation":{},"dist":{"s0":{"s0":"1/2"}}}"#;
    assert!(from_json(bad_mass).is_err());
}

#[test]
fn uncovered_variable_errors() {
    let model = kripke_model(&[0b1], &[]);
    let f = Formula::var("zzz");
    assert!(eval(&model, &f).is_err());
}
