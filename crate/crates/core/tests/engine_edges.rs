//! Edge cases across the engine: concurrency contract, play evaluation
//! against extracted strategies, verifier rejections, determinism, caps.

use comu::cert::{tableau_to_json, verify_closed};
use comu::logic::Logic;
use comu::model_json::to_json;
use comu::parse::parse;
use comu::pgame::{evaluate_play, solve, Lasso, ParityArena, Player};
use comu::sequent::Sequent;
use comu::session::{Bounds, Session};
use comu::tabgame::{decide_sat, Verdict};
use comu::trace::TraceAutomaton;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn automaton_lookups_are_serializable_across_threads() {
    let logic = Logic::Kripke;
    let f = parse("mu X. p | dia (X & (q | ~q))", logic).unwrap();
    let root = Sequent::singleton(f);
    let mut session = Session::new(logic, &root, Bounds::default()).unwrap();
    // pre-collect a batch of (state, tile, relation) probes single-threaded
    let dta = TraceAutomaton::new(&session);
    let mut probes = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..10 {
        if let Some((stem, cycle)) = comu::gen::random_tile_lasso(&mut rng, &mut session, 12) {
            for t in stem.into_iter().chain(cycle) {
                probes.push((t, session.tile_relation(t)));
            }
        }
    }
    assert!(!probes.is_empty());
    let expected: Vec<u32> = probes
        .iter()
        .map(|(t, rel)| dta.step(dta.initial(), *t, || rel.clone()).unwrap())
        .collect();
    // concurrent lookups must agree with the serial ones
    std::thread::scope(|scope| {
        for _ in 0..4 {
            scope.spawn(|| {
                for ((t, rel), want) in probes.iter().zip(&expected) {
                    let got = dta.step(dta.initial(), *t, || rel.clone()).unwrap();
                    assert_eq!(got, *want);
                }
            });
        }
    });
}

#[test]
fn evaluate_play_agrees_with_solved_strategies() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xfade);
    for _ in 0..200 {
        let n = rng.gen_range(1..=7usize);
        let mut arena = ParityArena::new();
        for _ in 0..n {
            let owner = if rng.gen_bool(0.5) { Player::Exists } else { Player::Forall };
            arena.add_position(owner, rng.gen_range(0..4));
        }
        for i in 0..n as u32 {
            for _ in 0..rng.gen_range(1..=3usize) {
                arena.add_move(i, rng.gen_range(0..n as u32));
            }
        }
        let sol = solve(&arena);
        // follow both extracted strategies from each position: the resulting
        // lasso must be won by the position's winner
        for start in 0..n as u32 {
            let winner = sol.winner[start as usize];
            let mut seen = vec![usize::MAX; n];
            let mut path = Vec::new();
            let mut cur = start;
            loop {
                if seen[cur as usize] != usize::MAX {
                    let split = seen[cur as usize];
                    let lasso = Lasso {
                        stem: path[..split].to_vec(),
                        cycle: path[split..].to_vec(),
                    };
                    assert_eq!(evaluate_play(&arena, &lasso).unwrap(), winner);
                    break;
                }
                seen[cur as usize] = path.len();
                path.push(cur);
                let owner = arena.position(cur).owner;
                match sol.strategy(owner)[cur as usize] {
                    Some(next) => cur = next,
                    None => break, // dead end: owner loses, no lasso to check
                }
            }
        }
    }
}

#[test]
fn verifier_rejects_certificate_for_a_different_formula() {
    let logic = Logic::Kripke;
    let f = parse("mu X. dia X", logic).unwrap();
    let out = decide_sat(&f, logic, Bounds::default()).unwrap();
    assert_eq!(out.verdict, Verdict::Unsat);
    let tableau = out.tableau.unwrap();
    let other = parse("p & ~p", logic).unwrap();
    let err = verify_closed(&tableau, &other, logic, Bounds::default()).unwrap_err();
    assert!(err.to_string().contains("root label"), "{err}");
}

#[test]
fn verdicts_and_certificates_are_deterministic() {
    let logic = Logic::Coalition { agents: 3 };
    let f = parse(
        "[{1}] (nu X. p & <{1,2,3}> X) & [{2}] (mu Y. ~p | [{2}] Y)",
        logic,
    )
    .unwrap();
    let a = decide_sat(&f, logic, Bounds::default()).unwrap();
    let b = decide_sat(&f, logic, Bounds::default()).unwrap();
    assert_eq!(
        tableau_to_json(a.tableau.as_ref().unwrap(), logic),
        tableau_to_json(b.tableau.as_ref().unwrap(), logic)
    );
    let logic = Logic::Kripke;
    let f = parse("(dia p) & (dia ~p) & box (p | ~p)", logic).unwrap();
    let a = decide_sat(&f, logic, Bounds::default()).unwrap();
    let b = decide_sat(&f, logic, Bounds::default()).unwrap();
    assert_eq!(
        to_json(a.model.as_ref().unwrap()),
        to_json(b.model.as_ref().unwrap())
    );
}

#[test]
fn model_state_cap_is_enforced() {
    use comu::closure::{Closure, PriorityMap};
    use comu::gen::random_model;
    use comu::semantics::build_mc_game;
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let model = random_model(&mut rng, Logic::Kripke, 7, &["p"]);
    let f = parse("box p", Logic::Kripke).unwrap();
    let cl = Closure::build(&Sequent::singleton(f.clone()));
    let pm = PriorityMap::build(&cl);
    let fid = cl.lookup(&f).unwrap();
    let err = build_mc_game(&model, &cl, &pm, &[(fid, 0)], 5);
    assert!(err.is_err());
}

#[test]
fn position_ceiling_is_a_clean_error() {
    let logic = Logic::Kripke;
    let f = parse("mu X. p | dia (X & dia (q | X))", logic).unwrap();
    let bounds = Bounds {
        max_positions: 3,
        ..Default::default()
    };
    let err = match decide_sat(&f, logic, bounds) {
        Err(e) => e,
        Ok(_) => panic!("expected the position ceiling to trip"),
    };
    assert!(err.to_string().contains("ceiling"), "{err}");
}

#[test]
fn substitution_respects_shadowing() {
    use comu::formula::Formula;
    // substituting X inside a binder that rebinds X leaves the body alone
    let inner = Formula::mu("X", Formula::modal(comu::logic::Modality::Dia, Formula::var("X")));
    let outer = Formula::and(Formula::var("X"), inner.clone());
    let replaced = outer.substitute("X", &Formula::var("q"));
    assert_eq!(
        replaced,
        Formula::and(Formula::var("q"), inner)
    );
}
