use criterion::{black_box, criterion_group, criterion_main, Criterion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use comu::gen::{random_model, FormulaGen};
use comu::logic::Logic;
use comu::parse::parse;
use comu::pgame::{solve, ParityArena, Player};
use comu::semantics::eval;
use comu::session::Bounds;
use comu::tabgame::decide_sat;

fn bench_decide(c: &mut Criterion) {
    let mut group = c.benchmark_group("decide_sat");
    let cases = [
        ("kripke_alternation", Logic::Kripke, "nu X. (mu Y. p | dia Y) & box X"),
        ("kripke_unsat", Logic::Kripke, "(nu X. p & dia X) & (nu Y. ~p & box Y)"),
        (
            "coalition_example",
            Logic::Coalition { agents: 3 },
            "[{1}] (nu X. p & <{1,2,3}> X) & [{2}] (mu Y. ~p | [{2}] Y)",
        ),
        ("graded_sat", Logic::Graded, "mu X. p | <1> X"),
        ("prob_unsat", Logic::Probabilistic, "<1/2> p & <2/3> ~p"),
    ];
    for (name, logic, text) in cases {
        let f = parse(text, logic).unwrap();
        group.bench_function(name, |b| {
            b.iter(|| decide_sat(black_box(&f), logic, Bounds::default()).unwrap().verdict)
        });
    }
    group.finish();
}

fn bench_parity_solver(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let n = 2000;
    let mut arena = ParityArena::new();
    for _ in 0..n {
        let owner = if rng.gen_bool(0.5) { Player::Exists } else { Player::Forall };
        arena.add_position(owner, rng.gen_range(0..6));
    }
    for i in 0..n as u32 {
        for _ in 0..rng.gen_range(1..=3usize) {
            let t = rng.gen_range(0..n as u32);
            arena.add_move(i, t);
        }
    }
    c.bench_function("zielonka_2000_positions", |b| {
        b.iter(|| solve(black_box(&arena)).winner[0])
    });
}

fn bench_eval(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let model = random_model(&mut rng, Logic::Kripke, 8, &["p", "q"]);
    let cfg = FormulaGen::new(Logic::Kripke);
    let f = comu::gen::random_formula_bounded(&mut rng, &cfg, 20);
    c.bench_function("eval_fixpoint_8_states", |b| {
        b.iter(|| eval(black_box(&model), black_box(&f)).unwrap())
    });
}

criterion_group!(benches, bench_decide, bench_parity_solver, bench_eval);
criterion_main!(benches);
