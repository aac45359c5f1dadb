//! Solver correctness against exhaustive positional-strategy enumeration.

use comu::pgame::{brute, solve, ParityArena, Player};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_arena(rng: &mut ChaCha8Rng, max_positions: usize, max_priority: u32) -> ParityArena {
    let n = rng.gen_range(1..=max_positions);
    let mut a = ParityArena::new();
    for _ in 0..n {
        let owner = if rng.gen_bool(0.5) {
            Player::Exists
        } else {
            Player::Forall
        };
        a.add_position(owner, rng.gen_range(0..=max_priority));
    }
    for i in 0..n as u32 {
        let degree = rng.gen_range(0..=3usize);
        for _ in 0..degree {
            let to = rng.gen_range(0..n as u32);
            a.add_move(i, to);
        }
    }
    a
}

#[test]
fn agrees_with_brute_force_on_random_arenas() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    for round in 0..150 {
        let arena = random_arena(&mut rng, 7, 3);
        let sol = solve(&arena);
        let expected = brute::winners(&arena);
        assert_eq!(sol.winner, expected, "round {round}\n{}", arena.dump());
    }
}

#[test]
fn extracted_strategies_win_their_regions() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xbead);
    for round in 0..100 {
        let arena = random_arena(&mut rng, 7, 3);
        let sol = solve(&arena);
        for player in [Player::Exists, Player::Forall] {
            assert!(
                brute::strategy_is_winning(&arena, &sol.winner, player, sol.strategy(player)),
                "round {round}, player {player}\n{}",
                arena.dump()
            );
        }
    }
}

#[test]
fn priority_shift_duality() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xd0d0);
    for _ in 0..100 {
        let arena = random_arena(&mut rng, 7, 3);
        let mut dual = ParityArena::new();
        for (_, p) in arena.positions() {
            dual.add_position(p.owner.opponent(), p.priority + 1);
        }
        for (i, p) in arena.positions() {
            for &m in &p.moves {
                dual.add_move(i, m);
            }
        }
        let sol = solve(&arena);
        let dual_sol = solve(&dual);
        for i in 0..arena.len() {
            assert_eq!(sol.winner[i].opponent(), dual_sol.winner[i]);
        }
    }
}
