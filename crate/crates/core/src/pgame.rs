//! Finite two-player parity games with positional solving.
//!
//! Convention: an infinite play is won by Exists iff the maximal priority
//! occurring infinitely often is even; a finite play is lost by the player
//! who cannot move. Positions with no moves are encoded directly, not via
//! sink gadgets.

use std::fmt;

#[derive(Clone, Copy, PartialEq, Eq, Debug, Hash)]
pub enum Player {
    Exists,
    Forall,
}

impl Player {
    pub fn opponent(&self) -> Player {
        match self {
            Player::Exists => Player::Forall,
            Player::Forall => Player::Exists,
        }
    }

    /// The player that wins an infinite play whose dominant priority is `p`.
    pub fn winner_of_priority(p: u32) -> Player {
        if p.is_multiple_of(2) {
            Player::Exists
        } else {
            Player::Forall
        }
    }
}

impl fmt::Display for Player {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Player::Exists => write!(f, "Exists"),
            Player::Forall => write!(f, "Forall"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Position {
    pub owner: Player,
    pub priority: u32,
    pub moves: Vec<u32>,
}

/// A finite parity game arena. Positions are indexed densely; moves are
/// adjacency lists.
#[derive(Clone, Debug, Default)]
pub struct ParityArena {
    positions: Vec<Position>,
    initial: u32,
}

impl ParityArena {
    pub fn new() -> ParityArena {
        ParityArena {
            positions: Vec::new(),
            initial: 0,
        }
    }

    pub fn add_position(&mut self, owner: Player, priority: u32) -> u32 {
        let id = self.positions.len() as u32;
        self.positions.push(Position {
            owner,
            priority,
            moves: Vec::new(),
        });
        id
    }

    pub fn add_move(&mut self, from: u32, to: u32) {
        debug_assert!((to as usize) < self.positions.len());
        self.positions[from as usize].moves.push(to);
    }

    pub fn set_initial(&mut self, pos: u32) {
        self.initial = pos;
    }

    pub fn initial(&self) -> u32 {
        self.initial
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn position(&self, id: u32) -> &Position {
        &self.positions[id as usize]
    }

    pub fn positions(&self) -> impl Iterator<Item = (u32, &Position)> {
        self.positions
            .iter()
            .enumerate()
            .map(|(i, p)| (i as u32, p))
    }

    /// Remaps priorities to a contiguous range preserving order and parity.
    pub fn compress_priorities(&mut self) {
        let mut distinct: Vec<u32> = self.positions.iter().map(|p| p.priority).collect();
        distinct.sort_unstable();
        distinct.dedup();
        if distinct.is_empty() {
            return;
        }
        let mut mapping = Vec::with_capacity(distinct.len());
        let mut next = distinct[0] % 2;
        mapping.push(next);
        for w in distinct.windows(2) {
            if w[1] % 2 != next % 2 {
                next += 1;
            }
            mapping.push(next);
        }
        for p in &mut self.positions {
            let idx = distinct.binary_search(&p.priority).unwrap();
            p.priority = mapping[idx];
        }
    }

    fn predecessors(&self) -> Vec<Vec<u32>> {
        let mut preds = vec![Vec::new(); self.positions.len()];
        for (i, p) in self.positions.iter().enumerate() {
            for &m in &p.moves {
                preds[m as usize].push(i as u32);
            }
        }
        preds
    }

    /// Line-oriented debug dump: one line per position with owner, priority
    /// and successor list.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for (i, p) in self.positions.iter().enumerate() {
            let owner = match p.owner {
                Player::Exists => "E",
                Player::Forall => "A",
            };
            let moves: Vec<String> = p.moves.iter().map(|m| m.to_string()).collect();
            out.push_str(&format!(
                "{i} {owner} {} {}\n",
                p.priority,
                moves.join(",")
            ));
        }
        out
    }
}

/// Winners and positional strategies for both players.
///
/// `strategy(player)` is defined on every position the player owns that has
/// at least one move; on the player's winning region the designated move is
/// winning, elsewhere it is the least successor.
#[derive(Clone, Debug)]
pub struct Solution {
    pub winner: Vec<Player>,
    strategy_exists: Vec<Option<u32>>,
    strategy_forall: Vec<Option<u32>>,
}

impl Solution {
    pub fn strategy(&self, player: Player) -> &[Option<u32>] {
        match player {
            Player::Exists => &self.strategy_exists,
            Player::Forall => &self.strategy_forall,
        }
    }

    pub fn winning_region(&self, player: Player) -> impl Iterator<Item = u32> + '_ {
        self.winner
            .iter()
            .enumerate()
            .filter(move |(_, w)| **w == player)
            .map(|(i, _)| i as u32)
    }
}

struct Solver<'a> {
    arena: &'a ParityArena,
    preds: Vec<Vec<u32>>,
    strategy: [Vec<Option<u32>>; 2],
}

fn side(p: Player) -> usize {
    match p {
        Player::Exists => 0,
        Player::Forall => 1,
    }
}

impl<'a> Solver<'a> {
    /// Attractor of `target` for `player` within `alive`. Fills in the
    /// player's strategy on attracted positions (level-decreasing moves, least
    /// successor index among them). Returns the attractor as a mask.
    fn attract(&mut self, player: Player, target: &[u32], alive: &[bool]) -> Vec<bool> {
        let n = self.arena.len();
        let mut in_attr = vec![false; n];
        let mut level = vec![u32::MAX; n];
        let mut queue: Vec<u32> = Vec::new();
        // moves remaining outside the attractor, for opponent positions
        let mut out_degree = vec![0u32; n];
        for (i, pos) in self.arena.positions() {
            if alive[i as usize] {
                out_degree[i as usize] =
                    pos.moves.iter().filter(|m| alive[**m as usize]).count() as u32;
            }
        }
        for &t in target {
            if alive[t as usize] && !in_attr[t as usize] {
                in_attr[t as usize] = true;
                level[t as usize] = 0;
                queue.push(t);
            }
        }
        let mut head = 0;
        while head < queue.len() {
            let v = queue[head];
            head += 1;
            for &u in &self.preds[v as usize] {
                let ui = u as usize;
                if !alive[ui] || in_attr[ui] {
                    continue;
                }
                let pos = self.arena.position(u);
                if pos.owner == player {
                    in_attr[ui] = true;
                    level[ui] = level[v as usize] + 1;
                    queue.push(u);
                } else {
                    out_degree[ui] = out_degree[ui].saturating_sub(1);
                    if out_degree[ui] == 0 {
                        in_attr[ui] = true;
                        level[ui] = level[v as usize] + 1;
                        queue.push(u);
                    }
                }
            }
        }
        // Strategy on attracted positions of the attracting player: least
        // successor with strictly smaller level.
        for v in &queue {
            let vi = *v as usize;
            let pos = self.arena.position(*v);
            if pos.owner == player && level[vi] > 0 {
                let pick = pos
                    .moves
                    .iter()
                    .find(|m| alive[**m as usize] && level[**m as usize] < level[vi]);
                if let Some(&m) = pick {
                    self.strategy[side(player)][vi] = Some(m);
                }
            }
        }
        in_attr
    }

    /// Zielonka's recursive algorithm on the subgame `alive`.
    fn zielonka(&mut self, alive: &[bool]) -> [Vec<bool>; 2] {
        let n = self.arena.len();
        let mut max_pri = None;
        for (i, pos) in self.arena.positions() {
            if alive[i as usize] {
                max_pri = Some(max_pri.map_or(pos.priority, |m: u32| m.max(pos.priority)));
            }
        }
        let Some(d) = max_pri else {
            return [vec![false; n], vec![false; n]];
        };
        let us = Player::winner_of_priority(d);
        let them = us.opponent();

        let target: Vec<u32> = self
            .arena
            .positions()
            .filter(|(i, p)| alive[*i as usize] && p.priority == d)
            .map(|(i, _)| i)
            .collect();
        let attr = self.attract(us, &target, alive);
        let mut rest = alive.to_vec();
        for i in 0..n {
            if attr[i] {
                rest[i] = false;
            }
        }
        let sub = self.zielonka(&rest);
        let opp_region = &sub[side(them)];
        if opp_region.iter().all(|b| !b) {
            // `us` wins everywhere: attractor strategy on attr \ target, the
            // recursive strategy inside the subgame, any alive successor on
            // the target positions themselves.
            for &t in &target {
                let ti = t as usize;
                let pos = self.arena.position(t);
                if pos.owner == us {
                    if let Some(&m) = pos.moves.iter().find(|m| alive[**m as usize]) {
                        self.strategy[side(us)][ti] = Some(m);
                    }
                }
            }
            let mut all = [vec![false; n], vec![false; n]];
            all[side(us)] = alive.to_vec();
            return all;
        }
        // Opponent wins their recursive region plus its attractor; re-solve
        // the rest. The recursive call already recorded their strategy inside
        // opp_region; attract extends it toward that region.
        let opp_targets: Vec<u32> = (0..n as u32).filter(|i| opp_region[*i as usize]).collect();
        let attr_b = self.attract(them, &opp_targets, alive);
        let mut rest2 = alive.to_vec();
        for i in 0..n {
            if attr_b[i] {
                rest2[i] = false;
            }
        }
        let sub2 = self.zielonka(&rest2);
        let mut result = [vec![false; n], vec![false; n]];
        for i in 0..n {
            result[side(them)][i] = attr_b[i] || sub2[side(them)][i];
            result[side(us)][i] = sub2[side(us)][i];
        }
        result
    }
}

/// Solves the arena: partitions positions into winning regions and extracts
/// positional strategies witnessing them.
pub fn solve(arena: &ParityArena) -> Solution {
    let n = arena.len();
    let mut solver = Solver {
        arena,
        preds: arena.predecessors(),
        strategy: [vec![None; n], vec![None; n]],
    };
    let mut alive = vec![true; n];
    let mut won = [vec![false; n], vec![false; n]];
    // Dead ends lose for their owner. The two dead-end attractors are
    // disjoint, and removing both leaves a total subgame, so Zielonka's
    // recursion (whose subgames are attractor complements) stays total.
    let all = vec![true; n];
    for player in [Player::Exists, Player::Forall] {
        let seeds: Vec<u32> = arena
            .positions()
            .filter(|(_, p)| p.owner == player.opponent() && p.moves.is_empty())
            .map(|(i, _)| i)
            .collect();
        won[side(player)] = solver.attract(player, &seeds, &all);
    }
    for i in 0..n {
        debug_assert!(!(won[0][i] && won[1][i]));
        if won[0][i] || won[1][i] {
            alive[i] = false;
        }
    }
    let regions = solver.zielonka(&alive);
    let mut winner = vec![Player::Exists; n];
    for i in 0..n {
        let e = won[0][i] || regions[0][i];
        let f = won[1][i] || regions[1][i];
        debug_assert!(e != f, "determinacy");
        winner[i] = if e { Player::Exists } else { Player::Forall };
    }
    // Strategies must be total on owned positions with moves; fill positions
    // outside the winning region with the least successor.
    let mut strategy = solver.strategy;
    for (i, pos) in arena.positions() {
        let ii = i as usize;
        if !pos.moves.is_empty() {
            let s = &mut strategy[side(pos.owner)][ii];
            if s.is_none() {
                *s = pos.moves.iter().copied().min();
            }
        } else {
            strategy[side(pos.owner)][ii] = None;
        }
    }
    Solution {
        winner,
        strategy_exists: strategy[0].clone(),
        strategy_forall: strategy[1].clone(),
    }
}

/// A lasso-shaped play: a stem followed by a cycle (both position lists, the
/// cycle nonempty and closing back on its first element).
pub struct Lasso {
    pub stem: Vec<u32>,
    pub cycle: Vec<u32>,
}

#[derive(Debug, PartialEq, Eq, thiserror::Error)]
pub enum PlayError {
    #[error("lasso is not a legal play: no move from {from} to {to}")]
    IllegalMove { from: u32, to: u32 },
    #[error("lasso cycle is empty")]
    EmptyCycle,
}

/// Winner of the infinite play described by a lasso: Forall iff the maximal
/// cycle priority is odd.
pub fn evaluate_play(arena: &ParityArena, lasso: &Lasso) -> Result<Player, PlayError> {
    if lasso.cycle.is_empty() {
        return Err(PlayError::EmptyCycle);
    }
    let check_edge = |from: u32, to: u32| -> Result<(), PlayError> {
        if arena.position(from).moves.contains(&to) {
            Ok(())
        } else {
            Err(PlayError::IllegalMove { from, to })
        }
    };
    let full: Vec<u32> = lasso
        .stem
        .iter()
        .chain(lasso.cycle.iter())
        .copied()
        .collect();
    for w in full.windows(2) {
        check_edge(w[0], w[1])?;
    }
    check_edge(*lasso.cycle.last().unwrap(), lasso.cycle[0])?;
    let max = lasso
        .cycle
        .iter()
        .map(|&p| arena.position(p).priority)
        .max()
        .unwrap();
    Ok(Player::winner_of_priority(max))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn self_loop_even_wins_for_exists() {
        let mut a = ParityArena::new();
        let p = a.add_position(Player::Exists, 0);
        a.add_move(p, p);
        let sol = solve(&a);
        assert_eq!(sol.winner[0], Player::Exists);
        assert_eq!(sol.strategy(Player::Exists)[0], Some(0));
    }

    #[test]
    fn dead_end_loses_for_owner() {
        let mut a = ParityArena::new();
        let p = a.add_position(Player::Exists, 0);
        let q = a.add_position(Player::Forall, 7);
        let _ = (p, q);
        let sol = solve(&a);
        assert_eq!(sol.winner[0], Player::Forall);
        assert_eq!(sol.winner[1], Player::Exists);
    }

    #[test]
    fn evaluate_play_examples() {
        let mut a = ParityArena::new();
        let p1 = a.add_position(Player::Exists, 1);
        let p2 = a.add_position(Player::Forall, 2);
        a.add_move(p1, p2);
        a.add_move(p2, p1);
        let lasso = Lasso {
            stem: vec![],
            cycle: vec![p1, p2],
        };
        assert_eq!(evaluate_play(&a, &lasso).unwrap(), Player::Exists);

        let mut b = ParityArena::new();
        let q1 = b.add_position(Player::Exists, 3);
        let q2 = b.add_position(Player::Forall, 2);
        b.add_move(q1, q2);
        b.add_move(q2, q1);
        let lasso = Lasso {
            stem: vec![],
            cycle: vec![q1, q2],
        };
        assert_eq!(evaluate_play(&b, &lasso).unwrap(), Player::Forall);
    }

    #[test]
    fn compress_priorities_preserves_parity_and_order() {
        let mut a = ParityArena::new();
        for pri in [3, 7, 8, 12, 13] {
            a.add_position(Player::Exists, pri);
        }
        a.compress_priorities();
        let ps: Vec<u32> = a.positions().map(|(_, p)| p.priority).collect();
        assert_eq!(ps, vec![1, 1, 2, 2, 3]);
    }
}

/// Brute-force verification utilities: exhaustive positional-strategy
/// enumeration for small arenas. Independent of [`solve`]; used as an oracle.
pub mod brute {
    use super::*;

    /// All positional strategies of `player`, as vectors indexed by position
    /// (None on unowned or dead-end positions).
    fn strategies(arena: &ParityArena, player: Player) -> Vec<Vec<Option<u32>>> {
        let owned: Vec<u32> = arena
            .positions()
            .filter(|(_, p)| p.owner == player && !p.moves.is_empty())
            .map(|(i, _)| i)
            .collect();
        let mut out = vec![vec![None; arena.len()]];
        for &v in &owned {
            let mut next = Vec::new();
            for partial in &out {
                for &m in &arena.position(v).moves {
                    let mut s = partial.clone();
                    s[v as usize] = Some(m);
                    next.push(s);
                }
            }
            out = next;
        }
        out
    }

    /// Winner of the unique play from `start` when both sides play the given
    /// positional strategies.
    fn play_winner(
        arena: &ParityArena,
        se: &[Option<u32>],
        sf: &[Option<u32>],
        start: u32,
    ) -> Player {
        let mut seen_at = vec![usize::MAX; arena.len()];
        let mut path = Vec::new();
        let mut cur = start;
        loop {
            if seen_at[cur as usize] != usize::MAX {
                let cycle_start = seen_at[cur as usize];
                let max = path[cycle_start..]
                    .iter()
                    .map(|&p: &u32| arena.position(p).priority)
                    .max()
                    .unwrap();
                return Player::winner_of_priority(max);
            }
            seen_at[cur as usize] = path.len();
            path.push(cur);
            let pos = arena.position(cur);
            let choice = match pos.owner {
                Player::Exists => se[cur as usize],
                Player::Forall => sf[cur as usize],
            };
            match choice {
                Some(m) => cur = m,
                None => return pos.owner.opponent(),
            }
        }
    }

    /// Winners at every position by exhaustive enumeration of positional
    /// strategy pairs, checking every resulting lasso. Verifies determinacy.
    pub fn winners(arena: &ParityArena) -> Vec<Player> {
        let se_all = strategies(arena, Player::Exists);
        let sf_all = strategies(arena, Player::Forall);
        let mut result = Vec::with_capacity(arena.len());
        for start in 0..arena.len() as u32 {
            let exists_wins = se_all.iter().any(|se| {
                sf_all
                    .iter()
                    .all(|sf| play_winner(arena, se, sf, start) == Player::Exists)
            });
            let forall_wins = sf_all.iter().any(|sf| {
                se_all
                    .iter()
                    .all(|se| play_winner(arena, se, sf, start) == Player::Forall)
            });
            assert!(exists_wins != forall_wins, "determinacy violated");
            result.push(if exists_wins {
                Player::Exists
            } else {
                Player::Forall
            });
        }
        result
    }

    /// Checks that `strategy` is winning for `player` from every position in
    /// their winning region, against every positional opponent. (Fixing a
    /// positional strategy leaves a one-player game, where positional
    /// opponents are optimal, so this exhausts all opponent behaviour.)
    pub fn strategy_is_winning(
        arena: &ParityArena,
        winner: &[Player],
        player: Player,
        strategy: &[Option<u32>],
    ) -> bool {
        let opp_all = strategies(arena, player.opponent());
        for (start, w) in winner.iter().enumerate() {
            if *w != player {
                continue;
            }
            for opp in &opp_all {
                let (se, sf) = match player {
                    Player::Exists => (strategy, opp.as_slice()),
                    Player::Forall => (opp.as_slice(), strategy),
                };
                if play_winner(arena, se, sf, start as u32) != player {
                    return false;
                }
            }
        }
        true
    }
}
