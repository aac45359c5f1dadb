//! The tableau game: on-the-fly construction of the sequent/automaton parity
//! game, the satisfiability decision, and extraction of the winner's
//! certificate.

use std::collections::HashMap;
use std::time::Instant;

use crate::cert::Tableau;
use crate::extract::extract_model;
use crate::formula::{rename_apart, Formula};
use crate::logic::Logic;
use crate::pgame::{solve, ParityArena, Player, Solution};
use crate::semantics::CoalgebraModel;
use crate::sequent::Sequent;
use crate::session::{Bounds, SeqId, Session, SessionError};
use crate::trace::{AutomatonError, TraceAutomaton};

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum GamePosition {
    /// Forall picks a rule: (sequent, automaton state).
    Forall(SeqId, u32),
    /// Exists picks a conclusion: (sequent, blueprint, automaton state).
    Exists(SeqId, crate::session::BlueprintId, u32),
}

pub struct TableauGame {
    pub arena: ParityArena,
    pub positions: Vec<GamePosition>,
    index: HashMap<GamePosition, u32>,
}

impl TableauGame {
    pub fn position_id(&self, pos: GamePosition) -> Option<u32> {
        self.index.get(&pos).copied()
    }

    pub fn root(&self) -> u32 {
        0
    }
}

#[derive(Debug, thiserror::Error)]
pub enum EngineError {
    #[error(transparent)]
    Session(#[from] SessionError),
    #[error(transparent)]
    Automaton(#[from] AutomatonError),
    #[error("explored game positions exceeded the ceiling {0}")]
    PositionCeiling(usize),
    #[error("model extraction failed: {0}")]
    Extraction(String),
    #[error("certificate extraction failed: {0}")]
    Certificate(String),
}

/// Builds the reachable part of the tableau game from the root sequent and
/// the automaton's initial state. Forall owns sequent/state positions with
/// the automaton's priority; Exists owns rule positions with priority 0.
/// At positions with an axiom pair only the axiom move is expanded (it wins
/// immediately for Forall, so other rules are dominated).
pub fn build_game(
    session: &mut Session,
    dta: &TraceAutomaton,
) -> Result<TableauGame, EngineError> {
    let mut arena = ParityArena::new();
    let mut index: HashMap<GamePosition, u32> = HashMap::new();
    let mut positions: Vec<GamePosition> = Vec::new();
    let mut queue: Vec<u32> = Vec::new();
    let max_positions = session.bounds.max_positions;

    let root = GamePosition::Forall(session.root_seq(), dta.initial());
    let intern = |pos: GamePosition,
                  arena: &mut ParityArena,
                  index: &mut HashMap<GamePosition, u32>,
                  positions: &mut Vec<GamePosition>,
                  queue: &mut Vec<u32>,
                  dta: &TraceAutomaton|
     -> Result<u32, EngineError> {
        if let Some(&id) = index.get(&pos) {
            return Ok(id);
        }
        if positions.len() >= max_positions {
            return Err(EngineError::PositionCeiling(max_positions));
        }
        let (owner, priority) = match pos {
            GamePosition::Forall(_, a) => (Player::Forall, dta.priority(a)),
            GamePosition::Exists(..) => (Player::Exists, 0),
        };
        let id = arena.add_position(owner, priority);
        index.insert(pos, id);
        positions.push(pos);
        queue.push(id);
        Ok(id)
    };
    intern(root, &mut arena, &mut index, &mut positions, &mut queue, dta)?;

    let mut head = 0usize;
    while head < queue.len() {
        let id = queue[head];
        head += 1;
        match positions[id as usize] {
            GamePosition::Forall(seq, a) => {
                let blueprints = session.blueprints_for(seq);
                let axiom = blueprints
                    .iter()
                    .copied()
                    .find(|&b| session.blueprint(b).is_clash());
                let chosen: Vec<crate::session::BlueprintId> = match axiom {
                    Some(ax) => vec![ax],
                    None => blueprints.to_vec(),
                };
                for bp in chosen {
                    let to = intern(
                        GamePosition::Exists(seq, bp, a),
                        &mut arena,
                        &mut index,
                        &mut positions,
                        &mut queue,
                        dta,
                    )?;
                    arena.add_move(id, to);
                }
            }
            GamePosition::Exists(seq, bp, a) => {
                let conclusions = session.conclusions(seq, bp);
                for (i, &target_seq) in conclusions.iter().enumerate() {
                    let tile = session.tile(seq, bp, i as u32 + 1);
                    let rel = session.tile_relation(tile);
                    let a2 = dta.step(a, tile, || rel)?;
                    let to = intern(
                        GamePosition::Forall(target_seq, a2),
                        &mut arena,
                        &mut index,
                        &mut positions,
                        &mut queue,
                        dta,
                    )?;
                    arena.add_move(id, to);
                }
            }
        }
    }
    Ok(TableauGame {
        arena,
        positions,
        index,
    })
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Verdict {
    Sat,
    Unsat,
}

#[derive(Clone, Debug, Default)]
pub struct Stats {
    pub closure_size: usize,
    pub arena_positions: usize,
    pub automaton_states: usize,
    pub solve_millis: u128,
}

pub struct SatOutcome {
    pub verdict: Verdict,
    /// Finite model witnessing satisfiability (SAT only).
    pub model: Option<CoalgebraModel>,
    /// Closed tableau witnessing unsatisfiability (UNSAT only).
    pub tableau: Option<Tableau>,
    pub stats: Stats,
}

/// Decides satisfiability of a formula: cleans it up (α-renaming), builds the
/// tableau game against the bad-trace automaton, solves it, and extracts the
/// winner's certificate.
pub fn decide_sat(
    formula: &Formula,
    logic: Logic,
    bounds: Bounds,
) -> Result<SatOutcome, EngineError> {
    let renamed = rename_apart(std::slice::from_ref(formula));
    let root = Sequent::new(renamed);
    let mut session = Session::new(logic, &root, bounds)?;
    let dta = TraceAutomaton::new(&session);
    let game = {
        let mut game = build_game(&mut session, &dta)?;
        game.arena.compress_priorities();
        game
    };
    let start = Instant::now();
    let solution = solve(&game.arena);
    let solve_millis = start.elapsed().as_millis();
    let stats = Stats {
        closure_size: session.closure.len(),
        arena_positions: game.arena.len(),
        automaton_states: dta.n_states(),
        solve_millis,
    };
    if solution.winner[game.root() as usize] == Player::Exists {
        let model = extract_model(&mut session, &game, &solution, &dta)
            .map_err(|e| EngineError::Extraction(e.to_string()))?;
        Ok(SatOutcome {
            verdict: Verdict::Sat,
            model: Some(model),
            tableau: None,
            stats,
        })
    } else {
        let tableau = extract_tableau(&mut session, &game, &solution)?;
        Ok(SatOutcome {
            verdict: Verdict::Unsat,
            model: None,
            tableau: Some(tableau),
            stats,
        })
    }
}

/// Builds the closed tableau induced by Forall's winning strategy: nodes are
/// the strategy-reachable Forall positions, labels their sequents, the
/// annotation the blueprint the strategy picks, and the children Exists'
/// possible conclusions.
pub fn extract_tableau(
    session: &mut Session,
    game: &TableauGame,
    solution: &Solution,
) -> Result<Tableau, EngineError> {
    let root = game.root();
    if solution.winner[root as usize] != Player::Forall {
        return Err(EngineError::Certificate(
            "strategy is not winning at the root".into(),
        ));
    }
    let strategy = solution.strategy(Player::Forall);
    let mut node_of: HashMap<u32, usize> = HashMap::new();
    let mut order: Vec<u32> = Vec::new();
    let mut worklist = vec![root];
    node_of.insert(root, 0);
    order.push(root);
    let mut edges: Vec<Vec<(u32, usize)>> = vec![Vec::new()];
    let mut annotations: Vec<Option<crate::session::BlueprintId>> = vec![None];
    let mut labels: Vec<SeqId> = {
        let GamePosition::Forall(seq, _) = game.positions[root as usize] else {
            unreachable!()
        };
        vec![seq]
    };
    while let Some(pos) = worklist.pop() {
        let node = node_of[&pos];
        debug_assert!(solution.winner[pos as usize] == Player::Forall);
        let Some(expos) = strategy[pos as usize] else {
            // Forall cannot move: the position is winning for Exists,
            // contradicting the strategy being winning here.
            return Err(EngineError::Certificate(
                "winning Forall position without a move".into(),
            ));
        };
        let GamePosition::Exists(seq, bp, _) = game.positions[expos as usize] else {
            unreachable!()
        };
        annotations[node] = Some(bp);
        let conclusions = session.conclusions(seq, bp);
        for (i, _) in conclusions.iter().enumerate() {
            let target = game.arena.position(expos).moves[i];
            let GamePosition::Forall(tseq, _) = game.positions[target as usize] else {
                unreachable!()
            };
            let tnode = match node_of.get(&target) {
                Some(&n) => n,
                None => {
                    let n = labels.len();
                    node_of.insert(target, n);
                    labels.push(tseq);
                    edges.push(Vec::new());
                    annotations.push(None);
                    order.push(target);
                    worklist.push(target);
                    n
                }
            };
            edges[node].push((i as u32 + 1, tnode));
        }
    }
    Tableau::from_parts(session, labels, annotations, edges)
        .map_err(EngineError::Certificate)
}
