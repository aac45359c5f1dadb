//! Finite coalgebra models, predicate-lifting evaluation, a direct fixpoint
//! model checker, and the model-checking game.
//!
//! Models are capped at 64 states so state sets are plain bitmasks.

use std::collections::HashMap;
use std::sync::Arc;

use num::Zero;

use crate::closure::{Closure, FormulaId, PriorityMap};
use crate::formula::{Formula, FormulaKind};
use crate::logic::{AgentSet, Logic, Modality, Rational};
use crate::pgame::{solve, ParityArena, Player};
use crate::sequent::Sequent;

pub type StateId = usize;
/// Bitmask over model states.
pub type StateSet = u64;

/// Structure value of a single state, by functor.
#[derive(Clone, Debug, PartialEq)]
pub enum StateStructure {
    /// Successor set.
    Kripke(StateSet),
    /// Finite-support multiplicities, sparse, sorted by state.
    Graded(Vec<(StateId, u64)>),
    /// Finite-support distribution summing to one, sparse, sorted by state.
    Probabilistic(Vec<(StateId, Rational)>),
    /// Upward-closed neighbourhood family given by its generator antichain.
    Monotone(Vec<StateSet>),
    /// Strategy-set sizes per agent and the outcome of every profile, in
    /// mixed-radix order (last agent fastest).
    Coalition {
        sizes: Vec<usize>,
        outcome: Vec<StateId>,
    },
}

#[derive(Clone, Debug, thiserror::Error, PartialEq)]
pub enum ModelError {
    #[error("model has {0} states; at most 64 are supported")]
    TooManyStates(usize),
    #[error("model must have at least one state")]
    Empty,
    #[error("unknown state name {0}")]
    UnknownState(String),
    #[error("state {0}: {1}")]
    BadStructure(String, String),
    #[error("uncovered free variable {0}")]
    UncoveredVariable(String),
    #[error("operator {0} does not match the model kind {1}")]
    KindMismatch(Modality, Logic),
    #[error("model has {0} states, exceeding the cap {1} for game construction")]
    StateCap(usize, usize),
}

/// A finite coalgebra model: states, valuation and one structure value per
/// state. Immutable after construction.
#[derive(Clone, Debug)]
pub struct CoalgebraModel {
    pub logic: Logic,
    pub states: Vec<String>,
    pub valuation: std::collections::BTreeMap<String, StateSet>,
    pub structure: Vec<StateStructure>,
    pub root: Option<StateId>,
}

impl CoalgebraModel {
    pub fn n_states(&self) -> usize {
        self.states.len()
    }

    pub fn all_states(&self) -> StateSet {
        if self.states.len() == 64 {
            u64::MAX
        } else {
            (1u64 << self.states.len()) - 1
        }
    }

    /// Valuation of a possibly negated variable (complement for negations).
    pub fn var_extent(&self, name: &str, negated: bool) -> Option<StateSet> {
        let pos = self.valuation.get(name).copied()?;
        Some(if negated {
            self.all_states() & !pos
        } else {
            pos
        })
    }

    /// Basic well-formedness: structure arity, distribution mass, antichain
    /// shape, profile-grid totality.
    pub fn validate(&self) -> Result<(), ModelError> {
        if self.states.is_empty() {
            return Err(ModelError::Empty);
        }
        if self.states.len() > 64 {
            return Err(ModelError::TooManyStates(self.states.len()));
        }
        if self.structure.len() != self.states.len() {
            return Err(ModelError::BadStructure(
                "<model>".into(),
                "structure must assign a value to every state".into(),
            ));
        }
        let n = self.states.len();
        for (i, s) in self.structure.iter().enumerate() {
            let name = &self.states[i];
            let bad = |msg: &str| ModelError::BadStructure(name.clone(), msg.to_string());
            match s {
                StateStructure::Kripke(set) => {
                    if *set & !self.all_states() != 0 {
                        return Err(bad("successor set mentions unknown states"));
                    }
                }
                StateStructure::Graded(weights) => {
                    for (t, _) in weights {
                        if *t >= n {
                            return Err(bad("weight target out of range"));
                        }
                    }
                }
                StateStructure::Probabilistic(dist) => {
                    let mut sum = Rational::zero();
                    for (t, p) in dist {
                        if *t >= n {
                            return Err(bad("distribution target out of range"));
                        }
                        if *p < Rational::zero() {
                            return Err(bad("negative probability"));
                        }
                        sum += p;
                    }
                    if sum != Rational::new(1, 1) {
                        return Err(bad("distribution does not sum to 1"));
                    }
                }
                StateStructure::Monotone(gens) => {
                    for g in gens {
                        if *g & !self.all_states() != 0 {
                            return Err(bad("generator mentions unknown states"));
                        }
                    }
                    for (a, ga) in gens.iter().enumerate() {
                        for (b, gb) in gens.iter().enumerate() {
                            if a != b && ga & !gb == 0 {
                                return Err(bad("generators are not an antichain"));
                            }
                        }
                    }
                }
                StateStructure::Coalition { sizes, outcome } => {
                    let agents = match self.logic {
                        Logic::Coalition { agents } => agents as usize,
                        _ => return Err(bad("coalition structure in non-coalition model")),
                    };
                    if sizes.len() != agents {
                        return Err(bad("strategy sizes must cover every agent"));
                    }
                    if sizes.contains(&0) {
                        return Err(bad("empty strategy set"));
                    }
                    let cells: usize = sizes.iter().product();
                    if outcome.len() != cells {
                        return Err(bad("outcome function not total on the profile grid"));
                    }
                    if outcome.iter().any(|t| *t >= n) {
                        return Err(bad("outcome target out of range"));
                    }
                }
            }
            let kind_ok = matches!(
                (s, self.logic),
                (StateStructure::Kripke(_), Logic::Kripke)
                    | (StateStructure::Graded(_), Logic::Graded)
                    | (StateStructure::Probabilistic(_), Logic::Probabilistic)
                    | (StateStructure::Monotone(_), Logic::Monotone)
                    | (StateStructure::Coalition { .. }, Logic::Coalition { .. })
            );
            if !kind_ok {
                return Err(bad("structure kind does not match the model kind"));
            }
        }
        for set in self.valuation.values() {
            if *set & !self.all_states() != 0 {
                return Err(ModelError::BadStructure(
                    "<valuation>".into(),
                    "valuation mentions unknown states".into(),
                ));
            }
        }
        Ok(())
    }
}

/// Membership of a structure value in the lifting of `op` applied to `arg`.
/// Dual operators go through the complement clause.
pub fn lifting_member(
    value: &StateStructure,
    op: Modality,
    arg: StateSet,
    all: StateSet,
) -> Result<bool, ModelError> {
    if !op.is_primal() {
        return Ok(!lifting_member(value, op.dual(), all & !arg, all)?);
    }
    match (value, op) {
        (StateStructure::Kripke(succ), Modality::Box) => Ok(succ & !arg == 0),
        (StateStructure::Monotone(gens), Modality::Box) => {
            Ok(gens.iter().any(|g| g & !arg == 0))
        }
        (StateStructure::Graded(weights), Modality::GradedDia(n)) => {
            let mass: u64 = weights
                .iter()
                .filter(|(t, _)| arg & (1 << t) != 0)
                .map(|(_, w)| *w)
                .sum();
            Ok(mass > n)
        }
        (StateStructure::Probabilistic(dist), Modality::ProbDia(p)) => {
            let mut mass = Rational::zero();
            for (t, q) in dist {
                if arg & (1 << t) != 0 {
                    mass += q;
                }
            }
            Ok(mass >= p)
        }
        (StateStructure::Coalition { sizes, outcome }, Modality::CoalBox(c)) => {
            Ok(coalition_can_force(sizes, outcome, c, arg))
        }
        (value, op) => Err(ModelError::BadStructure(
            "<state>".into(),
            format!("operator {op} against structure {value:?}"),
        )),
    }
}

/// `∃ (s_i)_{i∈C} ∀ (s_i)_{i∉C}: outcome ∈ arg`.
fn coalition_can_force(sizes: &[usize], outcome: &[StateId], c: AgentSet, arg: StateSet) -> bool {
    let n_agents = sizes.len();
    fn go(
        agent: usize,
        profile: &mut Vec<usize>,
        sizes: &[usize],
        varying: AgentSet,
        universal: bool,
        check: &mut impl FnMut(&[usize]) -> bool,
    ) -> bool {
        if agent == sizes.len() {
            return check(profile);
        }
        if !varying.contains(agent as u32 + 1) {
            return go(agent + 1, profile, sizes, varying, universal, check);
        }
        for s in 0..sizes[agent] {
            profile[agent] = s;
            let sub = go(agent + 1, profile, sizes, varying, universal, check);
            if universal != sub {
                return sub;
            }
        }
        universal
    }
    let everyone = AgentSet::full(n_agents as u32);
    let others = AgentSet(everyone.0 & !c.0);
    let mut profile = vec![0usize; n_agents];
    go(
        0,
        &mut profile,
        sizes,
        c,
        false,
        &mut |p_coal: &[usize]| {
            let mut inner = p_coal.to_vec();
            go(0, &mut inner, sizes, others, true, &mut |p: &[usize]| {
                let mut cell = 0usize;
                for a in 0..sizes.len() {
                    cell = cell * sizes[a] + p[a];
                }
                arg & (1 << outcome[cell]) != 0
            })
        },
    )
}

/// Truth set of a formula by structural recursion with Knaster-Tarski
/// iteration at fixpoints (from the empty set for least, the full set for
/// greatest fixpoints).
pub fn eval(model: &CoalgebraModel, formula: &Formula) -> Result<StateSet, ModelError> {
    let mut env: HashMap<Arc<str>, StateSet> = HashMap::new();
    eval_in(model, formula, &mut env)
}

fn eval_in(
    model: &CoalgebraModel,
    formula: &Formula,
    env: &mut HashMap<Arc<str>, StateSet>,
) -> Result<StateSet, ModelError> {
    let all = model.all_states();
    match formula.kind() {
        FormulaKind::Var { name, negated } => {
            if let Some(&set) = env.get(name) {
                // Bound occurrences are positive by the NNF grammar.
                debug_assert!(!negated);
                Ok(set)
            } else {
                model
                    .var_extent(name, *negated)
                    .ok_or_else(|| ModelError::UncoveredVariable(name.to_string()))
            }
        }
        FormulaKind::Or(a, b) => Ok(eval_in(model, a, env)? | eval_in(model, b, env)?),
        FormulaKind::And(a, b) => Ok(eval_in(model, a, env)? & eval_in(model, b, env)?),
        FormulaKind::Modal(op, a) => {
            if !op.valid_for(model.logic) {
                return Err(ModelError::KindMismatch(*op, model.logic));
            }
            let arg = eval_in(model, a, env)?;
            let mut out: StateSet = 0;
            for (i, value) in model.structure.iter().enumerate() {
                if lifting_member(value, *op, arg, all)? {
                    out |= 1 << i;
                }
            }
            Ok(out)
        }
        FormulaKind::Fix { kind, var, body } => {
            let mut current: StateSet = if kind.is_least() { 0 } else { all };
            loop {
                let saved = env.insert(var.clone(), current);
                let next = eval_in(model, body, env)?;
                match saved {
                    Some(s) => {
                        env.insert(var.clone(), s);
                    }
                    None => {
                        env.remove(var);
                    }
                }
                if next == current {
                    return Ok(current);
                }
                current = next;
            }
        }
    }
}

/// A position of the model-checking game.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum McPosition {
    /// A formula claimed true at a state.
    Formula(FormulaId, StateId),
    /// A modal formula together with the argument set chosen by Exists.
    Choice(FormulaId, StateSet),
}

/// The model-checking game over a model and the closure of a query sequent.
pub struct McGame {
    pub arena: ParityArena,
    index: HashMap<McPosition, u32>,
}

impl McGame {
    pub fn position_id(&self, pos: McPosition) -> Option<u32> {
        self.index.get(&pos).copied()
    }
}

/// Builds the model-checking game restricted to positions reachable from the
/// given start positions. Exists' modal choices enumerate argument subsets in
/// decreasing set-inclusion order, so the cap on model size keeps the game
/// finite and small.
pub fn build_mc_game(
    model: &CoalgebraModel,
    closure: &Closure,
    priorities: &PriorityMap,
    starts: &[(FormulaId, StateId)],
    max_states: usize,
) -> Result<McGame, ModelError> {
    if model.n_states() > max_states {
        return Err(ModelError::StateCap(model.n_states(), max_states));
    }
    let all = model.all_states();
    let mut arena = ParityArena::new();
    let mut index: HashMap<McPosition, u32> = HashMap::new();
    let mut queue: Vec<McPosition> = Vec::new();

    // Owners and priorities are decided from the position alone.
    let intern = |pos: McPosition,
                      arena: &mut ParityArena,
                      queue: &mut Vec<McPosition>,
                      index: &mut HashMap<McPosition, u32>|
     -> Result<u32, ModelError> {
        if let Some(&id) = index.get(&pos) {
            return Ok(id);
        }
        let (owner, priority) = match pos {
            McPosition::Formula(fid, state) => {
                let f = closure.formula(fid);
                let owner = match f.kind() {
                    FormulaKind::Var { name, negated } => {
                        let holds = model
                            .var_extent(name, *negated)
                            .ok_or_else(|| ModelError::UncoveredVariable(name.to_string()))?
                            & (1 << state)
                            != 0;
                        if holds {
                            Player::Forall
                        } else {
                            Player::Exists
                        }
                    }
                    FormulaKind::Fix { .. } | FormulaKind::Or(..) | FormulaKind::Modal(..) => {
                        Player::Exists
                    }
                    FormulaKind::And(..) => Player::Forall,
                };
                (owner, priorities.priority(fid))
            }
            McPosition::Choice(..) => (Player::Forall, 0),
        };
        let id = arena.add_position(owner, priority);
        index.insert(pos, id);
        queue.push(pos);
        Ok(id)
    };

    for &(fid, state) in starts {
        intern(
            McPosition::Formula(fid, state),
            &mut arena,
            &mut queue,
            &mut index,
        )?;
    }
    let mut head = 0;
    while head < queue.len() {
        let pos = queue[head];
        head += 1;
        let from = index[&pos];
        match pos {
            McPosition::Formula(fid, state) => {
                let f = closure.formula(fid).clone();
                match f.kind() {
                    FormulaKind::Var { .. } => {}
                    FormulaKind::Or(a, b) | FormulaKind::And(a, b) => {
                        for child in [a, b] {
                            let cid = closure.lookup(child).expect("closure member");
                            let to = intern(
                                McPosition::Formula(cid, state),
                                &mut arena,
                                &mut queue,
                                &mut index,
                            )?;
                            arena.add_move(from, to);
                        }
                    }
                    FormulaKind::Fix { .. } => {
                        let unf = closure.unfolding_of(fid).expect("unfolding in closure");
                        let to = intern(
                            McPosition::Formula(unf, state),
                            &mut arena,
                            &mut queue,
                            &mut index,
                        )?;
                        arena.add_move(from, to);
                    }
                    FormulaKind::Modal(op, _) => {
                        if !op.valid_for(model.logic) {
                            return Err(ModelError::KindMismatch(*op, model.logic));
                        }
                        // Decreasing set-inclusion order: masks descending.
                        let value = &model.structure[state];
                        let mut u = all;
                        loop {
                            if lifting_member(value, *op, u, all)? {
                                let to = intern(
                                    McPosition::Choice(fid, u),
                                    &mut arena,
                                    &mut queue,
                                    &mut index,
                                )?;
                                arena.add_move(from, to);
                            }
                            if u == 0 {
                                break;
                            }
                            u -= 1;
                        }
                    }
                }
            }
            McPosition::Choice(fid, u) => {
                let f = closure.formula(fid).clone();
                let FormulaKind::Modal(_, a) = f.kind() else {
                    unreachable!()
                };
                let aid = closure.lookup(a).expect("closure member");
                for state in 0..model.n_states() {
                    if u & (1 << state) != 0 {
                        let to = intern(
                            McPosition::Formula(aid, state),
                            &mut arena,
                            &mut queue,
                            &mut index,
                        )?;
                        arena.add_move(from, to);
                    }
                }
            }
        }
    }
    Ok(McGame { arena, index })
}

/// Decides `M, x ⊨ A` for every state via the model-checking game instead of
/// direct evaluation. Used as a cross-check for [`eval`].
pub fn check_via_game(
    model: &CoalgebraModel,
    query: &Formula,
    max_states: usize,
) -> Result<StateSet, ModelError> {
    let root = Sequent::singleton(query.clone());
    let closure = Closure::build(&root);
    let priorities = PriorityMap::build(&closure);
    let fid = closure.lookup(query).expect("root in closure");
    let starts: Vec<(FormulaId, StateId)> =
        (0..model.n_states()).map(|s| (fid, s)).collect();
    let mut game = build_mc_game(model, &closure, &priorities, &starts, max_states)?;
    game.arena.compress_priorities();
    let solution = solve(&game.arena);
    let mut out: StateSet = 0;
    for (i, _) in model.states.iter().enumerate() {
        let pid = game.position_id(McPosition::Formula(fid, i)).unwrap();
        if solution.winner[pid as usize] == Player::Exists {
            out |= 1 << i;
        }
    }
    Ok(out)
}
