//! Model extraction from Exists' winning strategy.
//!
//! Carrier states are the atomic game positions reachable under the strategy:
//! every position reduces to a unique atomic one by fixing a propositional
//! strategy for Forall (least non-atomic formula first) and following Exists'
//! choices. Modal rule applications then induce per-formula successor sets,
//! and a coalgebra structure is placed on top so that every state lies in the
//! lifting of its modal atoms' successor sets. Each structure value is
//! verified before the model is returned.

use std::collections::{BTreeMap, HashMap};

use num::{BigRational, One, Zero};

use crate::closure::FormulaId;
use crate::formula::FormulaKind;
use crate::logic::{AgentSet, Logic, Modality};
use crate::lp::System;
use crate::onestep::RuleInstance;
use crate::pgame::{Player, Solution};
use crate::semantics::{lifting_member, CoalgebraModel, StateSet, StateStructure};
use crate::session::{Blueprint, SeqId, Session};
use crate::tabgame::{GamePosition, TableauGame};
use crate::trace::TraceAutomaton;

#[derive(Debug, thiserror::Error)]
pub enum ExtractError {
    #[error("strategy is not winning at the root")]
    NotWinning,
    #[error("propositional reduction revisited a position (guard tripped) at {0}")]
    ReductionLoop(String),
    #[error("propositional reduction left the explored arena at {0}")]
    OffArena(String),
    #[error("coherence solver failed at atomic position {0}: {1}")]
    Solver(String, String),
    #[error("extracted structure failed verification at state {0}: {1}")]
    Incoherent(String, String),
}

/// An atomic position: an atomic sequent paired with an automaton state.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
struct AtomicPos {
    seq: SeqId,
    auto: u32,
}

struct Extractor<'a> {
    session: &'a mut Session,
    game: &'a TableauGame,
    solution: &'a Solution,
    reduce_memo: HashMap<(SeqId, u32), AtomicPos>,
}

impl<'a> Extractor<'a> {
    /// The blueprint Forall's propositional strategy picks at a non-atomic
    /// sequent: the decomposition rule of the least non-atomic member.
    fn propositional_blueprint(&mut self, seq: SeqId) -> Blueprint {
        let least = self
            .session
            .seq(seq)
            .iter()
            .map(|&f| (f, self.session.closure.formula(f).clone()))
            .filter(|(_, formula)| !formula.is_atomic())
            .min_by(|(_, a), (_, b)| a.cmp_canonical(b))
            .expect("non-atomic sequent");
        match least.1.kind() {
            FormulaKind::And(..) => Blueprint::Conj(least.0),
            FormulaKind::Or(..) => Blueprint::Disj(least.0),
            FormulaKind::Fix { .. } => Blueprint::Unfold(least.0),
            _ => unreachable!("atomic member filtered"),
        }
    }

    /// Reduces a position to the unique atomic position reached by playing
    /// the propositional strategy against Exists' winning strategy, without
    /// modal steps. Guarded input terminates; a revisit trips the guard.
    fn reduce(&mut self, seq: SeqId, auto: u32) -> Result<AtomicPos, ExtractError> {
        if let Some(&hit) = self.reduce_memo.get(&(seq, auto)) {
            return Ok(hit);
        }
        let mut trail: Vec<(SeqId, u32)> = Vec::new();
        let mut visited: std::collections::HashSet<(SeqId, u32)> = Default::default();
        let (mut seq, mut auto) = (seq, auto);
        let result = loop {
            if self.session.seq_is_atomic(seq) {
                break AtomicPos { seq, auto };
            }
            if !visited.insert((seq, auto)) {
                return Err(ExtractError::ReductionLoop(
                    self.session.to_sequent(seq).to_string(),
                ));
            }
            trail.push((seq, auto));
            let bp = self.propositional_blueprint(seq);
            let bp_id = self.session.intern_blueprint(bp);
            let expos = self
                .game
                .position_id(GamePosition::Exists(seq, bp_id, auto))
                .ok_or_else(|| {
                    ExtractError::OffArena(self.session.to_sequent(seq).to_string())
                })?;
            let target = self.solution.strategy(Player::Exists)[expos as usize]
                .ok_or_else(|| {
                    ExtractError::OffArena(self.session.to_sequent(seq).to_string())
                })?;
            let GamePosition::Forall(seq2, auto2) = self.game.positions[target as usize] else {
                unreachable!()
            };
            seq = seq2;
            auto = auto2;
        };
        for key in trail {
            self.reduce_memo.insert(key, result);
        }
        self.reduce_memo.insert((result.seq, result.auto), result);
        Ok(result)
    }

    /// Successor sets of one atomic position: for every formula in a modal
    /// conclusion chosen by Exists' strategy, the reduction of the chosen
    /// child. Also returns, per modal blueprint, the reduced child (the
    /// designated witness for that rule application).
    #[allow(clippy::type_complexity)]
    fn successors(
        &mut self,
        pos: AtomicPos,
    ) -> Result<(BTreeMap<FormulaId, Vec<AtomicPos>>, HashMap<Blueprint, AtomicPos>), ExtractError>
    {
        // ordered by formula id so carrier discovery is deterministic
        let mut by_formula: BTreeMap<FormulaId, Vec<AtomicPos>> = BTreeMap::new();
        let mut by_blueprint: HashMap<Blueprint, AtomicPos> = HashMap::new();
        let blueprints = self.session.blueprints_for(pos.seq).to_vec();
        for bp_id in blueprints {
            let blueprint = self.session.blueprint(bp_id).clone();
            if !matches!(blueprint, Blueprint::Modal(_)) {
                continue;
            }
            let expos = self
                .game
                .position_id(GamePosition::Exists(pos.seq, bp_id, pos.auto))
                .ok_or_else(|| {
                    ExtractError::OffArena(self.session.to_sequent(pos.seq).to_string())
                })?;
            let Some(target) = self.solution.strategy(Player::Exists)[expos as usize] else {
                // Conclusion-free rule: at a winning position this cannot be
                // chosen by Forall, and Exists has nothing to answer.
                continue;
            };
            let GamePosition::Forall(child_seq, child_auto) =
                self.game.positions[target as usize]
            else {
                unreachable!()
            };
            let reduced = self.reduce(child_seq, child_auto)?;
            by_blueprint.insert(blueprint, reduced);
            for &f in self.session.seq(child_seq).to_vec().iter() {
                let entry = by_formula.entry(f).or_default();
                if !entry.contains(&reduced) {
                    entry.push(reduced);
                }
            }
        }
        Ok((by_formula, by_blueprint))
    }
}

/// Extracts a coherent model from Exists' winning strategy; the structure is
/// verified against every modal atom before the model is returned. The
/// carrier is named `s0`, `s1`, ... in discovery order, with `s0` the root.
pub fn extract_model(
    session: &mut Session,
    game: &TableauGame,
    solution: &Solution,
    _dta: &TraceAutomaton,
) -> Result<CoalgebraModel, ExtractError> {
    let root = game.root();
    if solution.winner[root as usize] != Player::Exists {
        return Err(ExtractError::NotWinning);
    }
    let mut ex = Extractor {
        session,
        game,
        solution,
        reduce_memo: HashMap::new(),
    };
    let GamePosition::Forall(root_seq, root_auto) = game.positions[root as usize] else {
        unreachable!()
    };
    let y0 = ex.reduce(root_seq, root_auto)?;

    // discover the carrier
    let mut states: Vec<AtomicPos> = vec![y0];
    let mut state_of: HashMap<AtomicPos, usize> = HashMap::from([(y0, 0)]);
    #[allow(clippy::type_complexity)]
    let mut successor_data: Vec<(
        BTreeMap<FormulaId, Vec<AtomicPos>>,
        HashMap<Blueprint, AtomicPos>,
    )> = Vec::new();
    let mut head = 0usize;
    while head < states.len() {
        let pos = states[head];
        let (by_formula, by_blueprint) = ex.successors(pos)?;
        // a position is never both an A-successor and an Ā-successor of the
        // same position
        for (&f, targets) in &by_formula {
            if let Some(neg) = ex.session.closure.negation_of(f) {
                if neg > f {
                    if let Some(neg_targets) = by_formula.get(&neg) {
                        if targets.iter().any(|t| neg_targets.contains(t)) {
                            return Err(ExtractError::Incoherent(
                                ex.session.to_sequent(pos.seq).to_string(),
                                "a successor serves a formula and its negation".into(),
                            ));
                        }
                    }
                }
            }
        }
        for targets in by_formula.values() {
            for t in targets {
                if !state_of.contains_key(t) {
                    state_of.insert(*t, states.len());
                    states.push(*t);
                }
            }
        }
        successor_data.push((by_formula, by_blueprint));
        head += 1;
    }

    let n = states.len();
    let suc_set = |map: &BTreeMap<FormulaId, Vec<AtomicPos>>,
                   f: FormulaId,
                   state_of: &HashMap<AtomicPos, usize>|
     -> StateSet {
        let mut set: StateSet = 0;
        if let Some(targets) = map.get(&f) {
            for t in targets {
                set |= 1 << state_of[t];
            }
        }
        set
    };

    // build the structure state by state
    let mut structure: Vec<StateStructure> = Vec::with_capacity(n);
    for (i, pos) in states.iter().enumerate() {
        let (by_formula, by_blueprint) = &successor_data[i];
        let atoms = ex.session.modal_atoms(pos.seq);
        let name = format!("s{i}");
        let value = match ex.session.logic {
            Logic::Kripke => {
                kripke_value(&atoms, by_formula, &state_of, n, &name, suc_set)?
            }
            Logic::Monotone => {
                monotone_value(&atoms, by_formula, &state_of, &name, suc_set)?
            }
            Logic::Graded => graded_value(&atoms, by_formula, &state_of, n, &name, suc_set)?,
            Logic::Probabilistic => {
                probabilistic_value(&atoms, by_formula, &state_of, i, n, &name, suc_set)?
            }
            Logic::Coalition { agents } => coalition_value(
                ex.session,
                agents,
                &atoms,
                by_formula,
                by_blueprint,
                &state_of,
                i,
                &name,
                suc_set,
            )?,
        };
        structure.push(value);
    }

    // valuation: positive variables present in each label; variables that
    // occur only negatively get an empty positive extent
    let mut valuation: std::collections::BTreeMap<String, StateSet> = Default::default();
    for (_, f) in ex.session.closure.iter() {
        if let FormulaKind::Var { name, .. } = f.kind() {
            valuation.entry(name.to_string()).or_insert(0);
        }
    }
    for (i, pos) in states.iter().enumerate() {
        for &fid in ex.session.seq(pos.seq) {
            if let FormulaKind::Var { name, negated: false } =
                ex.session.closure.formula(fid).kind()
            {
                *valuation.entry(name.to_string()).or_insert(0) |= 1 << i;
            }
        }
    }

    let model = CoalgebraModel {
        logic: ex.session.logic,
        states: (0..n).map(|i| format!("s{i}")).collect(),
        valuation,
        structure,
        root: Some(state_of[&y0]),
    };
    model
        .validate()
        .map_err(|e| ExtractError::Incoherent("<model>".into(), e.to_string()))?;

    // verify coherence: every state lies in the lifting of each of its modal
    // atoms applied to the successor sets
    let all = model.all_states();
    for (i, pos) in states.iter().enumerate() {
        let (by_formula, _) = &successor_data[i];
        for atom in ex.session.modal_atoms(pos.seq) {
            let arg_set = suc_set(by_formula, atom.arg.arg, &state_of);
            let ok = lifting_member(&model.structure[i], atom.op, arg_set, all)
                .map_err(|e| ExtractError::Incoherent(format!("s{i}"), e.to_string()))?;
            if !ok {
                return Err(ExtractError::Incoherent(
                    format!("s{i}"),
                    format!(
                        "{} not satisfied by the constructed structure",
                        ex.session.closure.formula(atom.arg.atom)
                    ),
                ));
            }
        }
    }
    Ok(model)
}

fn kripke_value(
    atoms: &[crate::onestep::ModalAtom<crate::session::AtomRef>],
    by_formula: &BTreeMap<FormulaId, Vec<AtomicPos>>,
    state_of: &HashMap<AtomicPos, usize>,
    n: usize,
    name: &str,
    suc_set: impl Fn(&BTreeMap<FormulaId, Vec<AtomicPos>>, FormulaId, &HashMap<AtomicPos, usize>) -> StateSet,
) -> Result<StateStructure, ExtractError> {
    let full: StateSet = if n == 64 { u64::MAX } else { (1 << n) - 1 };
    if atoms.is_empty() {
        return Ok(StateStructure::Kripke(0));
    }
    let mut intersection = full;
    let mut has_box = false;
    for a in atoms {
        if a.op == Modality::Box {
            has_box = true;
            intersection &= suc_set(by_formula, a.arg.arg, state_of);
        }
    }
    let base = if has_box { intersection } else { full };
    let mut witnesses: StateSet = 0;
    let mut has_dia = false;
    for a in atoms {
        if a.op == Modality::Dia {
            has_dia = true;
            let candidates = suc_set(by_formula, a.arg.arg, state_of) & base;
            if candidates == 0 {
                return Err(ExtractError::Solver(
                    name.into(),
                    "no witness for a diamond inside the box intersection".to_string(),
                ));
            }
            witnesses |= candidates & candidates.wrapping_neg(); // least index
        }
    }
    Ok(StateStructure::Kripke(if has_dia {
        witnesses
    } else if has_box {
        intersection
    } else {
        0
    }))
}

fn monotone_value(
    atoms: &[crate::onestep::ModalAtom<crate::session::AtomRef>],
    by_formula: &BTreeMap<FormulaId, Vec<AtomicPos>>,
    state_of: &HashMap<AtomicPos, usize>,
    name: &str,
    suc_set: impl Fn(&BTreeMap<FormulaId, Vec<AtomicPos>>, FormulaId, &HashMap<AtomicPos, usize>) -> StateSet,
) -> Result<StateStructure, ExtractError> {
    let mut gens: Vec<StateSet> = Vec::new();
    for a in atoms {
        if a.op == Modality::Box {
            gens.push(suc_set(by_formula, a.arg.arg, state_of));
        }
    }
    gens.sort_by_key(|g| g.count_ones());
    let mut antichain: Vec<StateSet> = Vec::new();
    for g in gens {
        if !antichain.iter().any(|m| m & !g == 0) {
            antichain.push(g);
        }
    }
    antichain.sort_unstable();
    for a in atoms {
        if a.op == Modality::Dia {
            let target = suc_set(by_formula, a.arg.arg, state_of);
            if antichain.iter().any(|g| g & target == 0) {
                return Err(ExtractError::Solver(
                    name.into(),
                    "a generator misses a diamond successor set".into(),
                ));
            }
        }
    }
    Ok(StateStructure::Monotone(antichain))
}

fn graded_value(
    atoms: &[crate::onestep::ModalAtom<crate::session::AtomRef>],
    by_formula: &BTreeMap<FormulaId, Vec<AtomicPos>>,
    state_of: &HashMap<AtomicPos, usize>,
    n: usize,
    name: &str,
    suc_set: impl Fn(&BTreeMap<FormulaId, Vec<AtomicPos>>, FormulaId, &HashMap<AtomicPos, usize>) -> StateSet,
) -> Result<StateStructure, ExtractError> {
    let mut lower: Vec<(StateSet, u64)> = Vec::new(); // mass inside set must exceed
    let mut upper: Vec<(StateSet, u64)> = Vec::new(); // mass outside set at most
    let mut index_sum: u64 = 1;
    for a in atoms {
        match a.op {
            Modality::GradedDia(k) => {
                lower.push((suc_set(by_formula, a.arg.arg, state_of), k));
                index_sum += k;
            }
            Modality::GradedBox(l) => {
                upper.push((suc_set(by_formula, a.arg.arg, state_of), l));
                index_sum += l;
            }
            _ => unreachable!(),
        }
    }
    if lower.is_empty() && upper.is_empty() {
        return Ok(StateStructure::Graded(Vec::new()));
    }
    // support: union of diamond successor sets
    let support: Vec<usize> = {
        let mut set: StateSet = 0;
        for (s, _) in &lower {
            set |= s;
        }
        (0..n).filter(|i| set & (1 << i) != 0).collect()
    };
    let entry_cap = index_sum;
    // enumerate multiplicities over the support, smallest total mass first
    let mut weights = vec![0u64; support.len()];
    loop {
        let ok = lower.iter().all(|(set, k)| {
            let mass: u64 = support
                .iter()
                .zip(&weights)
                .filter(|(i, _)| set & (1 << **i) != 0)
                .map(|(_, w)| *w)
                .sum();
            mass > *k
        }) && upper.iter().all(|(set, l)| {
            let mass: u64 = support
                .iter()
                .zip(&weights)
                .filter(|(i, _)| set & (1 << **i) == 0)
                .map(|(_, w)| *w)
                .sum();
            mass <= *l
        });
        if ok {
            return Ok(StateStructure::Graded(
                support
                    .iter()
                    .zip(&weights)
                    .filter(|(_, w)| **w > 0)
                    .map(|(i, w)| (*i, *w))
                    .collect(),
            ));
        }
        // next vector
        let mut i = 0;
        loop {
            if i == weights.len() {
                return Err(ExtractError::Solver(
                    name.into(),
                    "no multiplicity vector within the index bound".into(),
                ));
            }
            if weights[i] < entry_cap {
                weights[i] += 1;
                for w in &mut weights[..i] {
                    *w = 0;
                }
                break;
            }
            i += 1;
        }
    }
}

fn probabilistic_value(
    atoms: &[crate::onestep::ModalAtom<crate::session::AtomRef>],
    by_formula: &BTreeMap<FormulaId, Vec<AtomicPos>>,
    state_of: &HashMap<AtomicPos, usize>,
    self_index: usize,
    n: usize,
    name: &str,
    suc_set: impl Fn(&BTreeMap<FormulaId, Vec<AtomicPos>>, FormulaId, &HashMap<AtomicPos, usize>) -> StateSet,
) -> Result<StateStructure, ExtractError> {
    if atoms.is_empty() {
        // point mass on the state itself
        return Ok(StateStructure::Probabilistic(vec![(
            self_index,
            crate::logic::Rational::one(),
        )]));
    }
    let dia_support: StateSet = atoms
        .iter()
        .filter(|a| matches!(a.op, Modality::ProbDia(_)))
        .map(|a| suc_set(by_formula, a.arg.arg, state_of))
        .fold(0, |acc, s| acc | s);
    let full: StateSet = if n == 64 { u64::MAX } else { (1 << n) - 1 };
    for support_set in [dia_support, full] {
        if support_set == 0 {
            continue;
        }
        let support: Vec<usize> = (0..n).filter(|i| support_set & (1 << i) != 0).collect();
        let mut sys = System::new(support.len());
        sys.add_nonneg_all();
        sys.add_eq(
            vec![BigRational::one(); support.len()],
            BigRational::one(),
        );
        for a in atoms {
            let set = suc_set(by_formula, a.arg.arg, state_of);
            let inside: Vec<BigRational> = support
                .iter()
                .map(|i| {
                    if set & (1 << i) != 0 {
                        BigRational::one()
                    } else {
                        BigRational::zero()
                    }
                })
                .collect();
            match a.op {
                Modality::ProbDia(p) => {
                    sys.add_ge(
                        inside,
                        BigRational::new((*p.numer()).into(), (*p.denom()).into()),
                    );
                }
                Modality::ProbBox(b) => {
                    let outside: Vec<BigRational> = support
                        .iter()
                        .map(|i| {
                            if set & (1 << i) == 0 {
                                BigRational::one()
                            } else {
                                BigRational::zero()
                            }
                        })
                        .collect();
                    sys.add_lt(
                        outside,
                        BigRational::new((*b.numer()).into(), (*b.denom()).into()),
                    );
                }
                _ => unreachable!(),
            }
        }
        if let Some(w) = sys.witness() {
            let mut dist: Vec<(usize, crate::logic::Rational)> = Vec::new();
            for (i, v) in support.iter().zip(&w) {
                if !v.is_zero() {
                    let numer: i64 = v.numer().try_into().map_err(|_| {
                        ExtractError::Solver(name.into(), "witness overflow".into())
                    })?;
                    let denom: i64 = v.denom().try_into().map_err(|_| {
                        ExtractError::Solver(name.into(), "witness overflow".into())
                    })?;
                    dist.push((*i, crate::logic::Rational::new(numer, denom)));
                }
            }
            return Ok(StateStructure::Probabilistic(dist));
        }
    }
    Err(ExtractError::Solver(
        name.into(),
        "mass constraints infeasible over the carrier".into(),
    ))
}

/// Coalition structure: each agent's strategy is a commitment to one premise
/// box plus a challenge vote; the outcome function sends each cell to the
/// designated successor of the matching (C1)/(C2) application.
#[allow(clippy::too_many_arguments)]
fn coalition_value(
    session: &mut Session,
    agents: u32,
    atoms: &[crate::onestep::ModalAtom<crate::session::AtomRef>],
    by_formula: &BTreeMap<FormulaId, Vec<AtomicPos>>,
    by_blueprint: &HashMap<Blueprint, AtomicPos>,
    state_of: &HashMap<AtomicPos, usize>,
    self_index: usize,
    name: &str,
    suc_set: impl Fn(&BTreeMap<FormulaId, Vec<AtomicPos>>, FormulaId, &HashMap<AtomicPos, usize>) -> StateSet,
) -> Result<StateStructure, ExtractError> {
    let _ = (by_formula, suc_set);
    let full = AgentSet::full(agents);
    let boxes: Vec<_> = atoms
        .iter()
        .filter_map(|a| match a.op {
            Modality::CoalBox(c) => Some((*a, c)),
            _ => None,
        })
        .collect();
    let challenges: Vec<_> = atoms
        .iter()
        .filter_map(|a| match a.op {
            Modality::CoalDia(c) if c != full => Some((*a, c)),
            _ => None,
        })
        .collect();
    let globals: Vec<_> = atoms
        .iter()
        .filter_map(|a| match a.op {
            Modality::CoalDia(c) if c == full => Some(*a),
            _ => None,
        })
        .collect();
    let n_boxes = boxes.len();
    let n_challenges = challenges.len();

    // witness for a committed box set (plus an optional challenge): the
    // strategy's answer to the matching rule application
    let witness = |committed: &[usize], challenge: Option<usize>| -> Result<usize, ExtractError> {
        let mut bs: Vec<_> = committed.iter().map(|&i| boxes[i].0).collect();
        bs.sort();
        let inst = match challenge {
            Some(j) => {
                let mut gs: Vec<_> = globals.clone();
                gs.sort();
                RuleInstance::CoalitionCounter {
                    boxes: bs,
                    challenge: challenges[j].0,
                    globals: gs,
                }
            }
            None => {
                if globals.is_empty() {
                    if committed.is_empty() {
                        // completely unconstrained cell
                        return Ok(self_index);
                    }
                    RuleInstance::CoalitionForce { boxes: bs }
                } else {
                    let mut gs: Vec<_> = globals.clone();
                    gs.sort();
                    let challenge = gs.remove(0);
                    RuleInstance::CoalitionCounter {
                        boxes: bs,
                        challenge,
                        globals: gs,
                    }
                }
            }
        };
        let bp = Blueprint::Modal(inst);
        let target = by_blueprint.get(&bp).ok_or_else(|| {
            ExtractError::Solver(
                name.into(),
                format!(
                    "no strategy answer for a required coalition rule ({} boxes)",
                    committed.len()
                ),
            )
        })?;
        let _ = session;
        Ok(state_of[target])
    };

    // strategies: (commitment 0..=n_boxes, vote 0..=n_challenges)
    let per_agent = (n_boxes + 1) * (n_challenges + 1);
    let sizes = vec![per_agent; agents as usize];
    let cells: usize = sizes.iter().product();
    let mut outcome = Vec::with_capacity(cells);
    let decode = |s: usize| -> (usize, usize) { (s / (n_challenges + 1), s % (n_challenges + 1)) };
    #[allow(clippy::needless_range_loop)]
    for cell in 0..cells {
        // decode the profile (mixed radix, last agent fastest)
        let mut rem = cell;
        let mut profile = vec![0usize; agents as usize];
        for a in (0..agents as usize).rev() {
            profile[a] = rem % per_agent;
            rem /= per_agent;
        }
        let commits: Vec<usize> = profile.iter().map(|&s| decode(s).0).collect();
        let votes: Vec<usize> = profile.iter().map(|&s| decode(s).1).collect();
        // fully committed boxes (coalitions are then pairwise disjoint)
        let committed: Vec<usize> = (0..n_boxes)
            .filter(|&i| {
                boxes[i]
                    .1
                    .iter()
                    .all(|agent| commits[agent as usize - 1] == i + 1)
            })
            .collect();
        let vote_sum: usize = votes.iter().sum::<usize>() % (n_challenges + 1);
        let honored = vote_sum >= 1 && {
            let d = challenges[vote_sum - 1].1;
            committed.iter().all(|&i| boxes[i].1.is_subset(&d))
        };
        let target = if honored {
            witness(&committed, Some(vote_sum - 1))?
        } else {
            witness(&committed, None)?
        };
        outcome.push(target);
    }
    Ok(StateStructure::Coalition { sizes, outcome })
}
