//! Per-query solver session: the closure and priority map of the root
//! sequent, plus interning and memoization for sequents, rule blueprints,
//! conclusions and trace tiles.

use std::collections::HashMap;
use std::rc::Rc;

use crate::closure::{Closure, FormulaId, PriorityMap};
use crate::formula::{check_clean, check_guarded, FormulaKind, WellFormedError};
use crate::logic::{Logic, Modality};
use crate::onestep::{
    default_bounds, enumerate_instances, CoefficientBounds, ModalAtom, OracleCaps, RuleInstance,
};
use crate::sequent::Sequent;

pub type SeqId = u32;
pub type BlueprintId = u32;
pub type TileId = u32;

/// Resource limits and search bounds for one query.
#[derive(Clone, Copy, Debug)]
pub struct Bounds {
    /// Linear-rule coefficient bounds; None computes per-sequent defaults.
    pub coeff: Option<CoefficientBounds>,
    /// Ceiling on explored game positions.
    pub max_positions: usize,
    /// Model-state cap for the model-checking game.
    pub max_model_states: usize,
    /// Ceiling on deterministic trace-automaton states.
    pub max_automaton_states: usize,
    /// Brute-force oracle caps.
    pub oracle: OracleCaps,
}

impl Default for Bounds {
    fn default() -> Self {
        Bounds {
            coeff: None,
            max_positions: 2_000_000,
            max_model_states: 5,
            max_automaton_states: 200_000,
            oracle: OracleCaps::default(),
        }
    }
}

/// A modal atom of the closure: the atom's id and its argument's id.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct AtomRef {
    pub atom: FormulaId,
    pub arg: FormulaId,
}

/// Which rule fires at a node. Principal formulas and axiom pairs are closure
/// ids; modal applications carry the matched one-step rule instance.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Blueprint {
    Conj(FormulaId),
    Disj(FormulaId),
    Unfold(FormulaId),
    Clash(FormulaId, FormulaId),
    Modal(RuleInstance<AtomRef>),
}

impl Blueprint {
    pub fn is_clash(&self) -> bool {
        matches!(self, Blueprint::Clash(..))
    }
}

/// A trace tile: a rule representation together with a 1-based conclusion
/// index.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct Tile {
    pub seq: SeqId,
    pub bp: BlueprintId,
    pub index: u32,
}

#[derive(Debug, thiserror::Error)]
pub enum SessionError {
    #[error(transparent)]
    WellFormed(#[from] WellFormedError),
    #[error("operator {0} is not valid for logic {1}")]
    BadModality(Modality, Logic),
    #[error("priority map construction failed: {0}")]
    Priorities(String),
}

pub struct Session {
    pub logic: Logic,
    pub closure: Closure,
    pub priorities: PriorityMap,
    pub bounds: Bounds,
    root: SeqId,
    seqs: Vec<Rc<Vec<FormulaId>>>,
    seq_index: HashMap<Rc<Vec<FormulaId>>, SeqId>,
    blueprints: Vec<Rc<Blueprint>>,
    bp_index: HashMap<Rc<Blueprint>, BlueprintId>,
    bp_memo: HashMap<SeqId, Rc<Vec<BlueprintId>>>,
    conclusion_memo: HashMap<(SeqId, BlueprintId), Rc<Vec<SeqId>>>,
    tiles: Vec<Tile>,
    tile_index: HashMap<Tile, TileId>,
}

impl Session {
    /// Builds a session for a clean, guarded root sequent.
    pub fn new(logic: Logic, root: &Sequent, bounds: Bounds) -> Result<Session, SessionError> {
        let formulas: Vec<_> = root.iter().cloned().collect();
        check_clean(&formulas)?;
        check_guarded(&formulas)?;
        for f in &formulas {
            if let Err(op) = f.modalities_valid_for(logic) {
                return Err(SessionError::BadModality(op, logic));
            }
        }
        let closure = Closure::build(root);
        let priorities = PriorityMap::build(&closure);
        priorities
            .validate(&closure)
            .map_err(SessionError::Priorities)?;
        let mut session = Session {
            logic,
            closure,
            priorities,
            bounds,
            root: 0,
            seqs: Vec::new(),
            seq_index: HashMap::new(),
            blueprints: Vec::new(),
            bp_index: HashMap::new(),
            bp_memo: HashMap::new(),
            conclusion_memo: HashMap::new(),
            tiles: Vec::new(),
            tile_index: HashMap::new(),
        };
        let root_ids: Vec<FormulaId> = session.closure.root_ids().to_vec();
        session.root = session.intern_seq(root_ids);
        Ok(session)
    }

    pub fn root_seq(&self) -> SeqId {
        self.root
    }

    pub fn intern_seq(&mut self, mut ids: Vec<FormulaId>) -> SeqId {
        ids.sort_unstable();
        ids.dedup();
        let key = Rc::new(ids);
        if let Some(&id) = self.seq_index.get(&key) {
            return id;
        }
        let id = self.seqs.len() as SeqId;
        self.seqs.push(key.clone());
        self.seq_index.insert(key, id);
        id
    }

    pub fn seq(&self, id: SeqId) -> &[FormulaId] {
        &self.seqs[id as usize]
    }

    pub fn seq_count(&self) -> usize {
        self.seqs.len()
    }

    pub fn to_sequent(&self, id: SeqId) -> Sequent {
        self.closure.to_sequent(self.seq(id))
    }

    pub fn blueprint(&self, id: BlueprintId) -> &Blueprint {
        &self.blueprints[id as usize]
    }

    pub fn intern_blueprint(&mut self, bp: Blueprint) -> BlueprintId {
        let key = Rc::new(bp);
        if let Some(&id) = self.bp_index.get(&key) {
            return id;
        }
        let id = self.blueprints.len() as BlueprintId;
        self.blueprints.push(key.clone());
        self.bp_index.insert(key, id);
        id
    }

    pub fn tile(&mut self, seq: SeqId, bp: BlueprintId, index: u32) -> TileId {
        let tile = Tile { seq, bp, index };
        if let Some(&id) = self.tile_index.get(&tile) {
            return id;
        }
        let id = self.tiles.len() as TileId;
        self.tiles.push(tile);
        self.tile_index.insert(tile, id);
        id
    }

    pub fn tile_data(&self, id: TileId) -> Tile {
        self.tiles[id as usize]
    }

    /// Is every member of the sequent atomic (a literal or a modal atom)?
    pub fn seq_is_atomic(&self, id: SeqId) -> bool {
        self.seq(id)
            .iter()
            .all(|&f| self.closure.formula(f).is_atomic())
    }

    /// Modal atoms of a sequent, as `AtomRef`s with their operators.
    pub fn modal_atoms(&self, id: SeqId) -> Vec<ModalAtom<AtomRef>> {
        let mut out = Vec::new();
        for &f in self.seq(id) {
            if let FormulaKind::Modal(op, arg) = self.closure.formula(f).kind() {
                let arg_id = self.closure.lookup(arg).expect("argument in closure");
                out.push(ModalAtom {
                    op: *op,
                    arg: AtomRef {
                        atom: f,
                        arg: arg_id,
                    },
                });
            }
        }
        out
    }

    /// All applicable blueprints at a sequent, memoized: axiom pairs first,
    /// then principal-formula rules in id order, then modal instances in
    /// enumeration order. Duplicates removed.
    pub fn blueprints_for(&mut self, seq: SeqId) -> Rc<Vec<BlueprintId>> {
        if let Some(cached) = self.bp_memo.get(&seq) {
            return cached.clone();
        }
        let members: Vec<FormulaId> = self.seq(seq).to_vec();
        let mut list: Vec<Blueprint> = Vec::new();
        for &f in &members {
            if let Some(neg) = self.closure.negation_of(f) {
                if neg > f && members.binary_search(&neg).is_ok() {
                    list.push(Blueprint::Clash(f, neg));
                }
                // A formula equal to its own negation cannot exist in NNF.
            }
        }
        for &f in &members {
            match self.closure.formula(f).kind() {
                FormulaKind::And(..) => list.push(Blueprint::Conj(f)),
                FormulaKind::Or(..) => list.push(Blueprint::Disj(f)),
                FormulaKind::Fix { .. } => list.push(Blueprint::Unfold(f)),
                _ => {}
            }
        }
        let atoms = self.modal_atoms(seq);
        let bounds = self
            .bounds
            .coeff
            .or_else(|| Some(default_bounds(&atoms, self.logic)));
        for inst in enumerate_instances(&atoms, self.logic, bounds) {
            list.push(Blueprint::Modal(inst));
        }
        let ids: Vec<BlueprintId> = list.into_iter().map(|b| self.intern_blueprint(b)).collect();
        let mut seen = std::collections::HashSet::new();
        let ids: Vec<BlueprintId> = ids.into_iter().filter(|b| seen.insert(*b)).collect();
        let rc = Rc::new(ids);
        self.bp_memo.insert(seq, rc.clone());
        rc
    }

    /// Conclusion sequents of the rule represented by `(seq, bp)`, memoized.
    pub fn conclusions(&mut self, seq: SeqId, bp: BlueprintId) -> Rc<Vec<SeqId>> {
        if let Some(cached) = self.conclusion_memo.get(&(seq, bp)) {
            return cached.clone();
        }
        let members: Vec<FormulaId> = self.seq(seq).to_vec();
        let blueprint = self.blueprint(bp).clone();
        let rest = |except: FormulaId| -> Vec<FormulaId> {
            members.iter().copied().filter(|&g| g != except).collect()
        };
        let lists: Vec<Vec<FormulaId>> = match &blueprint {
            Blueprint::Conj(f) => {
                let FormulaKind::And(a, b) = self.closure.formula(*f).kind() else {
                    panic!("conjunction blueprint on non-conjunction")
                };
                let (a, b) = (
                    self.closure.lookup(a).expect("closure"),
                    self.closure.lookup(b).expect("closure"),
                );
                let mut s = rest(*f);
                s.push(a);
                s.push(b);
                vec![s]
            }
            Blueprint::Disj(f) => {
                let FormulaKind::Or(a, b) = self.closure.formula(*f).kind() else {
                    panic!("disjunction blueprint on non-disjunction")
                };
                let (a, b) = (
                    self.closure.lookup(a).expect("closure"),
                    self.closure.lookup(b).expect("closure"),
                );
                let mut left = rest(*f);
                left.push(a);
                let mut right = rest(*f);
                right.push(b);
                vec![left, right]
            }
            Blueprint::Unfold(f) => {
                let unf = self.closure.unfolding_of(*f).expect("unfolding");
                let mut s = rest(*f);
                s.push(unf);
                vec![s]
            }
            Blueprint::Clash(..) => Vec::new(),
            Blueprint::Modal(inst) => inst
                .conclusions()
                .into_iter()
                .map(|lits| {
                    lits.into_iter()
                        .map(|l| {
                            debug_assert!(
                                !l.barred,
                                "built-in rule conclusions are plain by the sign property"
                            );
                            l.item.arg
                        })
                        .collect()
                })
                .collect(),
        };
        let ids: Vec<SeqId> = lists.into_iter().map(|l| self.intern_seq(l)).collect();
        let rc = Rc::new(ids);
        self.conclusion_memo.insert((seq, bp), rc.clone());
        rc
    }

    /// The trace relation of a tile, dense over the closure: `rel[f]` lists
    /// the formulas the trace continues to. Non-modal rules keep untouched
    /// formulas alive on the diagonal; modal rules kill everything that is
    /// not a matched premise atom.
    pub fn tile_relation(&mut self, tile: TileId) -> Vec<Vec<FormulaId>> {
        let Tile { seq, bp, index } = self.tile_data(tile);
        let members: Vec<FormulaId> = self.seq(seq).to_vec();
        let blueprint = self.blueprint(bp).clone();
        let mut rel: Vec<Vec<FormulaId>> = vec![Vec::new(); self.closure.len()];
        let diag_except = |principal: FormulaId, rel: &mut Vec<Vec<FormulaId>>| {
            for &g in &members {
                if g != principal {
                    rel[g as usize].push(g);
                }
            }
        };
        match &blueprint {
            Blueprint::Conj(f) => {
                let FormulaKind::And(a, b) = self.closure.formula(*f).kind() else {
                    panic!("conjunction blueprint on non-conjunction")
                };
                let (a, b) = (
                    self.closure.lookup(a).expect("closure"),
                    self.closure.lookup(b).expect("closure"),
                );
                rel[*f as usize].push(a);
                if b != a {
                    rel[*f as usize].push(b);
                }
                diag_except(*f, &mut rel);
            }
            Blueprint::Disj(f) => {
                let FormulaKind::Or(a, b) = self.closure.formula(*f).kind() else {
                    panic!("disjunction blueprint on non-disjunction")
                };
                let child = if index == 1 { a } else { b };
                let child = self.closure.lookup(child).expect("closure");
                rel[*f as usize].push(child);
                diag_except(*f, &mut rel);
            }
            Blueprint::Unfold(f) => {
                let unf = self.closure.unfolding_of(*f).expect("unfolding");
                rel[*f as usize].push(unf);
                diag_except(*f, &mut rel);
            }
            Blueprint::Clash(..) => {
                // Axioms have no conclusions, hence no tiles; nothing to do.
            }
            Blueprint::Modal(inst) => {
                let conclusions = inst.conclusions();
                let lits = &conclusions[(index - 1) as usize];
                for l in lits {
                    let src = l.item.atom as usize;
                    if !rel[src].contains(&l.item.arg) {
                        rel[src].push(l.item.arg);
                    }
                }
            }
        }
        rel
    }
}
