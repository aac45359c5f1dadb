//! Random generation of clean guarded formulas and small models.
//! Deterministic for a fixed seed; used by property tests and the
//! acceptance suite.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::closure::Closure;
use crate::formula::{FixKind, Formula};
use crate::logic::{AgentSet, Logic, Modality, Rational};
use crate::semantics::{CoalgebraModel, StateSet, StateStructure};
use crate::sequent::Sequent;

#[derive(Clone, Debug)]
pub struct FormulaGen {
    pub logic: Logic,
    pub max_depth: usize,
    pub free_vars: Vec<String>,
    pub fixpoint_bias: f64,
}

impl FormulaGen {
    pub fn new(logic: Logic) -> FormulaGen {
        FormulaGen {
            logic,
            max_depth: 4,
            free_vars: vec!["p".into(), "q".into()],
            fixpoint_bias: 0.3,
        }
    }
}

fn random_op(rng: &mut ChaCha8Rng, logic: Logic) -> Modality {
    let primal = rng.gen_bool(0.5);
    match logic {
        Logic::Kripke | Logic::Monotone => {
            if primal {
                Modality::Box
            } else {
                Modality::Dia
            }
        }
        Logic::Graded => {
            let n = rng.gen_range(0..=2u64);
            if primal {
                Modality::GradedDia(n)
            } else {
                Modality::GradedBox(n)
            }
        }
        Logic::Probabilistic => {
            let denom = rng.gen_range(1..=3i64);
            let numer = rng.gen_range(0..=denom);
            let p = Rational::new(numer, denom);
            if primal {
                Modality::ProbDia(p)
            } else {
                Modality::ProbBox(p)
            }
        }
        Logic::Coalition { agents } => {
            let mut set = AgentSet::empty();
            for a in 1..=agents {
                if rng.gen_bool(0.5) {
                    set = AgentSet(set.0 | AgentSet::from_agents([a]).0);
                }
            }
            if primal {
                Modality::CoalBox(set)
            } else {
                Modality::CoalDia(set)
            }
        }
    }
}

/// Clean guarded formula by construction: bound variables are globally fresh
/// and only emitted once a modality guards them.
pub fn random_formula(rng: &mut ChaCha8Rng, cfg: &FormulaGen) -> Formula {
    let mut counter = 0usize;
    // (name, guarded-yet) for each enclosing binder
    fn go(
        rng: &mut ChaCha8Rng,
        cfg: &FormulaGen,
        depth: usize,
        bound: &mut Vec<(String, bool)>,
        counter: &mut usize,
    ) -> Formula {
        let usable: Vec<String> = bound
            .iter()
            .filter(|(_, g)| *g)
            .map(|(n, _)| n.clone())
            .collect();
        if depth == 0 {
            // leaf: a variable
            if !usable.is_empty() && rng.gen_bool(0.5) {
                let name = &usable[rng.gen_range(0..usable.len())];
                return Formula::var(name);
            }
            let name = &cfg.free_vars[rng.gen_range(0..cfg.free_vars.len())];
            return if rng.gen_bool(0.5) {
                Formula::var(name)
            } else {
                Formula::neg_var(name)
            };
        }
        let choice = rng.gen_range(0..100);
        if choice < 20 {
            go(rng, cfg, 0, bound, counter)
        } else if choice < 40 {
            let a = go(rng, cfg, depth - 1, bound, counter);
            let b = go(rng, cfg, depth - 1, bound, counter);
            if rng.gen_bool(0.5) {
                Formula::or(a, b)
            } else {
                Formula::and(a, b)
            }
        } else if choice < 40 + (60.0 * (1.0 - cfg.fixpoint_bias)) as u32 {
            let op = random_op(rng, cfg.logic);
            let mut inner: Vec<(String, bool)> =
                bound.iter().map(|(n, _)| (n.clone(), true)).collect();
            let a = go(rng, cfg, depth - 1, &mut inner, counter);
            Formula::modal(op, a)
        } else {
            let name = format!("Z{}", *counter);
            *counter += 1;
            let kind = if rng.gen_bool(0.5) {
                FixKind::Mu
            } else {
                FixKind::Nu
            };
            bound.push((name.clone(), false));
            let body = go(rng, cfg, depth - 1, bound, counter);
            bound.pop();
            Formula::fix(kind, &name, body)
        }
    }
    go(rng, cfg, cfg.max_depth, &mut Vec::new(), &mut counter)
}

/// Random formula whose closure stays within `max_closure` elements.
pub fn random_formula_bounded(
    rng: &mut ChaCha8Rng,
    cfg: &FormulaGen,
    max_closure: usize,
) -> Formula {
    loop {
        let f = random_formula(rng, cfg);
        let cl = Closure::build(&Sequent::singleton(f.clone()));
        if cl.len() <= max_closure {
            return f;
        }
    }
}

/// Random model with `n_states` states and a valuation for `vars`.
pub fn random_model(
    rng: &mut ChaCha8Rng,
    logic: Logic,
    n_states: usize,
    vars: &[&str],
) -> CoalgebraModel {
    debug_assert!((1..=8).contains(&n_states));
    let all: StateSet = (1u64 << n_states) - 1;
    let states: Vec<String> = (0..n_states).map(|i| format!("s{i}")).collect();
    let mut structure = Vec::with_capacity(n_states);
    for _ in 0..n_states {
        let value = match logic {
            Logic::Kripke => StateStructure::Kripke(rng.gen_range(0..=all)),
            Logic::Graded => {
                let mut weights = Vec::new();
                for t in 0..n_states {
                    let w = rng.gen_range(0..=2u64);
                    if w > 0 {
                        weights.push((t, w));
                    }
                }
                StateStructure::Graded(weights)
            }
            Logic::Probabilistic => {
                let k = rng.gen_range(1..=n_states);
                let mut targets: Vec<usize> = (0..n_states).collect();
                for i in (1..targets.len()).rev() {
                    targets.swap(i, rng.gen_range(0..=i));
                }
                targets.truncate(k);
                targets.sort_unstable();
                let weights: Vec<i64> = (0..k).map(|_| rng.gen_range(1..=3i64)).collect();
                let total: i64 = weights.iter().sum();
                StateStructure::Probabilistic(
                    targets
                        .into_iter()
                        .zip(weights)
                        .map(|(t, w)| (t, Rational::new(w, total)))
                        .collect(),
                )
            }
            Logic::Monotone => {
                let k = rng.gen_range(0..=2usize);
                let mut gens: Vec<StateSet> = (0..k).map(|_| rng.gen_range(0..=all)).collect();
                gens.sort_by_key(|g| g.count_ones());
                let mut antichain: Vec<StateSet> = Vec::new();
                for g in gens {
                    if !antichain.iter().any(|m| m & !g == 0) {
                        antichain.push(g);
                    }
                }
                antichain.sort_unstable();
                StateStructure::Monotone(antichain)
            }
            Logic::Coalition { agents } => {
                let sizes: Vec<usize> =
                    (0..agents).map(|_| rng.gen_range(1..=2usize)).collect();
                let cells: usize = sizes.iter().product();
                let outcome: Vec<usize> =
                    (0..cells).map(|_| rng.gen_range(0..n_states)).collect();
                StateStructure::Coalition { sizes, outcome }
            }
        };
        structure.push(value);
    }
    let mut valuation = std::collections::BTreeMap::new();
    for v in vars {
        valuation.insert(v.to_string(), rng.gen_range(0..=all));
    }
    let model = CoalgebraModel {
        logic,
        states,
        valuation,
        structure,
        root: None,
    };
    debug_assert!(model.validate().is_ok());
    model
}

/// Random valid tile lasso from the session's root sequent: a random rule
/// walk until a sequent repeats. Returns None when every walk dies in an
/// axiom or a rule-free sequent.
pub fn random_tile_lasso(
    rng: &mut ChaCha8Rng,
    session: &mut crate::session::Session,
    max_len: usize,
) -> Option<(Vec<crate::session::TileId>, Vec<crate::session::TileId>)> {
    use crate::session::SeqId;
    'attempt: for _ in 0..40 {
        let mut seen: Vec<SeqId> = vec![session.root_seq()];
        let mut tiles = Vec::new();
        let mut current = session.root_seq();
        for _ in 0..max_len {
            let bps = session.blueprints_for(current);
            // candidates with at least one conclusion
            let mut candidates = Vec::new();
            for &bp in bps.iter() {
                let n = session.conclusions(current, bp).len();
                if n > 0 {
                    candidates.push((bp, n));
                }
            }
            if candidates.is_empty() {
                continue 'attempt;
            }
            let (bp, n) = candidates[rng.gen_range(0..candidates.len())];
            let index = rng.gen_range(1..=n as u32);
            let tile = session.tile(current, bp, index);
            tiles.push(tile);
            current = session.conclusions(current, bp)[(index - 1) as usize];
            if let Some(pos) = seen.iter().position(|&s| s == current) {
                let cycle = tiles.split_off(pos);
                return Some((tiles, cycle));
            }
            seen.push(current);
        }
        continue 'attempt;
    }
    None
}
