//! Formula closures and priority maps.
//!
//! The closure of a sequent is the smallest superset closed under immediate
//! subformulas of conjunctions, disjunctions and modalities, and under
//! unfolding of fixpoint formulas. For clean, guarded input it is finite and
//! bounded by the size measure. All engine machinery addresses formulas by
//! their index in the closure.

use std::collections::HashMap;

use crate::formula::{Formula, FormulaKind};
use crate::sequent::Sequent;

pub type FormulaId = u32;

/// Closure table: formulas indexed by discovery order from the root sequent.
pub struct Closure {
    formulas: Vec<Formula>,
    index: HashMap<Formula, FormulaId>,
    root: Vec<FormulaId>,
    /// For fixpoint formulas, the id of their unfolding.
    unfolding: Vec<Option<FormulaId>>,
}

impl Closure {
    pub fn build(root: &Sequent) -> Closure {
        let mut cl = Closure {
            formulas: Vec::new(),
            index: HashMap::new(),
            root: Vec::new(),
            unfolding: Vec::new(),
        };
        let root_ids: Vec<FormulaId> = root.iter().map(|f| cl.insert(f.clone())).collect();
        cl.root = root_ids;
        let mut next = 0usize;
        while next < cl.formulas.len() {
            let f = cl.formulas[next].clone();
            match f.kind() {
                FormulaKind::Var { .. } => {}
                FormulaKind::Or(a, b) | FormulaKind::And(a, b) => {
                    cl.insert(a.clone());
                    cl.insert(b.clone());
                }
                FormulaKind::Modal(_, a) => {
                    cl.insert(a.clone());
                }
                FormulaKind::Fix { .. } => {
                    let unf = f.unfold().expect("fixpoint");
                    let id = cl.insert(unf);
                    cl.unfolding[next] = Some(id);
                }
            }
            next += 1;
        }
        cl
    }

    fn insert(&mut self, f: Formula) -> FormulaId {
        if let Some(&id) = self.index.get(&f) {
            return id;
        }
        let id = self.formulas.len() as FormulaId;
        self.index.insert(f.clone(), id);
        self.formulas.push(f);
        self.unfolding.push(None);
        id
    }

    pub fn len(&self) -> usize {
        self.formulas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.formulas.is_empty()
    }

    pub fn formula(&self, id: FormulaId) -> &Formula {
        &self.formulas[id as usize]
    }

    pub fn lookup(&self, f: &Formula) -> Option<FormulaId> {
        self.index.get(f).copied()
    }

    pub fn root_ids(&self) -> &[FormulaId] {
        &self.root
    }

    pub fn iter(&self) -> impl Iterator<Item = (FormulaId, &Formula)> {
        self.formulas
            .iter()
            .enumerate()
            .map(|(i, f)| (i as FormulaId, f))
    }

    pub fn unfolding_of(&self, id: FormulaId) -> Option<FormulaId> {
        self.unfolding[id as usize]
    }

    /// Id of the negation, when the negation happens to lie in the closure.
    pub fn negation_of(&self, id: FormulaId) -> Option<FormulaId> {
        self.lookup(&self.formula(id).negate())
    }

    pub fn to_sequent(&self, ids: &[FormulaId]) -> Sequent {
        ids.iter().map(|&i| self.formula(i).clone()).collect()
    }
}

/// Priority assignment on the closure: 0 on non-fixpoint formulas, odd on
/// least fixpoints, even on greatest fixpoints, monotone along binder nesting.
///
/// Every fixpoint formula in the closure is a substitution instance of a
/// binder occurring in the root sequent, identified by its bound variable
/// (unique by cleanness). Priorities attach to those original binders: each
/// binder receives the smallest value of the right parity strictly exceeding
/// the priorities of all binders nested inside it. Closure elements inherit
/// the priority of their binder, so a trace's dominant priority identifies
/// the outermost fixpoint it regenerates infinitely often.
pub struct PriorityMap {
    by_id: Vec<u32>,
}

/// Assigns values to the binders of `f` bottom-up. Returns the maximum value
/// assigned within `f`.
fn assign_binders(
    f: &Formula,
    values: &mut HashMap<std::sync::Arc<str>, u32>,
) -> u32 {
    match f.kind() {
        FormulaKind::Var { .. } => 0,
        FormulaKind::Or(a, b) | FormulaKind::And(a, b) => {
            assign_binders(a, values).max(assign_binders(b, values))
        }
        FormulaKind::Modal(_, a) => assign_binders(a, values),
        FormulaKind::Fix { kind, var, body } => {
            let inner_max = assign_binders(body, values);
            let mut candidate = inner_max + 1;
            let wants_odd = kind.is_least();
            if (candidate % 2 == 1) != wants_odd {
                candidate += 1;
            }
            values.insert(var.clone(), candidate);
            candidate
        }
    }
}

impl PriorityMap {
    pub fn build(closure: &Closure) -> PriorityMap {
        let mut values: HashMap<std::sync::Arc<str>, u32> = HashMap::new();
        for &id in closure.root_ids() {
            assign_binders(closure.formula(id), &mut values);
        }
        let mut by_id = vec![0u32; closure.len()];
        for (id, f) in closure.iter() {
            if let FormulaKind::Fix { var, .. } = f.kind() {
                // An instance of a binder that is not part of the root sequent
                // can only appear if the input was not clean.
                let v = values
                    .get(var)
                    .copied()
                    .expect("fixpoint binder not in root sequent (input not clean?)");
                by_id[id as usize] = v;
            }
        }
        PriorityMap { by_id }
    }

    pub fn priority(&self, id: FormulaId) -> u32 {
        self.by_id[id as usize]
    }

    pub fn max_priority(&self) -> u32 {
        self.by_id.iter().copied().max().unwrap_or(0)
    }

    /// Validates the priority-map invariants against the closure.
    pub fn validate(&self, closure: &Closure) -> Result<(), String> {
        for (id, f) in closure.iter() {
            let p = self.priority(id);
            match f.kind() {
                FormulaKind::Fix { kind, .. } => {
                    let odd = p % 2 == 1;
                    if kind.is_least() != odd {
                        return Err(format!("parity mismatch on {f}: priority {p}"));
                    }
                    if p == 0 {
                        return Err(format!("fixpoint {f} has priority 0"));
                    }
                }
                _ => {
                    if p != 0 {
                        return Err(format!("non-fixpoint {f} has priority {p}"));
                    }
                }
            }
        }
        // Monotone along binder nesting in the root sequent: a binder inside
        // another binder's body never exceeds it. Closure elements are
        // substitution instances of these binders and inherit their values.
        let mut binder_values: HashMap<std::sync::Arc<str>, u32> = HashMap::new();
        for (id, f) in closure.iter() {
            if let FormulaKind::Fix { var, .. } = f.kind() {
                binder_values.insert(var.clone(), self.priority(id));
            }
        }
        fn check_nesting(
            f: &Formula,
            stack: &mut Vec<u32>,
            values: &HashMap<std::sync::Arc<str>, u32>,
        ) -> Result<(), String> {
            match f.kind() {
                FormulaKind::Var { .. } => Ok(()),
                FormulaKind::Or(a, b) | FormulaKind::And(a, b) => {
                    check_nesting(a, stack, values)?;
                    check_nesting(b, stack, values)
                }
                FormulaKind::Modal(_, a) => check_nesting(a, stack, values),
                FormulaKind::Fix { var, body, .. } => {
                    let v = values.get(var).copied().unwrap_or(0);
                    if let Some(&enclosing) = stack.last() {
                        if v > enclosing {
                            return Err(format!(
                                "binder {var} (priority {v}) exceeds its enclosing binder (priority {enclosing})"
                            ));
                        }
                    }
                    stack.push(v);
                    let r = check_nesting(body, stack, values);
                    stack.pop();
                    r
                }
            }
        }
        for &id in closure.root_ids() {
            // Stack values are decreasing outside-in, so comparing against the
            // innermost enclosing binder suffices.
            check_nesting(closure.formula(id), &mut Vec::new(), &binder_values)?;
        }
        let mut distinct: Vec<u32> = self.by_id.clone();
        distinct.sort_unstable();
        distinct.dedup();
        if distinct.len() > closure.len() {
            return Err(format!(
                "priority range cardinality {} exceeds closure size {}",
                distinct.len(),
                closure.len()
            ));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::Logic;
    use crate::parse::parse;

    fn closure_of(text: &str, logic: Logic) -> Closure {
        let f = parse(text, logic).unwrap();
        Closure::build(&Sequent::singleton(f))
    }

    #[test]
    fn closure_of_variable() {
        let cl = closure_of("p", Logic::Kripke);
        assert_eq!(cl.len(), 1);
    }

    #[test]
    fn closure_by_hand() {
        // closure({dia p & q}) = {dia p & q, dia p, q, p}
        let cl = closure_of("dia p & q", Logic::Kripke);
        let expected: Vec<Formula> = vec![
            parse("dia p & q", Logic::Kripke).unwrap(),
            parse("dia p", Logic::Kripke).unwrap(),
            parse("q", Logic::Kripke).unwrap(),
            parse("p", Logic::Kripke).unwrap(),
        ];
        assert_eq!(cl.len(), 4);
        for f in expected {
            assert!(cl.lookup(&f).is_some(), "missing {f}");
        }
    }

    #[test]
    fn closure_contains_unfoldings() {
        let f = parse("mu X. p | dia X", Logic::Kripke).unwrap();
        let cl = Closure::build(&Sequent::singleton(f.clone()));
        let unf = f.unfold().unwrap();
        assert!(cl.lookup(&unf).is_some());
        let root_id = cl.lookup(&f).unwrap();
        assert_eq!(cl.unfolding_of(root_id), cl.lookup(&unf));
    }

    #[test]
    fn closure_size_bound_on_example() {
        for text in ["mu X. p | dia X", "nu Y. box (p & dia Y)", "dia p & q"] {
            let f = parse(text, Logic::Kripke).unwrap();
            let cl = Closure::build(&Sequent::singleton(f.clone()));
            assert!(
                cl.len() as u64 <= f.size(),
                "closure {} > size {} for {text}",
                cl.len(),
                f.size()
            );
        }
    }

    #[test]
    fn priorities_fixpoint_free() {
        let cl = closure_of("dia p & box q", Logic::Kripke);
        let pm = PriorityMap::build(&cl);
        pm.validate(&cl).unwrap();
        assert_eq!(pm.max_priority(), 0);
    }

    #[test]
    fn priorities_nested_alternation() {
        // mu X. dia (nu Y. box (X & Y)): inner nu gets an even priority, the
        // outer mu exceeds it with an odd one.
        let cl = closure_of("mu X. dia (nu Y. box (X & Y))", Logic::Kripke);
        let pm = PriorityMap::build(&cl);
        pm.validate(&cl).unwrap();
        let mu = cl
            .iter()
            .find(|(_, f)| matches!(f.kind(), FormulaKind::Fix { kind: crate::formula::FixKind::Mu, .. }))
            .unwrap()
            .0;
        let nu = cl
            .iter()
            .find(|(_, f)| matches!(f.kind(), FormulaKind::Fix { kind: crate::formula::FixKind::Nu, .. }))
            .unwrap()
            .0;
        assert!(pm.priority(mu) > pm.priority(nu));
        assert_eq!(pm.priority(mu) % 2, 1);
        assert_eq!(pm.priority(nu) % 2, 0);
    }

    #[test]
    fn coalition_example_priorities() {
        // B = nu X.(p & <{1,2,3}> X), A = mu Y.(~p | [{2}] Y): the greatest
        // fixpoint gets 2, the least fixpoint 1.
        let logic = Logic::Coalition { agents: 3 };
        let f = parse(
            "[{1}] (nu X. p & <{1,2,3}> X) & [{2}] (mu Y. ~p | [{2}] Y)",
            logic,
        )
        .unwrap();
        let cl = Closure::build(&Sequent::singleton(f));
        let pm = PriorityMap::build(&cl);
        pm.validate(&cl).unwrap();
        let nu = parse("nu X. p & <{1,2,3}> X", logic).unwrap();
        let mu = parse("mu Y. ~p | [{2}] Y", logic).unwrap();
        assert_eq!(pm.priority(cl.lookup(&nu).unwrap()), 2);
        assert_eq!(pm.priority(cl.lookup(&mu).unwrap()), 1);
        for (id, f) in cl.iter() {
            if !f.is_fixpoint() {
                assert_eq!(pm.priority(id), 0);
            }
        }
    }

    #[test]
    fn modal_atoms_have_args_in_closure() {
        let cl = closure_of("box (p & dia q)", Logic::Kripke);
        for (_, f) in cl.iter() {
            if let FormulaKind::Modal(_, a) = f.kind() {
                assert!(cl.lookup(a).is_some());
            }
        }
    }
}
