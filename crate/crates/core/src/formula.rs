//! Negation-normal-form formulas with fixpoint binders.
//!
//! Negation lives only on variables; general negation is the derived
//! involution [`Formula::negate`]. Formulas are immutable trees behind `Arc`,
//! so clones are cheap and values can be shared across threads.

use std::cmp::Ordering;
use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;
use std::sync::Arc;

use crate::logic::Modality;

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum FixKind {
    Mu,
    Nu,
}

impl FixKind {
    pub fn is_least(&self) -> bool {
        matches!(self, FixKind::Mu)
    }

    pub fn keyword(&self) -> &'static str {
        match self {
            FixKind::Mu => "mu",
            FixKind::Nu => "nu",
        }
    }
}

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum FormulaKind {
    /// A variable or negated variable.
    Var { name: Arc<str>, negated: bool },
    Or(Formula, Formula),
    And(Formula, Formula),
    Modal(Modality, Formula),
    Fix {
        kind: FixKind,
        var: Arc<str>,
        body: Formula,
    },
}

#[derive(PartialEq, Eq, Hash, Debug)]
struct Node {
    depth: u32,
    kind: FormulaKind,
}

/// An NNF formula. Equality and hashing are structural.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Formula(Arc<Node>);

impl Formula {
    fn new(kind: FormulaKind) -> Formula {
        let depth = 1 + match &kind {
            FormulaKind::Var { .. } => 0,
            FormulaKind::Or(a, b) | FormulaKind::And(a, b) => a.depth().max(b.depth()),
            FormulaKind::Modal(_, a) => a.depth(),
            FormulaKind::Fix { body, .. } => body.depth(),
        };
        Formula(Arc::new(Node { depth, kind }))
    }

    pub fn var(name: &str) -> Formula {
        Formula::new(FormulaKind::Var {
            name: name.into(),
            negated: false,
        })
    }

    pub fn neg_var(name: &str) -> Formula {
        Formula::new(FormulaKind::Var {
            name: name.into(),
            negated: true,
        })
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::new(FormulaKind::Or(a, b))
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::new(FormulaKind::And(a, b))
    }

    pub fn modal(op: Modality, a: Formula) -> Formula {
        Formula::new(FormulaKind::Modal(op, a))
    }

    pub fn fix(kind: FixKind, var: &str, body: Formula) -> Formula {
        Formula::new(FormulaKind::Fix {
            kind,
            var: var.into(),
            body,
        })
    }

    pub fn mu(var: &str, body: Formula) -> Formula {
        Formula::fix(FixKind::Mu, var, body)
    }

    pub fn nu(var: &str, body: Formula) -> Formula {
        Formula::fix(FixKind::Nu, var, body)
    }

    pub fn kind(&self) -> &FormulaKind {
        &self.0.kind
    }

    pub fn depth(&self) -> u32 {
        self.0.depth
    }

    pub fn is_atomic(&self) -> bool {
        matches!(
            self.kind(),
            FormulaKind::Var { .. } | FormulaKind::Modal(..)
        )
    }

    pub fn is_fixpoint(&self) -> bool {
        matches!(self.kind(), FormulaKind::Fix { .. })
    }

    /// NNF negation: flips variables, swaps `∧`/`∨` and `μ`/`ν`, and dualises
    /// modal operators. Occurrences of the bound variable stay positive, so
    /// the result is again a well-formed NNF formula. This is an involution.
    pub fn negate(&self) -> Formula {
        match self.kind() {
            FormulaKind::Var { name, negated } => Formula::new(FormulaKind::Var {
                name: name.clone(),
                negated: !negated,
            }),
            FormulaKind::Or(a, b) => Formula::and(a.negate(), b.negate()),
            FormulaKind::And(a, b) => Formula::or(a.negate(), b.negate()),
            FormulaKind::Modal(op, a) => Formula::modal(op.dual(), a.negate()),
            FormulaKind::Fix { kind, var, body } => {
                let dual_kind = match kind {
                    FixKind::Mu => FixKind::Nu,
                    FixKind::Nu => FixKind::Mu,
                };
                let negated_body = body.negate().flip_negated_var(var);
                Formula::new(FormulaKind::Fix {
                    kind: dual_kind,
                    var: var.clone(),
                    body: negated_body,
                })
            }
        }
    }

    /// Replaces occurrences of the negated variable `v̄` by `v` (used in the
    /// fixpoint clause of negation).
    fn flip_negated_var(&self, var: &str) -> Formula {
        match self.kind() {
            FormulaKind::Var { name, negated } => {
                if *negated && &**name == var {
                    Formula::var(var)
                } else {
                    self.clone()
                }
            }
            FormulaKind::Or(a, b) => {
                Formula::or(a.flip_negated_var(var), b.flip_negated_var(var))
            }
            FormulaKind::And(a, b) => {
                Formula::and(a.flip_negated_var(var), b.flip_negated_var(var))
            }
            FormulaKind::Modal(op, a) => Formula::modal(*op, a.flip_negated_var(var)),
            FormulaKind::Fix { kind, var: v, body } => {
                if &**v == var {
                    self.clone()
                } else {
                    Formula::new(FormulaKind::Fix {
                        kind: *kind,
                        var: v.clone(),
                        body: body.flip_negated_var(var),
                    })
                }
            }
        }
    }

    /// Replaces all free positive occurrences of `var` by `replacement`.
    pub fn substitute(&self, var: &str, replacement: &Formula) -> Formula {
        match self.kind() {
            FormulaKind::Var { name, negated } => {
                if !negated && &**name == var {
                    replacement.clone()
                } else {
                    self.clone()
                }
            }
            FormulaKind::Or(a, b) => Formula::or(
                a.substitute(var, replacement),
                b.substitute(var, replacement),
            ),
            FormulaKind::And(a, b) => Formula::and(
                a.substitute(var, replacement),
                b.substitute(var, replacement),
            ),
            FormulaKind::Modal(op, a) => Formula::modal(*op, a.substitute(var, replacement)),
            FormulaKind::Fix { kind, var: v, body } => {
                if &**v == var {
                    self.clone()
                } else {
                    Formula::new(FormulaKind::Fix {
                        kind: *kind,
                        var: v.clone(),
                        body: body.substitute(var, replacement),
                    })
                }
            }
        }
    }

    /// The unfolding `body[var := self]` of a fixpoint formula.
    pub fn unfold(&self) -> Option<Formula> {
        match self.kind() {
            FormulaKind::Fix { var, body, .. } => Some(body.substitute(var, self)),
            _ => None,
        }
    }

    /// Free variable names, counting `v` and `v̄` alike.
    pub fn free_vars(&self) -> BTreeSet<Arc<str>> {
        fn walk(f: &Formula, bound: &mut Vec<Arc<str>>, acc: &mut BTreeSet<Arc<str>>) {
            match f.kind() {
                FormulaKind::Var { name, .. } => {
                    if !bound.iter().any(|b| b == name) {
                        acc.insert(name.clone());
                    }
                }
                FormulaKind::Or(a, b) | FormulaKind::And(a, b) => {
                    walk(a, bound, acc);
                    walk(b, bound, acc);
                }
                FormulaKind::Modal(_, a) => walk(a, bound, acc),
                FormulaKind::Fix { var, body, .. } => {
                    bound.push(var.clone());
                    walk(body, bound, acc);
                    bound.pop();
                }
            }
        }
        let mut acc = BTreeSet::new();
        walk(self, &mut Vec::new(), &mut acc);
        acc
    }

    /// All binder occurrences, in pre-order.
    fn binders(&self, acc: &mut Vec<Arc<str>>) {
        match self.kind() {
            FormulaKind::Var { .. } => {}
            FormulaKind::Or(a, b) | FormulaKind::And(a, b) => {
                a.binders(acc);
                b.binders(acc);
            }
            FormulaKind::Modal(_, a) => a.binders(acc),
            FormulaKind::Fix { var, body, .. } => {
                acc.push(var.clone());
                body.binders(acc);
            }
        }
    }

    /// Size measure: subformula occurrences counted with multiplicity, plus
    /// the binary-coded index cost of every modal operator occurrence.
    pub fn size(&self) -> u64 {
        match self.kind() {
            FormulaKind::Var { .. } => 1,
            FormulaKind::Or(a, b) | FormulaKind::And(a, b) => 1 + a.size() + b.size(),
            FormulaKind::Modal(op, a) => 1 + op.size_units() + a.size(),
            FormulaKind::Fix { body, .. } => 1 + body.size(),
        }
    }

    /// Pre-order traversal of all subterm occurrences.
    pub fn subterms(&self) -> Vec<Formula> {
        let mut out = Vec::new();
        fn walk(f: &Formula, out: &mut Vec<Formula>) {
            out.push(f.clone());
            match f.kind() {
                FormulaKind::Var { .. } => {}
                FormulaKind::Or(a, b) | FormulaKind::And(a, b) => {
                    walk(a, out);
                    walk(b, out);
                }
                FormulaKind::Modal(_, a) => walk(a, out),
                FormulaKind::Fix { body, .. } => walk(body, out),
            }
        }
        walk(self, &mut out);
        out
    }

    /// Checks that every occurrence of a modal operator is valid for `logic`.
    pub fn modalities_valid_for(&self, logic: crate::logic::Logic) -> Result<(), Modality> {
        match self.kind() {
            FormulaKind::Var { .. } => Ok(()),
            FormulaKind::Or(a, b) | FormulaKind::And(a, b) => {
                a.modalities_valid_for(logic)?;
                b.modalities_valid_for(logic)
            }
            FormulaKind::Modal(op, a) => {
                if !op.valid_for(logic) {
                    return Err(*op);
                }
                a.modalities_valid_for(logic)
            }
            FormulaKind::Fix { body, .. } => body.modalities_valid_for(logic),
        }
    }

    /// Canonical total order: structural depth first, then node kind, then
    /// operator descriptors, then children. Fixes sequent ordering and every
    /// tie-break downstream.
    pub fn cmp_canonical(&self, other: &Formula) -> Ordering {
        if Arc::ptr_eq(&self.0, &other.0) {
            return Ordering::Equal;
        }
        self.depth()
            .cmp(&other.depth())
            .then_with(|| self.kind_tag().cmp(&other.kind_tag()))
            .then_with(|| match (self.kind(), other.kind()) {
                (
                    FormulaKind::Var { name: n1, negated: g1 },
                    FormulaKind::Var { name: n2, negated: g2 },
                ) => n1.cmp(n2).then(g1.cmp(g2)),
                (FormulaKind::Or(a1, b1), FormulaKind::Or(a2, b2))
                | (FormulaKind::And(a1, b1), FormulaKind::And(a2, b2)) => {
                    a1.cmp_canonical(a2).then_with(|| b1.cmp_canonical(b2))
                }
                (FormulaKind::Modal(o1, a1), FormulaKind::Modal(o2, a2)) => {
                    o1.cmp(o2).then_with(|| a1.cmp_canonical(a2))
                }
                (
                    FormulaKind::Fix { kind: k1, var: v1, body: b1 },
                    FormulaKind::Fix { kind: k2, var: v2, body: b2 },
                ) => k1.cmp(k2).then(v1.cmp(v2)).then_with(|| b1.cmp_canonical(b2)),
                _ => unreachable!("kind tags equal"),
            })
    }

    fn kind_tag(&self) -> u8 {
        match self.kind() {
            FormulaKind::Var { .. } => 0,
            FormulaKind::Or(..) => 1,
            FormulaKind::And(..) => 2,
            FormulaKind::Modal(..) => 3,
            FormulaKind::Fix { kind: FixKind::Mu, .. } => 4,
            FormulaKind::Fix { kind: FixKind::Nu, .. } => 5,
        }
    }
}

impl PartialOrd for Formula {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Formula {
    fn cmp(&self, other: &Self) -> Ordering {
        self.cmp_canonical(other)
    }
}

/// Diagnostic produced by the clean/guarded check.
#[derive(Clone, PartialEq, Eq, Debug, thiserror::Error)]
pub enum WellFormedError {
    #[error("variable {0} is bound more than once")]
    ReboundVariable(String),
    #[error("variable {0} occurs both free and bound")]
    FreeAndBound(String),
    #[error("bound variable {0} occurs outside the scope of a modal operator")]
    Unguarded(String),
    #[error("negated occurrence of {0} under its binder")]
    NegatedBound(String),
}

/// Combined cleanness and guardedness check, with a diagnostic naming the
/// offending variable.
pub fn check_clean_guarded(formulas: &[Formula]) -> Result<(), WellFormedError> {
    check_clean(formulas)?;
    check_guarded(formulas)
}

/// Cleanness: no variable is bound twice, and no variable is both free and
/// bound. Checked on the conjunction of all formulas in the slice.
pub fn check_clean(formulas: &[Formula]) -> Result<(), WellFormedError> {
    let mut bound: HashSet<Arc<str>> = HashSet::new();
    let mut binder_list = Vec::new();
    for f in formulas {
        f.binders(&mut binder_list);
    }
    for b in &binder_list {
        if !bound.insert(b.clone()) {
            return Err(WellFormedError::ReboundVariable(b.to_string()));
        }
    }
    for f in formulas {
        for v in f.free_vars() {
            if bound.contains(&v) {
                return Err(WellFormedError::FreeAndBound(v.to_string()));
            }
        }
    }
    Ok(())
}

/// Guardedness: in every binder, the bound variable occurs only within the
/// scope of a modal operator. Also rejects negated occurrences of a bound
/// variable inside its own binder (which the NNF grammar rules out).
pub fn check_guarded(formulas: &[Formula]) -> Result<(), WellFormedError> {
    fn walk(f: &Formula, pending: &mut Vec<Arc<str>>) -> Result<(), WellFormedError> {
        match f.kind() {
            FormulaKind::Var { name, negated } => {
                if pending.iter().any(|p| p == name) {
                    if *negated {
                        return Err(WellFormedError::NegatedBound(name.to_string()));
                    }
                    return Err(WellFormedError::Unguarded(name.to_string()));
                }
                Ok(())
            }
            FormulaKind::Or(a, b) | FormulaKind::And(a, b) => {
                walk(a, pending)?;
                walk(b, pending)
            }
            FormulaKind::Modal(_, a) => {
                // A modality guards everything beneath it.
                let mut empty = Vec::new();
                walk(a, &mut empty)
            }
            FormulaKind::Fix { var, body, .. } => {
                pending.push(var.clone());
                walk(body, pending)?;
                pending.pop();
                Ok(())
            }
        }
    }
    fn check_negated(f: &Formula, bound: &mut Vec<Arc<str>>) -> Result<(), WellFormedError> {
        match f.kind() {
            FormulaKind::Var { name, negated } => {
                if *negated && bound.iter().any(|p| p == name) {
                    return Err(WellFormedError::NegatedBound(name.to_string()));
                }
                Ok(())
            }
            FormulaKind::Or(a, b) | FormulaKind::And(a, b) => {
                check_negated(a, bound)?;
                check_negated(b, bound)
            }
            FormulaKind::Modal(_, a) => check_negated(a, bound),
            FormulaKind::Fix { var, body, .. } => {
                bound.push(var.clone());
                check_negated(body, bound)?;
                bound.pop();
                Ok(())
            }
        }
    }
    for f in formulas {
        walk(f, &mut Vec::new())?;
        check_negated(f, &mut Vec::new())?;
    }
    Ok(())
}

/// Renames bound variables apart so that the result is clean. Free variables
/// are untouched. Fresh names are `X_2`, `X_3`, ... skipping names already in
/// use anywhere in the input.
pub fn rename_apart(formulas: &[Formula]) -> Vec<Formula> {
    let mut used: HashSet<Arc<str>> = HashSet::new();
    for f in formulas {
        for sub in f.subterms() {
            match sub.kind() {
                FormulaKind::Var { name, .. } => {
                    used.insert(name.clone());
                }
                FormulaKind::Fix { var, .. } => {
                    used.insert(var.clone());
                }
                _ => {}
            }
        }
    }
    let mut taken_binders: HashSet<Arc<str>> = HashSet::new();
    // Free variables may never be captured by a renamed binder.
    for f in formulas {
        for v in f.free_vars() {
            taken_binders.insert(v);
        }
    }

    fn fresh(base: &str, used: &mut HashSet<Arc<str>>) -> Arc<str> {
        for i in 2.. {
            let candidate: Arc<str> = format!("{base}_{i}").into();
            if !used.contains(&candidate) {
                used.insert(candidate.clone());
                return candidate;
            }
        }
        unreachable!()
    }

    fn rename(
        f: &Formula,
        env: &HashMap<Arc<str>, Arc<str>>,
        taken: &mut HashSet<Arc<str>>,
        used: &mut HashSet<Arc<str>>,
    ) -> Formula {
        match f.kind() {
            FormulaKind::Var { name, negated } => match env.get(name) {
                Some(new) => Formula::new(FormulaKind::Var {
                    name: new.clone(),
                    negated: *negated,
                }),
                None => f.clone(),
            },
            FormulaKind::Or(a, b) => {
                Formula::or(rename(a, env, taken, used), rename(b, env, taken, used))
            }
            FormulaKind::And(a, b) => {
                Formula::and(rename(a, env, taken, used), rename(b, env, taken, used))
            }
            FormulaKind::Modal(op, a) => Formula::modal(*op, rename(a, env, taken, used)),
            FormulaKind::Fix { kind, var, body } => {
                let new_var = if taken.contains(var) {
                    fresh(var, used)
                } else {
                    taken.insert(var.clone());
                    var.clone()
                };
                taken.insert(new_var.clone());
                let mut env2 = env.clone();
                env2.insert(var.clone(), new_var.clone());
                Formula::new(FormulaKind::Fix {
                    kind: *kind,
                    var: new_var,
                    body: rename(body, &env2, taken, used),
                })
            }
        }
    }

    formulas
        .iter()
        .map(|f| rename(f, &HashMap::new(), &mut taken_binders, &mut used))
        .collect()
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // Precedence levels: binder 0, or 1, and 2, prefix 3.
        fn go(t: &Formula, level: u8, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            let my_level = match t.kind() {
                FormulaKind::Fix { .. } => 0,
                FormulaKind::Or(..) => 1,
                FormulaKind::And(..) => 2,
                _ => 3,
            };
            let parens = my_level < level;
            if parens {
                write!(f, "(")?;
            }
            match t.kind() {
                FormulaKind::Var { name, negated } => {
                    if *negated {
                        write!(f, "~{name}")?;
                    } else {
                        write!(f, "{name}")?;
                    }
                }
                FormulaKind::Or(a, b) => {
                    go(a, 2, f)?;
                    write!(f, " | ")?;
                    go(b, 2, f)?;
                }
                FormulaKind::And(a, b) => {
                    go(a, 3, f)?;
                    write!(f, " & ")?;
                    go(b, 3, f)?;
                }
                FormulaKind::Modal(op, a) => {
                    write!(f, "{op} ")?;
                    go(a, 3, f)?;
                }
                FormulaKind::Fix { kind, var, body } => {
                    write!(f, "{} {var}. ", kind.keyword())?;
                    go(body, 0, f)?;
                }
            }
            if parens {
                write!(f, ")")?;
            }
            Ok(())
        }
        go(self, 0, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::Modality;

    fn dia(a: Formula) -> Formula {
        Formula::modal(Modality::Dia, a)
    }
    fn bx(a: Formula) -> Formula {
        Formula::modal(Modality::Box, a)
    }

    #[test]
    fn negate_variables() {
        let p = Formula::var("p");
        assert_eq!(p.negate(), Formula::neg_var("p"));
        assert_eq!(p.negate().negate(), p);
    }

    #[test]
    fn negate_fixpoint_by_hand() {
        // negate(mu p. q | dia p) = nu p. ~q & box p
        let f = Formula::mu("p", Formula::or(Formula::var("q"), dia(Formula::var("p"))));
        let expected = Formula::nu(
            "p",
            Formula::and(Formula::neg_var("q"), bx(Formula::var("p"))),
        );
        assert_eq!(f.negate(), expected);
        assert_eq!(f.negate().negate(), f);
    }

    #[test]
    fn substitute_examples() {
        // substitute(dia X, X, mu X. dia X) = dia (mu X. dia X)
        let loop_mu = Formula::mu("X", dia(Formula::var("X")));
        let inner = dia(Formula::var("X"));
        assert_eq!(
            inner.substitute("X", &loop_mu),
            dia(loop_mu.clone())
        );
        // no occurrence
        let p = Formula::var("p");
        assert_eq!(p.substitute("X", &loop_mu), p);
        // unfold mu X.(p | dia X) = p | dia(mu X.(p | dia X))
        let f = Formula::mu("X", Formula::or(Formula::var("p"), dia(Formula::var("X"))));
        assert_eq!(
            f.unfold().unwrap(),
            Formula::or(Formula::var("p"), dia(f.clone()))
        );
    }

    #[test]
    fn clean_guarded_checks() {
        let unguarded = Formula::mu("X", Formula::var("X"));
        assert!(matches!(
            check_guarded(&[unguarded]),
            Err(WellFormedError::Unguarded(_))
        ));

        let guarded = Formula::mu("X", dia(Formula::var("X")));
        assert!(check_guarded(std::slice::from_ref(&guarded)).is_ok());
        assert!(check_clean(&[guarded]).is_ok());

        let unclean = Formula::and(
            Formula::mu("X", dia(Formula::var("X"))),
            Formula::nu("X", bx(Formula::var("X"))),
        );
        assert!(matches!(
            check_clean(std::slice::from_ref(&unclean)),
            Err(WellFormedError::ReboundVariable(_))
        ));

        let renamed = rename_apart(&[unclean]);
        assert!(check_clean(&renamed).is_ok());
        assert!(check_guarded(&renamed).is_ok());
    }

    #[test]
    fn size_measure() {
        assert_eq!(Formula::var("p").size(), 1);
        let f = Formula::modal(Modality::GradedDia(5), Formula::var("p"));
        assert_eq!(f.size(), 5); // 2 subformulas + ceil(log2 5)
    }

    #[test]
    fn canonical_order_is_total() {
        let fs = vec![
            Formula::var("p"),
            Formula::neg_var("p"),
            Formula::var("q"),
            Formula::or(Formula::var("p"), Formula::var("q")),
            Formula::and(Formula::var("p"), Formula::var("q")),
            bx(Formula::var("p")),
            Formula::mu("X", dia(Formula::var("X"))),
        ];
        for a in &fs {
            for b in &fs {
                let ab = a.cmp_canonical(b);
                let ba = b.cmp_canonical(a);
                assert_eq!(ab, ba.reverse());
                if ab == Ordering::Equal {
                    assert_eq!(a, b);
                }
            }
        }
    }

    #[test]
    fn display_round_trip_shape() {
        let f = Formula::mu(
            "X",
            Formula::or(
                Formula::var("p"),
                Formula::modal(Modality::Dia, Formula::var("X")),
            ),
        );
        assert_eq!(f.to_string(), "mu X. p | dia X");
    }
}
