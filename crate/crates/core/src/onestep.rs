//! One-step modal rules: prime implicant enumeration, the five built-in rule
//! schemas, instance matching, and a brute-force one-step satisfiability
//! oracle with an empirical soundness/completeness audit.
//!
//! Rule instances are generic in the atom payload `T`: the tableau engine
//! instantiates `T` with closure formula ids, the audit with variable ids.

use num::integer::lcm;
use num::{BigRational, One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::logic::{AgentSet, Logic, Modality, Rational};
use crate::lp::System;

/// A literal over items of type `T`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug, Hash)]
pub struct Lit<T> {
    pub item: T,
    pub barred: bool,
}

/// A unary modal atom.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug, Hash)]
pub struct ModalAtom<T> {
    pub op: Modality,
    pub arg: T,
}

/// Input to prime implicant enumeration: one summand of the linear form,
/// `coeff · item` or `coeff · item̄` when `barred`.
#[derive(Clone, Copy, Debug)]
pub struct LinearTerm<T> {
    pub item: T,
    pub coeff: i64,
    pub barred: bool,
}

/// Prime implicants of `f(v) = 1 ⟺ Σ_plain coeff·v(i) + Σ_barred coeff·(1−v(i)) < k`,
/// as literal sequents, in canonical order (by domain as a sorted index set,
/// then by value vector).
///
/// Coefficients must be nonzero. A literal is plain when the implicant sets
/// the item to 1 and barred when it sets it to 0.
pub fn prime_implicants<T: Copy + Ord>(terms: &[LinearTerm<T>], k: i64) -> Vec<Vec<Lit<T>>> {
    debug_assert!(terms.iter().all(|t| t.coeff != 0));
    // Rewrite over plain variables: barred terms contribute a constant and a
    // negated coefficient, giving f(v) = 1 ⟺ Σ c_i v(i) < k'.
    let mut k_plain = i128::from(k);
    let mut coeffs: Vec<i128> = Vec::with_capacity(terms.len());
    for t in terms {
        if t.barred {
            k_plain -= i128::from(t.coeff);
            coeffs.push(-i128::from(t.coeff));
        } else {
            coeffs.push(i128::from(t.coeff));
        }
    }
    // A prime implicant's domain determines its values: negative coefficients
    // are set to 1, positive to 0 (anything else is not minimal). The worst
    // total extension of a domain D has value Σ_{i∉D, c>0} c + Σ_{i∈D, c<0} c,
    // so D is an implicant iff Σ_{i∈D} |c_i| exceeds Σ_{c>0} c_i − k'.
    let positive_sum: i128 = coeffs.iter().filter(|c| **c > 0).sum();
    let need = positive_sum - k_plain; // need Σ_{i∈D} |c_i| > need, strictly
    let weights: Vec<i128> = coeffs.iter().map(|c| c.abs()).collect();
    let mut result = Vec::new();
    let mut chosen: Vec<usize> = Vec::new();
    // DFS over index sets in lexicographic order yields the canonical order.
    #[allow(clippy::too_many_arguments)]
    fn dfs<T: Copy + Ord>(
        next: usize,
        acc: i128,
        need: i128,
        weights: &[i128],
        coeffs: &[i128],
        terms: &[LinearTerm<T>],
        chosen: &mut Vec<usize>,
        result: &mut Vec<Vec<Lit<T>>>,
    ) {
        if acc > need {
            // Minimal by construction: every chosen index was needed when it
            // was added only if removing any single element drops us to ≤ need.
            if chosen.iter().all(|&i| acc - weights[i] <= need) {
                result.push(
                    chosen
                        .iter()
                        .map(|&i| Lit {
                            item: terms[i].item,
                            barred: coeffs[i] > 0,
                        })
                        .collect(),
                );
            }
            return;
        }
        if next >= weights.len() {
            return;
        }
        // include next
        chosen.push(next);
        dfs(next + 1, acc + weights[next], need, weights, coeffs, terms, chosen, result);
        chosen.pop();
        // exclude next
        dfs(next + 1, acc, need, weights, coeffs, terms, chosen, result);
    }
    dfs(0, 0, need, &weights, &coeffs, terms, &mut chosen, &mut result);
    result
}

/// One matched instance of a built-in one-step rule. Premise atoms are
/// pairwise distinct; conclusions are computed on demand.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug, Hash)]
pub enum RuleInstance<T> {
    /// (K): one diamond plus any set of boxes; single conclusion.
    KripkeStep {
        dia: ModalAtom<T>,
        boxes: Vec<ModalAtom<T>>,
    },
    /// (M): one box and one diamond; single conclusion.
    MonotoneStep { bx: ModalAtom<T>, dia: ModalAtom<T> },
    /// (C1): boxes with pairwise disjoint coalitions; single conclusion.
    CoalitionForce { boxes: Vec<ModalAtom<T>> },
    /// (C2): disjoint boxes inside `challenge`'s coalition, one challenge
    /// dual, any set of full-coalition duals; single conclusion.
    CoalitionCounter {
        boxes: Vec<ModalAtom<T>>,
        challenge: ModalAtom<T>,
        globals: Vec<ModalAtom<T>>,
    },
    /// (G)/(P): linear rule with weighted diamonds and boxes; conclusions are
    /// the prime implicants of `Σ s_j q̄_j − Σ r_i p_i < threshold`.
    Linear {
        graded: bool,
        dias: Vec<(ModalAtom<T>, u64)>,
        boxes: Vec<(ModalAtom<T>, u64)>,
        threshold: i64,
    },
}

impl<T: Copy + Ord> RuleInstance<T> {
    /// Conclusion sequents in rule order.
    pub fn conclusions(&self) -> Vec<Vec<Lit<T>>> {
        fn plain<T: Copy>(items: impl IntoIterator<Item = T>) -> Vec<Lit<T>> {
            items
                .into_iter()
                .map(|item| Lit {
                    item,
                    barred: false,
                })
                .collect()
        }
        match self {
            RuleInstance::KripkeStep { dia, boxes } => {
                vec![plain(
                    std::iter::once(dia.arg).chain(boxes.iter().map(|b| b.arg)),
                )]
            }
            RuleInstance::MonotoneStep { bx, dia } => vec![plain([bx.arg, dia.arg])],
            RuleInstance::CoalitionForce { boxes } => {
                vec![plain(boxes.iter().map(|b| b.arg))]
            }
            RuleInstance::CoalitionCounter {
                boxes,
                challenge,
                globals,
            } => vec![plain(
                boxes
                    .iter()
                    .map(|b| b.arg)
                    .chain(std::iter::once(challenge.arg))
                    .chain(globals.iter().map(|g| g.arg)),
            )],
            RuleInstance::Linear {
                dias,
                boxes,
                threshold,
                ..
            } => {
                let mut terms: Vec<LinearTerm<T>> = Vec::new();
                for (d, r) in dias {
                    terms.push(LinearTerm {
                        item: d.arg,
                        coeff: -(*r as i64),
                        barred: false,
                    });
                }
                for (b, s) in boxes {
                    terms.push(LinearTerm {
                        item: b.arg,
                        coeff: *s as i64,
                        barred: true,
                    });
                }
                prime_implicants(&terms, *threshold)
            }
        }
    }

    /// Premise atoms in a fixed order (used for trace relations and coding).
    pub fn premise(&self) -> Vec<ModalAtom<T>> {
        match self {
            RuleInstance::KripkeStep { dia, boxes } => std::iter::once(*dia)
                .chain(boxes.iter().copied())
                .collect(),
            RuleInstance::MonotoneStep { bx, dia } => vec![*bx, *dia],
            RuleInstance::CoalitionForce { boxes } => boxes.clone(),
            RuleInstance::CoalitionCounter {
                boxes,
                challenge,
                globals,
            } => boxes
                .iter()
                .copied()
                .chain(std::iter::once(*challenge))
                .chain(globals.iter().copied())
                .collect(),
            RuleInstance::Linear { dias, boxes, .. } => dias
                .iter()
                .map(|(a, _)| *a)
                .chain(boxes.iter().map(|(a, _)| *a))
                .collect(),
        }
    }
}

/// Coefficient and threshold search bounds for the linear schemas.
#[derive(Clone, Copy, Debug)]
pub struct CoefficientBounds {
    /// Upper bound for the coefficients `r_i`, `s_j` (≥ 1).
    pub coeff: u64,
    /// Bound for `|k|` in the probabilistic schema.
    pub threshold: u64,
}

/// Default bound for graded atoms: the sum of all graded indices plus the
/// number of modal atoms plus one.
pub fn default_graded_bounds<T>(atoms: &[ModalAtom<T>]) -> CoefficientBounds {
    let mut sum: u64 = 0;
    for a in atoms {
        if let Modality::GradedDia(n) | Modality::GradedBox(n) = a.op {
            sum = sum.saturating_add(n);
        }
    }
    let b = sum + atoms.len() as u64 + 1;
    CoefficientBounds {
        coeff: b,
        threshold: b,
    }
}

/// Default bound for probabilistic atoms: indices scaled by the least common
/// denominator, summed, plus the number of modal atoms plus one.
pub fn default_prob_bounds<T>(atoms: &[ModalAtom<T>]) -> CoefficientBounds {
    let mut denom_lcm: i64 = 1;
    for a in atoms {
        if let Modality::ProbDia(p) | Modality::ProbBox(p) = a.op {
            denom_lcm = lcm(denom_lcm, *p.denom());
        }
    }
    let mut sum: i64 = 0;
    for a in atoms {
        if let Modality::ProbDia(p) | Modality::ProbBox(p) = a.op {
            sum += p.numer() * (denom_lcm / p.denom());
        }
    }
    let b = sum.unsigned_abs() + atoms.len() as u64 + 1;
    CoefficientBounds {
        coeff: b,
        threshold: b,
    }
}

pub fn default_bounds<T>(atoms: &[ModalAtom<T>], logic: Logic) -> CoefficientBounds {
    match logic {
        Logic::Graded => default_graded_bounds(atoms),
        Logic::Probabilistic => default_prob_bounds(atoms),
        _ => CoefficientBounds {
            coeff: 1,
            threshold: 1,
        },
    }
}

/// Enumerates every rule instance whose premise is a subset of `atoms`
/// (instances match sets of pairwise distinct atoms, realizing contraction
/// closure), with linear coefficients within `bounds`. Deterministic order.
///
/// Probabilistic instances with an empty sequent among their conclusions are
/// skipped: such a conclusion is satisfied everywhere, so the instance can
/// never participate in a refutation or constrain a model.
pub fn enumerate_instances<T: Copy + Ord + std::hash::Hash>(
    atoms: &[ModalAtom<T>],
    logic: Logic,
    bounds: Option<CoefficientBounds>,
) -> Vec<RuleInstance<T>> {
    let mut atoms = atoms.to_vec();
    atoms.sort();
    atoms.dedup();
    let mut out = Vec::new();
    match logic {
        Logic::Kripke => {
            let dias: Vec<_> = atoms.iter().filter(|a| a.op == Modality::Dia).collect();
            let boxes: Vec<_> = atoms.iter().filter(|a| a.op == Modality::Box).collect();
            for dia in dias {
                for mask in 0..(1u32 << boxes.len()) {
                    let chosen: Vec<ModalAtom<T>> = boxes
                        .iter()
                        .enumerate()
                        .filter(|(i, _)| mask & (1 << i) != 0)
                        .map(|(_, b)| **b)
                        .collect();
                    out.push(RuleInstance::KripkeStep {
                        dia: *dia,
                        boxes: chosen,
                    });
                }
            }
        }
        Logic::Monotone => {
            for bx in atoms.iter().filter(|a| a.op == Modality::Box) {
                for dia in atoms.iter().filter(|a| a.op == Modality::Dia) {
                    out.push(RuleInstance::MonotoneStep {
                        bx: *bx,
                        dia: *dia,
                    });
                }
            }
        }
        Logic::Coalition { agents } => {
            let full = AgentSet::full(agents);
            let boxes: Vec<_> = atoms
                .iter()
                .filter_map(|a| match a.op {
                    Modality::CoalBox(c) => Some((*a, c)),
                    _ => None,
                })
                .collect();
            let duals: Vec<_> = atoms
                .iter()
                .filter_map(|a| match a.op {
                    Modality::CoalDia(c) => Some((*a, c)),
                    _ => None,
                })
                .collect();
            let disjoint_box_sets: Vec<(u32, AgentSet)> = {
                let mut sets = Vec::new();
                for mask in 0..(1u32 << boxes.len()) {
                    let mut union = AgentSet::empty();
                    let mut ok = true;
                    for (i, (_, c)) in boxes.iter().enumerate() {
                        if mask & (1 << i) != 0 {
                            if !union.is_disjoint(c) {
                                ok = false;
                                break;
                            }
                            union = AgentSet(union.0 | c.0);
                        }
                    }
                    if ok {
                        sets.push((mask, union));
                    }
                }
                sets
            };
            let pick = |mask: u32| -> Vec<ModalAtom<T>> {
                boxes
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| mask & (1 << *i) != 0)
                    .map(|(_, (a, _))| *a)
                    .collect()
            };
            // (C1): nonempty disjoint box sets.
            for &(mask, _) in &disjoint_box_sets {
                if mask != 0 {
                    out.push(RuleInstance::CoalitionForce { boxes: pick(mask) });
                }
            }
            // (C2): disjoint boxes inside the challenge coalition, plus any
            // set of full-coalition duals distinct from the challenge.
            let full_duals: Vec<_> = duals.iter().filter(|(_, c)| *c == full).collect();
            for &(mask, union) in &disjoint_box_sets {
                for (challenge, d) in &duals {
                    if !union.is_subset(d) {
                        continue;
                    }
                    let candidates: Vec<ModalAtom<T>> = full_duals
                        .iter()
                        .filter(|(a, _)| a != challenge)
                        .map(|(a, _)| *a)
                        .collect();
                    for gmask in 0..(1u32 << candidates.len()) {
                        let globals: Vec<ModalAtom<T>> = candidates
                            .iter()
                            .enumerate()
                            .filter(|(i, _)| gmask & (1 << i) != 0)
                            .map(|(_, a)| *a)
                            .collect();
                        out.push(RuleInstance::CoalitionCounter {
                            boxes: pick(mask),
                            challenge: *challenge,
                            globals,
                        });
                    }
                }
            }
        }
        Logic::Graded => {
            let bounds = bounds.unwrap_or_else(|| default_graded_bounds(&atoms));
            let dias: Vec<(ModalAtom<T>, u64)> = atoms
                .iter()
                .filter_map(|a| match a.op {
                    Modality::GradedDia(n) => Some((*a, n)),
                    _ => None,
                })
                .collect();
            let boxes: Vec<(ModalAtom<T>, u64)> = atoms
                .iter()
                .filter_map(|a| match a.op {
                    Modality::GradedBox(n) => Some((*a, n)),
                    _ => None,
                })
                .collect();
            for dmask in 1..(1u32 << dias.len()) {
                let d: Vec<_> = dias
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| dmask & (1 << *i) != 0)
                    .map(|(_, x)| *x)
                    .collect();
                for bmask in 0..(1u32 << boxes.len()) {
                    let b: Vec<_> = boxes
                        .iter()
                        .enumerate()
                        .filter(|(i, _)| bmask & (1 << *i) != 0)
                        .map(|(_, x)| *x)
                        .collect();
                    let mut seen_conclusions = std::collections::HashSet::new();
                    for_each_coeff_vector(d.len() + b.len(), bounds.coeff, &mut |coeffs| {
                        let (rs, ss) = coeffs.split_at(d.len());
                        // side condition: Σ r_i (k_i + 1) ≥ 1 + Σ s_j l_j
                        let lhs: u64 = rs
                            .iter()
                            .zip(&d)
                            .map(|(r, (_, k))| r * (k + 1))
                            .sum();
                        let rhs: u64 = 1 + ss
                            .iter()
                            .zip(&b)
                            .map(|(s, (_, l))| s * l)
                            .sum::<u64>();
                        if lhs >= rhs {
                            let inst = RuleInstance::Linear {
                                graded: true,
                                dias: d
                                    .iter()
                                    .zip(rs)
                                    .map(|((a, _), r)| (*a, *r))
                                    .collect(),
                                boxes: b
                                    .iter()
                                    .zip(ss)
                                    .map(|((a, _), s)| (*a, *s))
                                    .collect(),
                                threshold: 0,
                            };
                            // instances with equal conclusion lists are
                            // interchangeable in the game and in certificates
                            if seen_conclusions.insert(inst.conclusions()) {
                                out.push(inst);
                            }
                        }
                    });
                }
            }
        }
        Logic::Probabilistic => {
            let bounds = bounds.unwrap_or_else(|| default_prob_bounds(&atoms));
            let dias: Vec<(ModalAtom<T>, Rational)> = atoms
                .iter()
                .filter_map(|a| match a.op {
                    Modality::ProbDia(p) => Some((*a, p)),
                    _ => None,
                })
                .collect();
            let boxes: Vec<(ModalAtom<T>, Rational)> = atoms
                .iter()
                .filter_map(|a| match a.op {
                    Modality::ProbBox(p) => Some((*a, p)),
                    _ => None,
                })
                .collect();
            for dmask in 0..(1u32 << dias.len()) {
                let d: Vec<_> = dias
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| dmask & (1 << *i) != 0)
                    .map(|(_, x)| *x)
                    .collect();
                for bmask in 0..(1u32 << boxes.len()) {
                    let b: Vec<_> = boxes
                        .iter()
                        .enumerate()
                        .filter(|(i, _)| bmask & (1 << *i) != 0)
                        .map(|(_, x)| *x)
                        .collect();
                    if d.is_empty() && b.is_empty() {
                        continue;
                    }
                    let mut seen_conclusions = std::collections::HashSet::new();
                    for_each_coeff_vector(d.len() + b.len(), bounds.coeff, &mut |coeffs| {
                        let (rs, ss) = coeffs.split_at(d.len());
                        // Corrected side condition (see audit schema notes):
                        //   m > 0:  Σ s_j b_j − Σ r_i a_i ≤ k
                        //   m = 0:  − Σ r_i a_i < k
                        let mut lhs = Rational::zero();
                        for (s, (_, bj)) in ss.iter().zip(&b) {
                            lhs += Rational::new(*s as i64, 1) * bj;
                        }
                        for (r, (_, ai)) in rs.iter().zip(&d) {
                            lhs -= Rational::new(*r as i64, 1) * ai;
                        }
                        let k_min = bounds.threshold as i64;
                        for k in -k_min..=k_min {
                            let kq = Rational::new(k, 1);
                            let side_ok = if b.is_empty() {
                                lhs < kq
                            } else {
                                lhs <= kq
                            };
                            if !side_ok {
                                continue;
                            }
                            let inst = RuleInstance::Linear {
                                graded: false,
                                dias: d
                                    .iter()
                                    .zip(rs)
                                    .map(|((a, _), r)| (*a, *r))
                                    .collect(),
                                boxes: b
                                    .iter()
                                    .zip(ss)
                                    .map(|((a, _), s)| (*a, *s))
                                    .collect(),
                                threshold: k,
                            };
                            let conclusions = inst.conclusions();
                            if conclusions.iter().any(|c| c.is_empty()) {
                                continue;
                            }
                            if seen_conclusions.insert(conclusions) {
                                out.push(inst);
                            }
                        }
                    });
                }
            }
        }
    }
    out
}

/// Iterates over all coefficient vectors in `[1..=bound]^n` in lexicographic
/// order.
fn for_each_coeff_vector(n: usize, bound: u64, f: &mut impl FnMut(&[u64])) {
    let mut v = vec![1u64; n];
    if bound == 0 {
        // No admissible coefficients at all.
        if n == 0 {
            f(&v);
        }
        return;
    }
    loop {
        f(&v);
        let mut i = n;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if v[i] < bound {
                v[i] += 1;
                for x in &mut v[i + 1..] {
                    *x = 1;
                }
                break;
            }
        }
        if n == 0 {
            return;
        }
    }
}

/// Caps for the brute-force oracle.
#[derive(Clone, Copy, Debug)]
pub struct OracleCaps {
    /// Maximal universe size |X|.
    pub universe: usize,
    /// Multiplicity entry cap for graded structures (None: max index + 1).
    pub graded_entry: Option<u64>,
    /// Strategy-set size cap per agent for coalition structures.
    pub coalition_strategies: usize,
}

impl Default for OracleCaps {
    fn default() -> Self {
        OracleCaps {
            universe: 4,
            graded_entry: None,
            coalition_strategies: 2,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum OracleError {
    #[error("universe size {0} exceeds the configured cap {1}")]
    UniverseCap(usize, usize),
    #[error("coalition profile grid too large to enumerate")]
    ProfileGrid,
}

/// Interpretation of a set of literals over state-set valuations: the
/// intersection of the literal extents. `x_mask` is the whole universe.
pub fn literal_extent(lits: &[Lit<u32>], valuation: &[u32], x_mask: u32) -> u32 {
    let mut acc = x_mask;
    for l in lits {
        let v = valuation[l.item as usize] & x_mask;
        acc &= if l.barred { x_mask & !v } else { v };
    }
    acc
}

/// Brute-force one-step satisfiability: is there a structure value `t` over
/// the universe `X = {0..x_size}` lying in every atom's lifting under the
/// given valuation? Enumerates structure values per functor; the
/// probabilistic case is an exact rational feasibility problem.
pub fn one_step_sat(
    atoms: &[ModalAtom<u32>],
    valuation: &[u32],
    x_size: usize,
    logic: Logic,
    caps: &OracleCaps,
) -> Result<bool, OracleError> {
    if x_size > caps.universe {
        return Err(OracleError::UniverseCap(x_size, caps.universe));
    }
    let x_mask: u32 = if x_size == 32 {
        u32::MAX
    } else {
        (1u32 << x_size) - 1
    };
    let extent = |var: u32| valuation[var as usize] & x_mask;
    match logic {
        Logic::Kripke => {
            // t ranges over subsets of X.
            for t in 0..=x_mask {
                let ok = atoms.iter().all(|a| {
                    let u = extent(a.arg);
                    match a.op {
                        Modality::Box => t & !u == 0,
                        Modality::Dia => t & u != 0,
                        _ => unreachable!(),
                    }
                });
                if ok {
                    return Ok(true);
                }
                if t == x_mask {
                    break;
                }
            }
            Ok(false)
        }
        Logic::Graded => {
            // t ranges over multiplicity vectors with bounded entries.
            let max_dia = atoms
                .iter()
                .filter_map(|a| match a.op {
                    Modality::GradedDia(n) => Some(n),
                    _ => None,
                })
                .max();
            let entry_cap = caps
                .graded_entry
                .unwrap_or_else(|| max_dia.map_or(0, |n| n + 1));
            let mut f = vec![0u64; x_size];
            loop {
                let ok = atoms.iter().all(|a| {
                    let u = extent(a.arg);
                    let inside: u64 = (0..x_size)
                        .filter(|i| u & (1 << i) != 0)
                        .map(|i| f[i])
                        .sum();
                    let outside: u64 = (0..x_size)
                        .filter(|i| u & (1 << i) == 0)
                        .map(|i| f[i])
                        .sum();
                    match a.op {
                        Modality::GradedDia(n) => inside > n,
                        Modality::GradedBox(l) => outside <= l,
                        _ => unreachable!(),
                    }
                });
                if ok {
                    return Ok(true);
                }
                // next vector
                let mut i = 0;
                loop {
                    if i == x_size {
                        return Ok(false);
                    }
                    if f[i] < entry_cap {
                        f[i] += 1;
                        for g in &mut f[..i] {
                            *g = 0;
                        }
                        break;
                    }
                    i += 1;
                }
            }
        }
        Logic::Probabilistic => {
            // Exact rational feasibility of the mass constraints.
            let mut sys = System::new(x_size);
            sys.add_nonneg_all();
            let one = BigRational::one();
            sys.add_eq(vec![one.clone(); x_size], one.clone());
            for a in atoms {
                let u = extent(a.arg);
                match a.op {
                    Modality::ProbDia(p) => {
                        // Σ_{x ∈ U} μ(x) ≥ p
                        let coeffs: Vec<BigRational> = (0..x_size)
                            .map(|i| {
                                if u & (1 << i) != 0 {
                                    BigRational::one()
                                } else {
                                    BigRational::zero()
                                }
                            })
                            .collect();
                        sys.add_ge(coeffs, BigRational::new((*p.numer()).into(), (*p.denom()).into()));
                    }
                    Modality::ProbBox(b) => {
                        // Σ_{x ∉ U} μ(x) < b
                        let coeffs: Vec<BigRational> = (0..x_size)
                            .map(|i| {
                                if u & (1 << i) == 0 {
                                    BigRational::one()
                                } else {
                                    BigRational::zero()
                                }
                            })
                            .collect();
                        sys.add_lt(coeffs, BigRational::new((*b.numer()).into(), (*b.denom()).into()));
                    }
                    _ => unreachable!(),
                }
            }
            Ok(sys.feasible())
        }
        Logic::Monotone => {
            // t ranges over upward-closed families, enumerated as generator
            // antichains over P(X).
            let subsets: Vec<u32> = (0..=x_mask).collect();
            let mut found = false;
            let mut antichain: Vec<u32> = Vec::new();
            fn dfs(
                next: usize,
                subsets: &[u32],
                antichain: &mut Vec<u32>,
                check: &mut impl FnMut(&[u32]) -> bool,
                found: &mut bool,
            ) {
                if *found {
                    return;
                }
                if check(antichain) {
                    *found = true;
                    return;
                }
                for i in next..subsets.len() {
                    let s = subsets[i];
                    let comparable = antichain
                        .iter()
                        .any(|&g| g & !s == 0 || s & !g == 0);
                    if comparable {
                        continue;
                    }
                    antichain.push(s);
                    dfs(i + 1, subsets, antichain, check, found);
                    antichain.pop();
                    if *found {
                        return;
                    }
                }
            }
            let mut check = |gens: &[u32]| -> bool {
                atoms.iter().all(|a| {
                    let u = extent(a.arg);
                    match a.op {
                        // U belongs to the upward closure
                        Modality::Box => gens.iter().any(|&g| g & !u == 0),
                        // the complement of U does not: every generator meets U
                        Modality::Dia => gens.iter().all(|&g| g & u != 0),
                        _ => unreachable!(),
                    }
                })
            };
            dfs(0, &subsets, &mut antichain, &mut check, &mut found);
            Ok(found)
        }
        Logic::Coalition { agents } => {
            let n_agents = agents as usize;
            let cap = caps.coalition_strategies.max(1);
            // Enumerate strategy-set size profiles, then outcome functions.
            let mut sizes = vec![1usize; n_agents];
            loop {
                let cells: usize = sizes.iter().product();
                let total = (x_size as u128).checked_pow(cells as u32);
                match total {
                    Some(t) if t <= 1 << 22 => {}
                    _ => return Err(OracleError::ProfileGrid),
                }
                let mut outcome = vec![0usize; cells];
                'outer: loop {
                    if coalition_atoms_hold(atoms, &extent, &sizes, &outcome) {
                        return Ok(true);
                    }
                    let mut i = 0;
                    loop {
                        if i == cells {
                            break 'outer;
                        }
                        if outcome[i] + 1 < x_size {
                            outcome[i] += 1;
                            for o in &mut outcome[..i] {
                                *o = 0;
                            }
                            break;
                        }
                        i += 1;
                    }
                }
                // next size profile
                let mut i = 0;
                loop {
                    if i == n_agents {
                        return Ok(false);
                    }
                    if sizes[i] < cap {
                        sizes[i] += 1;
                        for s in &mut sizes[..i] {
                            *s = 1;
                        }
                        break;
                    }
                    i += 1;
                }
            }
        }
    }
}

/// Checks every coalition atom against one concrete game structure.
fn coalition_atoms_hold(
    atoms: &[ModalAtom<u32>],
    extent: &impl Fn(u32) -> u32,
    sizes: &[usize],
    outcome: &[usize],
) -> bool {
    let n_agents = sizes.len();
    let cell_of = |profile: &[usize]| -> usize {
        let mut idx = 0;
        for a in 0..n_agents {
            idx = idx * sizes[a] + profile[a];
        }
        idx
    };
    // Quantifies over the strategies of agents in `varying`, leaving the
    // rest of the profile as-is. Existential when `universal` is false.
    fn quantify(
        profile: &mut Vec<usize>,
        agent: usize,
        sizes: &[usize],
        varying: &AgentSet,
        check: &mut impl FnMut(&[usize]) -> bool,
        universal: bool,
    ) -> bool {
        if agent == sizes.len() {
            return check(profile);
        }
        if !varying.contains(agent as u32 + 1) {
            return quantify(profile, agent + 1, sizes, varying, check, universal);
        }
        for s in 0..sizes[agent] {
            profile[agent] = s;
            let sub = quantify(profile, agent + 1, sizes, varying, check, universal);
            if universal != sub {
                return sub;
            }
        }
        universal
    }
    atoms.iter().all(|a| {
        let u = extent(a.arg);
        let coalition = match a.op {
            Modality::CoalBox(c) | Modality::CoalDia(c) => c,
            _ => unreachable!(),
        };
        let everyone = AgentSet::full(n_agents as u32);
        let others = AgentSet(everyone.0 & !coalition.0);
        let mut profile = vec![0usize; n_agents];
        match a.op {
            Modality::CoalBox(_) => {
                // ∃ strategies for the coalition, ∀ for the rest
                quantify(
                    &mut profile,
                    0,
                    sizes,
                    &coalition,
                    &mut |p_coalition| {
                        let mut inner = p_coalition.to_vec();
                        quantify(
                            &mut inner,
                            0,
                            sizes,
                            &others,
                            &mut |p| {
                                let cell = cell_of(p);
                                u & (1 << outcome[cell]) != 0
                            },
                            true,
                        )
                    },
                    false,
                )
            }
            Modality::CoalDia(_) => {
                // dual: ∀ strategies for the coalition, ∃ for the rest
                quantify(
                    &mut profile,
                    0,
                    sizes,
                    &coalition,
                    &mut |p_coalition| {
                        let mut inner = p_coalition.to_vec();
                        quantify(
                            &mut inner,
                            0,
                            sizes,
                            &others,
                            &mut |p| {
                                let cell = cell_of(p);
                                u & (1 << outcome[cell]) != 0
                            },
                            false,
                        )
                    },
                    true,
                )
            }
            _ => unreachable!(),
        }
    })
}

/// Result of an empirical rule-set audit.
#[derive(Clone, Debug, Default)]
pub struct AuditReport {
    pub samples: usize,
    /// Premise satisfiable but some matching instance refutes it.
    pub soundness_violations: Vec<String>,
    /// Premise unsatisfiable but no matching instance refutes it.
    pub completeness_violations: Vec<String>,
    /// Documented deviations from the literature schemas.
    pub schema_notes: Vec<String>,
}

impl AuditReport {
    pub fn passed(&self) -> bool {
        self.soundness_violations.is_empty() && self.completeness_violations.is_empty()
    }
}

/// Extent of a conclusion sequent under a valuation (empty sequents denote
/// the whole universe).
fn conclusion_nonempty(lits: &[Lit<u32>], valuation: &[u32], x_mask: u32) -> bool {
    literal_extent(lits, valuation, x_mask) != 0
}

fn random_modality(rng: &mut ChaCha8Rng, logic: Logic, primal: bool) -> Modality {
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

/// Spot-checks one-step soundness and completeness of the built-in rule set
/// against the brute-force oracle, over random modalized sequents and
/// valuations. Deterministic for a fixed seed.
pub fn audit_ruleset(
    logic: Logic,
    samples: usize,
    seed: u64,
    caps: &OracleCaps,
    bounds: Option<CoefficientBounds>,
) -> AuditReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = AuditReport {
        samples,
        ..Default::default()
    };
    if logic == Logic::Probabilistic {
        report.schema_notes.push(
            "probabilistic rule schema uses the corrected side condition \
             (m>0: sum s_j*b_j - sum r_i*a_i <= k; m=0: -sum r_i*a_i < k); \
             the printed orientation admits unsound instances such as \
             m=1, s=1, b=1, k=0 over the satisfiable premise [1]q"
                .to_string(),
        );
    }
    for sample in 0..samples {
        let x_size = rng.gen_range(1..=3usize.min(caps.universe));
        let x_mask: u32 = (1u32 << x_size) - 1;
        let n_atoms = rng.gen_range(1..=3usize);
        let n_vars = rng.gen_range(1..=n_atoms);
        let mut atoms: Vec<ModalAtom<u32>> = Vec::new();
        for _ in 0..n_atoms {
            let primal = rng.gen_bool(0.5);
            let atom = ModalAtom {
                op: random_modality(&mut rng, logic, primal),
                arg: rng.gen_range(0..n_vars as u32),
            };
            if !atoms.contains(&atom) {
                atoms.push(atom);
            }
        }
        atoms.sort();
        let valuation: Vec<u32> = (0..n_vars).map(|_| rng.gen_range(0..=x_mask)).collect();
        let sat = match one_step_sat(&atoms, &valuation, x_size, logic, caps) {
            Ok(s) => s,
            Err(e) => {
                report
                    .soundness_violations
                    .push(format!("sample {sample}: oracle error: {e}"));
                continue;
            }
        };
        let instances = enumerate_instances(&atoms, logic, bounds);
        if sat {
            for inst in &instances {
                let refutes = inst
                    .conclusions()
                    .iter()
                    .all(|c| !conclusion_nonempty(c, &valuation, x_mask));
                if refutes {
                    report.soundness_violations.push(format!(
                        "sample {sample}: satisfiable premise {atoms:?} under {valuation:?} \
                         refuted by {inst:?}"
                    ));
                    break;
                }
            }
        } else {
            let refuted = instances.iter().any(|inst| {
                inst.conclusions()
                    .iter()
                    .all(|c| !conclusion_nonempty(c, &valuation, x_mask))
            });
            if !refuted {
                report.completeness_violations.push(format!(
                    "sample {sample}: unsatisfiable premise {atoms:?} under {valuation:?} \
                     not refuted by any instance in bounds"
                ));
            }
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Brute-force prime implicants: all partial valuations, explicit
    /// all-extensions and minimality checks.
    fn brute_prime_implicants(terms: &[LinearTerm<u32>], k: i64) -> Vec<Vec<Lit<u32>>> {
        let n = terms.len();
        let f = |v: &[u8]| -> bool {
            let mut sum: i128 = 0;
            for (t, &val) in terms.iter().zip(v) {
                let x = if t.barred { 1 - val as i128 } else { val as i128 };
                sum += i128::from(t.coeff) * x;
            }
            sum < i128::from(k)
        };
        // partial valuations encoded base-3: 0, 1, undefined
        let mut implicants: Vec<Vec<Option<u8>>> = Vec::new();
        let total = 3usize.pow(n as u32);
        for code in 0..total {
            let mut c = code;
            let partial: Vec<Option<u8>> = (0..n)
                .map(|_| {
                    let d = c % 3;
                    c /= 3;
                    match d {
                        0 => Some(0),
                        1 => Some(1),
                        _ => None,
                    }
                })
                .collect();
            // all total extensions satisfy f?
            let mut all_ok = true;
            let free: Vec<usize> = (0..n).filter(|i| partial[*i].is_none()).collect();
            for ext in 0..(1usize << free.len()) {
                let mut v: Vec<u8> = partial.iter().map(|p| p.unwrap_or(0)).collect();
                for (bit, &idx) in free.iter().enumerate() {
                    v[idx] = ((ext >> bit) & 1) as u8;
                }
                if !f(&v) {
                    all_ok = false;
                    break;
                }
            }
            if all_ok {
                implicants.push(partial);
            }
        }
        // minimal domains only
        let minimal: Vec<&Vec<Option<u8>>> = implicants
            .iter()
            .filter(|p| {
                !implicants.iter().any(|q| {
                    q != *p
                        && q.iter().zip(p.iter()).all(|(qq, pp)| match qq {
                            None => true,
                            some => *some == *pp,
                        })
                })
            })
            .collect();
        let mut out: Vec<Vec<Lit<u32>>> = minimal
            .iter()
            .map(|p| {
                p.iter()
                    .enumerate()
                    .filter_map(|(i, v)| {
                        v.map(|val| Lit {
                            item: terms[i].item,
                            barred: val == 0,
                        })
                    })
                    .collect()
            })
            .collect();
        out.sort();
        out.dedup();
        out
    }

    #[test]
    fn prime_implicants_spec_examples() {
        // coeffs [(p1,+1,plain),(p2,+1,plain)], k=2 → [{p̄1},{p̄2}]
        let terms = [
            LinearTerm { item: 1u32, coeff: 1, barred: false },
            LinearTerm { item: 2u32, coeff: 1, barred: false },
        ];
        let got = prime_implicants(&terms, 2);
        assert_eq!(
            got,
            vec![
                vec![Lit { item: 1, barred: true }],
                vec![Lit { item: 2, barred: true }],
            ]
        );
        // coeffs [(p1,−1,plain)], k=0 → [{p1}]
        let terms = [LinearTerm { item: 1u32, coeff: -1, barred: false }];
        let got = prime_implicants(&terms, 0);
        assert_eq!(got, vec![vec![Lit { item: 1, barred: false }]]);
    }

    #[test]
    fn prime_implicants_match_brute_force() {
        use rand::{Rng, SeedableRng};
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..500 {
            let n = rng.gen_range(1..=6usize);
            let terms: Vec<LinearTerm<u32>> = (0..n)
                .map(|i| {
                    let mut c = 0i64;
                    while c == 0 {
                        c = rng.gen_range(-4..=4i64);
                    }
                    LinearTerm {
                        item: i as u32,
                        coeff: c,
                        barred: rng.gen_bool(0.4),
                    }
                })
                .collect();
            let k = rng.gen_range(-8..=8i64);
            let mut got = prime_implicants(&terms, k);
            got.sort();
            let expected = brute_prime_implicants(&terms, k);
            assert_eq!(got, expected, "terms {terms:?} k {k}");
        }
    }

    #[test]
    fn sign_property_on_results() {
        use rand::{Rng, SeedableRng};
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        for _ in 0..300 {
            let n = rng.gen_range(1..=5usize);
            let terms: Vec<LinearTerm<u32>> = (0..n)
                .map(|i| {
                    let mut c = 0i64;
                    while c == 0 {
                        c = rng.gen_range(-4..=4i64);
                    }
                    LinearTerm { item: i as u32, coeff: c, barred: rng.gen_bool(0.4) }
                })
                .collect();
            let k = rng.gen_range(-6..=6i64);
            for seq in prime_implicants(&terms, k) {
                for lit in seq {
                    let term = terms.iter().find(|t| t.item == lit.item).unwrap();
                    // effective plain-form coefficient
                    let plain_coeff = if term.barred { -term.coeff } else { term.coeff };
                    if plain_coeff < 0 {
                        assert!(!lit.barred, "negative coefficient must appear positive");
                    } else {
                        assert!(lit.barred, "positive coefficient must appear negative");
                    }
                }
            }
        }
    }

    fn atom(op: Modality, arg: u32) -> ModalAtom<u32> {
        ModalAtom { op, arg }
    }

    #[test]
    fn kripke_instances_by_hand() {
        // Δ = {◇p, □q}: (K) instances with conclusions {p,q} and {p}.
        let atoms = [atom(Modality::Dia, 0), atom(Modality::Box, 1)];
        let instances = enumerate_instances(&atoms, Logic::Kripke, None);
        let conclusions: Vec<Vec<Vec<Lit<u32>>>> =
            instances.iter().map(|i| i.conclusions()).collect();
        assert_eq!(instances.len(), 2);
        let mut flat: Vec<Vec<u32>> = conclusions
            .iter()
            .map(|c| c[0].iter().map(|l| l.item).collect())
            .collect();
        flat.sort();
        assert_eq!(flat, vec![vec![0], vec![0, 1]]);

        // Δ = {□p}: no modal rule applies.
        let atoms = [atom(Modality::Box, 0)];
        assert!(enumerate_instances(&atoms, Logic::Kripke, None).is_empty());
    }

    #[test]
    fn monotone_single_instance() {
        // Δ = {□p, ◇q}: exactly one instance, conclusion {p,q}.
        let atoms = [atom(Modality::Box, 0), atom(Modality::Dia, 1)];
        let instances = enumerate_instances(&atoms, Logic::Monotone, None);
        assert_eq!(instances.len(), 1);
        let c = instances[0].conclusions();
        assert_eq!(c.len(), 1);
        let items: Vec<u32> = c[0].iter().map(|l| l.item).collect();
        assert_eq!(items, vec![0, 1]);
    }

    #[test]
    fn coalition_side_conditions() {
        let c1 = AgentSet::from_agents([1]);
        let c2 = AgentSet::from_agents([2]);
        let overlap = AgentSet::from_agents([1, 2]);
        let full = AgentSet::full(3);
        let atoms = [
            atom(Modality::CoalBox(c1), 0),
            atom(Modality::CoalBox(c2), 1),
            atom(Modality::CoalBox(overlap), 2),
            atom(Modality::CoalDia(full), 3),
        ];
        let instances = enumerate_instances(&atoms, Logic::Coalition { agents: 3 }, None);
        for inst in &instances {
            match inst {
                RuleInstance::CoalitionForce { boxes } => {
                    let mut union = AgentSet::empty();
                    for b in boxes {
                        let Modality::CoalBox(c) = b.op else { panic!() };
                        assert!(union.is_disjoint(&c));
                        union = AgentSet(union.0 | c.0);
                    }
                }
                RuleInstance::CoalitionCounter { boxes, challenge, globals } => {
                    let Modality::CoalDia(d) = challenge.op else { panic!() };
                    let mut union = AgentSet::empty();
                    for b in boxes {
                        let Modality::CoalBox(c) = b.op else { panic!() };
                        assert!(union.is_disjoint(&c));
                        union = AgentSet(union.0 | c.0);
                        assert!(c.is_subset(&d));
                    }
                    for g in globals {
                        let Modality::CoalDia(n) = g.op else { panic!() };
                        assert_eq!(n, full);
                    }
                }
                _ => panic!("unexpected instance kind"),
            }
        }
        // {[{1}]p, [{1,2}]r} cannot be matched together by (C1).
        assert!(!instances.iter().any(|i| matches!(
            i,
            RuleInstance::CoalitionForce { boxes } if boxes.len() == 2
                && boxes.iter().any(|b| b.op == Modality::CoalBox(c1))
                && boxes.iter().any(|b| b.op == Modality::CoalBox(overlap))
        )));
    }

    #[test]
    fn oracle_spec_examples() {
        let caps = OracleCaps::default();
        // {□p} kripke, τ(p)=∅, X={x} → true (t=∅)
        let atoms = [atom(Modality::Box, 0)];
        assert!(one_step_sat(&atoms, &[0], 1, Logic::Kripke, &caps).unwrap());
        // {⟨1/2⟩p, ⟨2/3⟩q} probabilistic, τ disjoint → false
        let atoms = [
            atom(Modality::ProbDia(Rational::new(1, 2)), 0),
            atom(Modality::ProbDia(Rational::new(2, 3)), 1),
        ];
        assert!(!one_step_sat(&atoms, &[0b01, 0b10], 2, Logic::Probabilistic, &caps).unwrap());
        // {⟨1⟩p, ⟨1⟩q} graded, τ disjoint nonempty → true
        let atoms = [
            atom(Modality::GradedDia(1), 0),
            atom(Modality::GradedDia(1), 1),
        ];
        assert!(one_step_sat(&atoms, &[0b01, 0b10], 2, Logic::Graded, &caps).unwrap());
    }

    #[test]
    fn oracle_monotone_basics() {
        let caps = OracleCaps::default();
        // {◇p} alone is satisfiable with the empty family.
        let atoms = [atom(Modality::Dia, 0)];
        assert!(one_step_sat(&atoms, &[0b1], 1, Logic::Monotone, &caps).unwrap());
        // {□p, ◇q} with disjoint extents: box forces a generator inside p,
        // which must meet q: unsatisfiable.
        let atoms = [atom(Modality::Box, 0), atom(Modality::Dia, 1)];
        assert!(!one_step_sat(&atoms, &[0b01, 0b10], 2, Logic::Monotone, &caps).unwrap());
        // same but overlapping extents: satisfiable.
        assert!(one_step_sat(&atoms, &[0b11, 0b10], 2, Logic::Monotone, &caps).unwrap());
    }

    #[test]
    fn probabilistic_diamond_contradiction_refuted() {
        // ⟨1/2⟩p ∧ ⟨2/3⟩q with disjoint extents must be refuted by some
        // instance within default bounds (the corrected side condition
        // admits negative thresholds).
        let atoms = [
            atom(Modality::ProbDia(Rational::new(1, 2)), 0),
            atom(Modality::ProbDia(Rational::new(2, 3)), 1),
        ];
        let valuation = [0b01u32, 0b10u32];
        let instances = enumerate_instances(&atoms, Logic::Probabilistic, None);
        let refuted = instances.iter().any(|inst| {
            inst.conclusions()
                .iter()
                .all(|c| literal_extent(c, &valuation, 0b11) == 0)
        });
        assert!(refuted);
    }

    #[test]
    fn audit_kripke_and_monotone() {
        let caps = OracleCaps::default();
        for logic in [Logic::Kripke, Logic::Monotone] {
            let report = audit_ruleset(logic, 200, 7, &caps, None);
            assert!(report.passed(), "{logic}: {report:?}");
        }
    }

    #[test]
    fn audit_coalition() {
        let caps = OracleCaps::default();
        let report = audit_ruleset(Logic::Coalition { agents: 2 }, 150, 11, &caps, None);
        assert!(report.passed(), "{report:?}");
    }

    #[test]
    fn audit_graded() {
        let caps = OracleCaps::default();
        let report = audit_ruleset(Logic::Graded, 150, 13, &caps, None);
        assert!(report.passed(), "{report:?}");
    }

    #[test]
    fn audit_probabilistic() {
        let caps = OracleCaps::default();
        let report = audit_ruleset(Logic::Probabilistic, 120, 17, &caps, None);
        assert!(report.passed(), "{report:?}");
        assert!(!report.schema_notes.is_empty());
    }

    #[test]
    fn audit_graded_with_zero_bound_reports_incompleteness() {
        let caps = OracleCaps::default();
        let bounds = CoefficientBounds { coeff: 0, threshold: 0 };
        let report = audit_ruleset(Logic::Graded, 150, 13, &caps, Some(bounds));
        assert!(!report.completeness_violations.is_empty());
        assert!(report.soundness_violations.is_empty());
    }
}
