//! Closed-tableau certificates: serialization and the independent verifier.
//!
//! A certificate carries sequent labels and rule annotations only; automaton
//! states never leave the solver. The verifier rebuilds its own closure,
//! rule set and bad-trace automaton from the claimed root formula, so a
//! certificate is checkable without trusting its producer.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::formula::{rename_apart, Formula, FormulaKind};
use crate::logic::{AgentSet, Logic, Modality};
use crate::onestep::{ModalAtom, RuleInstance};
use crate::parse::parse;
use crate::sequent::Sequent;
use crate::session::{AtomRef, Blueprint, BlueprintId, Bounds, SeqId, Session};
use crate::trace::{dominated_cycle, TraceAutomaton};

/// One tableau node: a sequent label, the applied rule (absent only on
/// defective certificates), and outgoing edges tagged with 1-based
/// conclusion indices.
#[derive(Clone, Debug)]
pub struct TableauNode {
    pub label: Sequent,
    pub annotation: Option<BlueprintRecord>,
    pub edges: Vec<(u32, usize)>,
}

/// A finite rooted labelled graph; the unsatisfiability certificate.
#[derive(Clone, Debug)]
pub struct Tableau {
    pub root: usize,
    pub nodes: Vec<TableauNode>,
}

/// Serializable rule annotation. Modal instances carry their premise atoms
/// as formula text plus the integer coding of the linear schemas.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BlueprintRecord {
    And {
        principal: String,
    },
    Or {
        principal: String,
    },
    Fix {
        principal: String,
    },
    Axiom {
        formula: String,
    },
    Modal {
        schema: String,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        dias: Vec<AtomRecord>,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        boxes: Vec<AtomRecord>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        challenge: Option<String>,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        globals: Vec<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        threshold: Option<i64>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtomRecord {
    pub atom: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coeff: Option<u64>,
}

#[derive(Debug, thiserror::Error)]
#[error("certificate rejected: {0}")]
pub struct CertError(pub String);

impl Tableau {
    /// Assembles a tableau from session-level parts.
    pub(crate) fn from_parts(
        session: &Session,
        labels: Vec<SeqId>,
        annotations: Vec<Option<BlueprintId>>,
        edges: Vec<Vec<(u32, usize)>>,
    ) -> Result<Tableau, String> {
        let mut nodes = Vec::with_capacity(labels.len());
        for ((seq, ann), es) in labels.iter().zip(&annotations).zip(edges) {
            let record = match ann {
                None => None,
                Some(bp) => Some(blueprint_to_record(session, session.blueprint(*bp))?),
            };
            nodes.push(TableauNode {
                label: session.to_sequent(*seq),
                annotation: record,
                edges: es,
            });
        }
        Ok(Tableau { root: 0, nodes })
    }
}

fn blueprint_to_record(session: &Session, bp: &Blueprint) -> Result<BlueprintRecord, String> {
    let text = |id: crate::closure::FormulaId| session.closure.formula(id).to_string();
    Ok(match bp {
        Blueprint::Conj(f) => BlueprintRecord::And { principal: text(*f) },
        Blueprint::Disj(f) => BlueprintRecord::Or { principal: text(*f) },
        Blueprint::Unfold(f) => BlueprintRecord::Fix { principal: text(*f) },
        Blueprint::Clash(a, _) => BlueprintRecord::Axiom { formula: text(*a) },
        Blueprint::Modal(inst) => {
            let atom_text = |a: &ModalAtom<AtomRef>| text(a.arg.atom);
            match inst {
                RuleInstance::KripkeStep { dia, boxes } => BlueprintRecord::Modal {
                    schema: "K".into(),
                    dias: vec![AtomRecord { atom: atom_text(dia), coeff: None }],
                    boxes: boxes
                        .iter()
                        .map(|b| AtomRecord { atom: atom_text(b), coeff: None })
                        .collect(),
                    challenge: None,
                    globals: Vec::new(),
                    threshold: None,
                },
                RuleInstance::MonotoneStep { bx, dia } => BlueprintRecord::Modal {
                    schema: "M".into(),
                    dias: vec![AtomRecord { atom: atom_text(dia), coeff: None }],
                    boxes: vec![AtomRecord { atom: atom_text(bx), coeff: None }],
                    challenge: None,
                    globals: Vec::new(),
                    threshold: None,
                },
                RuleInstance::CoalitionForce { boxes } => BlueprintRecord::Modal {
                    schema: "C1".into(),
                    dias: Vec::new(),
                    boxes: boxes
                        .iter()
                        .map(|b| AtomRecord { atom: atom_text(b), coeff: None })
                        .collect(),
                    challenge: None,
                    globals: Vec::new(),
                    threshold: None,
                },
                RuleInstance::CoalitionCounter {
                    boxes,
                    challenge,
                    globals,
                } => BlueprintRecord::Modal {
                    schema: "C2".into(),
                    dias: Vec::new(),
                    boxes: boxes
                        .iter()
                        .map(|b| AtomRecord { atom: atom_text(b), coeff: None })
                        .collect(),
                    challenge: Some(atom_text(challenge)),
                    globals: globals.iter().map(&atom_text).collect(),
                    threshold: None,
                },
                RuleInstance::Linear {
                    graded,
                    dias,
                    boxes,
                    threshold,
                } => BlueprintRecord::Modal {
                    schema: if *graded { "G" } else { "P" }.into(),
                    dias: dias
                        .iter()
                        .map(|(a, r)| AtomRecord { atom: atom_text(a), coeff: Some(*r) })
                        .collect(),
                    boxes: boxes
                        .iter()
                        .map(|(a, s)| AtomRecord { atom: atom_text(a), coeff: Some(*s) })
                        .collect(),
                    challenge: None,
                    globals: Vec::new(),
                    threshold: Some(*threshold),
                },
            }
        }
    })
}

/// Parses and validates a record against a session: the returned blueprint is
/// a legal rule representation for `label` in the session's rule set.
fn record_to_blueprint(
    session: &mut Session,
    label: SeqId,
    record: &BlueprintRecord,
) -> Result<Blueprint, CertError> {
    let logic = session.logic;
    let err = |msg: String| CertError(msg);
    let parse_member = |session: &Session, text: &str| -> Result<crate::closure::FormulaId, CertError> {
        let f = parse(text, logic)
            .map_err(|e| err(format!("annotation formula {text:?}: {e}")))?;
        let id = session
            .closure
            .lookup(&f)
            .ok_or_else(|| err(format!("annotation formula {text:?} is not in the closure")))?;
        if !session.seq(label).contains(&id) {
            return Err(err(format!(
                "annotation formula {text:?} is not in the node label"
            )));
        }
        Ok(id)
    };
    match record {
        BlueprintRecord::And { principal } => {
            let id = parse_member(session, principal)?;
            if !matches!(session.closure.formula(id).kind(), FormulaKind::And(..)) {
                return Err(err(format!("{principal:?} is not a conjunction")));
            }
            Ok(Blueprint::Conj(id))
        }
        BlueprintRecord::Or { principal } => {
            let id = parse_member(session, principal)?;
            if !matches!(session.closure.formula(id).kind(), FormulaKind::Or(..)) {
                return Err(err(format!("{principal:?} is not a disjunction")));
            }
            Ok(Blueprint::Disj(id))
        }
        BlueprintRecord::Fix { principal } => {
            let id = parse_member(session, principal)?;
            if !matches!(session.closure.formula(id).kind(), FormulaKind::Fix { .. }) {
                return Err(err(format!("{principal:?} is not a fixpoint formula")));
            }
            Ok(Blueprint::Unfold(id))
        }
        BlueprintRecord::Axiom { formula } => {
            let id = parse_member(session, formula)?;
            let neg = session
                .closure
                .negation_of(id)
                .filter(|n| session.seq(label).contains(n))
                .ok_or_else(|| {
                    err(format!("negation of {formula:?} is not in the node label"))
                })?;
            Ok(Blueprint::Clash(id.min(neg), id.max(neg)))
        }
        BlueprintRecord::Modal {
            schema,
            dias,
            boxes,
            challenge,
            globals,
            threshold,
        } => {
            let atom = |session: &Session, text: &str| -> Result<ModalAtom<AtomRef>, CertError> {
                let id = parse_member(session, text)?;
                let FormulaKind::Modal(op, arg) = session.closure.formula(id).kind() else {
                    return Err(err(format!("{text:?} is not a modal atom")));
                };
                let arg_id = session.closure.lookup(arg).expect("argument in closure");
                Ok(ModalAtom {
                    op: *op,
                    arg: AtomRef { atom: id, arg: arg_id },
                })
            };
            let distinct = |atoms: &[ModalAtom<AtomRef>]| -> Result<(), CertError> {
                let mut seen = std::collections::HashSet::new();
                for a in atoms {
                    if !seen.insert(a.arg.atom) {
                        return Err(err("duplicate premise atom".into()));
                    }
                }
                Ok(())
            };
            let inst = match schema.as_str() {
                "K" => {
                    if logic != Logic::Kripke {
                        return Err(err("(K) outside the kripke signature".into()));
                    }
                    if dias.len() != 1 {
                        return Err(err("(K) needs exactly one diamond".into()));
                    }
                    let dia = atom(session, &dias[0].atom)?;
                    if dia.op != Modality::Dia {
                        return Err(err("(K) principal must be a diamond".into()));
                    }
                    let mut bs = Vec::new();
                    for b in boxes {
                        let a = atom(session, &b.atom)?;
                        if a.op != Modality::Box {
                            return Err(err("(K) side atoms must be boxes".into()));
                        }
                        bs.push(a);
                    }
                    bs.sort();
                    distinct(&bs)?;
                    RuleInstance::KripkeStep { dia, boxes: bs }
                }
                "M" => {
                    if logic != Logic::Monotone {
                        return Err(err("(M) outside the monotone signature".into()));
                    }
                    if dias.len() != 1 || boxes.len() != 1 {
                        return Err(err("(M) needs one box and one diamond".into()));
                    }
                    let dia = atom(session, &dias[0].atom)?;
                    let bx = atom(session, &boxes[0].atom)?;
                    if dia.op != Modality::Dia || bx.op != Modality::Box {
                        return Err(err("(M) atoms have the wrong shape".into()));
                    }
                    RuleInstance::MonotoneStep { bx, dia }
                }
                "C1" => {
                    let mut bs = Vec::new();
                    let mut union = AgentSet::empty();
                    for b in boxes {
                        let a = atom(session, &b.atom)?;
                        let Modality::CoalBox(c) = a.op else {
                            return Err(err("(C1) atoms must be coalition boxes".into()));
                        };
                        if !union.is_disjoint(&c) {
                            return Err(err("(C1) coalitions must be pairwise disjoint".into()));
                        }
                        union = AgentSet(union.0 | c.0);
                        bs.push(a);
                    }
                    if bs.is_empty() {
                        return Err(err("(C1) needs at least one box".into()));
                    }
                    bs.sort();
                    distinct(&bs)?;
                    RuleInstance::CoalitionForce { boxes: bs }
                }
                "C2" => {
                    let Logic::Coalition { agents } = logic else {
                        return Err(err("(C2) outside the coalition signature".into()));
                    };
                    let full = AgentSet::full(agents);
                    let ch_text = challenge
                        .as_ref()
                        .ok_or_else(|| err("(C2) needs a challenge atom".into()))?;
                    let ch = atom(session, ch_text)?;
                    let Modality::CoalDia(d) = ch.op else {
                        return Err(err("(C2) challenge must be a coalition dual".into()));
                    };
                    let mut bs = Vec::new();
                    let mut union = AgentSet::empty();
                    for b in boxes {
                        let a = atom(session, &b.atom)?;
                        let Modality::CoalBox(c) = a.op else {
                            return Err(err("(C2) premise boxes must be coalition boxes".into()));
                        };
                        if !union.is_disjoint(&c) {
                            return Err(err("(C2) coalitions must be pairwise disjoint".into()));
                        }
                        if !c.is_subset(&d) {
                            return Err(err(
                                "(C2) coalitions must lie inside the challenge coalition".into(),
                            ));
                        }
                        union = AgentSet(union.0 | c.0);
                        bs.push(a);
                    }
                    bs.sort();
                    let mut gs = Vec::new();
                    for g in globals {
                        let a = atom(session, g)?;
                        if a.op != Modality::CoalDia(full) {
                            return Err(err(
                                "(C2) globals must be full-coalition duals".into(),
                            ));
                        }
                        if a.arg.atom == ch.arg.atom {
                            return Err(err("(C2) challenge repeated among globals".into()));
                        }
                        gs.push(a);
                    }
                    gs.sort();
                    let mut all = bs.clone();
                    all.push(ch);
                    all.extend(gs.iter().copied());
                    distinct(&all)?;
                    RuleInstance::CoalitionCounter {
                        boxes: bs,
                        challenge: ch,
                        globals: gs,
                    }
                }
                "G" | "P" => {
                    let graded = schema == "G";
                    if graded && logic != Logic::Graded {
                        return Err(err("(G) outside the graded signature".into()));
                    }
                    if !graded && logic != Logic::Probabilistic {
                        return Err(err("(P) outside the probabilistic signature".into()));
                    }
                    let mut ds = Vec::new();
                    for d in dias {
                        let a = atom(session, &d.atom)?;
                        let coeff = d.coeff.ok_or_else(|| err("missing coefficient".into()))?;
                        if coeff == 0 {
                            return Err(err("coefficients must be positive".into()));
                        }
                        let ok = matches!(
                            (graded, a.op),
                            (true, Modality::GradedDia(_)) | (false, Modality::ProbDia(_))
                        );
                        if !ok {
                            return Err(err("diamond atom of the wrong shape".into()));
                        }
                        ds.push((a, coeff));
                    }
                    let mut bs = Vec::new();
                    for b in boxes {
                        let a = atom(session, &b.atom)?;
                        let coeff = b.coeff.ok_or_else(|| err("missing coefficient".into()))?;
                        if coeff == 0 {
                            return Err(err("coefficients must be positive".into()));
                        }
                        let ok = matches!(
                            (graded, a.op),
                            (true, Modality::GradedBox(_)) | (false, Modality::ProbBox(_))
                        );
                        if !ok {
                            return Err(err("box atom of the wrong shape".into()));
                        }
                        bs.push((a, coeff));
                    }
                    ds.sort();
                    bs.sort();
                    let all: Vec<ModalAtom<AtomRef>> = ds
                        .iter()
                        .map(|(a, _)| *a)
                        .chain(bs.iter().map(|(a, _)| *a))
                        .collect();
                    distinct(&all)?;
                    let threshold = if graded {
                        if threshold.unwrap_or(0) != 0 {
                            return Err(err("(G) has a fixed threshold of 0".into()));
                        }
                        0
                    } else {
                        threshold.ok_or_else(|| err("(P) needs a threshold".into()))?
                    };
                    let inst = RuleInstance::Linear {
                        graded,
                        dias: ds,
                        boxes: bs,
                        threshold,
                    };
                    check_linear_side_condition(&inst, session)?;
                    inst
                }
                other => return Err(err(format!("unknown rule schema {other:?}"))),
            };
            Ok(Blueprint::Modal(inst))
        }
    }
}

/// Side conditions of the linear schemas, as enforced by the rule set (the
/// corrected probabilistic orientation; see the audit's schema notes).
fn check_linear_side_condition(
    inst: &RuleInstance<AtomRef>,
    _session: &Session,
) -> Result<(), CertError> {
    let RuleInstance::Linear {
        graded,
        dias,
        boxes,
        threshold,
    } = inst
    else {
        unreachable!()
    };
    if *graded {
        if dias.is_empty() {
            return Err(CertError("(G) needs at least one diamond".into()));
        }
        let mut lhs: u64 = 0;
        for (a, r) in dias {
            let Modality::GradedDia(k) = a.op else { unreachable!() };
            lhs += r * (k + 1);
        }
        let mut rhs: u64 = 1;
        for (a, s) in boxes {
            let Modality::GradedBox(l) = a.op else { unreachable!() };
            rhs += s * l;
        }
        if lhs < rhs {
            return Err(CertError("(G) side condition violated".into()));
        }
    } else {
        if dias.is_empty() && boxes.is_empty() {
            return Err(CertError("(P) needs at least one atom".into()));
        }
        use crate::logic::Rational;
        use num::Zero;
        let mut lhs = Rational::zero();
        for (a, s) in boxes {
            let Modality::ProbBox(b) = a.op else { unreachable!() };
            lhs += Rational::new(*s as i64, 1) * b;
        }
        for (a, r) in dias {
            let Modality::ProbDia(p) = a.op else { unreachable!() };
            lhs -= Rational::new(*r as i64, 1) * p;
        }
        let k = Rational::new(*threshold, 1);
        let ok = if boxes.is_empty() { lhs < k } else { lhs <= k };
        if !ok {
            return Err(CertError("(P) side condition violated".into()));
        }
        if inst.conclusions().iter().any(|c| c.is_empty()) {
            return Err(CertError(
                "(P) instance with an everywhere-true conclusion is not part of the rule set"
                    .into(),
            ));
        }
    }
    Ok(())
}

/// Verifies that a tableau is a closed tableau for the given formula:
/// structural invariants, rule-conclusion correctness, every leaf closes by
/// an axiom or a conclusion-free rule, and every infinite path carries a bad
/// trace (checked via the product with a freshly built trace automaton).
pub fn verify_closed(
    tableau: &Tableau,
    formula: &Formula,
    logic: Logic,
    bounds: Bounds,
) -> Result<(), CertError> {
    let renamed = rename_apart(std::slice::from_ref(formula));
    let root_sequent = Sequent::new(renamed);
    let mut session = Session::new(logic, &root_sequent, bounds)
        .map_err(|e| CertError(format!("root formula: {e}")))?;
    if tableau.nodes.is_empty() || tableau.root >= tableau.nodes.len() {
        return Err(CertError("empty tableau or dangling root".into()));
    }
    if tableau.nodes[tableau.root].label != root_sequent {
        return Err(CertError(format!(
            "root label mismatch: expected {root_sequent}, found {}",
            tableau.nodes[tableau.root].label
        )));
    }
    // labels must live inside the closure
    let mut label_ids: Vec<SeqId> = Vec::with_capacity(tableau.nodes.len());
    for (i, node) in tableau.nodes.iter().enumerate() {
        let mut ids = Vec::with_capacity(node.label.len());
        for f in node.label.iter() {
            let id = session.closure.lookup(f).ok_or_else(|| {
                CertError(format!("node {i}: label formula {f} outside the closure"))
            })?;
            ids.push(id);
        }
        label_ids.push(session.intern_seq(ids));
    }
    // annotations, conclusions and edges
    let mut blueprint_ids: Vec<Option<BlueprintId>> = vec![None; tableau.nodes.len()];
    for (i, node) in tableau.nodes.iter().enumerate() {
        for &(_, target) in &node.edges {
            if target >= tableau.nodes.len() {
                return Err(CertError(format!("node {i}: dangling edge")));
            }
        }
        match &node.annotation {
            None => {
                if !node.edges.is_empty() {
                    return Err(CertError(format!(
                        "node {i}: successors without an annotation"
                    )));
                }
                let applicable = session.blueprints_for(label_ids[i]);
                if !applicable.is_empty() {
                    return Err(CertError(format!(
                        "node {i}: un-annotated although a rule applies to {}",
                        node.label
                    )));
                }
                return Err(CertError(format!(
                    "node {i}: open leaf {} (no rule applies)",
                    node.label
                )));
            }
            Some(record) => {
                let bp = record_to_blueprint(&mut session, label_ids[i], record)
                    .map_err(|e| CertError(format!("node {i}: {e}")))?;
                let bp_id = session.intern_blueprint(bp);
                blueprint_ids[i] = Some(bp_id);
                let conclusions = session.conclusions(label_ids[i], bp_id);
                let mut seen = vec![false; conclusions.len()];
                for &(index, target) in &node.edges {
                    if index == 0 || index as usize > conclusions.len() {
                        return Err(CertError(format!(
                            "node {i}: conclusion index {index} out of range"
                        )));
                    }
                    if seen[(index - 1) as usize] {
                        return Err(CertError(format!(
                            "node {i}: duplicate edge for conclusion {index}"
                        )));
                    }
                    seen[(index - 1) as usize] = true;
                    if label_ids[target] != conclusions[(index - 1) as usize] {
                        return Err(CertError(format!(
                            "node {i}: child label does not match conclusion {index} of the applied rule"
                        )));
                    }
                }
                if let Some(missing) = seen.iter().position(|s| !s) {
                    return Err(CertError(format!(
                        "node {i}: conclusion {} has no edge",
                        missing + 1
                    )));
                }
            }
        }
    }
    // every infinite path must carry a bad trace: the product with the
    // complement automaton may not contain a reachable cycle whose dominant
    // priority is even
    let dta = TraceAutomaton::new(&session);
    let mut product_index: HashMap<(usize, u32), u32> = HashMap::new();
    let mut product_nodes: Vec<(usize, u32)> = Vec::new();
    let mut product_edges: Vec<(u32, u32)> = Vec::new();
    let mut worklist = vec![(tableau.root, dta.initial())];
    product_index.insert((tableau.root, dta.initial()), 0);
    product_nodes.push((tableau.root, dta.initial()));
    while let Some((node, a)) = worklist.pop() {
        let from = product_index[&(node, a)];
        let Some(bp) = blueprint_ids[node] else {
            continue;
        };
        for &(index, target) in &tableau.nodes[node].edges {
            let tile = session.tile(label_ids[node], bp, index);
            let rel = session.tile_relation(tile);
            let a2 = dta
                .step(a, tile, || rel)
                .map_err(|e| CertError(format!("automaton ceiling during verification: {e}")))?;
            let key = (target, a2);
            let to = match product_index.get(&key) {
                Some(&id) => id,
                None => {
                    let id = product_nodes.len() as u32;
                    product_index.insert(key, id);
                    product_nodes.push(key);
                    worklist.push(key);
                    id
                }
            };
            product_edges.push((from, to));
        }
    }
    let priorities: Vec<u32> = product_nodes.iter().map(|(_, a)| dta.priority(*a)).collect();
    if let Some((p, witness)) = dominated_cycle(
        product_nodes.len(),
        &product_edges,
        &priorities,
        false,
    ) {
        let (node, _) = product_nodes[witness as usize];
        return Err(CertError(format!(
            "infinite path through node {node} carries no bad trace \
             (accepting automaton cycle with priority {p})"
        )));
    }
    Ok(())
}

/// Cycle structure of a tableau, for inspection and tests: the number of
/// nontrivial strongly connected components, whether the first one is a
/// simple cycle, and the dominant bad-trace priority along the lasso from the
/// root into that cycle.
pub struct CycleReport {
    pub nontrivial_sccs: usize,
    pub unique_simple_cycle: bool,
    pub bad_trace_priority: Option<u32>,
}

pub fn analyze_cycles(
    tableau: &Tableau,
    formula: &Formula,
    logic: Logic,
    bounds: Bounds,
) -> Result<CycleReport, CertError> {
    let renamed = rename_apart(std::slice::from_ref(formula));
    let root_sequent = Sequent::new(renamed);
    let mut session = Session::new(logic, &root_sequent, bounds)
        .map_err(|e| CertError(format!("root formula: {e}")))?;
    // rebuild label/blueprint ids (the tableau is assumed verified)
    let mut label_ids: Vec<SeqId> = Vec::new();
    for node in &tableau.nodes {
        let ids: Vec<_> = node
            .label
            .iter()
            .map(|f| session.closure.lookup(f).expect("verified label"))
            .collect();
        label_ids.push(session.intern_seq(ids));
    }
    let mut blueprint_ids: Vec<Option<BlueprintId>> = Vec::new();
    for (i, node) in tableau.nodes.iter().enumerate() {
        blueprint_ids.push(match &node.annotation {
            None => None,
            Some(r) => Some({
                let bp = record_to_blueprint(&mut session, label_ids[i], r)?;
                session.intern_blueprint(bp)
            }),
        });
    }
    // nontrivial SCCs of the node graph
    let n = tableau.nodes.len();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (i, node) in tableau.nodes.iter().enumerate() {
        for &(_, t) in &node.edges {
            adj[i].push(t);
        }
    }
    let sccs = simple_sccs(n, &adj);
    let nontrivial: Vec<&Vec<usize>> = sccs
        .iter()
        .filter(|scc| scc.len() > 1 || adj[scc[0]].contains(&scc[0]))
        .collect();
    let mut unique_simple_cycle = nontrivial.len() == 1;
    let mut bad = None;
    if let [scc] = nontrivial.as_slice() {
        // simple cycle: every member has exactly one in-component successor
        let members: std::collections::HashSet<usize> = scc.iter().copied().collect();
        for &v in scc.iter() {
            let inside: Vec<usize> = adj[v]
                .iter()
                .copied()
                .filter(|t| members.contains(t))
                .collect();
            if inside.len() != 1 {
                unique_simple_cycle = false;
            }
        }
        if unique_simple_cycle {
            // lasso: BFS path from the root to the cycle, then around it
            let start = scc[0];
            let mut prev: Vec<Option<(usize, u32)>> = vec![None; n];
            let mut q = std::collections::VecDeque::from([tableau.root]);
            let mut seen = vec![false; n];
            seen[tableau.root] = true;
            while let Some(v) = q.pop_front() {
                for &(idx, t) in &tableau.nodes[v].edges {
                    if !seen[t] {
                        seen[t] = true;
                        prev[t] = Some((v, idx));
                        q.push_back(t);
                    }
                }
            }
            let mut stem_edges: Vec<(usize, u32)> = Vec::new();
            let mut cur = start;
            while cur != tableau.root {
                let (p, idx) = prev[cur].expect("cycle reachable from the root");
                stem_edges.push((p, idx));
                cur = p;
            }
            stem_edges.reverse();
            let mut cycle_edges: Vec<(usize, u32)> = Vec::new();
            let mut cur = start;
            loop {
                let (idx, t) = *tableau.nodes[cur]
                    .edges
                    .iter()
                    .find(|(_, t)| members.contains(t))
                    .expect("simple cycle");
                cycle_edges.push((cur, idx));
                cur = t;
                if cur == start {
                    break;
                }
            }
            let rels = |edges: &[(usize, u32)], session: &mut Session| {
                edges
                    .iter()
                    .map(|&(v, idx)| {
                        let tile = session.tile(label_ids[v], blueprint_ids[v].unwrap(), idx);
                        session.tile_relation(tile)
                    })
                    .collect::<Vec<_>>()
            };
            let stem_rels = rels(&stem_edges, &mut session);
            let cycle_rels = rels(&cycle_edges, &mut session);
            let pris: Vec<u32> = (0..session.closure.len() as u32)
                .map(|f| session.priorities.priority(f))
                .collect();
            bad = crate::trace::lasso_bad_trace(
                session.closure.len(),
                &pris,
                session.closure.root_ids(),
                &stem_rels,
                &cycle_rels,
            );
        }
    }
    Ok(CycleReport {
        nontrivial_sccs: nontrivial.len(),
        unique_simple_cycle,
        bad_trace_priority: bad,
    })
}

fn simple_sccs(n: usize, adj: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let alive = vec![true; n];
    let adj32: Vec<Vec<u32>> = adj
        .iter()
        .map(|row| row.iter().map(|&t| t as u32).collect())
        .collect();
    crate::trace::tarjan_sccs(n, &alive, &adj32)
        .into_iter()
        .map(|scc| scc.into_iter().map(|v| v as usize).collect())
        .collect()
}

// --- JSON -------------------------------------------------------------

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTableau {
    root: usize,
    nodes: Vec<RawNode>,
    edges: Vec<RawEdge>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawNode {
    id: usize,
    label: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    annotation: Option<BlueprintRecord>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEdge {
    from: usize,
    to: usize,
    #[serde(rename = "conclusionIndex")]
    conclusion_index: u32,
}

#[derive(Debug, thiserror::Error)]
pub enum TableauJsonError {
    #[error("tableau JSON syntax: {0}")]
    Syntax(#[from] serde_json::Error),
    #[error("tableau JSON: {0}")]
    Format(String),
}

pub fn tableau_to_json(tableau: &Tableau, logic: Logic) -> String {
    let raw = RawTableau {
        root: tableau.root,
        nodes: tableau
            .nodes
            .iter()
            .enumerate()
            .map(|(id, n)| RawNode {
                id,
                label: n.label.iter().map(|f| f.to_string()).collect(),
                annotation: n.annotation.clone(),
            })
            .collect(),
        edges: tableau
            .nodes
            .iter()
            .enumerate()
            .flat_map(|(from, n)| {
                n.edges.iter().map(move |&(idx, to)| RawEdge {
                    from,
                    to,
                    conclusion_index: idx,
                })
            })
            .collect(),
    };
    let _ = logic;
    serde_json::to_string_pretty(&raw).expect("tableau serialization")
}

pub fn tableau_from_json(text: &str, logic: Logic) -> Result<Tableau, TableauJsonError> {
    let raw: RawTableau = serde_json::from_str(text)?;
    let n = raw.nodes.len();
    let mut nodes: Vec<Option<TableauNode>> = (0..n).map(|_| None).collect();
    for node in raw.nodes {
        if node.id >= n {
            return Err(TableauJsonError::Format(format!(
                "node id {} out of range",
                node.id
            )));
        }
        let mut label = Vec::new();
        for text in &node.label {
            let f = parse(text, logic)
                .map_err(|e| TableauJsonError::Format(format!("label {text:?}: {e}")))?;
            label.push(f);
        }
        if nodes[node.id].is_some() {
            return Err(TableauJsonError::Format(format!(
                "duplicate node id {}",
                node.id
            )));
        }
        nodes[node.id] = Some(TableauNode {
            label: Sequent::new(label),
            annotation: node.annotation,
            edges: Vec::new(),
        });
    }
    let mut nodes: Vec<TableauNode> = nodes
        .into_iter()
        .enumerate()
        .map(|(i, n)| {
            n.ok_or_else(|| TableauJsonError::Format(format!("missing node id {i}")))
        })
        .collect::<Result<_, _>>()?;
    for edge in raw.edges {
        if edge.from >= n || edge.to >= n {
            return Err(TableauJsonError::Format("dangling edge".into()));
        }
        nodes[edge.from].edges.push((edge.conclusion_index, edge.to));
    }
    Ok(Tableau {
        root: raw.root,
        nodes,
    })
}
