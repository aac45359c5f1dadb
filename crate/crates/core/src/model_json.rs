//! JSON schema for coalgebra models. One document per model; unknown fields
//! are rejected; probabilities travel as exact `"n/d"` strings; coalition
//! outcomes are keyed by comma-separated 1-based strategy profiles.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::logic::{Logic, Rational};
use crate::semantics::{CoalgebraModel, StateSet, StateStructure};

#[derive(Debug, thiserror::Error)]
pub enum ModelJsonError {
    #[error("model JSON syntax: {0}")]
    Syntax(#[from] serde_json::Error),
    #[error("model JSON: {0}")]
    Format(String),
    #[error(transparent)]
    Model(#[from] crate::semantics::ModelError),
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawModel {
    kind: String,
    states: Vec<String>,
    valuation: BTreeMap<String, Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    transitions: Option<BTreeMap<String, Vec<String>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    weights: Option<BTreeMap<String, BTreeMap<String, u64>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    dist: Option<BTreeMap<String, BTreeMap<String, String>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    neighborhoods: Option<BTreeMap<String, Vec<Vec<String>>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    agents: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    strategies: Option<BTreeMap<String, Vec<usize>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    outcome: Option<BTreeMap<String, BTreeMap<String, String>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    root: Option<String>,
}

fn parse_rational(text: &str) -> Result<Rational, ModelJsonError> {
    let bad = || ModelJsonError::Format(format!("bad rational {text:?}"));
    let (n, d) = match text.split_once('/') {
        Some((n, d)) => (n, d),
        None => (text, "1"),
    };
    let numer: i64 = n.trim().parse().map_err(|_| bad())?;
    let denom: i64 = d.trim().parse().map_err(|_| bad())?;
    if denom == 0 {
        return Err(bad());
    }
    Ok(Rational::new(numer, denom))
}

fn format_rational(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

pub fn from_json(text: &str) -> Result<CoalgebraModel, ModelJsonError> {
    let raw: RawModel = serde_json::from_str(text)?;
    let n = raw.states.len();
    let state_id = |name: &str| -> Result<usize, ModelJsonError> {
        raw.states
            .iter()
            .position(|s| s == name)
            .ok_or_else(|| ModelJsonError::Format(format!("unknown state {name:?}")))
    };
    let state_set = |names: &[String]| -> Result<StateSet, ModelJsonError> {
        let mut set: StateSet = 0;
        for s in names {
            set |= 1 << state_id(s)?;
        }
        Ok(set)
    };
    let logic = match raw.kind.as_str() {
        "kripke" => Logic::Kripke,
        "graded" => Logic::Graded,
        "probabilistic" => Logic::Probabilistic,
        "monotone" => Logic::Monotone,
        "coalition" => {
            let agents = raw.agents.ok_or_else(|| {
                ModelJsonError::Format("coalition model needs an \"agents\" field".into())
            })?;
            if agents == 0 || agents > 32 {
                return Err(ModelJsonError::Format("agents must be in 1..=32".into()));
            }
            Logic::Coalition { agents }
        }
        other => {
            return Err(ModelJsonError::Format(format!("unknown kind {other:?}")));
        }
    };
    let missing = |field: &str| {
        ModelJsonError::Format(format!("{} model needs the {field:?} field", raw.kind))
    };
    let mut structure = Vec::with_capacity(n);
    for name in &raw.states {
        let value = match logic {
            Logic::Kripke => {
                let map = raw.transitions.as_ref().ok_or_else(|| missing("transitions"))?;
                let succ = map.get(name).map(Vec::as_slice).unwrap_or(&[]);
                StateStructure::Kripke(state_set(succ)?)
            }
            Logic::Graded => {
                let map = raw.weights.as_ref().ok_or_else(|| missing("weights"))?;
                let mut weights: Vec<(usize, u64)> = Vec::new();
                if let Some(row) = map.get(name) {
                    for (target, w) in row {
                        if *w > 0 {
                            weights.push((state_id(target)?, *w));
                        }
                    }
                }
                weights.sort();
                StateStructure::Graded(weights)
            }
            Logic::Probabilistic => {
                let map = raw.dist.as_ref().ok_or_else(|| missing("dist"))?;
                let row = map
                    .get(name)
                    .ok_or_else(|| ModelJsonError::Format(format!("state {name:?} has no distribution")))?;
                let mut dist: Vec<(usize, Rational)> = Vec::new();
                for (target, p) in row {
                    let p = parse_rational(p)?;
                    if p != Rational::new(0, 1) {
                        dist.push((state_id(target)?, p));
                    }
                }
                dist.sort_by_key(|(t, _)| *t);
                StateStructure::Probabilistic(dist)
            }
            Logic::Monotone => {
                let map = raw
                    .neighborhoods
                    .as_ref()
                    .ok_or_else(|| missing("neighborhoods"))?;
                let mut gens: Vec<StateSet> = Vec::new();
                if let Some(rows) = map.get(name) {
                    for g in rows {
                        gens.push(state_set(g)?);
                    }
                }
                // Normalize arbitrary generator lists to their antichain of
                // minimal elements; the generated upward-closed family is the
                // same.
                gens.sort_by_key(|g| g.count_ones());
                let mut antichain: Vec<StateSet> = Vec::new();
                for g in gens {
                    if !antichain.iter().any(|m| m & !g == 0) {
                        antichain.push(g);
                    }
                }
                antichain.sort();
                antichain.dedup();
                StateStructure::Monotone(antichain)
            }
            Logic::Coalition { agents } => {
                let sizes_map = raw.strategies.as_ref().ok_or_else(|| missing("strategies"))?;
                let outcome_map = raw.outcome.as_ref().ok_or_else(|| missing("outcome"))?;
                let sizes = sizes_map
                    .get(name)
                    .ok_or_else(|| ModelJsonError::Format(format!("state {name:?} has no strategy sizes")))?
                    .clone();
                if sizes.len() != agents as usize {
                    return Err(ModelJsonError::Format(format!(
                        "state {name:?}: expected {agents} strategy sizes"
                    )));
                }
                let cells: usize = sizes.iter().product();
                let row = outcome_map
                    .get(name)
                    .ok_or_else(|| ModelJsonError::Format(format!("state {name:?} has no outcome row")))?;
                let mut outcome = vec![usize::MAX; cells];
                for (key, target) in row {
                    let profile: Vec<usize> = key
                        .split(',')
                        .map(|part| {
                            part.trim().parse::<usize>().map_err(|_| {
                                ModelJsonError::Format(format!("bad profile key {key:?}"))
                            })
                        })
                        .collect::<Result<_, _>>()?;
                    if profile.len() != sizes.len()
                        || profile.iter().zip(&sizes).any(|(p, s)| *p == 0 || p > s)
                    {
                        return Err(ModelJsonError::Format(format!(
                            "profile key {key:?} out of range for state {name:?}"
                        )));
                    }
                    let mut cell = 0usize;
                    for (p, s) in profile.iter().zip(&sizes) {
                        cell = cell * s + (p - 1);
                    }
                    outcome[cell] = state_id(target)?;
                }
                if outcome.contains(&usize::MAX) {
                    return Err(ModelJsonError::Format(format!(
                        "outcome function not total for state {name:?}"
                    )));
                }
                StateStructure::Coalition { sizes, outcome }
            }
        };
        structure.push(value);
    }
    let mut valuation = BTreeMap::new();
    for (var, names) in &raw.valuation {
        valuation.insert(var.clone(), state_set(names)?);
    }
    let root = match &raw.root {
        Some(name) => Some(state_id(name)?),
        None => None,
    };
    let model = CoalgebraModel {
        logic,
        states: raw.states,
        valuation,
        structure,
        root,
    };
    model.validate()?;
    Ok(model)
}

pub fn to_json(model: &CoalgebraModel) -> String {
    let names = |set: StateSet| -> Vec<String> {
        (0..model.n_states())
            .filter(|i| set & (1 << i) != 0)
            .map(|i| model.states[i].clone())
            .collect()
    };
    let mut raw = RawModel {
        kind: model.logic.name().to_string(),
        states: model.states.clone(),
        valuation: model
            .valuation
            .iter()
            .map(|(k, v)| (k.clone(), names(*v)))
            .collect(),
        transitions: None,
        weights: None,
        dist: None,
        neighborhoods: None,
        agents: None,
        strategies: None,
        outcome: None,
        root: model.root.map(|r| model.states[r].clone()),
    };
    match model.logic {
        Logic::Kripke => {
            let mut map = BTreeMap::new();
            for (i, s) in model.structure.iter().enumerate() {
                let StateStructure::Kripke(succ) = s else { unreachable!() };
                map.insert(model.states[i].clone(), names(*succ));
            }
            raw.transitions = Some(map);
        }
        Logic::Graded => {
            let mut map = BTreeMap::new();
            for (i, s) in model.structure.iter().enumerate() {
                let StateStructure::Graded(weights) = s else { unreachable!() };
                let row: BTreeMap<String, u64> = weights
                    .iter()
                    .map(|(t, w)| (model.states[*t].clone(), *w))
                    .collect();
                map.insert(model.states[i].clone(), row);
            }
            raw.weights = Some(map);
        }
        Logic::Probabilistic => {
            let mut map = BTreeMap::new();
            for (i, s) in model.structure.iter().enumerate() {
                let StateStructure::Probabilistic(dist) = s else { unreachable!() };
                let row: BTreeMap<String, String> = dist
                    .iter()
                    .map(|(t, p)| (model.states[*t].clone(), format_rational(p)))
                    .collect();
                map.insert(model.states[i].clone(), row);
            }
            raw.dist = Some(map);
        }
        Logic::Monotone => {
            let mut map = BTreeMap::new();
            for (i, s) in model.structure.iter().enumerate() {
                let StateStructure::Monotone(gens) = s else { unreachable!() };
                map.insert(model.states[i].clone(), gens.iter().map(|g| names(*g)).collect());
            }
            raw.neighborhoods = Some(map);
        }
        Logic::Coalition { agents } => {
            raw.agents = Some(agents);
            let mut sizes_map = BTreeMap::new();
            let mut outcome_map = BTreeMap::new();
            for (i, s) in model.structure.iter().enumerate() {
                let StateStructure::Coalition { sizes, outcome } = s else { unreachable!() };
                sizes_map.insert(model.states[i].clone(), sizes.clone());
                let mut row = BTreeMap::new();
                let cells: usize = sizes.iter().product();
                #[allow(clippy::needless_range_loop)]
                for cell in 0..cells {
                    // decode mixed-radix cell back into a 1-based profile
                    let mut rem = cell;
                    let mut profile = vec![0usize; sizes.len()];
                    for a in (0..sizes.len()).rev() {
                        profile[a] = rem % sizes[a] + 1;
                        rem /= sizes[a];
                    }
                    let key = profile
                        .iter()
                        .map(|p| p.to_string())
                        .collect::<Vec<_>>()
                        .join(",");
                    row.insert(key, model.states[outcome[cell]].clone());
                }
                outcome_map.insert(model.states[i].clone(), row);
            }
            raw.strategies = Some(sizes_map);
            raw.outcome = Some(outcome_map);
        }
    }
    serde_json::to_string_pretty(&raw).expect("model serialization")
}
