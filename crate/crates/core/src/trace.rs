//! Bad-trace detection along tile words.
//!
//! The nondeterministic parity automaton over trace tiles accepts exactly the
//! words carrying a bad trace (an infinite trace whose dominant priority is
//! odd). It is converted to a Büchi automaton by guessing the dominant even
//! priority, determinized with a Safra tree construction, turned into a
//! parity automaton with a latest-appearance record over node names, and
//! complemented by shifting every priority up by one. The result accepts
//! exactly the tile words with no bad trace and drives the tableau game.
//!
//! States are created lazily per transition; the cache has interior
//! mutability behind a mutex so concurrent lookups behave as if serialized.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use crate::bits::Bits;
use crate::closure::FormulaId;
use crate::session::{Session, TileId};

/// Dense trace relation of one tile (successor lists per closure formula).
pub type TileRelation = Vec<Vec<FormulaId>>;

#[derive(Debug, thiserror::Error)]
pub enum AutomatonError {
    #[error("deterministic trace automaton exceeded the state ceiling {0}")]
    StateCeiling(usize),
}

/// The nondeterministic bad-trace parity automaton: states are closure
/// formulas plus an initial state, priorities are formula priorities shifted
/// up by one, acceptance is max-even.
pub struct BadTraceNpw {
    /// Number of closure formulas; state `n_formulas` is the initial state.
    pub n_formulas: usize,
    /// Priority per state (`Ω(B)+1` on formulas, 0 on the initial state).
    pub priorities: Vec<u32>,
    /// Formulas of the root sequent (the initial transition's trace starts).
    pub roots: Vec<FormulaId>,
}

impl BadTraceNpw {
    pub fn build(session: &Session) -> BadTraceNpw {
        let n = session.closure.len();
        let mut priorities: Vec<u32> = (0..n as u32)
            .map(|f| session.priorities.priority(f) + 1)
            .collect();
        priorities.push(0);
        BadTraceNpw {
            n_formulas: n,
            priorities,
            roots: session.closure.root_ids().to_vec(),
        }
    }

    pub fn n_states(&self) -> usize {
        self.n_formulas + 1
    }

    pub fn initial(&self) -> u32 {
        self.n_formulas as u32
    }

    /// Successors of a state along a tile.
    pub fn step(&self, state: u32, rel: &TileRelation) -> Vec<u32> {
        if state == self.initial() {
            let mut out: Vec<u32> = self
                .roots
                .iter()
                .flat_map(|&r| rel[r as usize].iter().copied())
                .collect();
            out.sort_unstable();
            out.dedup();
            out
        } else {
            rel[state as usize].clone()
        }
    }
}

/// Büchi encoding of the max-even parity condition: in the base layer the
/// automaton copies the parity automaton; at any point it may jump into the
/// layer of an even priority `p`, where only states of priority ≤ p are
/// allowed and states of priority exactly p are accepting.
pub struct BadTraceNbw {
    npw: BadTraceNpw,
    /// The even priorities that can dominate a run.
    layers: Vec<u32>,
}

impl BadTraceNbw {
    pub fn build(session: &Session) -> BadTraceNbw {
        let npw = BadTraceNpw::build(session);
        let mut layers: Vec<u32> = npw
            .priorities
            .iter()
            .copied()
            .filter(|p| *p > 0 && p % 2 == 0)
            .collect();
        layers.sort_unstable();
        layers.dedup();
        BadTraceNbw { npw, layers }
    }

    pub fn n_states(&self) -> usize {
        self.npw.n_states() * (self.layers.len() + 1)
    }

    pub fn initial(&self) -> u32 {
        // base layer of the NPW initial state
        self.npw.initial() * (self.layers.len() + 1) as u32
    }

    fn encode(&self, q: u32, layer: usize) -> u32 {
        q * (self.layers.len() + 1) as u32 + layer as u32
    }

    pub fn accepting(&self, state: u32) -> bool {
        let width = (self.layers.len() + 1) as u32;
        let (q, layer) = (state / width, (state % width) as usize);
        layer > 0 && self.npw.priorities[q as usize] == self.layers[layer - 1]
    }

    pub fn step(&self, state: u32, rel: &TileRelation) -> Vec<u32> {
        let width = (self.layers.len() + 1) as u32;
        let (q, layer) = (state / width, (state % width) as usize);
        let succs = self.npw.step(q, rel);
        let mut out = Vec::new();
        for q2 in succs {
            let p2 = self.npw.priorities[q2 as usize];
            if layer == 0 {
                out.push(self.encode(q2, 0));
                for (k, cap) in self.layers.iter().enumerate() {
                    if p2 <= *cap {
                        out.push(self.encode(q2, k + 1));
                    }
                }
            } else if p2 <= self.layers[layer - 1] {
                out.push(self.encode(q2, layer));
            }
        }
        out
    }
}

/// One Safra tree node: a stable name, a label of Büchi states, ordered
/// children (oldest first).
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
struct SafraNode {
    name: u32,
    label: Bits,
    children: Vec<usize>,
}

/// A Safra tree in canonical pre-order representation. The empty tree is the
/// rejecting sink.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
struct SafraTree {
    nodes: Vec<SafraNode>,
}

impl SafraTree {
    fn singleton(name: u32, label: Bits) -> SafraTree {
        SafraTree {
            nodes: vec![SafraNode {
                name,
                label,
                children: Vec::new(),
            }],
        }
    }

    fn present_names(&self) -> Vec<u32> {
        let mut names: Vec<u32> = self.nodes.iter().map(|n| n.name).collect();
        names.sort_unstable();
        names
    }

    /// Rebuilds the node vector in pre-order from the root (slot 0), dropping
    /// any node no longer reachable from it (vertical merges detach
    /// descendants without deleting their slots).
    fn canonicalize(&self) -> SafraTree {
        let mut nodes = Vec::with_capacity(self.nodes.len());
        fn copy(old: &SafraTree, idx: usize, nodes: &mut Vec<SafraNode>) -> usize {
            let slot = nodes.len();
            nodes.push(SafraNode {
                name: old.nodes[idx].name,
                label: old.nodes[idx].label.clone(),
                children: Vec::new(),
            });
            let children: Vec<usize> = old.nodes[idx]
                .children
                .iter()
                .map(|&c| copy(old, c, nodes))
                .collect();
            nodes[slot].children = children;
            slot
        }
        if !self.nodes.is_empty() {
            copy(self, 0, &mut nodes);
        }
        SafraTree { nodes }
    }
}

/// A deterministic parity automaton state: Safra tree, latest-appearance
/// record over node names (front = least recently absent), and the priority
/// of the transition that entered it. Max-even acceptance coincides with
/// acceptance of the underlying Büchi automaton.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct DpaState {
    tree: SafraTree,
    lar: Vec<u32>,
    pub priority: u32,
}

/// Generic Büchi determinization engine: Safra trees for the Rabin structure,
/// a latest-appearance record over node names for the parity condition.
/// Works on successor lists, so it is independent of the alphabet.
pub struct BuchiDeterminizer {
    n_states: usize,
    accepting: Bits,
    name_count: usize,
}

impl BuchiDeterminizer {
    pub fn new(n_states: usize, accepting: Bits) -> BuchiDeterminizer {
        BuchiDeterminizer {
            n_states,
            accepting,
            name_count: 2 * n_states.max(1),
        }
    }

    /// Start state: a single root tracking the initial Büchi state. Its
    /// priority is an inert odd value; it is never re-entered.
    pub fn initial_state(&self, start: u32) -> DpaState {
        let mut label = Bits::new(self.n_states);
        label.set(start);
        DpaState {
            tree: SafraTree::singleton(1, label),
            lar: (1..=self.name_count as u32).collect(),
            priority: 1,
        }
    }

    /// Deterministic transition along one letter, given the letter's
    /// successor lists. The emitted priority makes max-even acceptance
    /// coincide with Büchi acceptance.
    pub fn step(&self, state: &DpaState, succ: &[Vec<u32>]) -> DpaState {
        let (tree, greens) = self.safra_step(&state.tree, succ);
        let (lar, priority) = self.lar_step(&state.lar, &tree, &greens);
        DpaState {
            tree,
            lar,
            priority,
        }
    }

    /// One Safra step: spawn children on accepting intersections, powerset
    /// transition, horizontal merge (older siblings win), removal of empty
    /// nodes, vertical merge marking completed nodes green.
    fn safra_step(&self, tree: &SafraTree, succ: &[Vec<u32>]) -> (SafraTree, Vec<u32>) {
        let n_b = self.n_states;
        let accepting = &self.accepting;
        let mut work = tree.clone();
        // 1. spawn: youngest child per node whose label meets the accepting set
        let mut used: Vec<u32> = work.present_names();
        let existing = work.nodes.len();
        for idx in 0..existing {
            let mut seed = work.nodes[idx].label.clone();
            seed.intersect_with(accepting);
            if !seed.is_empty() {
                let name = (1..=self.name_count as u32)
                    .find(|n| used.binary_search(n).is_err())
                    .expect("a fresh name is always available");
                let pos = used.binary_search(&name).unwrap_err();
                used.insert(pos, name);
                let slot = work.nodes.len();
                work.nodes.push(SafraNode {
                    name,
                    label: seed,
                    children: Vec::new(),
                });
                work.nodes[idx].children.push(slot);
            }
        }
        // 2. powerset transition on every label
        for node in &mut work.nodes {
            let mut next = Bits::new(n_b);
            for q in node.label.iter() {
                for &q2 in &succ[q as usize] {
                    next.set(q2);
                }
            }
            node.label = next;
        }
        // 3. horizontal merge: remove from each node's subtree every state
        // already present in an older sibling
        fn subtree_subtract(tree: &mut SafraTree, idx: usize, remove: &Bits) {
            tree.nodes[idx].label.subtract(remove);
            let children = tree.nodes[idx].children.clone();
            for c in children {
                subtree_subtract(tree, c, remove);
            }
        }
        fn horizontal(tree: &mut SafraTree, idx: usize, n_b: usize) {
            let children = tree.nodes[idx].children.clone();
            let mut seen = Bits::new(n_b);
            for c in children {
                subtree_subtract(tree, c, &seen);
                seen.union_with(&tree.nodes[c].label.clone());
                horizontal(tree, c, n_b);
            }
        }
        if !work.nodes.is_empty() {
            horizontal(&mut work, 0, n_b);
        }
        // 4. drop empty nodes (with their subtrees)
        fn prune(tree: &SafraTree, idx: usize, keep: &mut SafraTree) -> Option<usize> {
            if tree.nodes[idx].label.is_empty() {
                return None;
            }
            let slot = keep.nodes.len();
            keep.nodes.push(SafraNode {
                name: tree.nodes[idx].name,
                label: tree.nodes[idx].label.clone(),
                children: Vec::new(),
            });
            let children: Vec<usize> = tree.nodes[idx]
                .children
                .iter()
                .filter_map(|&c| prune(tree, c, keep))
                .collect();
            keep.nodes[slot].children = children;
            Some(slot)
        }
        let mut pruned = SafraTree::default();
        if !work.nodes.is_empty() {
            prune(&work, 0, &mut pruned);
        }
        // 5. vertical merge: nodes whose children exactly cover them lose
        // their descendants and turn green
        let mut greens: Vec<u32> = Vec::new();
        fn vertical(tree: &mut SafraTree, idx: usize, n_b: usize, greens: &mut Vec<u32>) {
            let children = tree.nodes[idx].children.clone();
            if children.is_empty() {
                return;
            }
            let mut union = Bits::new(n_b);
            for &c in &children {
                union.union_with(&tree.nodes[c].label);
            }
            if union == tree.nodes[idx].label {
                tree.nodes[idx].children.clear();
                greens.push(tree.nodes[idx].name);
            } else {
                for c in children {
                    vertical(tree, c, n_b, greens);
                }
            }
        }
        if !pruned.nodes.is_empty() {
            vertical(&mut pruned, 0, n_b, &mut greens);
        }
        greens.sort_unstable();
        (pruned.canonicalize(), greens)
    }

    /// Latest-appearance record update and priority computation. Absent names
    /// move to the back; the priority reflects the shallowest event position,
    /// odd for absences and even for greens, with greens of equal depth
    /// dominating.
    fn lar_step(&self, lar: &[u32], target: &SafraTree, greens: &[u32]) -> (Vec<u32>, u32) {
        let present = target.present_names();
        let k = lar.len() as u32;
        let mut absent_min: Option<u32> = None;
        let mut green_min: Option<u32> = None;
        for (pos0, name) in lar.iter().enumerate() {
            let pos = pos0 as u32 + 1;
            if present.binary_search(name).is_err() {
                if absent_min.is_none() {
                    absent_min = Some(pos);
                }
            } else if greens.binary_search(name).is_ok() && green_min.is_none() {
                green_min = Some(pos);
            }
        }
        let odd_part = absent_min.map_or(0, |b| 2 * (k - b + 1) + 1);
        let even_part = green_min.map_or(0, |g| 2 * (k - g + 1));
        let priority = odd_part.max(even_part);
        let mut next: Vec<u32> = lar
            .iter()
            .copied()
            .filter(|n| present.binary_search(n).is_ok())
            .collect();
        next.extend(
            lar.iter()
                .copied()
                .filter(|n| present.binary_search(n).is_err()),
        );
        (next, priority)
    }

}

struct DetInner {
    states: Vec<DpaState>,
    index: HashMap<DpaState, u32>,
    transitions: HashMap<(u32, TileId), u32>,
    step_cache: HashMap<TileId, Arc<NbwStep>>,
}

/// Precomputed Büchi successor lists for one tile.
struct NbwStep {
    succ: Vec<Vec<u32>>,
}

/// The deterministic trace automaton: accepts exactly the tile words without
/// bad traces (the complemented determinization), with max-even acceptance on
/// state priorities. States are built on demand and cached.
pub struct TraceAutomaton {
    nbw: BadTraceNbw,
    det: BuchiDeterminizer,
    max_states: usize,
    inner: Mutex<DetInner>,
}

impl TraceAutomaton {
    pub fn new(session: &Session) -> TraceAutomaton {
        let nbw = BadTraceNbw::build(session);
        let det = BuchiDeterminizer::new(
            nbw.n_states(),
            Bits::from_iter(
                nbw.n_states(),
                (0..nbw.n_states() as u32).filter(|&q| nbw.accepting(q)),
            ),
        );
        let initial = det.initial_state(nbw.initial());
        let mut index = HashMap::new();
        index.insert(initial.clone(), 0u32);
        TraceAutomaton {
            nbw,
            det,
            max_states: session.bounds.max_automaton_states,
            inner: Mutex::new(DetInner {
                states: vec![initial],
                index,
                transitions: HashMap::new(),
                step_cache: HashMap::new(),
            }),
        }
    }

    pub fn initial(&self) -> u32 {
        0
    }

    pub fn n_states(&self) -> usize {
        self.inner.lock().unwrap().states.len()
    }

    /// Priority of a state (already complemented: max-even acceptance means
    /// "no bad trace").
    pub fn priority(&self, state: u32) -> u32 {
        self.inner.lock().unwrap().states[state as usize].priority
    }

    /// Deterministic transition. `rel` provides the tile's trace relation on
    /// a cache miss.
    pub fn step(
        &self,
        state: u32,
        tile: TileId,
        rel: impl FnOnce() -> TileRelation,
    ) -> Result<u32, AutomatonError> {
        let mut inner = self.inner.lock().unwrap();
        if let Some(&t) = inner.transitions.get(&(state, tile)) {
            return Ok(t);
        }
        let step = match inner.step_cache.get(&tile) {
            Some(s) => s.clone(),
            None => {
                let rel = rel();
                let succ: Vec<Vec<u32>> = (0..self.nbw.n_states() as u32)
                    .map(|q| self.nbw.step(q, &rel))
                    .collect();
                let s = Arc::new(NbwStep { succ });
                inner.step_cache.insert(tile, s.clone());
                s
            }
        };
        let source = inner.states[state as usize].clone();
        let mut next = self.det.step(&source, &step.succ);
        // complementation: shift every priority up by one, flipping the
        // dominant parity so that max-even acceptance means "no bad trace"
        next.priority += 1;
        let id = match inner.index.get(&next) {
            Some(&id) => id,
            None => {
                let id = inner.states.len() as u32;
                if inner.states.len() >= self.max_states {
                    return Err(AutomatonError::StateCeiling(self.max_states));
                }
                inner.states.push(next.clone());
                inner.index.insert(next, id);
                id
            }
        };
        inner.transitions.insert((state, tile), id);
        Ok(id)
    }

    /// Runs the automaton on the lasso `stem · cycle^ω` and reports whether it
    /// accepts (no bad trace along the word).
    pub fn accepts_lasso(
        &self,
        session: &mut Session,
        stem: &[TileId],
        cycle: &[TileId],
    ) -> Result<bool, AutomatonError> {
        let mut state = self.initial();
        for &t in stem {
            let rel = session.tile_relation(t);
            state = self.step(state, t, || rel)?;
        }
        // iterate the cycle until the state at the cycle boundary repeats
        let mut seen: HashMap<u32, usize> = HashMap::new();
        let mut boundary_states = vec![state];
        let mut trace_priorities: Vec<Vec<u32>> = Vec::new();
        seen.insert(state, 0);
        loop {
            let mut priorities = Vec::with_capacity(cycle.len());
            for &t in cycle {
                let rel = session.tile_relation(t);
                state = self.step(state, t, || rel)?;
                priorities.push(self.priority(state));
            }
            trace_priorities.push(priorities);
            if let Some(&first) = seen.get(&state) {
                // the lap cycle spans laps first..current
                let max = trace_priorities[first..]
                    .iter()
                    .flatten()
                    .copied()
                    .max()
                    .expect("nonempty cycle");
                return Ok(max % 2 == 0);
            }
            seen.insert(state, boundary_states.len());
            boundary_states.push(state);
        }
    }
}

/// Searches a finite priority-labelled graph for a reachable cycle whose
/// maximal priority has the requested parity. Returns the dominant priority
/// and one witness node on the cycle.
pub fn dominated_cycle(
    n_nodes: usize,
    edges: &[(u32, u32)],
    priorities: &[u32],
    want_odd: bool,
) -> Option<(u32, u32)> {
    let mut distinct: Vec<u32> = priorities
        .iter()
        .copied()
        .filter(|p| (*p % 2 == 1) == want_odd)
        .collect();
    distinct.sort_unstable();
    distinct.dedup();
    for &p in distinct.iter().rev() {
        // restrict to nodes with priority ≤ p and look for a cycle through a
        // priority-p node
        let alive: Vec<bool> = priorities.iter().map(|q| *q <= p).collect();
        let mut adj: Vec<Vec<u32>> = vec![Vec::new(); n_nodes];
        for &(a, b) in edges {
            if alive[a as usize] && alive[b as usize] {
                adj[a as usize].push(b);
            }
        }
        let sccs = tarjan_sccs(n_nodes, &alive, &adj);
        for scc in &sccs {
            let nontrivial =
                scc.len() > 1 || adj[scc[0] as usize].contains(&scc[0]);
            if !nontrivial {
                continue;
            }
            if let Some(&w) = scc.iter().find(|&&v| priorities[v as usize] == p) {
                return Some((p, w));
            }
        }
    }
    None
}

/// Tarjan SCCs, shared with the certificate analyzer.
pub(crate) fn tarjan_sccs(n: usize, alive: &[bool], adj: &[Vec<u32>]) -> Vec<Vec<u32>> {
    #[derive(Clone, Copy)]
    struct Frame {
        node: u32,
        edge: usize,
    }
    let mut index = vec![u32::MAX; n];
    let mut low = vec![0u32; n];
    let mut on_stack = vec![false; n];
    let mut stack: Vec<u32> = Vec::new();
    let mut next_index = 0u32;
    let mut out = Vec::new();
    for start in 0..n as u32 {
        if !alive[start as usize] || index[start as usize] != u32::MAX {
            continue;
        }
        let mut call = vec![Frame {
            node: start,
            edge: 0,
        }];
        index[start as usize] = next_index;
        low[start as usize] = next_index;
        next_index += 1;
        stack.push(start);
        on_stack[start as usize] = true;
        while let Some(frame) = call.last_mut() {
            let v = frame.node;
            if frame.edge < adj[v as usize].len() {
                let w = adj[v as usize][frame.edge];
                frame.edge += 1;
                if index[w as usize] == u32::MAX {
                    index[w as usize] = next_index;
                    low[w as usize] = next_index;
                    next_index += 1;
                    stack.push(w);
                    on_stack[w as usize] = true;
                    call.push(Frame { node: w, edge: 0 });
                } else if on_stack[w as usize] {
                    low[v as usize] = low[v as usize].min(index[w as usize]);
                }
            } else {
                call.pop();
                if let Some(parent) = call.last() {
                    let p = parent.node;
                    low[p as usize] = low[p as usize].min(low[v as usize]);
                }
                if low[v as usize] == index[v as usize] {
                    let mut scc = Vec::new();
                    loop {
                        let w = stack.pop().unwrap();
                        on_stack[w as usize] = false;
                        scc.push(w);
                        if w == v {
                            break;
                        }
                    }
                    out.push(scc);
                }
            }
        }
    }
    out
}

/// Brute-force bad-trace detection on a lasso of tile relations: builds the
/// graph of (formula, cycle position) nodes reachable from the root formulas
/// through the stem and looks for a cycle dominated by an odd priority.
/// Returns the dominant odd priority when a bad trace exists.
pub fn lasso_bad_trace(
    n_formulas: usize,
    formula_priorities: &[u32],
    roots: &[FormulaId],
    stem: &[TileRelation],
    cycle: &[TileRelation],
) -> Option<u32> {
    assert!(!cycle.is_empty());
    // alive formulas entering the cycle
    let mut entry: Vec<bool> = vec![false; n_formulas];
    let mut current: Vec<bool> = vec![false; n_formulas];
    for &r in roots {
        current[r as usize] = true;
    }
    for rel in stem {
        let mut next = vec![false; n_formulas];
        for (f, alive) in current.iter().enumerate() {
            if *alive {
                for &g in &rel[f] {
                    next[g as usize] = true;
                }
            }
        }
        current = next;
    }
    for (f, alive) in current.iter().enumerate() {
        if *alive {
            entry[f] = true;
        }
    }
    // alive sets per cycle position, saturated over laps
    let len = cycle.len();
    let mut alive: Vec<Vec<bool>> = vec![vec![false; n_formulas]; len];
    for (f, e) in entry.iter().enumerate() {
        if *e {
            alive[0][f] = true;
        }
    }
    loop {
        let mut changed = false;
        for j in 0..len {
            let next_j = (j + 1) % len;
            for f in 0..n_formulas {
                if alive[j][f] {
                    for &g in &cycle[j][f] {
                        if !alive[next_j][g as usize] {
                            alive[next_j][g as usize] = true;
                            changed = true;
                        }
                    }
                }
            }
        }
        if !changed {
            break;
        }
    }
    // cycle graph over (formula, position)
    let node = |f: usize, j: usize| (j * n_formulas + f) as u32;
    let n_nodes = n_formulas * len;
    let mut edges = Vec::new();
    let mut priorities = vec![0u32; n_nodes];
    for j in 0..len {
        for f in 0..n_formulas {
            priorities[j * n_formulas + f] = formula_priorities[f];
            if alive[j][f] {
                for &g in &cycle[j][f] {
                    edges.push((node(f, j), node(g as usize, (j + 1) % len)));
                }
            }
        }
    }
    dominated_cycle(n_nodes, &edges, &priorities, true).map(|(p, _)| p)
}

/// Nondeterministic acceptance of a lasso by the bad-trace parity automaton:
/// does some run have an even dominant priority? Used in layered tests.
pub fn npw_accepts_lasso(
    npw: &BadTraceNpw,
    stem: &[TileRelation],
    cycle: &[TileRelation],
) -> bool {
    // reachable states entering the cycle
    let mut current: Vec<bool> = vec![false; npw.n_states()];
    current[npw.initial() as usize] = true;
    for rel in stem {
        let mut next = vec![false; npw.n_states()];
        for (q, alive) in current.iter().enumerate() {
            if *alive {
                for q2 in npw.step(q as u32, rel) {
                    next[q2 as usize] = true;
                }
            }
        }
        current = next;
    }
    let len = cycle.len();
    let mut alive: Vec<Vec<bool>> = vec![vec![false; npw.n_states()]; len];
    for (q, a) in current.iter().enumerate() {
        alive[0][q] = *a;
    }
    loop {
        let mut changed = false;
        for j in 0..len {
            for q in 0..npw.n_states() {
                if alive[j][q] {
                    for q2 in npw.step(q as u32, &cycle[j]) {
                        if !alive[(j + 1) % len][q2 as usize] {
                            alive[(j + 1) % len][q2 as usize] = true;
                            changed = true;
                        }
                    }
                }
            }
        }
        if !changed {
            break;
        }
    }
    let n_nodes = npw.n_states() * len;
    let node = |q: usize, j: usize| (j * npw.n_states() + q) as u32;
    let mut edges = Vec::new();
    let mut priorities = vec![0u32; n_nodes];
    for j in 0..len {
        for q in 0..npw.n_states() {
            priorities[j * npw.n_states() + q] = npw.priorities[q];
            if alive[j][q] {
                for q2 in npw.step(q as u32, &cycle[j]) {
                    edges.push((node(q, j), node(q2 as usize, (j + 1) % len)));
                }
            }
        }
    }
    dominated_cycle(n_nodes, &edges, &priorities, false).is_some()
}

impl TraceAutomaton {
    /// Debug dump of the reachable automaton: states with priorities and a
    /// sample of transitions.
    pub fn debug_dump(&self, max_transitions: usize) -> String {
        let inner = self.inner.lock().unwrap();
        let mut out = String::new();
        out.push_str(&format!("states: {}\n", inner.states.len()));
        for (i, s) in inner.states.iter().enumerate() {
            out.push_str(&format!(
                "state {i}: priority {} tree nodes {}\n",
                s.priority,
                s.tree.nodes.len()
            ));
        }
        let mut shown = 0;
        let mut edges: Vec<((u32, TileId), u32)> =
            inner.transitions.iter().map(|(k, v)| (*k, *v)).collect();
        edges.sort_unstable();
        for ((from, tile), to) in edges {
            if shown >= max_transitions {
                out.push_str("...\n");
                break;
            }
            out.push_str(&format!("  {from} --tile{tile}--> {to}\n"));
            shown += 1;
        }
        out
    }

    /// Debug rendering of a reachable state (tree shape and record front).
    pub fn debug_state(&self, state: u32) -> String {
        let inner = self.inner.lock().unwrap();
        let s = &inner.states[state as usize];
        let mut out = String::new();
        for (i, n) in s.tree.nodes.iter().enumerate() {
            out.push_str(&format!(
                "  node[{i}] name {} label {:?} children {:?}\n",
                n.name,
                n.label.iter().collect::<Vec<_>>(),
                n.children
            ));
        }
        out.push_str(&format!(
            "  lar front: {:?} pri {}\n",
            &s.lar[..s.lar.len().min(8)],
            s.priority
        ));
        out
    }
}
