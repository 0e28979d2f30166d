//! The finite region automaton of a timed automaton relative to extra clocks
//! and a constant bound.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use fixedbitset::FixedBitSet;

use crate::automaton::{ConcreteState, LocationId, TimedAutomaton};
use crate::clocks::{AtomicConstraint, ClockId, ClockSet, Rel, TimeValue, Valuation};
use crate::error::{Error, Result};
use crate::logic::CoreFormula;
use crate::regions::{RegionId, RegionSpace};

pub type StateId = usize;

/// A set of region-automaton states.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct StateSet(FixedBitSet);

impl StateSet {
    pub fn empty(n: usize) -> Self {
        StateSet(FixedBitSet::with_capacity(n))
    }

    pub fn full(n: usize) -> Self {
        let mut b = FixedBitSet::with_capacity(n);
        b.insert_range(..);
        StateSet(b)
    }

    pub fn from_ids(n: usize, ids: impl IntoIterator<Item = StateId>) -> Self {
        let mut s = StateSet::empty(n);
        for i in ids {
            s.insert(i);
        }
        s
    }

    pub fn universe(&self) -> usize {
        self.0.len()
    }

    pub fn contains(&self, s: StateId) -> bool {
        self.0.contains(s)
    }

    pub fn insert(&mut self, s: StateId) {
        self.0.insert(s);
    }

    pub fn set(&mut self, s: StateId, v: bool) {
        self.0.set(s, v);
    }

    pub fn union_with(&mut self, o: &StateSet) {
        self.0.union_with(&o.0);
    }

    pub fn intersect_with(&mut self, o: &StateSet) {
        self.0.intersect_with(&o.0);
    }

    pub fn complement(&self) -> StateSet {
        let mut b = self.0.clone();
        b.toggle_range(..);
        StateSet(b)
    }

    pub fn is_subset(&self, o: &StateSet) -> bool {
        self.0.is_subset(&o.0)
    }

    pub fn count(&self) -> usize {
        self.0.count_ones(..)
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_clear()
    }

    pub fn is_full(&self) -> bool {
        self.count() == self.universe()
    }

    pub fn iter(&self) -> impl Iterator<Item = StateId> + '_ {
        self.0.ones()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActionEdge {
    pub source: StateId,
    pub action: String,
    pub target: StateId,
}

#[derive(Debug, Clone)]
pub struct RegionAutomaton<T> {
    ta: TimedAutomaton,
    space: RegionSpace<T>,
    states: Vec<(LocationId, RegionId)>,
    index: Vec<Vec<Option<StateId>>>,
    eps: Vec<Option<StateId>>,
    eps_order: Vec<StateId>,
    edges: Vec<ActionEdge>,
    initial: Vec<StateId>,
    freeze_reset: BTreeMap<ClockId, Vec<StateId>>,
}

impl<T: TimeValue> RegionAutomaton<T> {
    /// Region automaton over `extra ∪ CX` with bound `max(bound, ta.bound())`.
    pub fn build(ta: &TimedAutomaton, extra: &ClockSet, bound: u64) -> Result<Self> {
        let clocks: ClockSet = extra.union(ta.clocks()).cloned().collect();
        let d = bound.max(ta.bound());
        let space = RegionSpace::enumerate(&clocks, d)?;
        let nloc = ta.locations().len();
        let mut states = Vec::new();
        let mut index = vec![vec![None; space.len()]; nloc];
        for (l, loc) in ta.locations().iter().enumerate() {
            for r in space.ids() {
                if space.satisfies(r, &loc.invariant)? {
                    index[l][r] = Some(states.len());
                    states.push((l, r));
                }
            }
        }
        let eps: Vec<Option<StateId>> = states.iter().map(|&(l, r)| index[l][space.tsucc(r)]).collect();
        let mut edges = Vec::new();
        for e in ta.edges() {
            for r in space.ids() {
                let Some(src) = index[e.source][r] else { continue };
                if !space.satisfies(r, &e.guard)? {
                    continue;
                }
                if let Some(dst) = index[e.target][space.reset(r, &e.reset)?] {
                    edges.push(ActionEdge { source: src, action: e.action.clone(), target: dst });
                }
            }
        }
        edges.sort_by(|a, b| (a.source, &a.action, a.target).cmp(&(b.source, &b.action, b.target)));
        edges.dedup();
        let zero: Valuation<T> = Valuation::zero(clocks.iter().cloned());
        let r0 = space.region_of(&zero)?;
        let initial = ta.initial().iter().filter_map(|&l| index[l][r0]).collect();
        let mut freeze_reset = BTreeMap::new();
        for z in clocks.iter().filter(|c| !ta.is_automaton_clock(c)) {
            let mut table = Vec::with_capacity(states.len());
            for &(l, r) in &states {
                let target = index[l][space.reset_clock(r, z)?]
                    .ok_or_else(|| Error::domain(format!("resetting {z} left the invariant")))?;
                table.push(target);
            }
            freeze_reset.insert(z.clone(), table);
        }
        let eps_order = successor_first_order(&eps);
        Ok(RegionAutomaton { ta: ta.clone(), space, states, index, eps, eps_order, edges, initial, freeze_reset })
    }

    /// Region automaton relativized to a formula: its clocks and its bound.
    pub fn build_relativized(ta: &TimedAutomaton, f: &CoreFormula) -> Result<Self> {
        RegionAutomaton::build(ta, &f.clocks(), f.bound())
    }

    pub fn ta(&self) -> &TimedAutomaton {
        &self.ta
    }

    pub fn space(&self) -> &RegionSpace<T> {
        &self.space
    }

    pub fn clocks(&self) -> &ClockSet {
        self.space.clocks()
    }

    pub fn bound(&self) -> u64 {
        self.space.bound()
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn state(&self, s: StateId) -> (LocationId, RegionId) {
        self.states[s]
    }

    pub fn state_id(&self, l: LocationId, r: RegionId) -> Option<StateId> {
        self.index.get(l).and_then(|row| row.get(r).copied().flatten())
    }

    /// The ε-successor `(l, tsucc r)`, when it satisfies the invariant.
    pub fn eps_succ(&self, s: StateId) -> Option<StateId> {
        self.eps[s]
    }

    /// All states ordered so that each ε-successor precedes its predecessors.
    pub fn eps_order(&self) -> &[StateId] {
        &self.eps_order
    }

    pub fn action_edges(&self) -> &[ActionEdge] {
        &self.edges
    }

    pub fn initial(&self) -> &[StateId] {
        &self.initial
    }

    /// `(l, r[z := 0])` for a freeze clock `z`.
    pub fn freeze_table(&self, z: &ClockId) -> Result<&[StateId]> {
        self.freeze_reset
            .get(z)
            .map(Vec::as_slice)
            .ok_or_else(|| Error::semantic(format!("{z} is not a freeze clock of this region automaton")))
    }

    pub fn has_prop(&self, s: StateId, p: &str) -> bool {
        self.ta.location(self.states[s].0).labels.contains(p)
    }

    pub fn satisfies_atom(&self, s: StateId, a: &AtomicConstraint) -> Result<bool> {
        self.space.satisfies_atom(self.states[s].1, a)
    }

    /// Location propositions plus every satisfied atom over the clock set and bound.
    pub fn labels(&self, s: StateId) -> BTreeSet<String> {
        let (l, r) = self.states[s];
        let mut out: BTreeSet<String> = self.ta.location(l).labels.clone();
        let clocks: Vec<&ClockId> = self.clocks().iter().collect();
        for c in 0..=self.bound() {
            for rel in Rel::all() {
                for x in &clocks {
                    let a = AtomicConstraint::clock((*x).clone(), rel, c);
                    if self.space.satisfies_atom(r, &a).unwrap_or(false) {
                        out.insert(a.to_string());
                    }
                    for y in &clocks {
                        if x != y {
                            let a = AtomicConstraint::diff((*x).clone(), (*y).clone(), rel, c);
                            if self.space.satisfies_atom(r, &a).unwrap_or(false) {
                                out.insert(a.to_string());
                            }
                        }
                    }
                }
            }
        }
        out
    }

    /// The region state containing a concrete state whose valuation covers the clock set.
    pub fn abs_state(&self, s: &ConcreteState<T>) -> Result<StateId> {
        let r = self.space.region_of(s.valuation())?;
        self.state_id(s.location(), r).ok_or_else(|| Error::domain("concrete state is outside the region automaton"))
    }

    /// Extends a concrete state with zero values for clocks it does not assign.
    pub fn complete_state(&self, s: &ConcreteState<T>) -> Result<ConcreteState<T>> {
        ConcreteState::new(&self.ta, s.location(), s.valuation().extend_zero(self.clocks()))
    }

    pub fn contains_concretization(&self, set: &StateSet, s: &ConcreteState<T>) -> Result<bool> {
        Ok(set.contains(self.abs_state(s)?))
    }

    /// `location | region` label used in listings and graphs.
    pub fn describe(&self, s: StateId) -> String {
        let (l, r) = self.states[s];
        format!("{} | {}", self.ta.location(l).name, self.space.describe(r))
    }

    pub fn to_dot(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "digraph \"{}\" {{", escape(self.ta.name()));
        let _ = writeln!(out, "  node [shape=box];");
        for s in 0..self.states.len() {
            let shape = if self.initial.contains(&s) { ", peripheries=2" } else { "" };
            let _ = writeln!(out, "  s{s} [label=\"{}\"{shape}];", escape(&self.describe(s)));
        }
        for (s, t) in self.eps.iter().enumerate() {
            if let Some(t) = t {
                let _ = writeln!(out, "  s{s} -> s{t} [style=dashed, label=\"ε\"];");
            }
        }
        for e in &self.edges {
            let _ = writeln!(out, "  s{} -> s{} [label=\"{}\"];", e.source, e.target, escape(&e.action));
        }
        out.push_str("}\n");
        out
    }
}

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// Order in which every state comes after its ε-successor (self-loops aside).
fn successor_first_order(eps: &[Option<StateId>]) -> Vec<StateId> {
    let n = eps.len();
    let mut placed = vec![false; n];
    let mut order = Vec::with_capacity(n);
    for start in 0..n {
        let mut chain = Vec::new();
        let mut s = start;
        while !placed[s] {
            placed[s] = true;
            chain.push(s);
            match eps[s] {
                Some(t) if t != s && !placed[t] => s = t,
                _ => break,
            }
        }
        order.extend(chain.into_iter().rev());
    }
    order
}
