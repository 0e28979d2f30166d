//! Symbolic evaluation of core formulas on a region automaton.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::Serialize;

use crate::automaton::{ConcreteState, TimedAutomaton};
use crate::clocks::{AtomicConstraint, ClockId, ClockSet, TimeValue};
use crate::error::{Error, Result};
use crate::logic::{ActionSet, CoreFormula, SurfaceFormula};
use crate::region_automaton::{RegionAutomaton, StateId, StateSet};
use crate::translate::Translator;

/// Valuation of free fixpoint variables.
pub type Env = BTreeMap<String, StateSet>;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum Node {
    Lit(bool),
    Prop(String),
    Atom(AtomicConstraint),
    Var(String),
    Not(usize),
    Or(usize, usize),
    Diamond(ActionSet, usize),
    ExistsRel(usize, usize),
    Freeze(ClockId, usize),
    Mu(String, usize),
}

/// Hash-consed formula DAG; identical subformulas share one node and one cache slot.
#[derive(Default)]
struct Dag {
    nodes: Vec<Node>,
    free: Vec<BTreeSet<String>>,
    ids: HashMap<Node, usize>,
}

impl Dag {
    fn intern(&mut self, f: &CoreFormula) -> usize {
        let node = match f {
            CoreFormula::Lit(b) => Node::Lit(*b),
            CoreFormula::Prop(p) => Node::Prop(p.clone()),
            CoreFormula::Atom(a) => Node::Atom(a.clone()),
            CoreFormula::Var(y) => Node::Var(y.clone()),
            CoreFormula::Not(a) => Node::Not(self.intern(a)),
            CoreFormula::Or(a, b) => Node::Or(self.intern(a), self.intern(b)),
            CoreFormula::Diamond(k, a) => Node::Diamond(k.clone(), self.intern(a)),
            CoreFormula::ExistsRel(a, b) => Node::ExistsRel(self.intern(a), self.intern(b)),
            CoreFormula::Freeze(z, a) => Node::Freeze(z.clone(), self.intern(a)),
            CoreFormula::Mu(y, a) => Node::Mu(y.clone(), self.intern(a)),
        };
        if let Some(&id) = self.ids.get(&node) {
            return id;
        }
        let free = match &node {
            Node::Var(y) => [y.clone()].into(),
            Node::Not(a) | Node::Diamond(_, a) | Node::Freeze(_, a) => self.free[*a].clone(),
            Node::Or(a, b) | Node::ExistsRel(a, b) => self.free[*a].union(&self.free[*b]).cloned().collect(),
            Node::Mu(y, a) => {
                let mut s = self.free[*a].clone();
                s.remove(y);
                s
            }
            _ => BTreeSet::new(),
        };
        let id = self.nodes.len();
        self.nodes.push(node.clone());
        self.free.push(free);
        self.ids.insert(node, id);
        id
    }
}

struct Evaluator<'a, T> {
    ra: &'a RegionAutomaton<T>,
    dag: Dag,
    cache: Vec<Option<StateSet>>,
    env: Vec<(String, StateSet)>,
}

impl<T: TimeValue> Evaluator<'_, T> {
    fn n(&self) -> usize {
        self.ra.len()
    }

    fn eval(&mut self, id: usize) -> Result<StateSet> {
        let closed = self.dag.free[id].is_empty();
        if closed {
            if let Some(s) = self.cache.get(id).and_then(Option::as_ref) {
                return Ok(s.clone());
            }
        }
        let out = self.compute(id)?;
        if closed {
            if self.cache.len() <= id {
                self.cache.resize(id + 1, None);
            }
            self.cache[id] = Some(out.clone());
        }
        Ok(out)
    }

    fn compute(&mut self, id: usize) -> Result<StateSet> {
        let n = self.n();
        let ra = self.ra;
        match self.dag.nodes[id].clone() {
            Node::Lit(true) => Ok(StateSet::full(n)),
            Node::Lit(false) => Ok(StateSet::empty(n)),
            Node::Prop(p) => Ok(StateSet::from_ids(n, (0..n).filter(|&s| ra.has_prop(s, &p)))),
            Node::Atom(a) => {
                let mut out = StateSet::empty(n);
                for s in 0..n {
                    out.set(s, ra.satisfies_atom(s, &a)?);
                }
                Ok(out)
            }
            Node::Var(y) => self
                .env
                .iter()
                .rev()
                .find(|(v, _)| *v == y)
                .map(|(_, s)| s.clone())
                .ok_or_else(|| Error::semantic(format!("unbound variable {y}"))),
            Node::Not(a) => Ok(self.eval(a)?.complement()),
            Node::Or(a, b) => {
                let mut out = self.eval(a)?;
                out.union_with(&self.eval(b)?);
                Ok(out)
            }
            Node::Diamond(k, a) => {
                let target = self.eval(a)?;
                let mut out = StateSet::empty(n);
                for e in ra.action_edges() {
                    if k.contains(&e.action) && target.contains(e.target) {
                        out.insert(e.source);
                    }
                }
                Ok(out)
            }
            Node::ExistsRel(a, b) => {
                let (guard, goal) = (self.eval(a)?, self.eval(b)?);
                let mut out = StateSet::empty(n);
                for &s in ra.eps_order() {
                    let via_succ = match ra.eps_succ(s) {
                        Some(t) if t != s => out.contains(t),
                        _ => false,
                    };
                    out.set(s, goal.contains(s) || (guard.contains(s) && via_succ));
                }
                Ok(out)
            }
            Node::Freeze(z, a) => {
                let inner = self.eval(a)?;
                let table = ra.freeze_table(&z)?;
                Ok(StateSet::from_ids(n, (0..n).filter(|&s| inner.contains(table[s]))))
            }
            Node::Mu(y, a) => {
                let mut x = StateSet::empty(n);
                loop {
                    self.env.push((y.clone(), x.clone()));
                    let next = self.eval(a);
                    self.env.pop();
                    let next = next?;
                    if next == x {
                        return Ok(x);
                    }
                    x = next;
                }
            }
        }
    }
}

/// Checks the preconditions shared by [`eval`] and the oracle.
pub fn check_domain(ta: &TimedAutomaton, f: &CoreFormula, clocks: &ClockSet, bound: u64) -> Result<()> {
    if let Some(c) = f.clocks().difference(clocks).next() {
        return Err(Error::semantic(format!("clock {c} is outside the region automaton's clock set")));
    }
    if f.bound() > bound {
        return Err(Error::semantic(format!("formula constant {} exceeds region bound {bound}", f.bound())));
    }
    let mut bad = None;
    visit(f, &mut |g| {
        if let CoreFormula::Freeze(z, _) = g {
            if ta.is_automaton_clock(z) {
                bad = Some(z.clone());
            }
        }
    });
    if let Some(z) = bad {
        return Err(Error::semantic(format!("{z} is an automaton clock and cannot be frozen")));
    }
    f.validate_monotone()
}

fn visit(f: &CoreFormula, g: &mut impl FnMut(&CoreFormula)) {
    g(f);
    for c in f.children() {
        visit(c, g);
    }
}

/// The set of region states satisfying `f` under `env`.
pub fn eval<T: TimeValue>(ra: &RegionAutomaton<T>, f: &CoreFormula, env: &Env) -> Result<StateSet> {
    check_domain(ra.ta(), f, ra.clocks(), ra.bound())?;
    if let Some(y) = f.free_vars().iter().find(|y| !env.contains_key(*y)) {
        return Err(Error::semantic(format!("free variable {y} has no value")));
    }
    for s in env.values() {
        if s.universe() != ra.len() {
            return Err(Error::semantic("environment set does not match the region automaton"));
        }
    }
    let mut dag = Dag::default();
    let root = dag.intern(f);
    let mut ev =
        Evaluator { ra, dag, cache: Vec::new(), env: env.iter().map(|(k, v)| (k.clone(), v.clone())).collect() };
    ev.eval(root)
}

/// Outcome of checking a formula on an automaton.
#[derive(Debug, Clone)]
pub struct Verdict<T> {
    pub formula: CoreFormula,
    pub automaton: RegionAutomaton<T>,
    pub satisfying: StateSet,
    /// Verdict for each initial region state.
    pub initial: Vec<(StateId, bool)>,
    /// Verdicts for the requested concrete states, in request order.
    pub points: Vec<(String, bool)>,
}

impl<T: TimeValue> Verdict<T> {
    pub fn holds_initially(&self) -> bool {
        !self.initial.is_empty() && self.initial.iter().all(|&(_, b)| b)
    }

    pub fn render_text(&self) -> String {
        let ra = &self.automaton;
        let mut out = format!("formula: {}\n", self.formula);
        out.push_str(&format!(
            "region automaton: {} states, clocks {{{}}}, bound {}\n",
            ra.len(),
            ra.clocks().iter().map(ClockId::name).collect::<Vec<_>>().join(","),
            ra.bound()
        ));
        out.push_str(&format!("satisfying states: {}\n", self.satisfying.count()));
        for s in 0..ra.len() {
            let mark = if self.satisfying.contains(s) { "yes" } else { "no " };
            let init = if ra.initial().contains(&s) { " (initial)" } else { "" };
            out.push_str(&format!("  {mark}  s{s}  {}{init}\n", ra.describe(s)));
        }
        for (p, b) in &self.points {
            out.push_str(&format!("state {p}: {}\n", if *b { "holds" } else { "does not hold" }));
        }
        out
    }

    pub fn report(&self) -> Report {
        let ra = &self.automaton;
        Report {
            formula: self.formula.to_string(),
            clocks: ra.clocks().iter().map(|c| c.name().to_string()).collect(),
            bound: ra.bound(),
            states: (0..ra.len())
                .map(|s| StateReport {
                    id: s,
                    location: ra.ta().location(ra.state(s).0).name.clone(),
                    region: ra.space().describe(ra.state(s).1),
                    initial: ra.initial().contains(&s),
                    holds: self.satisfying.contains(s),
                })
                .collect(),
            points: self.points.iter().map(|(p, b)| PointReport { state: p.clone(), holds: *b }).collect(),
        }
    }
}

/// Serializable form of a [`Verdict`].
#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub formula: String,
    pub clocks: Vec<String>,
    pub bound: u64,
    pub states: Vec<StateReport>,
    pub points: Vec<PointReport>,
}

#[derive(Debug, Clone, Serialize)]
pub struct StateReport {
    pub id: StateId,
    pub location: String,
    pub region: String,
    pub initial: bool,
    pub holds: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct PointReport {
    pub state: String,
    pub holds: bool,
}

/// Evaluates a closed core formula on the automaton relativized to it.
pub fn check_core<T: TimeValue>(
    ta: &TimedAutomaton,
    f: &CoreFormula,
    points: &[(String, ConcreteState<T>)],
) -> Result<Verdict<T>> {
    let ra = RegionAutomaton::build_relativized(ta, f)?;
    let satisfying = eval(&ra, f, &Env::new())?;
    let initial = ra.initial().iter().map(|&s| (s, satisfying.contains(s))).collect();
    let mut answers = Vec::new();
    for (name, p) in points {
        let full = ra.complete_state(p)?;
        answers.push((name.clone(), ra.contains_concretization(&satisfying, &full)?));
    }
    Ok(Verdict { formula: f.clone(), automaton: ra, satisfying, initial, points: answers })
}

/// Translates and checks a surface formula.
pub fn check<T: TimeValue>(
    ta: &TimedAutomaton,
    sf: &SurfaceFormula,
    points: &[(String, ConcreteState<T>)],
) -> Result<Verdict<T>> {
    let f = Translator::for_formula(sf, ta.clocks()).translate(sf)?;
    check_core(ta, &f, points)
}
