//! Timed automata, their concrete semantics, and the `.ta` text format.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::clocks::{parse_constraint, ClockConstraint, ClockId, ClockSet, TimeValue, Valuation};
use crate::error::{Error, Result};

pub type LocationId = usize;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    pub source: LocationId,
    pub action: String,
    pub guard: ClockConstraint,
    pub reset: ClockSet,
    pub target: LocationId,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Location {
    pub name: String,
    pub invariant: ClockConstraint,
    pub labels: BTreeSet<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Defect {
    pub severity: Severity,
    pub message: String,
}

impl fmt::Display for Defect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{tag}: {}", self.message)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TimedAutomaton {
    name: String,
    clocks: ClockSet,
    propositions: BTreeSet<String>,
    locations: Vec<Location>,
    initial: Vec<LocationId>,
    edges: Vec<Edge>,
}

impl TimedAutomaton {
    pub fn builder(name: impl Into<String>) -> TaBuilder {
        TaBuilder { ta: TimedAutomaton { name: name.into(), ..TimedAutomaton::empty() }, problems: Vec::new() }
    }

    fn empty() -> Self {
        TimedAutomaton {
            name: String::new(),
            clocks: ClockSet::new(),
            propositions: BTreeSet::new(),
            locations: Vec::new(),
            initial: Vec::new(),
            edges: Vec::new(),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn clocks(&self) -> &ClockSet {
        &self.clocks
    }

    pub fn propositions(&self) -> &BTreeSet<String> {
        &self.propositions
    }

    pub fn locations(&self) -> &[Location] {
        &self.locations
    }

    pub fn location(&self, id: LocationId) -> &Location {
        &self.locations[id]
    }

    pub fn location_id(&self, name: &str) -> Option<LocationId> {
        self.locations.iter().position(|l| l.name == name)
    }

    pub fn initial(&self) -> &[LocationId] {
        &self.initial
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edges_from(&self, l: LocationId) -> impl Iterator<Item = &Edge> {
        self.edges.iter().filter(move |e| e.source == l)
    }

    /// The action alphabet: every action labelling some edge.
    pub fn actions(&self) -> BTreeSet<String> {
        self.edges.iter().map(|e| e.action.clone()).collect()
    }

    /// Largest constant in any invariant or guard.
    pub fn bound(&self) -> u64 {
        let inv = self.locations.iter().map(|l| l.invariant.bound());
        let guards = self.edges.iter().map(|e| e.guard.bound());
        inv.chain(guards).max().unwrap_or(0)
    }

    pub fn is_automaton_clock(&self, c: &ClockId) -> bool {
        self.clocks.contains(c)
    }

    /// Structural defects; any `Severity::Error` entry makes the automaton unusable.
    pub fn validate(&self) -> Vec<Defect> {
        let mut out = Vec::new();
        let err = |m: String| Defect { severity: Severity::Error, message: m };
        if self.locations.is_empty() {
            out.push(err("automaton has no locations".into()));
        }
        if self.initial.is_empty() {
            out.push(err("automaton has no initial location".into()));
        }
        if self.clocks.is_empty() {
            out.push(err("automaton declares no clocks".into()));
        }
        let mut seen = BTreeSet::new();
        for l in &self.locations {
            if !seen.insert(l.name.as_str()) {
                out.push(err(format!("duplicate location {}", l.name)));
            }
            for c in l.invariant.clocks().difference(&self.clocks) {
                out.push(err(format!("invariant of {} uses unknown clock {c}", l.name)));
            }
            for p in l.labels.difference(&self.propositions) {
                out.push(err(format!("location {} is labelled with undeclared proposition {p}", l.name)));
            }
        }
        for e in &self.edges {
            if e.source >= self.locations.len() || e.target >= self.locations.len() {
                out.push(err(format!("edge {} refers to an unknown location", e.action)));
                continue;
            }
            let src = &self.locations[e.source].name;
            for c in e.guard.clocks().difference(&self.clocks) {
                out.push(err(format!("guard of edge {src} -{}-> uses unknown clock {c}", e.action)));
            }
            for c in e.reset.difference(&self.clocks) {
                out.push(err(format!("edge {src} -{}-> resets unknown clock {c}", e.action)));
            }
        }
        if out.is_empty() {
            let zero: Valuation<crate::Rational> = Valuation::zero(self.clocks.iter().cloned());
            for &l in &self.initial {
                if !self.locations[l].invariant.satisfied_by(&zero).unwrap_or(false) {
                    out.push(Defect {
                        severity: Severity::Warning,
                        message: format!(
                            "initial location {} does not admit the zero valuation",
                            self.locations[l].name
                        ),
                    });
                }
            }
        }
        out
    }

    /// Concrete `s --delta--> s'`. Invariants are convex, so checking the end point suffices.
    pub fn delay<T: TimeValue>(&self, s: &ConcreteState<T>, delta: &T) -> Result<Option<ConcreteState<T>>> {
        let v = s.valuation.delay(delta)?;
        if self.locations[s.location].invariant.satisfied_by(&v)? {
            Ok(Some(ConcreteState { location: s.location, valuation: v }))
        } else {
            Ok(None)
        }
    }

    /// Concrete action successors of `s` along edges accepted by `accept`.
    pub fn step<T: TimeValue>(
        &self,
        s: &ConcreteState<T>,
        mut accept: impl FnMut(&str) -> bool,
    ) -> Result<Vec<(String, ConcreteState<T>)>> {
        let mut out = Vec::new();
        for e in self.edges_from(s.location) {
            if !accept(&e.action) || !e.guard.satisfied_by(&s.valuation)? {
                continue;
            }
            let v = s.valuation.reset(&e.reset);
            if self.locations[e.target].invariant.satisfied_by(&v)? {
                out.push((e.action.clone(), ConcreteState { location: e.target, valuation: v }));
            }
        }
        Ok(out)
    }

    /// Serializes to the `.ta` text format.
    pub fn to_text(&self) -> String {
        let mut out = format!("ta {}\n", self.name);
        let clocks: Vec<&str> = self.clocks.iter().map(ClockId::name).collect();
        out.push_str(&format!("clock {}\n", clocks.join(" ")));
        if !self.propositions.is_empty() {
            let props: Vec<&str> = self.propositions.iter().map(String::as_str).collect();
            out.push_str(&format!("prop {}\n", props.join(" ")));
        }
        for (i, l) in self.locations.iter().enumerate() {
            out.push_str(&format!("loc {}", l.name));
            if self.initial.contains(&i) {
                out.push_str(" init");
            }
            if !l.invariant.is_tt() {
                out.push_str(&format!(" inv \"{}\"", l.invariant));
            }
            if !l.labels.is_empty() {
                let props: Vec<&str> = l.labels.iter().map(String::as_str).collect();
                out.push_str(&format!(" props {}", props.join(" ")));
            }
            out.push('\n');
        }
        for e in &self.edges {
            out.push_str(&format!(
                "edge {} {} {}",
                self.locations[e.source].name, e.action, self.locations[e.target].name
            ));
            if !e.guard.is_tt() {
                out.push_str(&format!(" guard \"{}\"", e.guard));
            }
            if !e.reset.is_empty() {
                let r: Vec<&str> = e.reset.iter().map(ClockId::name).collect();
                out.push_str(&format!(" reset {}", r.join(" ")));
            }
            out.push('\n');
        }
        out
    }
}

pub struct TaBuilder {
    ta: TimedAutomaton,
    problems: Vec<String>,
}

impl TaBuilder {
    pub fn clock(mut self, name: &str) -> Self {
        self.ta.clocks.insert(ClockId::new(name));
        self
    }

    pub fn proposition(mut self, name: &str) -> Self {
        self.ta.propositions.insert(name.to_string());
        self
    }

    pub fn location(mut self, name: &str, initial: bool, invariant: &str, labels: &[&str]) -> Self {
        match parse_constraint(invariant) {
            Ok(inv) => self.push_location(name, initial, inv, labels.iter().map(|s| s.to_string()).collect()),
            Err(e) => self.problems.push(format!("invariant of {name}: {e}")),
        }
        self
    }

    fn push_location(&mut self, name: &str, initial: bool, invariant: ClockConstraint, labels: BTreeSet<String>) {
        if initial {
            self.ta.initial.push(self.ta.locations.len());
        }
        for p in &labels {
            self.ta.propositions.insert(p.clone());
        }
        self.ta.locations.push(Location { name: name.to_string(), invariant, labels });
    }

    pub fn edge(mut self, source: &str, action: &str, target: &str, guard: &str, reset: &[&str]) -> Self {
        let (Some(s), Some(t)) = (self.ta.location_id(source), self.ta.location_id(target)) else {
            self.problems.push(format!("edge {source} -{action}-> {target} refers to an unknown location"));
            return self;
        };
        match parse_constraint(guard) {
            Ok(guard) => self.ta.edges.push(Edge {
                source: s,
                action: action.to_string(),
                guard,
                reset: reset.iter().map(|c| ClockId::new(*c)).collect(),
                target: t,
            }),
            Err(e) => self.problems.push(format!("guard of {source} -{action}-> {target}: {e}")),
        }
        self
    }

    pub fn build(self) -> Result<TimedAutomaton> {
        if let Some(p) = self.problems.first() {
            return Err(Error::semantic(p.clone()));
        }
        check_defects(self.ta)
    }
}

fn check_defects(ta: TimedAutomaton) -> Result<TimedAutomaton> {
    let errors: Vec<String> =
        ta.validate().into_iter().filter(|d| d.severity == Severity::Error).map(|d| d.message).collect();
    if errors.is_empty() {
        Ok(ta)
    } else {
        Err(Error::semantic(errors.join("; ")))
    }
}

/// A state `(l, v)` of the timed transition system. `v` covers the automaton
/// clocks and may carry extra (freeze) clocks.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ConcreteState<T> {
    location: LocationId,
    valuation: Valuation<T>,
}

impl<T: TimeValue> ConcreteState<T> {
    pub fn new(ta: &TimedAutomaton, location: LocationId, valuation: Valuation<T>) -> Result<Self> {
        if location >= ta.locations.len() {
            return Err(Error::domain(format!("unknown location index {location}")));
        }
        if let Some(c) = ta.clocks.iter().find(|c| valuation.get(c).is_none()) {
            return Err(Error::domain(format!("state does not assign automaton clock {c}")));
        }
        if !ta.locations[location].invariant.satisfied_by(&valuation)? {
            return Err(Error::domain(format!(
                "valuation {valuation} violates the invariant of {}",
                ta.locations[location].name
            )));
        }
        Ok(ConcreteState { location, valuation })
    }

    pub fn location(&self) -> LocationId {
        self.location
    }

    pub fn valuation(&self) -> &Valuation<T> {
        &self.valuation
    }

    /// Resetting a clock that no invariant mentions keeps the state valid.
    pub fn reset_freeze(&self, ta: &TimedAutomaton, clock: &ClockId) -> Result<Self> {
        if ta.is_automaton_clock(clock) {
            return Err(Error::semantic(format!("{clock} is an automaton clock and cannot be frozen")));
        }
        Ok(ConcreteState { location: self.location, valuation: self.valuation.assign(clock, T::zero())? })
    }
}

/// Parses `loc:x=1/2,y=0`. Unlisted clocks in `extra` default to zero.
pub fn parse_state<T: TimeValue>(ta: &TimedAutomaton, text: &str, extra: &ClockSet) -> Result<ConcreteState<T>> {
    let (loc, rest) = text.split_once(':').unwrap_or((text, ""));
    let l = ta.location_id(loc.trim()).ok_or_else(|| Error::parse(0, format!("unknown location `{}`", loc.trim())))?;
    let mut values = BTreeMap::new();
    let mut offset = loc.len() + 1;
    for part in rest.split(',') {
        if part.trim().is_empty() {
            offset += part.len() + 1;
            continue;
        }
        let (c, v) = part.split_once('=').ok_or_else(|| Error::parse(offset, "expected clock=value"))?;
        let value: T = v.trim().parse().map_err(|_| Error::parse(offset, format!("bad clock value `{}`", v.trim())))?;
        values.insert(ClockId::new(c.trim()), value);
        offset += part.len() + 1;
    }
    let all: ClockSet = ta.clocks.iter().chain(extra.iter()).cloned().collect();
    for c in values.keys() {
        if !all.contains(c) {
            return Err(Error::domain(format!("state assigns unknown clock {c}")));
        }
    }
    for c in &all {
        values.entry(c.clone()).or_insert_with(T::zero);
    }
    ConcreteState::new(ta, l, Valuation::from_pairs(values)?)
}

/// Finite labelled transition system, used for the untimed embedding.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteLts {
    pub states: Vec<String>,
    pub initial: Vec<usize>,
    pub transitions: Vec<(usize, String, usize)>,
    pub labels: Vec<BTreeSet<String>>,
}

impl FiniteLts {
    pub fn actions(&self) -> BTreeSet<String> {
        self.transitions.iter().map(|(_, a, _)| a.clone()).collect()
    }
}

/// Name of the single clock of an embedded LTS.
pub const LTS_CLOCK: &str = "x";

/// Embeds an LTS as a timed automaton in which time cannot pass.
pub fn lts_to_ta(m: &FiniteLts) -> Result<TimedAutomaton> {
    let mut b = TimedAutomaton::builder("lts").clock(LTS_CLOCK);
    let props: BTreeSet<&String> = m.labels.iter().flatten().collect();
    for p in props {
        b = b.proposition(p);
    }
    for (i, s) in m.states.iter().enumerate() {
        let labels: Vec<&str> = m.labels.get(i).map(|l| l.iter().map(String::as_str).collect()).unwrap_or_default();
        b = b.location(s, m.initial.contains(&i), &format!("{LTS_CLOCK}<=0"), &labels);
    }
    for (s, a, t) in &m.transitions {
        let (Some(s), Some(t)) = (m.states.get(*s), m.states.get(*t)) else {
            return Err(Error::semantic("transition refers to an unknown state"));
        };
        b = b.edge(s, a, t, "tt", &[]);
    }
    b.build()
}

/// Parses the line-oriented `.ta` format:
///
/// ```text
/// ta NAME
/// clock ID+
/// prop ID+
/// loc ID [init] [inv "CONSTRAINT"] [props ID+]
/// edge SRC ACTION DST [guard "CONSTRAINT"] [reset ID+]
/// ```
///
/// `#` starts a comment. Error positions are byte offsets into `src`.
pub fn parse_ta(src: &str) -> Result<TimedAutomaton> {
    let mut ta = TimedAutomaton::empty();
    let mut line_start = 0;
    let mut pending_edges: Vec<(usize, Vec<Word>)> = Vec::new();
    for line in src.split_inclusive('\n') {
        let body = line.split('#').next().unwrap_or("");
        let words = split_words(body, line_start)?;
        if let Some(first) = words.first() {
            match first.text.as_str() {
                "ta" => {
                    let name = words.get(1).ok_or_else(|| Error::parse(first.pos, "expected automaton name"))?;
                    ta.name = name.text.clone();
                }
                "clock" => {
                    if words.len() < 2 {
                        return Err(Error::parse(first.pos, "expected at least one clock name"));
                    }
                    for w in &words[1..] {
                        ta.clocks.insert(ClockId::new(w.ident()?));
                    }
                }
                "prop" => {
                    for w in &words[1..] {
                        ta.propositions.insert(w.ident()?.to_string());
                    }
                }
                "loc" => parse_loc_line(&mut ta, &words)?,
                "edge" => pending_edges.push((first.pos, words)),
                other => return Err(Error::parse(first.pos, format!("unknown directive `{other}`"))),
            }
        }
        line_start += line.len();
    }
    for (pos, words) in pending_edges {
        parse_edge_line(&mut ta, pos, &words)?;
    }
    check_defects(ta)
}

#[derive(Debug, Clone)]
struct Word {
    text: String,
    pos: usize,
    quoted: bool,
}

impl Word {
    fn ident(&self) -> Result<&str> {
        let ok = !self.quoted
            && self.text.chars().next().is_some_and(crate::lexer::is_ident_start)
            && self.text.chars().all(crate::lexer::is_ident_char);
        if ok {
            Ok(&self.text)
        } else {
            Err(Error::parse(self.pos, format!("`{}` is not an identifier", self.text)))
        }
    }

    fn constraint(&self) -> Result<ClockConstraint> {
        if !self.quoted {
            return Err(Error::parse(self.pos, "constraints must be quoted"));
        }
        parse_constraint(&self.text).map_err(|e| match e {
            Error::Parse { pos, msg } => Error::parse(self.pos + 1 + pos, msg),
            other => other,
        })
    }
}

fn split_words(line: &str, base: usize) -> Result<Vec<Word>> {
    let mut out = Vec::new();
    let mut chars = line.char_indices().peekable();
    while let Some(&(i, c)) = chars.peek() {
        if c.is_whitespace() {
            chars.next();
            continue;
        }
        if c == '"' {
            chars.next();
            let mut text = String::new();
            let mut closed = false;
            for (_, c) in chars.by_ref() {
                if c == '"' {
                    closed = true;
                    break;
                }
                text.push(c);
            }
            if !closed {
                return Err(Error::parse(base + i, "unterminated quoted constraint"));
            }
            out.push(Word { text, pos: base + i, quoted: true });
            continue;
        }
        let mut text = String::new();
        while let Some(&(_, c)) = chars.peek() {
            if c.is_whitespace() || c == '"' {
                break;
            }
            text.push(c);
            chars.next();
        }
        out.push(Word { text, pos: base + i, quoted: false });
    }
    Ok(out)
}

fn parse_loc_line(ta: &mut TimedAutomaton, words: &[Word]) -> Result<()> {
    let name = words.get(1).ok_or_else(|| Error::parse(words[0].pos, "expected location name"))?.ident()?.to_string();
    if ta.location_id(&name).is_some() {
        return Err(Error::parse(words[1].pos, format!("duplicate location `{name}`")));
    }
    let mut initial = false;
    let mut invariant = ClockConstraint::tt();
    let mut labels = BTreeSet::new();
    let mut i = 2;
    while i < words.len() {
        match words[i].text.as_str() {
            "init" if !words[i].quoted => initial = true,
            "inv" if !words[i].quoted => {
                i += 1;
                let w = words.get(i).ok_or_else(|| Error::parse(words[i - 1].pos, "expected quoted invariant"))?;
                invariant = w.constraint()?;
            }
            "props" if !words[i].quoted => {
                for w in &words[i + 1..] {
                    labels.insert(w.ident()?.to_string());
                }
                i = words.len();
                continue;
            }
            _ => return Err(Error::parse(words[i].pos, format!("unexpected `{}` in location", words[i].text))),
        }
        i += 1;
    }
    if initial {
        ta.initial.push(ta.locations.len());
    }
    ta.locations.push(Location { name, invariant, labels });
    Ok(())
}

fn parse_edge_line(ta: &mut TimedAutomaton, pos: usize, words: &[Word]) -> Result<()> {
    if words.len() < 4 {
        return Err(Error::parse(pos, "expected `edge SRC ACTION DST`"));
    }
    let loc = |w: &Word| -> Result<LocationId> {
        ta.location_id(w.ident()?).ok_or_else(|| Error::parse(w.pos, format!("unknown location `{}`", w.text)))
    };
    let source = loc(&words[1])?;
    let action = words[2].ident()?.to_string();
    let target = loc(&words[3])?;
    let mut guard = ClockConstraint::tt();
    let mut reset = ClockSet::new();
    let mut i = 4;
    while i < words.len() {
        match words[i].text.as_str() {
            "guard" if !words[i].quoted => {
                i += 1;
                let w = words.get(i).ok_or_else(|| Error::parse(words[i - 1].pos, "expected quoted guard"))?;
                guard = w.constraint()?;
            }
            "reset" if !words[i].quoted => {
                i += 1;
                while i < words.len() && words[i].text != "guard" {
                    reset.insert(ClockId::new(words[i].ident()?));
                    i += 1;
                }
                continue;
            }
            _ => return Err(Error::parse(words[i].pos, format!("unexpected `{}` in edge", words[i].text))),
        }
        i += 1;
    }
    ta.edges.push(Edge { source, action, guard, reset, target });
    Ok(())
}
