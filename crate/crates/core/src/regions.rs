//! Region equivalence over a clock set `C` and constant bound `d`.
//!
//! A region is identified by which atoms `x < c`, `x <= c`, `x - y < c` and
//! `x - y <= c` (with `0 <= c <= d`) its members satisfy. The `>`/`>=` atoms are
//! negations of these, so the key carries the full satisfaction vector.

use std::collections::{HashMap, VecDeque};
use std::fmt;

use crate::clocks::{AtomicConstraint, ClockConstraint, ClockId, ClockSet, Rel, TimeValue, Valuation};
use crate::error::{Error, Result};

pub type RegionId = usize;

/// Packed satisfaction vector. Bits are stored most-significant first, so the
/// derived `Ord` is lexicographic order on the bit sequence.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RegionKey {
    words: Vec<u64>,
    len: usize,
}

impl RegionKey {
    fn new(len: usize) -> Self {
        RegionKey { words: vec![0; len.div_ceil(64).max(1)], len }
    }

    fn set(&mut self, i: usize) {
        self.words[i / 64] |= 1u64 << (63 - i % 64);
    }

    pub fn get(&self, i: usize) -> bool {
        self.words[i / 64] & (1u64 << (63 - i % 64)) != 0
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }
}

impl fmt::Display for RegionKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len {
            f.write_str(if self.get(i) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct Region<T> {
    pub key: RegionKey,
    pub representative: Valuation<T>,
}

/// Integer part and fractional rank of every clock, the data a key depends on.
struct Shape {
    ints: Vec<i64>,
    fracs: Vec<usize>,
}

/// All regions of `(C, d)` with their successor and reset structure.
#[derive(Debug, Clone)]
pub struct RegionSpace<T> {
    clocks: Vec<ClockId>,
    clock_set: ClockSet,
    bound: u64,
    regions: Vec<Region<T>>,
    index: HashMap<RegionKey, RegionId>,
    succ: Vec<RegionId>,
    reset_one: Vec<Vec<RegionId>>,
    unbounded: Vec<bool>,
}

impl<T: TimeValue> RegionSpace<T> {
    /// Enumerates every region of `(clocks, bound)`.
    ///
    /// Any valuation is reachable from the zero valuation by alternating delays
    /// and single-clock resets, so closing `{region_of(0)}` under `tsucc` and
    /// the resets yields all regions. Representatives are normalized to the
    /// grid `k / (|C| + 1)`.
    pub fn enumerate(clocks: &ClockSet, bound: u64) -> Result<Self> {
        if bound > i64::MAX as u64 / 4 {
            return Err(Error::domain(format!("constant bound {bound} is too large")));
        }
        let clocks: Vec<ClockId> = clocks.iter().cloned().collect();
        let n = clocks.len();
        let mut space = RegionSpace {
            clock_set: clocks.iter().cloned().collect(),
            clocks,
            bound,
            regions: Vec::new(),
            index: HashMap::new(),
            succ: Vec::new(),
            reset_one: vec![Vec::new(); n],
            unbounded: Vec::new(),
        };
        let zero = Valuation::zero(space.clocks.iter().cloned());
        let mut raw_succ: Vec<RegionId> = Vec::new();
        let mut raw_reset: Vec<Vec<RegionId>> = Vec::new();
        let mut queue = VecDeque::new();
        space.intern(zero, &mut queue)?;
        while let Some(id) = queue.pop_front() {
            let rep = space.regions[id].representative.clone();
            let (next, unbounded) = space.delay_step(&rep)?;
            let s = space.intern(next, &mut queue)?;
            let mut resets = Vec::with_capacity(n);
            for c in space.clocks.clone() {
                resets.push(space.intern(rep.reset([&c]), &mut queue)?);
            }
            if raw_succ.len() <= id {
                raw_succ.resize(id + 1, 0);
                raw_reset.resize(id + 1, Vec::new());
                space.unbounded.resize(id + 1, false);
            }
            raw_succ[id] = s;
            raw_reset[id] = resets;
            space.unbounded[id] = unbounded;
        }

        // Order regions by descending key: for one clock this is time order.
        let mut order: Vec<RegionId> = (0..space.regions.len()).collect();
        order.sort_by(|&a, &b| space.regions[b].key.cmp(&space.regions[a].key));
        let mut new_id = vec![0; order.len()];
        for (new, &old) in order.iter().enumerate() {
            new_id[old] = new;
        }
        let regions = std::mem::take(&mut space.regions);
        let mut slots: Vec<Option<Region<T>>> = regions.into_iter().map(Some).collect();
        space.regions = order.iter().map(|&old| slots[old].take().expect("each region moved once")).collect();
        space.succ = order.iter().map(|&old| new_id[raw_succ[old]]).collect();
        space.unbounded = order.iter().map(|&old| space.unbounded[old]).collect();
        for (ci, col) in space.reset_one.iter_mut().enumerate() {
            *col = order.iter().map(|&old| new_id[raw_reset[old][ci]]).collect();
        }
        space.index = space.regions.iter().enumerate().map(|(i, r)| (r.key.clone(), i)).collect();
        Ok(space)
    }

    fn intern(&mut self, v: Valuation<T>, queue: &mut VecDeque<RegionId>) -> Result<RegionId> {
        let shape = self.shape(&v)?;
        let key = self.key_from_shape(&shape);
        if let Some(&id) = self.index.get(&key) {
            return Ok(id);
        }
        let representative = self.normalize(&shape);
        let id = self.regions.len();
        self.regions.push(Region { key: key.clone(), representative });
        self.index.insert(key, id);
        queue.push_back(id);
        Ok(id)
    }

    /// Delay to the next region. Returns the delayed valuation and whether the
    /// region is unbounded (every clock above `d`), in which case no delay happens.
    fn delay_step(&self, v: &Valuation<T>) -> Result<(Valuation<T>, bool)> {
        let d = T::from_nat(self.bound);
        let mut gaps: Vec<T> = Vec::new();
        let mut integral_below = false;
        for c in &self.clocks {
            let x = v.value(c)?;
            if *x > d {
                continue;
            }
            if x.is_integral() {
                integral_below = true;
                gaps.push(T::one());
            } else {
                gaps.push(x.ceil_value() - x.clone());
            }
        }
        let Some(min) = gaps.into_iter().min() else {
            return Ok((v.clone(), true));
        };
        let delta = if integral_below { min / T::from_nat(2) } else { min };
        Ok((v.delay(&delta)?, false))
    }

    fn shape(&self, v: &Valuation<T>) -> Result<Shape> {
        let mut ints = Vec::with_capacity(self.clocks.len());
        let mut fracs_raw = Vec::with_capacity(self.clocks.len());
        for c in &self.clocks {
            let x = v.value(c)?;
            if x.is_negative() {
                return Err(Error::domain(format!("clock {c} has negative value {x}")));
            }
            let i = x.floor_i64().ok_or_else(|| Error::domain(format!("clock value {x} is too large")))?;
            ints.push(i);
            fracs_raw.push(x.clone() - x.floor_value());
        }
        let mut distinct = fracs_raw.clone();
        distinct.sort();
        distinct.dedup();
        let zero = T::zero();
        let offset = usize::from(distinct.first() != Some(&zero));
        let fracs = fracs_raw.iter().map(|f| distinct.binary_search(f).expect("present") + offset).collect();
        Ok(Shape { ints, fracs })
    }

    fn normalize(&self, shape: &Shape) -> Valuation<T> {
        let den = self.clocks.len() as i64 + 1;
        let pairs = self
            .clocks
            .iter()
            .enumerate()
            .map(|(i, c)| (c.clone(), T::from_ratio(shape.ints[i] * den + shape.fracs[i] as i64, den)));
        Valuation::from_pairs(pairs).expect("normalized values are non-negative")
    }

    fn key_len(&self) -> usize {
        let n = self.clocks.len();
        let w = self.bound as usize + 1;
        2 * n * w + 2 * n * n.saturating_sub(1) * w
    }

    fn single_bit(&self, clock: usize, c: u64, strict: bool) -> usize {
        2 * (clock * (self.bound as usize + 1) + c as usize) + usize::from(!strict)
    }

    fn diff_bit(&self, left: usize, right: usize, c: u64, strict: bool) -> usize {
        let n = self.clocks.len();
        let w = self.bound as usize + 1;
        let pair = left * (n - 1) + if right < left { right } else { right - 1 };
        2 * n * w + 2 * (pair * w + c as usize) + usize::from(!strict)
    }

    fn key_from_shape(&self, s: &Shape) -> RegionKey {
        let n = self.clocks.len();
        let mut key = RegionKey::new(self.key_len());
        for i in 0..n {
            for c in 0..=self.bound {
                let ci = c as i64;
                if s.ints[i] < ci {
                    key.set(self.single_bit(i, c, true));
                }
                if s.ints[i] < ci || (s.ints[i] == ci && s.fracs[i] == 0) {
                    key.set(self.single_bit(i, c, false));
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                let dint = s.ints[i] - s.ints[j];
                let ord = s.fracs[i].cmp(&s.fracs[j]);
                for c in 0..=self.bound {
                    let ci = c as i64;
                    let (lt, le) = match ord {
                        std::cmp::Ordering::Less => (dint <= ci, dint <= ci),
                        std::cmp::Ordering::Equal => (dint < ci, dint <= ci),
                        std::cmp::Ordering::Greater => (dint < ci, dint < ci),
                    };
                    if lt {
                        key.set(self.diff_bit(i, j, c, true));
                    }
                    if le {
                        key.set(self.diff_bit(i, j, c, false));
                    }
                }
            }
        }
        key
    }

    /// Satisfaction vector of `v` over this space's clocks. `v` may carry extra clocks.
    pub fn key_of(&self, v: &Valuation<T>) -> Result<RegionKey> {
        Ok(self.key_from_shape(&self.shape(v)?))
    }

    /// Whether `v` and `w` lie in the same region.
    pub fn equivalent(&self, v: &Valuation<T>, w: &Valuation<T>) -> Result<bool> {
        Ok(self.key_of(v)? == self.key_of(w)?)
    }

    /// The region containing `v`.
    pub fn region_of(&self, v: &Valuation<T>) -> Result<RegionId> {
        let key = self.key_of(v)?;
        self.index.get(&key).copied().ok_or_else(|| Error::domain(format!("enumeration incomplete: no region for {v}")))
    }

    pub fn len(&self) -> usize {
        self.regions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.regions.is_empty()
    }

    pub fn ids(&self) -> std::ops::Range<RegionId> {
        0..self.regions.len()
    }

    pub fn region(&self, id: RegionId) -> &Region<T> {
        &self.regions[id]
    }

    pub fn representative(&self, id: RegionId) -> &Valuation<T> {
        &self.regions[id].representative
    }

    pub fn key(&self, id: RegionId) -> &RegionKey {
        &self.regions[id].key
    }

    pub fn clocks(&self) -> &ClockSet {
        &self.clock_set
    }

    pub fn bound(&self) -> u64 {
        self.bound
    }

    /// Immediate time successor; unbounded regions are their own successor.
    pub fn tsucc(&self, id: RegionId) -> RegionId {
        self.succ[id]
    }

    pub fn is_unbounded(&self, id: RegionId) -> bool {
        self.unbounded[id]
    }

    pub fn reset(&self, id: RegionId, clocks: &ClockSet) -> Result<RegionId> {
        let mut r = id;
        for c in clocks {
            let i = self.position(c)?;
            r = self.reset_one[i][r];
        }
        Ok(r)
    }

    /// Reset of a single clock, `r[x := 0]`.
    pub fn reset_clock(&self, id: RegionId, clock: &ClockId) -> Result<RegionId> {
        Ok(self.reset_one[self.position(clock)?][id])
    }

    fn position(&self, c: &ClockId) -> Result<usize> {
        self.clocks.binary_search(c).map_err(|_| Error::domain(format!("clock {c} is not in the region clock set")))
    }

    pub fn satisfies_atom(&self, id: RegionId, a: &AtomicConstraint) -> Result<bool> {
        if a.bound() > self.bound {
            return Err(Error::domain(format!("constant of {a} exceeds region bound {}", self.bound)));
        }
        let key = &self.regions[id].key;
        Ok(match a {
            AtomicConstraint::False => false,
            AtomicConstraint::Clock { clock, rel, c } => {
                let i = self.position(clock)?;
                match rel {
                    Rel::Lt => key.get(self.single_bit(i, *c, true)),
                    Rel::Le => key.get(self.single_bit(i, *c, false)),
                    Rel::Gt => !key.get(self.single_bit(i, *c, false)),
                    Rel::Ge => !key.get(self.single_bit(i, *c, true)),
                }
            }
            AtomicConstraint::Diff { left, right, rel, c } => {
                let (i, j) = (self.position(left)?, self.position(right)?);
                if i == j {
                    return Ok(rel.holds(&0, &(*c as i64)));
                }
                match rel {
                    Rel::Lt => key.get(self.diff_bit(i, j, *c, true)),
                    Rel::Le => key.get(self.diff_bit(i, j, *c, false)),
                    Rel::Gt => !key.get(self.diff_bit(i, j, *c, false)),
                    Rel::Ge => !key.get(self.diff_bit(i, j, *c, true)),
                }
            }
        })
    }

    pub fn satisfies(&self, id: RegionId, g: &ClockConstraint) -> Result<bool> {
        for a in g.atoms() {
            if !self.satisfies_atom(id, a)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Human-readable class description such as `x=1, 0<y<1, 0<y-x<1`.
    pub fn describe(&self, id: RegionId) -> String {
        if self.clocks.is_empty() {
            return "true".to_string();
        }
        let rep = &self.regions[id].representative;
        let d = self.bound as i64;
        let classes: Vec<Interval> = self
            .clocks
            .iter()
            .map(|c| Interval::of_clock(rep.get(c).expect("representative covers the clock set"), d))
            .collect();
        let mut parts: Vec<String> = self.clocks.iter().zip(&classes).map(|(c, iv)| iv.render(c.name())).collect();
        for i in 0..self.clocks.len() {
            for j in (i + 1)..self.clocks.len() {
                let implied = classes[i].minus(&classes[j]);
                if implied.within_one_class(d) {
                    continue;
                }
                let (xi, xj) = (&self.clocks[i], &self.clocks[j]);
                let diff = rep.get(xi).expect("covered").clone() - rep.get(xj).expect("covered").clone();
                let name = format!("{xi}-{xj}");
                parts.push(Interval::of_value(&diff, d).render(&name));
            }
        }
        parts.join(", ")
    }
}

/// Integer-endpoint interval used to print region classes. `None` is infinite.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Interval {
    lo: Option<i64>,
    lo_open: bool,
    hi: Option<i64>,
    hi_open: bool,
}

impl Interval {
    fn of_clock<T: TimeValue>(x: &T, d: i64) -> Self {
        Self::of_value(x, d)
    }

    /// Class of `x` among `(-inf,-d)`, `{k}`, `(k,k+1)`, `(d,inf)` for `|k| <= d`.
    fn of_value<T: TimeValue>(x: &T, d: i64) -> Self {
        let f = x.floor_i64().unwrap_or(i64::MAX);
        if *x > T::from_nat(d as u64) {
            return Interval { lo: Some(d), lo_open: true, hi: None, hi_open: true };
        }
        if f < -d {
            return Interval { lo: None, lo_open: true, hi: Some(-d), hi_open: true };
        }
        if x.is_integral() {
            Interval { lo: Some(f), lo_open: false, hi: Some(f), hi_open: false }
        } else {
            Interval { lo: Some(f), lo_open: true, hi: Some(f + 1), hi_open: true }
        }
    }

    fn minus(&self, other: &Interval) -> Interval {
        let lo = match (self.lo, other.hi) {
            (Some(a), Some(b)) => Some(a - b),
            _ => None,
        };
        let hi = match (self.hi, other.lo) {
            (Some(a), Some(b)) => Some(a - b),
            _ => None,
        };
        Interval { lo, lo_open: self.lo_open || other.hi_open, hi, hi_open: self.hi_open || other.lo_open }
    }

    fn within_one_class(&self, d: i64) -> bool {
        match (self.lo, self.hi) {
            (Some(a), Some(b)) if a == b => true,
            (Some(a), Some(b)) if b == a + 1 && self.lo_open && self.hi_open => true,
            (Some(a), _) if a > d || (a == d && self.lo_open) => true,
            (_, Some(b)) if b < -d || (b == -d && self.hi_open) => true,
            _ => false,
        }
    }

    fn render(&self, name: &str) -> String {
        match (self.lo, self.hi) {
            (Some(a), Some(b)) if a == b => format!("{name}={a}"),
            (Some(a), None) => format!("{name}>{a}"),
            (None, Some(b)) => format!("{name}<{b}"),
            (Some(a), Some(b)) => format!("{a}<{name}<{b}"),
            (None, None) => format!("{name} arbitrary"),
        }
    }
}
