//! Clocks, clock constraints and exact valuations.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::hash::Hash;
use std::str::FromStr;

use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{FromPrimitive, Signed, ToPrimitive};

use crate::error::{Error, Result};
use crate::lexer::{Cursor, Tok};

/// A clock name. Automaton and freeze clocks share one namespace; which kind a
/// clock is depends on whether the automaton declares it.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ClockId(String);

impl ClockId {
    pub fn new(name: impl Into<String>) -> Self {
        ClockId(name.into())
    }

    pub fn name(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for ClockId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for ClockId {
    fn from(s: &str) -> Self {
        ClockId::new(s)
    }
}

impl From<String> for ClockId {
    fn from(s: String) -> Self {
        ClockId(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ClockKind {
    Automaton,
    Freeze,
}

pub type ClockSet = BTreeSet<ClockId>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Rel {
    Lt,
    Le,
    Gt,
    Ge,
}

impl Rel {
    pub fn holds<T: Ord>(self, lhs: &T, rhs: &T) -> bool {
        match self {
            Rel::Lt => lhs < rhs,
            Rel::Le => lhs <= rhs,
            Rel::Gt => lhs > rhs,
            Rel::Ge => lhs >= rhs,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Rel::Lt => "<",
            Rel::Le => "<=",
            Rel::Gt => ">",
            Rel::Ge => ">=",
        }
    }

    pub fn all() -> [Rel; 4] {
        [Rel::Lt, Rel::Le, Rel::Gt, Rel::Ge]
    }
}

/// `x rel c`, `x - y rel c`, or the unsatisfiable atom.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum AtomicConstraint {
    False,
    Clock { clock: ClockId, rel: Rel, c: u64 },
    Diff { left: ClockId, right: ClockId, rel: Rel, c: u64 },
}

impl AtomicConstraint {
    pub fn clock(clock: impl Into<ClockId>, rel: Rel, c: u64) -> Self {
        AtomicConstraint::Clock { clock: clock.into(), rel, c }
    }

    pub fn diff(left: impl Into<ClockId>, right: impl Into<ClockId>, rel: Rel, c: u64) -> Self {
        AtomicConstraint::Diff { left: left.into(), right: right.into(), rel, c }
    }

    pub fn bound(&self) -> u64 {
        match self {
            AtomicConstraint::False => 0,
            AtomicConstraint::Clock { c, .. } | AtomicConstraint::Diff { c, .. } => *c,
        }
    }

    pub fn clocks(&self) -> ClockSet {
        match self {
            AtomicConstraint::False => ClockSet::new(),
            AtomicConstraint::Clock { clock, .. } => [clock.clone()].into(),
            AtomicConstraint::Diff { left, right, .. } => [left.clone(), right.clone()].into(),
        }
    }

    pub fn satisfied_by<T: TimeValue>(&self, v: &Valuation<T>) -> Result<bool> {
        Ok(match self {
            AtomicConstraint::False => false,
            AtomicConstraint::Clock { clock, rel, c } => rel.holds(v.value(clock)?, &T::from_nat(*c)),
            AtomicConstraint::Diff { left, right, rel, c } => {
                let d = v.value(left)?.clone() - v.value(right)?.clone();
                rel.holds(&d, &T::from_nat(*c))
            }
        })
    }
}

impl fmt::Display for AtomicConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AtomicConstraint::False => f.write_str("ff"),
            AtomicConstraint::Clock { clock, rel, c } => write!(f, "{clock}{}{c}", rel.symbol()),
            AtomicConstraint::Diff { left, right, rel, c } => {
                write!(f, "{left}-{right}{}{c}", rel.symbol())
            }
        }
    }
}

/// Conjunction of atoms; the empty conjunction is `tt`.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ClockConstraint {
    atoms: Vec<AtomicConstraint>,
}

impl ClockConstraint {
    pub fn tt() -> Self {
        ClockConstraint { atoms: Vec::new() }
    }

    pub fn ff() -> Self {
        ClockConstraint { atoms: vec![AtomicConstraint::False] }
    }

    pub fn atom(a: AtomicConstraint) -> Self {
        ClockConstraint { atoms: vec![a] }
    }

    pub fn from_atoms(atoms: impl IntoIterator<Item = AtomicConstraint>) -> Self {
        ClockConstraint { atoms: atoms.into_iter().collect() }
    }

    /// `x = c`, i.e. `x <= c & x >= c`.
    pub fn eq(clock: impl Into<ClockId>, c: u64) -> Self {
        let clock = clock.into();
        ClockConstraint::from_atoms([
            AtomicConstraint::clock(clock.clone(), Rel::Le, c),
            AtomicConstraint::clock(clock, Rel::Ge, c),
        ])
    }

    pub fn eq_diff(left: impl Into<ClockId>, right: impl Into<ClockId>, c: u64) -> Self {
        let (left, right) = (left.into(), right.into());
        ClockConstraint::from_atoms([
            AtomicConstraint::diff(left.clone(), right.clone(), Rel::Le, c),
            AtomicConstraint::diff(left, right, Rel::Ge, c),
        ])
    }

    pub fn and(mut self, other: &ClockConstraint) -> Self {
        self.atoms.extend(other.atoms.iter().cloned());
        self
    }

    pub fn atoms(&self) -> &[AtomicConstraint] {
        &self.atoms
    }

    pub fn is_tt(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn bound(&self) -> u64 {
        self.atoms.iter().map(AtomicConstraint::bound).max().unwrap_or(0)
    }

    pub fn clocks(&self) -> ClockSet {
        self.atoms.iter().flat_map(|a| a.clocks()).collect()
    }

    pub fn satisfied_by<T: TimeValue>(&self, v: &Valuation<T>) -> Result<bool> {
        for a in &self.atoms {
            if !a.satisfied_by(v)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Recognizes the two-atom expansion of `x = c`.
    pub fn as_equality(&self) -> Option<String> {
        match self.atoms.as_slice() {
            [AtomicConstraint::Clock { clock: a, rel: Rel::Le, c: c1 }, AtomicConstraint::Clock { clock: b, rel: Rel::Ge, c: c2 }]
                if a == b && c1 == c2 =>
            {
                Some(format!("{a}={c1}"))
            }
            [AtomicConstraint::Diff { left: a, right: b, rel: Rel::Le, c: c1 }, AtomicConstraint::Diff { left: a2, right: b2, rel: Rel::Ge, c: c2 }]
                if a == a2 && b == b2 && c1 == c2 =>
            {
                Some(format!("{a}-{b}={c1}"))
            }
            _ => None,
        }
    }
}

impl fmt::Display for ClockConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.atoms.is_empty() {
            return f.write_str("tt");
        }
        if let Some(eq) = self.as_equality() {
            return f.write_str(&eq);
        }
        let parts: Vec<String> = self.atoms.iter().map(|a| a.to_string()).collect();
        f.write_str(&parts.join(" & "))
    }
}

impl FromStr for ClockConstraint {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse_constraint(s)
    }
}

/// Parses `atom (& atom)*` where an atom is `tt`, `ff`, `x rel n`, `x - y rel n`,
/// `x = n` or `x - y = n`.
pub fn parse_constraint(src: &str) -> Result<ClockConstraint> {
    let mut cur = Cursor::new(src)?;
    let mut out = parse_constraint_atom(&mut cur)?;
    while cur.eat(&Tok::Amp) {
        let next = parse_constraint_atom(&mut cur)?;
        out = out.and(&next);
    }
    if !cur.at_eof() {
        return Err(cur.unexpected("expected `&` or end of constraint"));
    }
    Ok(out)
}

fn parse_constraint_atom(cur: &mut Cursor) -> Result<ClockConstraint> {
    let name = cur.expect_ident()?;
    match name.as_str() {
        "tt" => return Ok(ClockConstraint::tt()),
        "ff" => return Ok(ClockConstraint::ff()),
        _ => {}
    }
    parse_clock_relation(cur, name)
}

/// Parses the tail of an atom after its first clock name.
pub(crate) fn parse_clock_relation(cur: &mut Cursor, first: String) -> Result<ClockConstraint> {
    let second = if cur.eat(&Tok::Minus) { Some(cur.expect_ident()?) } else { None };
    let rel = match cur.bump() {
        Tok::Lt => Some(Rel::Lt),
        Tok::Le => Some(Rel::Le),
        Tok::Gt => Some(Rel::Gt),
        Tok::Ge => Some(Rel::Ge),
        Tok::Eq => None,
        _ => return Err(Error::parse(cur.pos(), "expected relation `<`, `<=`, `>`, `>=` or `=`")),
    };
    let c = cur.expect_nat()?;
    Ok(match (second, rel) {
        (None, Some(rel)) => ClockConstraint::atom(AtomicConstraint::clock(first.as_str(), rel, c)),
        (None, None) => ClockConstraint::eq(first.as_str(), c),
        (Some(y), Some(rel)) => ClockConstraint::atom(AtomicConstraint::diff(first.as_str(), y.as_str(), rel, c)),
        (Some(y), None) => ClockConstraint::eq_diff(first.as_str(), y.as_str(), c),
    })
}

/// Exact, totally ordered time values. Implemented for every `Ratio<I>` over
/// a signed integer type, so both `BigRational` and `Rational64` qualify.
pub trait TimeValue:
    Clone
    + Ord
    + Hash
    + fmt::Debug
    + fmt::Display
    + FromStr
    + Signed
    + std::ops::Add<Output = Self>
    + std::ops::Sub<Output = Self>
{
    fn from_nat(n: u64) -> Self;
    fn from_ratio(num: i64, den: i64) -> Self;
    fn floor_value(&self) -> Self;
    fn ceil_value(&self) -> Self;
    fn is_integral(&self) -> bool;
    /// Integer part as `i64`, if it fits.
    fn floor_i64(&self) -> Option<i64>;
}

impl<I> TimeValue for Ratio<I>
where
    I: Integer + Signed + Clone + Hash + fmt::Debug + fmt::Display + FromStr + FromPrimitive + ToPrimitive,
{
    fn from_nat(n: u64) -> Self {
        Ratio::from_integer(I::from_u64(n).expect("constant fits the integer type"))
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        Ratio::new(
            I::from_i64(num).expect("numerator fits the integer type"),
            I::from_i64(den).expect("denominator fits the integer type"),
        )
    }

    fn floor_value(&self) -> Self {
        self.floor()
    }

    fn ceil_value(&self) -> Self {
        self.ceil()
    }

    fn is_integral(&self) -> bool {
        self.is_integer()
    }

    fn floor_i64(&self) -> Option<i64> {
        self.floor().to_integer().to_i64()
    }
}

/// Total map from a finite clock set to non-negative time values.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Valuation<T> {
    values: BTreeMap<ClockId, T>,
}

impl<T: TimeValue> Valuation<T> {
    /// All clocks at zero.
    pub fn zero(clocks: impl IntoIterator<Item = ClockId>) -> Self {
        Valuation { values: clocks.into_iter().map(|c| (c, T::zero())).collect() }
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (ClockId, T)>) -> Result<Self> {
        let mut values = BTreeMap::new();
        for (c, v) in pairs {
            if v.is_negative() {
                return Err(Error::domain(format!("clock {c} has negative value {v}")));
            }
            values.insert(c, v);
        }
        Ok(Valuation { values })
    }

    pub fn get(&self, c: &ClockId) -> Option<&T> {
        self.values.get(c)
    }

    pub fn value(&self, c: &ClockId) -> Result<&T> {
        self.values.get(c).ok_or_else(|| Error::domain(format!("clock {c} is not in the valuation domain")))
    }

    pub fn domain(&self) -> impl Iterator<Item = &ClockId> {
        self.values.keys()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&ClockId, &T)> {
        self.values.iter()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `v + delta`.
    pub fn delay(&self, delta: &T) -> Result<Self> {
        if delta.is_negative() {
            return Err(Error::domain(format!("negative delay {delta}")));
        }
        Ok(Valuation { values: self.values.iter().map(|(c, v)| (c.clone(), v.clone() + delta.clone())).collect() })
    }

    /// `v[C := 0]`; clocks outside the domain are ignored.
    pub fn reset<'a>(&self, clocks: impl IntoIterator<Item = &'a ClockId>) -> Self {
        let mut out = self.clone();
        for c in clocks {
            if let Some(v) = out.values.get_mut(c) {
                *v = T::zero();
            }
        }
        out
    }

    /// `v[x := delta]`, extending the domain if needed.
    pub fn assign(&self, clock: &ClockId, delta: T) -> Result<Self> {
        if delta.is_negative() {
            return Err(Error::domain(format!("negative value {delta} for clock {clock}")));
        }
        let mut out = self.clone();
        out.values.insert(clock.clone(), delta);
        Ok(out)
    }

    pub fn restrict(&self, clocks: &ClockSet) -> Self {
        Valuation {
            values: self
                .values
                .iter()
                .filter(|(c, _)| clocks.contains(*c))
                .map(|(c, v)| (c.clone(), v.clone()))
                .collect(),
        }
    }

    /// Adds zero-valued clocks for every missing name in `clocks`.
    pub fn extend_zero<'a>(&self, clocks: impl IntoIterator<Item = &'a ClockId>) -> Self {
        let mut out = self.clone();
        for c in clocks {
            out.values.entry(c.clone()).or_insert_with(T::zero);
        }
        out
    }
}

impl<T: fmt::Display> fmt::Display for Valuation<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.values.iter().map(|(c, v)| format!("{c}={v}")).collect();
        f.write_str(&parts.join(","))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;
    use proptest::prelude::*;

    type Q = BigRational;

    fn q(n: i64, d: i64) -> Q {
        Q::from_ratio(n, d)
    }

    fn val(pairs: &[(&str, Q)]) -> Valuation<Q> {
        Valuation::from_pairs(pairs.iter().map(|(c, v)| (ClockId::new(*c), v.clone()))).unwrap()
    }

    #[test]
    fn bound_and_clocks_of_conjunction() {
        let g = parse_constraint("x <= 1 & y - x > 3").unwrap();
        assert_eq!(g.bound(), 3);
        assert_eq!(g.clocks(), ["x".into(), "y".into()].into());
        assert_eq!(ClockConstraint::tt().bound(), 0);
        assert!(ClockConstraint::tt().clocks().is_empty());
    }

    #[test]
    fn equality_sugar_expands() {
        let g = parse_constraint("x = 1").unwrap();
        assert_eq!(g.atoms().len(), 2);
        assert_eq!(g.to_string(), "x=1");
        assert!(g.satisfied_by(&val(&[("x", q(1, 1))])).unwrap());
        assert!(!g.satisfied_by(&val(&[("x", q(3, 2))])).unwrap());
    }

    #[test]
    fn diagonal_satisfaction() {
        let v = val(&[("x", q(5, 2)), ("y", q(1, 2))]);
        assert!(parse_constraint("x - y <= 2").unwrap().satisfied_by(&v).unwrap());
        assert!(!parse_constraint("x - y < 2").unwrap().satisfied_by(&v).unwrap());
    }

    #[test]
    fn unknown_clock_is_domain_error() {
        let v = val(&[("x", q(0, 1))]);
        assert!(matches!(parse_constraint("y < 1").unwrap().satisfied_by(&v), Err(Error::Domain(_))));
    }

    #[test]
    fn ff_is_unsatisfiable_and_tt_trivial() {
        let v = val(&[("x", q(0, 1))]);
        assert!(!ClockConstraint::ff().satisfied_by(&v).unwrap());
        assert!(ClockConstraint::tt().satisfied_by(&v).unwrap());
        assert_eq!(parse_constraint("tt").unwrap(), ClockConstraint::tt());
    }

    #[test]
    fn parse_errors_carry_position() {
        match parse_constraint("x <= ").unwrap_err() {
            Error::Parse { pos, .. } => assert_eq!(pos, 5),
            e => panic!("unexpected {e:?}"),
        }
        assert!(parse_constraint("x ! 1").is_err());
    }

    #[test]
    fn negative_delay_rejected() {
        let v = val(&[("x", q(0, 1))]);
        assert!(v.delay(&q(-1, 2)).is_err());
    }

    #[test]
    fn works_with_machine_ratios() {
        let v: Valuation<num_rational::Rational64> =
            Valuation::zero(["x".into()]).delay(&num_rational::Rational64::new(1, 3)).unwrap();
        assert!(parse_constraint("x < 1").unwrap().satisfied_by(&v).unwrap());
    }

    fn arb_q() -> impl Strategy<Value = Q> {
        (0i64..40, 1i64..7).prop_map(|(n, d)| q(n, d))
    }

    fn arb_atom() -> impl Strategy<Value = AtomicConstraint> {
        let rel = prop_oneof![Just(Rel::Lt), Just(Rel::Le), Just(Rel::Gt), Just(Rel::Ge)];
        (0usize..3, 0usize..3, rel, 0u64..5, any::<bool>()).prop_map(|(i, j, rel, c, diag)| {
            let names = ["x", "y", "z"];
            if diag && i != j {
                AtomicConstraint::diff(names[i], names[j], rel, c)
            } else {
                AtomicConstraint::clock(names[i], rel, c)
            }
        })
    }

    proptest! {
        #[test]
        fn conjunction_is_pointwise_and(atoms in proptest::collection::vec(arb_atom(), 0..5),
                                        x in arb_q(), y in arb_q(), z in arb_q()) {
            let v = val(&[("x", x), ("y", y), ("z", z)]);
            let g = ClockConstraint::from_atoms(atoms.clone());
            let expected = atoms.iter().all(|a| a.satisfied_by(&v).unwrap());
            prop_assert_eq!(g.satisfied_by(&v).unwrap(), expected);
        }

        #[test]
        fn delays_compose(x in arb_q(), y in arb_q(), d1 in arb_q(), d2 in arb_q()) {
            let v = val(&[("x", x), ("y", y)]);
            let lhs = v.delay(&d1).unwrap().delay(&d2).unwrap();
            let rhs = v.delay(&(d1 + d2)).unwrap();
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn reset_zeroes_exactly_the_set(x in arb_q(), y in arb_q()) {
            let v = val(&[("x", x), ("y", y.clone())]);
            let r = v.reset([&ClockId::new("x")]);
            prop_assert_eq!(r.get(&"x".into()).unwrap().clone(), Q::from_nat(0));
            prop_assert_eq!(r.get(&"y".into()).unwrap().clone(), y);
        }

        #[test]
        fn diagonals_are_delay_invariant(x in arb_q(), y in arb_q(), d in arb_q(), a in arb_atom()) {
            prop_assume!(matches!(a, AtomicConstraint::Diff { .. }));
            let v = val(&[("x", x), ("y", y), ("z", q(0, 1))]);
            prop_assert_eq!(a.satisfied_by(&v).unwrap(), a.satisfied_by(&v.delay(&d).unwrap()).unwrap());
        }

        #[test]
        fn constraint_print_parse_roundtrip(atoms in proptest::collection::vec(arb_atom(), 1..4)) {
            let g = ClockConstraint::from_atoms(atoms);
            prop_assert_eq!(parse_constraint(&g.to_string()).unwrap(), g);
        }
    }
}
