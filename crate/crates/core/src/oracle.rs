//! Point-wise reference semantics over concrete rational states.
//!
//! Shares only the clock layer with the symbolic evaluator. Delay
//! quantifiers are decided by sampling: truth along a delay can change only
//! when some clock crosses an integer no larger than the overall constant
//! bound, so checking those crossing points, one point strictly between each
//! consecutive pair, and one point past the last is exhaustive.

use std::collections::BTreeMap;

use crate::automaton::{ConcreteState, FiniteLts, TimedAutomaton};
use crate::clocks::{AtomicConstraint, ClockId, TimeValue};
use crate::error::{Error, Result};
use crate::logic::{ActionSet, Ast, CoreFormula, SurfaceFormula};
use crate::translate::Translator;

/// Fixpoint-free formulas, plus the strict until that only the oracle decides.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OracleFormula {
    Lit(bool),
    Prop(String),
    Atom(AtomicConstraint),
    Not(Box<OracleFormula>),
    Or(Box<OracleFormula>, Box<OracleFormula>),
    Diamond(ActionSet, Box<OracleFormula>),
    ExistsRel(Box<OracleFormula>, Box<OracleFormula>),
    /// Some delay reaches the right side and the left side holds at every
    /// strictly earlier point.
    StrictUntil(Box<OracleFormula>, Box<OracleFormula>),
    Freeze(ClockId, Box<OracleFormula>),
}

use OracleFormula as O;

impl OracleFormula {
    fn not(a: O) -> O {
        O::Not(Box::new(a))
    }

    fn or(a: O, b: O) -> O {
        O::Or(Box::new(a), Box::new(b))
    }

    fn bound(&self) -> u64 {
        match self {
            O::Lit(_) | O::Prop(_) => 0,
            O::Atom(a) => a.bound(),
            O::Not(a) | O::Diamond(_, a) | O::Freeze(_, a) => a.bound(),
            O::Or(a, b) | O::ExistsRel(a, b) | O::StrictUntil(a, b) => a.bound().max(b.bound()),
        }
    }

    /// Converts a surface formula, keeping `~s'` and lowering everything else
    /// through the ordinary translation.
    pub fn from_surface(sf: &SurfaceFormula) -> Result<O> {
        let mut tr = Translator::for_formula(sf, &Default::default());
        from_ast(&sf.ast, &mut tr)
    }
}

fn contains_strict(ast: &Ast) -> bool {
    matches!(ast, Ast::StrictUntil(..)) || ast.children().into_iter().any(contains_strict)
}

fn from_ast(ast: &Ast, tr: &mut Translator) -> Result<O> {
    if !contains_strict(ast) {
        return O::try_from(&tr.lower(ast)?);
    }
    let mut go = |a: &Ast| from_ast(a, tr);
    Ok(match ast {
        Ast::StrictUntil(a, b) => O::StrictUntil(Box::new(go(a)?), Box::new(go(b)?)),
        Ast::Not(a) => O::not(go(a)?),
        Ast::Or(a, b) => O::or(go(a)?, go(b)?),
        Ast::And(a, b) => {
            let (a, b) = (go(a)?, go(b)?);
            O::not(O::or(O::not(a), O::not(b)))
        }
        Ast::Diamond(k, a) => O::Diamond(k.clone(), Box::new(go(a)?)),
        Ast::Box(k, a) => O::not(O::Diamond(k.clone(), Box::new(O::not(go(a)?)))),
        Ast::Freeze(z, a) => O::Freeze(z.clone(), Box::new(go(a)?)),
        _ => return Err(Error::semantic("the oracle cannot evaluate this use of `~s'`")),
    })
}

impl TryFrom<&CoreFormula> for OracleFormula {
    type Error = Error;

    fn try_from(f: &CoreFormula) -> Result<O> {
        Ok(match f {
            CoreFormula::Lit(b) => O::Lit(*b),
            CoreFormula::Prop(p) => O::Prop(p.clone()),
            CoreFormula::Atom(a) => O::Atom(a.clone()),
            CoreFormula::Not(a) => O::not(O::try_from(a.as_ref())?),
            CoreFormula::Or(a, b) => O::or(O::try_from(a.as_ref())?, O::try_from(b.as_ref())?),
            CoreFormula::Diamond(k, a) => O::Diamond(k.clone(), Box::new(O::try_from(a.as_ref())?)),
            CoreFormula::ExistsRel(a, b) => {
                O::ExistsRel(Box::new(O::try_from(a.as_ref())?), Box::new(O::try_from(b.as_ref())?))
            }
            CoreFormula::Freeze(z, a) => O::Freeze(z.clone(), Box::new(O::try_from(a.as_ref())?)),
            CoreFormula::Var(_) | CoreFormula::Mu(..) => {
                return Err(Error::semantic("the oracle only handles fixpoint-free formulas"))
            }
        })
    }
}

struct PointChecker<'a> {
    ta: &'a TimedAutomaton,
    bound: u64,
}

impl PointChecker<'_> {
    fn check<T: TimeValue>(&self, f: &O, s: &ConcreteState<T>) -> Result<bool> {
        Ok(match f {
            O::Lit(b) => *b,
            O::Prop(p) => self.ta.location(s.location()).labels.contains(p),
            O::Atom(a) => a.satisfied_by(s.valuation())?,
            O::Not(a) => !self.check(a, s)?,
            O::Or(a, b) => self.check(a, s)? || self.check(b, s)?,
            O::Diamond(k, a) => {
                for (_, t) in self.ta.step(s, |act| k.contains(act))? {
                    if self.check(a, &t)? {
                        return Ok(true);
                    }
                }
                false
            }
            O::ExistsRel(a, b) => self.until(a, b, s, false)?,
            O::StrictUntil(a, b) => self.until(a, b, s, true)?,
            O::Freeze(z, a) => self.check(a, &s.reset_freeze(self.ta, z)?)?,
        })
    }

    /// Sample delays in increasing order: each crossing point, then the
    /// midpoint of the open piece after it, ending one unit past the last.
    fn samples<T: TimeValue>(&self, s: &ConcreteState<T>) -> Vec<(T, bool)> {
        let mut points: Vec<T> = vec![T::zero()];
        let limit = T::from_nat(self.bound + 1);
        for (_, v) in s.valuation().iter() {
            let mut k = v.ceil_value();
            while k <= limit {
                points.push(k.clone() - v.clone());
                k = k + T::one();
            }
        }
        points.sort();
        points.dedup();
        let mut out = Vec::with_capacity(points.len() * 2);
        for (i, p) in points.iter().enumerate() {
            out.push((p.clone(), true));
            let next = match points.get(i + 1) {
                Some(q) => (p.clone() + q.clone()) / T::from_nat(2),
                None => p.clone() + T::one(),
            };
            out.push((next, false));
        }
        out
    }

    fn until<T: TimeValue>(&self, a: &O, b: &O, s: &ConcreteState<T>, strict: bool) -> Result<bool> {
        for (delta, is_point) in self.samples(s) {
            let Some(t) = self.ta.delay(s, &delta)? else {
                return Ok(false);
            };
            let left = self.check(a, &t)?;
            if self.check(b, &t)? && (!strict || is_point || left) {
                return Ok(true);
            }
            if !left && (strict || !self.check(b, &t)?) {
                return Ok(false);
            }
        }
        Ok(false)
    }
}

/// Decides `f` at the concrete state `s`. The valuation must assign every
/// clock the formula reads.
pub fn point_check<T: TimeValue>(ta: &TimedAutomaton, f: &O, s: &ConcreteState<T>) -> Result<bool> {
    PointChecker { ta, bound: f.bound().max(ta.bound()) }.check(f, s)
}

/// Convenience wrapper for fixpoint-free core formulas.
pub fn point_check_core<T: TimeValue>(ta: &TimedAutomaton, f: &CoreFormula, s: &ConcreteState<T>) -> Result<bool> {
    point_check(ta, &O::try_from(f)?, s)
}

/// Untimed mu-calculus semantics on a finite LTS. Timed constructs are rejected.
pub fn untimed_eval(m: &FiniteLts, f: &CoreFormula, env: &BTreeMap<String, Vec<bool>>) -> Result<Vec<bool>> {
    let n = m.states.len();
    Ok(match f {
        CoreFormula::Lit(b) => vec![*b; n],
        CoreFormula::Prop(p) => (0..n).map(|s| m.labels.get(s).is_some_and(|l| l.contains(p))).collect(),
        CoreFormula::Var(y) => env.get(y).cloned().ok_or_else(|| Error::semantic(format!("unbound variable {y}")))?,
        CoreFormula::Not(a) => untimed_eval(m, a, env)?.into_iter().map(|b| !b).collect(),
        CoreFormula::Or(a, b) => {
            let (a, b) = (untimed_eval(m, a, env)?, untimed_eval(m, b, env)?);
            a.into_iter().zip(b).map(|(x, y)| x || y).collect()
        }
        CoreFormula::Diamond(k, a) => {
            let inner = untimed_eval(m, a, env)?;
            let mut out = vec![false; n];
            for (s, act, t) in &m.transitions {
                if k.contains(act) && inner[*t] {
                    out[*s] = true;
                }
            }
            out
        }
        CoreFormula::Mu(y, a) => {
            let mut x = vec![false; n];
            loop {
                let mut inner_env = env.clone();
                inner_env.insert(y.clone(), x.clone());
                let next = untimed_eval(m, a, &inner_env)?;
                if next == x {
                    break x;
                }
                x = next;
            }
        }
        CoreFormula::Atom(_) | CoreFormula::ExistsRel(..) | CoreFormula::Freeze(..) => {
            return Err(Error::semantic("untimed evaluation does not support timed constructs"))
        }
    })
}
