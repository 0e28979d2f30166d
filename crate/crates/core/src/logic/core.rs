//! The core calculus every surface logic is translated into.

use std::collections::BTreeSet;
use std::fmt;

use super::{ActionSet, Ast, Logic, SurfaceFormula};
use crate::clocks::{AtomicConstraint, ClockConstraint, ClockId, ClockSet};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CoreFormula {
    Lit(bool),
    Prop(String),
    Atom(AtomicConstraint),
    Var(String),
    Not(Box<CoreFormula>),
    Or(Box<CoreFormula>, Box<CoreFormula>),
    Diamond(ActionSet, Box<CoreFormula>),
    /// `E{g}f`: some delay reaches `f` while `g` or `f` holds at all earlier points.
    ExistsRel(Box<CoreFormula>, Box<CoreFormula>),
    Freeze(ClockId, Box<CoreFormula>),
    Mu(String, Box<CoreFormula>),
}

use CoreFormula as F;

impl CoreFormula {
    pub fn tt() -> Self {
        F::Lit(true)
    }

    pub fn ff() -> Self {
        F::Lit(false)
    }

    pub fn prop(p: impl Into<String>) -> Self {
        F::Prop(p.into())
    }

    pub fn var(y: impl Into<String>) -> Self {
        F::Var(y.into())
    }

    pub fn atom(a: AtomicConstraint) -> Self {
        match a {
            AtomicConstraint::False => F::ff(),
            a => F::Atom(a),
        }
    }

    /// Conjunction of the constraint's atoms; `tt` when empty.
    pub fn constraint(c: &ClockConstraint) -> Self {
        let mut atoms = c.atoms().iter().cloned().map(F::atom);
        let Some(first) = atoms.next() else { return F::tt() };
        atoms.fold(first, F::and)
    }

    /// Negation; negated literals fold to the opposite literal.
    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Self) -> Self {
        match f {
            F::Lit(b) => F::Lit(!b),
            f => F::Not(Box::new(f)),
        }
    }

    pub fn or(a: Self, b: Self) -> Self {
        F::Or(Box::new(a), Box::new(b))
    }

    /// `a & b` as `!(!a | !b)`.
    pub fn and(a: Self, b: Self) -> Self {
        F::not(F::or(F::not(a), F::not(b)))
    }

    /// `a => b` as `!a | b`.
    pub fn implies(a: Self, b: Self) -> Self {
        F::or(F::not(a), b)
    }

    pub fn diamond(k: ActionSet, f: Self) -> Self {
        F::Diamond(k, Box::new(f))
    }

    /// `[K]f` as `!<K>!f`.
    pub fn boxed(k: ActionSet, f: Self) -> Self {
        F::not(F::diamond(k, F::not(f)))
    }

    pub fn exists_rel(g: Self, f: Self) -> Self {
        F::ExistsRel(Box::new(g), Box::new(f))
    }

    /// `A{g}f` as `!E{!g}!f`.
    pub fn forall_rel(g: Self, f: Self) -> Self {
        F::not(F::exists_rel(F::not(g), F::not(f)))
    }

    /// Unrelativized `exists f`, i.e. `E{tt}f`.
    pub fn exists(f: Self) -> Self {
        F::exists_rel(F::tt(), f)
    }

    /// Unrelativized `forall f`, i.e. `A{ff}f`.
    pub fn forall(f: Self) -> Self {
        F::forall_rel(F::ff(), f)
    }

    pub fn freeze(z: impl Into<ClockId>, f: Self) -> Self {
        F::Freeze(z.into(), Box::new(f))
    }

    pub fn mu(y: impl Into<String>, f: Self) -> Self {
        F::Mu(y.into(), Box::new(f))
    }

    /// `nu Y. f` as `!mu Y. !f[Y := !Y]`.
    pub fn nu(y: impl Into<String>, f: Self) -> Self {
        let y = y.into();
        let body = f.substitute(&y, &F::not(F::var(y.clone())));
        F::not(F::mu(y, F::not(body)))
    }

    pub fn children(&self) -> Vec<&CoreFormula> {
        match self {
            F::Lit(_) | F::Prop(_) | F::Atom(_) | F::Var(_) => vec![],
            F::Not(a) | F::Diamond(_, a) | F::Freeze(_, a) | F::Mu(_, a) => vec![a],
            F::Or(a, b) | F::ExistsRel(a, b) => vec![a, b],
        }
    }

    /// Largest clock constant.
    pub fn bound(&self) -> u64 {
        let own = match self {
            F::Atom(a) => a.bound(),
            _ => 0,
        };
        self.children().into_iter().map(CoreFormula::bound).fold(own, u64::max)
    }

    /// Every clock mentioned, including freeze-bound ones.
    pub fn clocks(&self) -> ClockSet {
        let mut out = ClockSet::new();
        self.walk(&mut |f| match f {
            F::Atom(a) => out.extend(a.clocks()),
            F::Freeze(z, _) => {
                out.insert(z.clone());
            }
            _ => {}
        });
        out
    }

    /// Clocks with an occurrence not under a freeze binder for that clock.
    pub fn free_clocks(&self) -> ClockSet {
        match self {
            F::Atom(a) => a.clocks(),
            F::Freeze(z, a) => {
                let mut s = a.free_clocks();
                s.remove(z);
                s
            }
            _ => self.children().into_iter().flat_map(CoreFormula::free_clocks).collect(),
        }
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        match self {
            F::Var(y) => [y.clone()].into(),
            F::Mu(y, a) => {
                let mut s = a.free_vars();
                s.remove(y);
                s
            }
            _ => self.children().into_iter().flat_map(CoreFormula::free_vars).collect(),
        }
    }

    pub fn is_fixpoint_free(&self) -> bool {
        let mut ok = true;
        self.walk(&mut |f| {
            if matches!(f, F::Mu(..) | F::Var(_)) {
                ok = false;
            }
        });
        ok
    }

    pub fn size(&self) -> usize {
        1 + self.children().into_iter().map(CoreFormula::size).sum::<usize>()
    }

    fn walk<'a>(&'a self, visit: &mut impl FnMut(&'a CoreFormula)) {
        visit(self);
        for c in self.children() {
            c.walk(visit);
        }
    }

    /// Replaces free occurrences of `y`. Bound names are assumed distinct from
    /// the free names of `by`, which parse-time renaming guarantees.
    pub fn substitute(&self, y: &str, by: &CoreFormula) -> CoreFormula {
        match self {
            F::Var(v) if v == y => by.clone(),
            F::Lit(_) | F::Prop(_) | F::Atom(_) | F::Var(_) => self.clone(),
            F::Not(a) => F::Not(Box::new(a.substitute(y, by))),
            F::Or(a, b) => F::or(a.substitute(y, by), b.substitute(y, by)),
            F::Diamond(k, a) => F::diamond(k.clone(), a.substitute(y, by)),
            F::ExistsRel(a, b) => F::exists_rel(a.substitute(y, by), b.substitute(y, by)),
            F::Freeze(z, a) => F::freeze(z.clone(), a.substitute(y, by)),
            F::Mu(v, _) if v == y => self.clone(),
            F::Mu(v, a) => F::mu(v.clone(), a.substitute(y, by)),
        }
    }

    /// Checks that every bound variable occurrence sits under an even number
    /// of negations relative to its binder.
    pub fn validate_monotone(&self) -> Result<()> {
        fn go(f: &CoreFormula, bound: &mut Vec<(String, usize)>, negs: usize) -> Result<()> {
            match f {
                F::Var(y) => {
                    if let Some((_, at)) = bound.iter().rev().find(|(n, _)| n == y) {
                        if (negs - at) % 2 == 1 {
                            return Err(Error::semantic(format!(
                                "variable {y} occurs under an odd number of negations"
                            )));
                        }
                    }
                    Ok(())
                }
                F::Not(a) => go(a, bound, negs + 1),
                F::Mu(y, a) => {
                    bound.push((y.clone(), negs));
                    let r = go(a, bound, negs);
                    bound.pop();
                    r
                }
                _ => f.children().into_iter().try_for_each(|c| go(c, bound, negs)),
            }
        }
        go(self, &mut Vec::new(), 0)
    }

    /// The same formula as `lrel` surface syntax.
    pub fn to_ast(&self) -> Ast {
        match self {
            F::Lit(b) => Ast::Lit(*b),
            F::Prop(p) => Ast::Prop(p.clone()),
            F::Atom(a) => Ast::Constraint(ClockConstraint::atom(a.clone())),
            F::Var(y) => Ast::Var(y.clone()),
            F::Not(a) => Ast::Not(Box::new(a.to_ast())),
            F::Or(a, b) => Ast::Or(Box::new(a.to_ast()), Box::new(b.to_ast())),
            F::Diamond(k, a) => Ast::Diamond(k.clone(), Box::new(a.to_ast())),
            F::ExistsRel(a, b) => Ast::ExistsRel(Box::new(a.to_ast()), Box::new(b.to_ast())),
            F::Freeze(z, a) => Ast::Freeze(z.clone(), Box::new(a.to_ast())),
            F::Mu(y, a) => Ast::Mu(y.clone(), Box::new(a.to_ast())),
        }
    }

    pub fn to_surface(&self) -> SurfaceFormula {
        SurfaceFormula { logic: Logic::LRel, ast: self.to_ast() }
    }
}

/// Printed in `lrel` syntax, which parses back to the same tree.
impl fmt::Display for CoreFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_ast())
    }
}
