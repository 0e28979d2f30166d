//! Formula syntax: the surface logics, the core calculus, parsing and printing.

mod core;
mod parser;

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

pub use self::core::CoreFormula;
pub use self::parser::parse_formula;

use crate::clocks::{ClockConstraint, ClockId};
use crate::error::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Logic {
    /// Relativized modal mu-calculus, the shared core syntax.
    LRel,
    /// Greatest-fixpoint logic with unary `exists`/`forall`.
    LNu,
    /// `LNu` with least fixpoints and negated propositions.
    LMuNu,
    /// Greatest-fixpoint logic with strong and weak untils.
    LC,
    /// Least-fixpoint logic with the trigger operator `|>`.
    TMu,
    Tctl,
}

impl Logic {
    pub const ALL: [Logic; 6] = [Logic::LRel, Logic::LNu, Logic::LMuNu, Logic::LC, Logic::TMu, Logic::Tctl];

    pub fn tag(self) -> &'static str {
        match self {
            Logic::LRel => "lrel",
            Logic::LNu => "lnu",
            Logic::LMuNu => "lmunu",
            Logic::LC => "lc",
            Logic::TMu => "tmu",
            Logic::Tctl => "tctl",
        }
    }

    /// Whether formulas of this logic may contain the given construct.
    pub fn allows(self, op: Op) -> bool {
        use Op::*;
        match op {
            Lit | And | Or | Constraint | Freeze => true,
            Prop => self != Logic::LNu,
            Var => self != Logic::Tctl,
            Not => matches!(self, Logic::LRel | Logic::LMuNu | Logic::TMu | Logic::Tctl),
            Diamond | Box => matches!(self, Logic::LRel | Logic::LNu | Logic::LMuNu | Logic::LC),
            Relativized => self == Logic::LRel,
            Unary => matches!(self, Logic::LRel | Logic::LNu | Logic::LMuNu),
            Until => self == Logic::LC,
            Trigger => self == Logic::TMu,
            Mu => matches!(self, Logic::LRel | Logic::LMuNu | Logic::TMu),
            Nu => matches!(self, Logic::LRel | Logic::LNu | Logic::LMuNu | Logic::LC),
            Temporal => self == Logic::Tctl,
        }
    }

    /// Negation is allowed only directly on propositions.
    pub fn negates_only_propositions(self) -> bool {
        self == Logic::LMuNu
    }
}

impl fmt::Display for Logic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Logic {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        Logic::ALL.into_iter().find(|l| l.tag() == s).ok_or_else(|| {
            Error::parse(0, format!("unknown logic `{s}`; expected one of lrel, lnu, lmunu, lc, tmu, tctl"))
        })
    }
}

/// Construct families used to restrict each logic's syntax.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Op {
    Lit,
    Prop,
    Constraint,
    Var,
    Not,
    And,
    Or,
    Diamond,
    Box,
    Relativized,
    Unary,
    Until,
    Trigger,
    Temporal,
    Freeze,
    Mu,
    Nu,
}

/// `*` (every action) or an explicit set of action names.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ActionSet {
    All,
    Named(BTreeSet<String>),
}

impl ActionSet {
    pub fn contains(&self, action: &str) -> bool {
        match self {
            ActionSet::All => true,
            ActionSet::Named(s) => s.contains(action),
        }
    }
}

impl fmt::Display for ActionSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ActionSet::All => f.write_str("*"),
            ActionSet::Named(s) => f.write_str(&s.iter().cloned().collect::<Vec<_>>().join(",")),
        }
    }
}

/// Surface syntax shared by all logics. Which variants may occur depends on the
/// logic tag of the enclosing [`SurfaceFormula`].
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Ast {
    Lit(bool),
    Prop(String),
    /// One atom, or the two-atom expansion of `x = c`.
    Constraint(ClockConstraint),
    Var(String),
    Not(Box<Ast>),
    And(Box<Ast>, Box<Ast>),
    Or(Box<Ast>, Box<Ast>),
    Diamond(ActionSet, Box<Ast>),
    Box(ActionSet, Box<Ast>),
    ExistsRel(Box<Ast>, Box<Ast>),
    ForallRel(Box<Ast>, Box<Ast>),
    Exists(Box<Ast>),
    Forall(Box<Ast>),
    StrongUntil(Box<Ast>, Box<Ast>),
    WeakUntil(Box<Ast>, Box<Ast>),
    /// Until whose left argument must hold strictly before the witness; only
    /// the point-wise oracle evaluates it.
    StrictUntil(Box<Ast>, Box<Ast>),
    Trigger(Box<Ast>, Box<Ast>),
    EU(Box<Ast>, Box<Ast>),
    AU(Box<Ast>, Box<Ast>),
    ER(Box<Ast>, Box<Ast>),
    AR(Box<Ast>, Box<Ast>),
    EF(Box<Ast>),
    AF(Box<Ast>),
    EG(Box<Ast>),
    AG(Box<Ast>),
    Freeze(ClockId, Box<Ast>),
    Mu(String, Box<Ast>),
    Nu(String, Box<Ast>),
}

impl Ast {
    pub fn op(&self) -> Op {
        match self {
            Ast::Lit(_) => Op::Lit,
            Ast::Prop(_) => Op::Prop,
            Ast::Constraint(_) => Op::Constraint,
            Ast::Var(_) => Op::Var,
            Ast::Not(_) => Op::Not,
            Ast::And(..) => Op::And,
            Ast::Or(..) => Op::Or,
            Ast::Diamond(..) => Op::Diamond,
            Ast::Box(..) => Op::Box,
            Ast::ExistsRel(..) | Ast::ForallRel(..) => Op::Relativized,
            Ast::Exists(_) | Ast::Forall(_) => Op::Unary,
            Ast::StrongUntil(..) | Ast::WeakUntil(..) | Ast::StrictUntil(..) => Op::Until,
            Ast::Trigger(..) => Op::Trigger,
            Ast::EU(..)
            | Ast::AU(..)
            | Ast::ER(..)
            | Ast::AR(..)
            | Ast::EF(_)
            | Ast::AF(_)
            | Ast::EG(_)
            | Ast::AG(_) => Op::Temporal,
            Ast::Freeze(..) => Op::Freeze,
            Ast::Mu(..) => Op::Mu,
            Ast::Nu(..) => Op::Nu,
        }
    }

    pub fn children(&self) -> Vec<&Ast> {
        match self {
            Ast::Lit(_) | Ast::Prop(_) | Ast::Constraint(_) | Ast::Var(_) => vec![],
            Ast::Not(a)
            | Ast::Diamond(_, a)
            | Ast::Box(_, a)
            | Ast::Exists(a)
            | Ast::Forall(a)
            | Ast::EF(a)
            | Ast::AF(a)
            | Ast::EG(a)
            | Ast::AG(a)
            | Ast::Freeze(_, a)
            | Ast::Mu(_, a)
            | Ast::Nu(_, a) => vec![a],
            Ast::And(a, b)
            | Ast::Or(a, b)
            | Ast::ExistsRel(a, b)
            | Ast::ForallRel(a, b)
            | Ast::StrongUntil(a, b)
            | Ast::WeakUntil(a, b)
            | Ast::StrictUntil(a, b)
            | Ast::Trigger(a, b)
            | Ast::EU(a, b)
            | Ast::AU(a, b)
            | Ast::ER(a, b)
            | Ast::AR(a, b) => vec![a, b],
        }
    }

    /// Every clock name mentioned, bound or free.
    pub fn clocks(&self) -> BTreeSet<ClockId> {
        let mut out = BTreeSet::new();
        self.collect_clocks(&mut out);
        out
    }

    fn collect_clocks(&self, out: &mut BTreeSet<ClockId>) {
        match self {
            Ast::Constraint(c) => out.extend(c.clocks()),
            Ast::Freeze(z, _) => {
                out.insert(z.clone());
            }
            _ => {}
        }
        for c in self.children() {
            c.collect_clocks(out);
        }
    }

    /// Nesting depth, counting leaves as depth 0.
    pub fn depth(&self) -> usize {
        self.children().iter().map(|c| c.depth() + 1).max().unwrap_or(0)
    }
}

fn paren2(f: &mut fmt::Formatter<'_>, a: &Ast, op: &str, b: &Ast) -> fmt::Result {
    write!(f, "({a} {op} {b})")
}

/// Fully parenthesized printing; parsing the output yields the same tree.
impl fmt::Display for Ast {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ast::Lit(true) => f.write_str("tt"),
            Ast::Lit(false) => f.write_str("ff"),
            Ast::Prop(p) | Ast::Var(p) => f.write_str(p),
            Ast::Constraint(c) if c.atoms().len() <= 1 || c.as_equality().is_some() => write!(f, "{c}"),
            Ast::Constraint(c) => write!(f, "({c})"),
            Ast::Not(a) => write!(f, "!{a}"),
            Ast::And(a, b) => paren2(f, a, "&", b),
            Ast::Or(a, b) => paren2(f, a, "|", b),
            Ast::Diamond(k, a) => write!(f, "<{k}>{a}"),
            Ast::Box(k, a) => write!(f, "[{k}]{a}"),
            Ast::ExistsRel(a, b) => write!(f, "E{{{a}}}{b}"),
            Ast::ForallRel(a, b) => write!(f, "A{{{a}}}{b}"),
            Ast::Exists(a) => write!(f, "exists {a}"),
            Ast::Forall(a) => write!(f, "forall {a}"),
            Ast::StrongUntil(a, b) => paren2(f, a, "~s", b),
            Ast::WeakUntil(a, b) => paren2(f, a, "~w", b),
            Ast::StrictUntil(a, b) => paren2(f, a, "~s'", b),
            Ast::Trigger(a, b) => paren2(f, a, "|>", b),
            Ast::EU(a, b) => write!(f, "EU({a}, {b})"),
            Ast::AU(a, b) => write!(f, "AU({a}, {b})"),
            Ast::ER(a, b) => write!(f, "ER({a}, {b})"),
            Ast::AR(a, b) => write!(f, "AR({a}, {b})"),
            Ast::EF(a) => write!(f, "EF {a}"),
            Ast::AF(a) => write!(f, "AF {a}"),
            Ast::EG(a) => write!(f, "EG {a}"),
            Ast::AG(a) => write!(f, "AG {a}"),
            Ast::Freeze(z, a) => write!(f, "({z}. {a})"),
            Ast::Mu(y, a) => write!(f, "(mu {y}. {a})"),
            Ast::Nu(y, a) => write!(f, "(nu {y}. {a})"),
        }
    }
}

/// A parsed formula tagged with its logic.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SurfaceFormula {
    pub logic: Logic,
    pub ast: Ast,
}

impl SurfaceFormula {
    pub fn parse(text: &str, logic: Logic) -> crate::Result<Self> {
        parse_formula(text, logic)
    }
}

impl fmt::Display for SurfaceFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.ast)
    }
}
