//! Translations from every surface logic into the core calculus.

use crate::clocks::{AtomicConstraint, ClockId, ClockSet, Rel};
use crate::error::{Error, Result};
use crate::logic::{ActionSet, Ast, CoreFormula as F, Logic, SurfaceFormula};

/// How the pool picks names for generated freeze clocks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ClockStrategy {
    /// Lowest `_zK` that is neither reserved nor free in the binder's scope.
    /// Generated subformulas are closed, so this never captures an occurrence,
    /// and it keeps the clock count (and hence the region count) small.
    #[default]
    CaptureAvoiding,
    /// A new name for every binder.
    Unique,
}

/// Source of generated freeze clocks `_z0`, `_z1`, ...
#[derive(Debug, Clone)]
pub struct FreshClockPool {
    reserved: ClockSet,
    strategy: ClockStrategy,
    next: usize,
}

impl FreshClockPool {
    pub fn new(reserved: ClockSet, strategy: ClockStrategy) -> Self {
        FreshClockPool { reserved, strategy, next: 0 }
    }

    /// A clock outside the reserved set and outside `avoid`.
    pub fn fresh(&mut self, avoid: &ClockSet) -> ClockId {
        let start = match self.strategy {
            ClockStrategy::CaptureAvoiding => 0,
            ClockStrategy::Unique => self.next,
        };
        let (k, z) = (start..)
            .map(|k| (k, ClockId::new(format!("_z{k}"))))
            .find(|(_, z)| !self.reserved.contains(z) && !avoid.contains(z))
            .expect("unbounded search");
        self.next = self.next.max(k + 1);
        z
    }
}

/// Which TCTL embedding to apply.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Embedding {
    /// Correct on every automaton; guards against Zeno behaviour with `TDIV`.
    #[default]
    General,
    /// Correct on time-divergent, non-Zeno automata only.
    NonZeno,
}

#[derive(Debug, Clone)]
pub struct Translator {
    pool: FreshClockPool,
    embedding: Embedding,
    vars: usize,
}

fn ge(z: &ClockId, c: u64) -> F {
    F::atom(AtomicConstraint::Clock { clock: z.clone(), rel: Rel::Ge, c })
}

fn lt(z: &ClockId, c: u64) -> F {
    F::atom(AtomicConstraint::Clock { clock: z.clone(), rel: Rel::Lt, c })
}

impl Translator {
    /// `reserved` must contain every user clock the output may mention.
    pub fn new(reserved: ClockSet, strategy: ClockStrategy, embedding: Embedding) -> Self {
        Translator { pool: FreshClockPool::new(reserved, strategy), embedding, vars: 0 }
    }

    pub fn for_formula(sf: &SurfaceFormula, extra_reserved: &ClockSet) -> Self {
        let mut reserved = sf.ast.clocks();
        reserved.extend(extra_reserved.iter().cloned());
        Translator::new(reserved, ClockStrategy::default(), Embedding::default())
    }

    pub fn with_embedding(mut self, embedding: Embedding) -> Self {
        self.embedding = embedding;
        self
    }

    pub fn with_strategy(mut self, strategy: ClockStrategy) -> Self {
        self.pool.strategy = strategy;
        self
    }

    fn fresh_var(&mut self, base: &str) -> String {
        self.vars += 1;
        format!("{base}_{}", self.vars)
    }

    /// Zero-time stop: no time can elapse from here, `z.(forall z<1)`.
    pub fn ts(&mut self, avoid: &ClockSet) -> F {
        let z = self.pool.fresh(avoid);
        F::freeze(z.clone(), F::forall(lt(&z, 1)))
    }

    /// `E{g1}(g2 | (TS & forall g1))`: every execution keeps `g1` until `g2`.
    pub fn au(&mut self, g1: F, g2: F) -> F {
        let mut avoid = g1.free_clocks();
        avoid.extend(g2.free_clocks());
        let ts = self.ts(&avoid);
        F::exists_rel(g1.clone(), F::or(g2, F::and(ts, F::forall(g1))))
    }

    /// Time divergence: `nu X. z.(mu Y. exists((z>=1 & X) | <*>Y))`.
    pub fn tdiv(&mut self) -> F {
        let z = self.pool.fresh(&ClockSet::new());
        let (x, y) = (self.fresh_var("X"), self.fresh_var("Y"));
        let step = F::or(F::and(ge(&z, 1), F::var(x.clone())), F::diamond(ActionSet::All, F::var(y.clone())));
        F::nu(x, F::freeze(z, F::mu(y, F::exists(step))))
    }

    /// `mu X. au(TDIV => (g1 & [*]X), g2)`: the `AU` embedding without the
    /// unit-delay split, which is unsound on Zeno automata.
    pub fn embed_n_au(&mut self, g1: F, g2: F) -> F {
        let x = self.fresh_var("X");
        let tdiv = self.tdiv();
        let keep = F::implies(tdiv, F::and(g1, F::boxed(ActionSet::All, F::var(x.clone()))));
        let body = self.au(keep, g2);
        F::mu(x, body)
    }

    pub fn translate(&mut self, sf: &SurfaceFormula) -> Result<F> {
        let out = self.lower(&sf.ast)?;
        out.validate_monotone()?;
        Ok(out)
    }

    pub fn lower(&mut self, ast: &Ast) -> Result<F> {
        Ok(match ast {
            Ast::Lit(b) => F::Lit(*b),
            Ast::Prop(p) => F::prop(p.clone()),
            Ast::Constraint(c) => F::constraint(c),
            Ast::Var(y) => F::var(y.clone()),
            Ast::Not(a) => F::not(self.lower(a)?),
            Ast::And(a, b) => F::and(self.lower(a)?, self.lower(b)?),
            Ast::Or(a, b) => F::or(self.lower(a)?, self.lower(b)?),
            Ast::Diamond(k, a) => F::diamond(k.clone(), self.lower(a)?),
            Ast::Box(k, a) => F::boxed(k.clone(), self.lower(a)?),
            Ast::ExistsRel(a, b) => F::exists_rel(self.lower(a)?, self.lower(b)?),
            Ast::ForallRel(a, b) => F::forall_rel(self.lower(a)?, self.lower(b)?),
            Ast::Exists(a) => F::exists(self.lower(a)?),
            Ast::Forall(a) => F::forall(self.lower(a)?),
            Ast::StrongUntil(a, b) => F::exists_rel(self.lower(a)?, self.lower(b)?),
            Ast::WeakUntil(a, b) => {
                let (a, b) = (self.lower(a)?, self.lower(b)?);
                F::or(F::exists_rel(a.clone(), b), F::forall(a))
            }
            Ast::StrictUntil(..) => {
                return Err(Error::semantic("the strict until `~s'` is only supported by the oracle"))
            }
            Ast::Trigger(a, b) => {
                let (a, b) = (self.lower(a)?, self.lower(b)?);
                let either = F::or(a, b.clone());
                F::exists_rel(either.clone(), F::and(either, F::diamond(ActionSet::All, b)))
            }
            Ast::Freeze(z, a) => F::freeze(z.clone(), self.lower(a)?),
            Ast::Mu(y, a) => F::mu(y.clone(), self.lower(a)?),
            Ast::Nu(y, a) => F::nu(y.clone(), self.lower(a)?),
            Ast::EU(a, b) => {
                let (a, b) = (self.lower(a)?, self.lower(b)?);
                self.eu(a, b)
            }
            Ast::AU(a, b) => {
                let (a, b) = (self.lower(a)?, self.lower(b)?);
                self.au_tctl(a, b)
            }
            Ast::ER(a, b) => F::not(self.lower(&Ast::AU(neg(a), neg(b)))?),
            Ast::AR(a, b) => F::not(self.lower(&Ast::EU(neg(a), neg(b)))?),
            Ast::EF(a) => self.lower(&Ast::EU(Box::new(Ast::Lit(true)), a.clone()))?,
            Ast::AF(a) => self.lower(&Ast::AU(Box::new(Ast::Lit(true)), a.clone()))?,
            Ast::AG(a) => F::not(self.lower(&Ast::EF(neg(a)))?),
            Ast::EG(a) => F::not(self.lower(&Ast::AF(neg(a)))?),
        })
    }

    fn eu(&mut self, a: F, b: F) -> F {
        let x = self.fresh_var("X");
        let step = F::and(a.clone(), F::diamond(ActionSet::All, F::var(x.clone())));
        let goal = match self.embedding {
            Embedding::NonZeno => b,
            Embedding::General => F::and(b, self.tdiv()),
        };
        F::mu(x, F::exists_rel(a, F::or(goal, step)))
    }

    fn au_tctl(&mut self, a: F, b: F) -> F {
        let x = self.fresh_var("X");
        match self.embedding {
            Embedding::NonZeno => {
                let keep = F::and(a, F::boxed(ActionSet::All, F::var(x.clone())));
                let body = self.au(keep, b);
                F::mu(x, body)
            }
            Embedding::General => {
                let mut avoid = a.free_clocks();
                avoid.extend(b.free_clocks());
                let z = self.pool.fresh(&avoid);
                let y = self.fresh_var("Y");
                let tdiv = self.tdiv();
                let after_unit = F::implies(ge(&z, 1), F::boxed(ActionSet::All, F::var(x.clone())));
                let before_unit = F::implies(lt(&z, 1), F::boxed(ActionSet::All, F::var(y.clone())));
                let keep = F::implies(tdiv, F::and(a, F::and(after_unit, before_unit)));
                let body = self.au(keep, b);
                F::mu(x, F::freeze(z, F::nu(y, body)))
            }
        }
    }
}

fn neg(a: &Ast) -> Box<Ast> {
    Box::new(Ast::Not(Box::new(a.clone())))
}

/// Translates any surface formula with the default clock strategy and, for
/// TCTL, the general embedding. `reserved` lists clocks the automaton uses.
pub fn to_core(sf: &SurfaceFormula, reserved: &ClockSet) -> Result<F> {
    Translator::for_formula(sf, reserved).translate(sf)
}

/// TCTL embedding for time-divergent, non-Zeno automata.
pub fn embed_tn(sf: &SurfaceFormula, reserved: &ClockSet) -> Result<F> {
    expect_logic(sf, Logic::Tctl)?;
    Translator::for_formula(sf, reserved).with_embedding(Embedding::NonZeno).translate(sf)
}

/// TCTL embedding valid on every automaton.
pub fn embed(sf: &SurfaceFormula, reserved: &ClockSet) -> Result<F> {
    expect_logic(sf, Logic::Tctl)?;
    to_core(sf, reserved)
}

fn expect_logic(sf: &SurfaceFormula, logic: Logic) -> Result<()> {
    if sf.logic == logic {
        Ok(())
    } else {
        Err(Error::semantic(format!("expected a {logic} formula, got {}", sf.logic)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::parse_formula;

    fn core(text: &str, logic: Logic) -> String {
        to_core(&parse_formula(text, logic).unwrap(), &ClockSet::new()).unwrap().to_string()
    }

    #[test]
    fn unary_quantifiers() {
        assert_eq!(core("exists x=1", Logic::LNu), "E{tt}!(!x<=1 | !x>=1)");
        assert_eq!(core("forall x<1", Logic::LNu), "!E{tt}!x<1");
    }

    #[test]
    fn untils_and_trigger() {
        assert_eq!(core("p ~s q", Logic::LC), "E{p}q");
        assert_eq!(core("p ~w q", Logic::LC), "(E{p}q | !E{tt}!p)");
        assert_eq!(core("p |> q", Logic::TMu), "E{(p | q)}!(!(p | q) | !<*>q)");
    }

    #[test]
    fn strict_until_is_oracle_only() {
        let sf = parse_formula("p ~s' q", Logic::LC).unwrap();
        assert!(matches!(to_core(&sf, &ClockSet::new()), Err(Error::Semantic(_))));
    }

    #[test]
    fn non_monotone_input_is_rejected() {
        let sf = parse_formula("mu X. !X", Logic::LRel).unwrap();
        assert!(matches!(to_core(&sf, &ClockSet::new()), Err(Error::Semantic(_))));
        assert!(to_core(&parse_formula("mu X. !!X", Logic::LRel).unwrap(), &ClockSet::new()).is_ok());
    }

    #[test]
    fn tdiv_shape() {
        let mut t = Translator::new(ClockSet::new(), ClockStrategy::default(), Embedding::General);
        let f = t.tdiv();
        assert_eq!(f.bound(), 1);
        assert_eq!(f.clocks(), [ClockId::new("_z0")].into());
        assert!(f.free_vars().is_empty());
        assert!(f.validate_monotone().is_ok());
    }

    #[test]
    fn fresh_clocks_skip_reserved_and_avoided_names() {
        let mut pool = FreshClockPool::new([ClockId::new("_z0")].into(), ClockStrategy::CaptureAvoiding);
        assert_eq!(pool.fresh(&ClockSet::new()), ClockId::new("_z1"));
        assert_eq!(pool.fresh(&[ClockId::new("_z1")].into()), ClockId::new("_z2"));
        assert_eq!(pool.fresh(&ClockSet::new()), ClockId::new("_z1"));
        let mut unique = FreshClockPool::new(ClockSet::new(), ClockStrategy::Unique);
        assert_eq!(unique.fresh(&ClockSet::new()), ClockId::new("_z0"));
        assert_eq!(unique.fresh(&ClockSet::new()), ClockId::new("_z1"));
    }

    #[test]
    fn au_embedding_binds_its_own_clock() {
        let sf = parse_formula("AF(x>=1)", Logic::Tctl).unwrap();
        let f = embed(&sf, &[ClockId::new("x")].into()).unwrap();
        assert!(f.free_vars().is_empty());
        assert_eq!(f.free_clocks(), [ClockId::new("x")].into());
        assert_eq!(f.clocks(), ["x", "_z0", "_z1"].into_iter().map(ClockId::new).collect());
        let unique = Translator::for_formula(&sf, &ClockSet::new()).with_strategy(ClockStrategy::Unique).translate(&sf);
        assert_eq!(unique.unwrap().clocks().len(), 4);
    }

    #[test]
    fn derived_tctl_operators() {
        let reserved = ClockSet::new();
        let tr = |s: &str| embed_tn(&parse_formula(s, Logic::Tctl).unwrap(), &reserved).unwrap();
        assert_eq!(tr("AG p"), F::not(tr("EF !p")));
        assert_eq!(tr("EF p"), tr("EU(tt, p)"));
        assert_eq!(tr("AR(p, q)"), F::not(tr("EU(!p, !q)")));
        assert!(embed(&parse_formula("p", Logic::LRel).unwrap(), &reserved).is_err());
    }
}
