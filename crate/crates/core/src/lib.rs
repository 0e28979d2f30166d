//! Model checking timed modal mu-calculus formulas over timed automata.
//!
//! Formulas in several surface logics are translated into one core calculus
//! and evaluated on a finite region automaton. An independent point-wise
//! evaluator over concrete rational states serves as a cross-check.
//!
//! Clock values are generic over [`clocks::TimeValue`], which every
//! `num_rational::Ratio` over a signed integer implements. The aliases below
//! fix the arbitrary-precision instantiation used throughout.

pub mod automaton;
pub mod clocks;
pub mod error;
pub mod eval;
pub mod lexer;
pub mod logic;
pub mod oracle;
pub mod region_automaton;
pub mod regions;
pub mod translate;

pub use error::{Error, Result};

/// Arbitrary-precision rational used for all clock values.
pub type Rational = num_rational::BigRational;
pub type Valuation = clocks::Valuation<Rational>;
pub type RegionSpace = regions::RegionSpace<Rational>;
pub type ConcreteState = automaton::ConcreteState<Rational>;
pub type RegionAutomaton = region_automaton::RegionAutomaton<Rational>;
pub type Verdict = eval::Verdict<Rational>;
