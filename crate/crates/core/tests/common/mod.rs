//! Seeded generators shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use timed_mu::automaton::{parse_ta, FiniteLts, TimedAutomaton};
use timed_mu::clocks::{AtomicConstraint, ClockConstraint, ClockId, ClockSet, Rel, TimeValue, Valuation};
use timed_mu::logic::{ActionSet, Ast, CoreFormula as F, Logic, Op, SurfaceFormula};
use timed_mu::{ConcreteState, Rational};

pub type TestRng = ChaCha8Rng;

pub fn rng(seed: u64) -> TestRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn fixture(name: &str) -> TimedAutomaton {
    let path = format!("{}/tests/fixtures/{name}.ta", env!("CARGO_MANIFEST_DIR"));
    let src = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{path}: {e}"));
    parse_ta(&src).unwrap_or_else(|e| panic!("{path}: {e}"))
}

pub fn clock(name: &str) -> ClockId {
    ClockId::new(name)
}

pub fn clock_set(names: &[&str]) -> ClockSet {
    names.iter().map(|n| ClockId::new(*n)).collect()
}

pub const ACTIONS: [&str; 2] = ["a", "b"];
pub const PROPS: [&str; 2] = ["p", "q"];

fn pick<'a, T>(rng: &mut TestRng, xs: &'a [T]) -> &'a T {
    xs.choose(rng).expect("non-empty choice")
}

/// Up to 3 locations over one or two of the clocks `x`, `y`, constants at most 2.
pub fn random_ta(rng: &mut TestRng) -> TimedAutomaton {
    let two = rng.gen_bool(0.5);
    let mut b = TimedAutomaton::builder("random").clock("x");
    if two {
        b = b.clock("y");
    }
    for p in PROPS {
        b = b.proposition(p);
    }
    let invariants: &[&str] = if two {
        &["tt", "tt", "x <= 1", "x <= 2", "x < 2", "y <= 2", "x - y <= 1", "x <= 2 & y < 2"]
    } else {
        &["tt", "tt", "x <= 1", "x <= 2", "x < 2", "x < 1"]
    };
    let guards: &[&str] = if two {
        &["tt", "x >= 1", "x < 1", "y > 0", "x = 1", "x - y > 0", "y <= 2", "x > 1 & y < 1"]
    } else {
        &["tt", "x >= 1", "x < 1", "x > 0", "x = 1", "x <= 2", "x > 2"]
    };
    let nloc = rng.gen_range(1..=3);
    let names: Vec<String> = (0..nloc).map(|i| format!("l{i}")).collect();
    for (i, n) in names.iter().enumerate() {
        let labels: Vec<&str> = PROPS.iter().copied().filter(|_| rng.gen_bool(0.5)).collect();
        b = b.location(n, i == 0, pick(rng, invariants), &labels);
    }
    for _ in 0..rng.gen_range(0..=4) {
        let src = pick(rng, &names).clone();
        let dst = pick(rng, &names).clone();
        let mut reset = Vec::new();
        if rng.gen_bool(0.5) {
            reset.push("x");
        }
        if two && rng.gen_bool(0.3) {
            reset.push("y");
        }
        b = b.edge(&src, pick(rng, &ACTIONS), &dst, pick(rng, guards), &reset);
    }
    b.build().expect("generated automaton is well formed")
}

/// Rational in `[0, max]` with a small random denominator.
pub fn random_time(rng: &mut TestRng, max: u64) -> Rational {
    let den = *pick(rng, &[1i64, 1, 2, 3, 4, 5, 7]);
    let num = rng.gen_range(0..=max as i64 * den);
    Rational::from_ratio(num, den)
}

/// A concrete state over the automaton clocks and `extra`, satisfying the
/// location invariant.
pub fn random_state(rng: &mut TestRng, ta: &TimedAutomaton, extra: &ClockSet, max: u64) -> ConcreteState {
    let all: ClockSet = ta.clocks().union(extra).cloned().collect();
    loop {
        let l = rng.gen_range(0..ta.locations().len());
        let v = Valuation::from_pairs(all.iter().map(|c| (c.clone(), random_time(rng, max)))).unwrap();
        if let Ok(s) = ConcreteState::new(ta, l, v) {
            return s;
        }
    }
}

pub fn random_atom(rng: &mut TestRng, clocks: &[ClockId], max_c: u64) -> AtomicConstraint {
    let rel = *pick(rng, &Rel::all());
    let c = rng.gen_range(0..=max_c);
    if clocks.len() >= 2 && rng.gen_bool(0.25) {
        let mut two: Vec<&ClockId> = clocks.choose_multiple(rng, 2).collect();
        two.shuffle(rng);
        AtomicConstraint::diff(two[0].clone(), two[1].clone(), rel, c)
    } else {
        AtomicConstraint::clock(pick(rng, clocks).clone(), rel, c)
    }
}

pub fn random_actions(rng: &mut TestRng) -> ActionSet {
    match rng.gen_range(0..3) {
        0 => ActionSet::All,
        1 => ActionSet::Named(["a".to_string()].into()),
        _ => ActionSet::Named(["a".to_string(), "b".to_string()].into()),
    }
}

/// Settings for [`random_core`].
#[derive(Clone)]
pub struct CoreGen {
    /// Clocks atoms may mention.
    pub clocks: Vec<ClockId>,
    /// Clocks that may be frozen; must be disjoint from the automaton clocks.
    pub freeze: Vec<ClockId>,
    pub max_c: u64,
    /// Also generate least fixpoints `mu X.(g | <K>X)`-style bodies.
    pub fixpoints: bool,
}

/// Random closed core formula of depth at most `depth`.
pub fn random_core(rng: &mut TestRng, g: &CoreGen, depth: usize) -> F {
    let mut counter = 0;
    core_rec(rng, g, depth, &[], &mut counter)
}

fn core_leaf(rng: &mut TestRng, g: &CoreGen, vars: &[String]) -> F {
    match rng.gen_range(0..6) {
        0 => F::Lit(rng.gen_bool(0.5)),
        1 | 2 => F::prop(*pick(rng, &PROPS)),
        3 if !vars.is_empty() => F::var(pick(rng, vars).clone()),
        _ => F::atom(random_atom(rng, &g.clocks, g.max_c)),
    }
}

fn core_rec(rng: &mut TestRng, g: &CoreGen, depth: usize, vars: &[String], counter: &mut usize) -> F {
    if depth == 0 || rng.gen_bool(0.2) {
        return core_leaf(rng, g, vars);
    }
    let d = depth - 1;
    match rng.gen_range(0..9) {
        // Negation never sits above a variable, which keeps fixpoints monotone.
        0 => F::not(core_rec(rng, g, d, &[], counter)),
        1 => F::or(core_rec(rng, g, d, vars, counter), core_rec(rng, g, d, vars, counter)),
        2 => F::and(core_rec(rng, g, d, vars, counter), core_rec(rng, g, d, vars, counter)),
        3 => F::diamond(random_actions(rng), core_rec(rng, g, d, vars, counter)),
        4 => F::boxed(random_actions(rng), core_rec(rng, g, d, vars, counter)),
        5 | 6 => F::exists_rel(core_rec(rng, g, d, vars, counter), core_rec(rng, g, d, vars, counter)),
        7 if !g.freeze.is_empty() => F::freeze(pick(rng, &g.freeze).clone(), core_rec(rng, g, d, vars, counter)),
        8 if g.fixpoints => {
            *counter += 1;
            let y = format!("Y{counter}");
            let mut inner = vars.to_vec();
            inner.push(y.clone());
            let body = core_rec(rng, g, d, &inner, counter);
            if rng.gen_bool(0.5) {
                F::mu(y, body)
            } else {
                F::nu(y, body)
            }
        }
        _ => F::forall_rel(core_rec(rng, g, d, vars, counter), core_rec(rng, g, d, vars, counter)),
    }
}

/// LTS with up to 4 states over actions `a`, `b` and propositions `p`, `q`.
pub fn random_lts(rng: &mut TestRng) -> FiniteLts {
    let n = rng.gen_range(1..=4);
    let mut transitions = Vec::new();
    for s in 0..n {
        for t in 0..n {
            for a in ACTIONS {
                if rng.gen_bool(0.3) {
                    transitions.push((s, a.to_string(), t));
                }
            }
        }
    }
    FiniteLts {
        states: (0..n).map(|i| format!("s{i}")).collect(),
        initial: vec![0],
        transitions,
        labels: (0..n)
            .map(|_| PROPS.iter().filter(|_| rng.gen_bool(0.5)).map(|p| p.to_string()).collect::<BTreeSet<_>>())
            .collect(),
    }
}

/// Untimed formula in positive normal form. Fixpoints alternate freely, so
/// variables bound by an outer `nu` can occur under an inner `mu` and vice versa.
pub fn random_untimed(rng: &mut TestRng, depth: usize) -> F {
    let mut counter = 0;
    untimed_rec(rng, depth, &[], &mut counter)
}

fn untimed_rec(rng: &mut TestRng, depth: usize, vars: &[String], counter: &mut usize) -> F {
    if depth == 0 || rng.gen_bool(0.15) {
        return match rng.gen_range(0..5) {
            0 => F::Lit(rng.gen_bool(0.5)),
            1 => F::not(F::prop(*pick(rng, &PROPS))),
            2 => F::prop(*pick(rng, &PROPS)),
            _ if !vars.is_empty() => F::var(pick(rng, vars).clone()),
            _ => F::prop(*pick(rng, &PROPS)),
        };
    }
    let d = depth - 1;
    match rng.gen_range(0..7) {
        0 => F::or(untimed_rec(rng, d, vars, counter), untimed_rec(rng, d, vars, counter)),
        1 => F::and(untimed_rec(rng, d, vars, counter), untimed_rec(rng, d, vars, counter)),
        2 => F::diamond(random_actions(rng), untimed_rec(rng, d, vars, counter)),
        3 => F::boxed(random_actions(rng), untimed_rec(rng, d, vars, counter)),
        _ => {
            *counter += 1;
            let y = format!("Y{counter}");
            let mut inner = vars.to_vec();
            inner.push(y.clone());
            let body = untimed_rec(rng, d, &inner, counter);
            if rng.gen_bool(0.5) {
                F::mu(y, body)
            } else {
                F::nu(y, body)
            }
        }
    }
}

/// TCTL formula over proposition `p` and the clock `x`, constants at most `max_c`.
pub fn random_tctl(rng: &mut TestRng, depth: usize, max_c: u64) -> SurfaceFormula {
    SurfaceFormula { logic: Logic::Tctl, ast: tctl_rec(rng, depth, max_c) }
}

fn tctl_rec(rng: &mut TestRng, depth: usize, max_c: u64) -> Ast {
    if depth == 0 || rng.gen_bool(0.2) {
        return match rng.gen_range(0..4) {
            0 => Ast::Lit(rng.gen_bool(0.5)),
            1 => Ast::Prop("p".into()),
            _ => Ast::Constraint(ClockConstraint::atom(random_atom(rng, &[clock("x")], max_c))),
        };
    }
    let d = depth - 1;
    let mut sub = || Box::new(tctl_rec(rng, d, max_c));
    let (a, b) = (sub(), sub());
    match rng.gen_range(0..11) {
        0 => Ast::Not(a),
        1 => Ast::And(a, b),
        2 => Ast::Or(a, b),
        3 => Ast::EU(a, b),
        4 => Ast::AU(a, b),
        5 => Ast::ER(a, b),
        6 => Ast::AR(a, b),
        7 => Ast::EF(a),
        8 => Ast::AF(a),
        9 => Ast::EG(a),
        _ => Ast::AG(a),
    }
}

/// Random closed surface formula accepted by `logic`. Binder names are
/// distinct, so printing and reparsing yields the same tree.
pub fn random_surface(rng: &mut TestRng, logic: Logic, depth: usize) -> Ast {
    let mut counter = 0;
    surface_rec(rng, logic, depth, &[], &mut counter)
}

fn surface_leaf(rng: &mut TestRng, logic: Logic, vars: &[String]) -> Ast {
    loop {
        let a = match rng.gen_range(0..5) {
            0 => Ast::Lit(rng.gen_bool(0.5)),
            1 => Ast::Prop(pick(rng, &PROPS).to_string()),
            2 if !vars.is_empty() => Ast::Var(pick(rng, vars).clone()),
            3 if rng.gen_bool(0.3) => {
                Ast::Constraint(ClockConstraint::eq(pick(rng, &["x", "y"]).to_string(), rng.gen_range(0..=2)))
            }
            _ => Ast::Constraint(ClockConstraint::atom(random_atom(rng, &[clock("x"), clock("y")], 2))),
        };
        if logic.allows(a.op()) {
            return a;
        }
    }
}

fn surface_rec(rng: &mut TestRng, logic: Logic, depth: usize, vars: &[String], counter: &mut usize) -> Ast {
    if depth == 0 || rng.gen_bool(0.15) {
        return surface_leaf(rng, logic, vars);
    }
    let d = depth - 1;
    loop {
        let choice = rng.gen_range(0..24);
        let op = match choice {
            0 => Op::Not,
            1 => Op::And,
            2 => Op::Or,
            3 => Op::Diamond,
            4 => Op::Box,
            5 | 6 => Op::Relativized,
            7 | 8 => Op::Unary,
            9..=11 => Op::Until,
            12 => Op::Trigger,
            13..=18 => Op::Temporal,
            19 => Op::Freeze,
            20 | 21 => Op::Mu,
            _ => Op::Nu,
        };
        if !logic.allows(op) {
            continue;
        }
        let sub = |rng: &mut TestRng, counter: &mut usize| Box::new(surface_rec(rng, logic, d, vars, counter));
        return match op {
            Op::Not if logic.negates_only_propositions() => {
                Ast::Not(Box::new(Ast::Prop(pick(rng, &PROPS).to_string())))
            }
            Op::Not => Ast::Not(sub(rng, counter)),
            Op::And => Ast::And(sub(rng, counter), sub(rng, counter)),
            Op::Or => Ast::Or(sub(rng, counter), sub(rng, counter)),
            Op::Diamond => Ast::Diamond(random_actions(rng), sub(rng, counter)),
            Op::Box => Ast::Box(random_actions(rng), sub(rng, counter)),
            Op::Relativized if choice == 5 => Ast::ExistsRel(sub(rng, counter), sub(rng, counter)),
            Op::Relativized => Ast::ForallRel(sub(rng, counter), sub(rng, counter)),
            Op::Unary if choice == 7 => Ast::Exists(sub(rng, counter)),
            Op::Unary => Ast::Forall(sub(rng, counter)),
            Op::Until => match choice {
                9 => Ast::StrongUntil(sub(rng, counter), sub(rng, counter)),
                10 => Ast::WeakUntil(sub(rng, counter), sub(rng, counter)),
                _ => Ast::StrictUntil(sub(rng, counter), sub(rng, counter)),
            },
            Op::Trigger => Ast::Trigger(sub(rng, counter), sub(rng, counter)),
            Op::Temporal => match choice {
                13 => Ast::EU(sub(rng, counter), sub(rng, counter)),
                14 => Ast::AU(sub(rng, counter), sub(rng, counter)),
                15 => Ast::ER(sub(rng, counter), sub(rng, counter)),
                16 => Ast::AR(sub(rng, counter), sub(rng, counter)),
                17 => Ast::EF(sub(rng, counter)),
                _ => Ast::AG(sub(rng, counter)),
            },
            Op::Freeze => Ast::Freeze(clock("w"), sub(rng, counter)),
            _ => {
                *counter += 1;
                let y = format!("X{counter}");
                let mut inner = vars.to_vec();
                inner.push(y.clone());
                let body = Box::new(surface_rec(rng, logic, d, &inner, counter));
                if op == Op::Mu {
                    Ast::Mu(y, body)
                } else {
                    Ast::Nu(y, body)
                }
            }
        };
    }
}

/// Closed T_mu formula over the clock `x`. Negation sits only above
/// variable-free subformulas, so every generated formula is monotone.
pub fn random_tmu(rng: &mut TestRng, depth: usize) -> Ast {
    let mut counter = 0;
    tmu_rec(rng, depth, &[], &mut counter)
}

fn tmu_rec(rng: &mut TestRng, depth: usize, vars: &[String], counter: &mut usize) -> Ast {
    if depth == 0 || rng.gen_bool(0.2) {
        return match rng.gen_range(0..4) {
            0 => Ast::Lit(rng.gen_bool(0.5)),
            1 if !vars.is_empty() => Ast::Var(pick(rng, vars).clone()),
            _ => Ast::Constraint(ClockConstraint::atom(random_atom(rng, &[clock("x"), clock("w")], 1))),
        };
    }
    let d = depth - 1;
    match rng.gen_range(0..6) {
        0 => Ast::Not(Box::new(tmu_rec(rng, d, &[], counter))),
        1 => Ast::And(Box::new(tmu_rec(rng, d, vars, counter)), Box::new(tmu_rec(rng, d, vars, counter))),
        2 => Ast::Or(Box::new(tmu_rec(rng, d, vars, counter)), Box::new(tmu_rec(rng, d, vars, counter))),
        3 => Ast::Trigger(Box::new(tmu_rec(rng, d, vars, counter)), Box::new(tmu_rec(rng, d, vars, counter))),
        4 => Ast::Freeze(clock("w"), Box::new(tmu_rec(rng, d, vars, counter))),
        _ => {
            *counter += 1;
            let y = format!("X{counter}");
            let mut inner = vars.to_vec();
            inner.push(y.clone());
            Ast::Mu(y, Box::new(tmu_rec(rng, d, &inner, counter)))
        }
    }
}
