mod common;

use common::*;
use timed_mu::automaton::TimedAutomaton;
use timed_mu::clocks::ClockSet;
use timed_mu::eval::{eval, Env};
use timed_mu::logic::{parse_formula, Ast, CoreFormula as F, Logic, Op, SurfaceFormula};
use timed_mu::region_automaton::StateSet;
use timed_mu::translate::{embed, embed_tn, ClockStrategy, Embedding, Translator};
use timed_mu::RegionAutomaton;

fn binders(f: &F, out: &mut Vec<(F, ClockSet)>) {
    if let F::Freeze(_, body) = f {
        out.push((f.clone(), body.free_clocks()));
    }
    for c in f.children() {
        binders(c, out);
    }
}

fn sat(ta: &TimedAutomaton, fs: &[&F]) -> Vec<StateSet> {
    let mut extra = ClockSet::new();
    let mut bound = 0;
    for f in fs {
        extra.extend(f.clocks());
        bound = bound.max(f.bound());
    }
    let ra: RegionAutomaton = RegionAutomaton::build(ta, &extra, bound).unwrap();
    fs.iter().map(|f| eval(&ra, f, &Env::new()).unwrap()).collect()
}

#[test]
fn generated_clocks_avoid_reserved_and_argument_clocks() {
    let mut rng = rng(21);
    let reserved = clock_set(&["x"]);
    for strategy in [ClockStrategy::CaptureAvoiding, ClockStrategy::Unique] {
        for _ in 0..300 {
            let sf = random_tctl(&mut rng, 3, 2);
            for embedding in [Embedding::General, Embedding::NonZeno] {
                let f = Translator::for_formula(&sf, &reserved)
                    .with_strategy(strategy)
                    .with_embedding(embedding)
                    .translate(&sf)
                    .unwrap();
                assert!(f.free_clocks().is_subset(&reserved), "{sf} leaks clocks: {f}");
                let mut found = Vec::new();
                binders(&f, &mut found);
                for (b, _) in found {
                    let F::Freeze(z, body) = &b else { unreachable!() };
                    assert!(!reserved.contains(z), "{z} is reserved");
                    // Nothing inside the binder other than the binder's own
                    // atoms refers to an outer `z`: the body's free clocks are
                    // user clocks plus `z` itself.
                    for c in body.free_clocks() {
                        assert!(reserved.contains(&c) || &c == z, "{c} free under {z} in {b}");
                    }
                }
            }
        }
    }
}

#[test]
fn unique_strategy_never_reuses_a_name() {
    let sf = parse_formula("AF (p & AG x<1)", Logic::Tctl).unwrap();
    let f =
        Translator::for_formula(&sf, &clock_set(&["x"])).with_strategy(ClockStrategy::Unique).translate(&sf).unwrap();
    let mut found = Vec::new();
    binders(&f, &mut found);
    let clocks: std::collections::BTreeSet<_> = found
        .iter()
        .map(|(b, _)| match b {
            F::Freeze(z, _) => z.clone(),
            _ => unreachable!(),
        })
        .collect();
    // `au` copies its left argument, so one binder may occur several times.
    let terms: std::collections::BTreeSet<_> = found.iter().map(|(b, _)| b.clone()).collect();
    assert!(terms.len() > 2);
    assert_eq!(clocks.len(), terms.len(), "{f}");
}

fn temporal_depth(a: &Ast) -> usize {
    let below = a.children().into_iter().map(temporal_depth).max().unwrap_or(0);
    below + usize::from(a.op() == Op::Temporal)
}

#[test]
fn clock_strategies_agree() {
    let mut rng = rng(22);
    let mut compared = 0;
    for ta in [fixture("nonzeno"), fixture("fig4")] {
        for _ in 0..60 {
            let sf = random_tctl(&mut rng, 2, 1);
            let reserved = ta.clocks().clone();
            let shared = embed(&sf, &reserved).unwrap();
            let unique =
                Translator::for_formula(&sf, &reserved).with_strategy(ClockStrategy::Unique).translate(&sf).unwrap();
            let mut clocks = shared.clocks();
            clocks.extend(unique.clocks());
            // Nested temporal operators at four clocks cost seconds each.
            if clocks.len() > 4 || (clocks.len() == 4 && temporal_depth(&sf.ast) > 1) {
                continue;
            }
            let s = sat(&ta, &[&shared, &unique]);
            assert_eq!(s[0], s[1], "{sf}");
            compared += 1;
        }
    }
    assert!(compared >= 60, "only {compared} formulas were small enough to compare");
}

#[test]
fn af_embedding_uses_three_clocks() {
    let sf = parse_formula("AF x>=1", Logic::Tctl).unwrap();
    let f = embed(&sf, &clock_set(&["x"])).unwrap();
    let mut all = f.clocks();
    all.insert(clock("x"));
    assert_eq!(all, clock_set(&["x", "_z0", "_z1"]), "{f}");
}

#[test]
fn unary_forall_is_relativized_to_ff() {
    let mut rng = rng(23);
    for _ in 0..100 {
        let ta = random_ta(&mut rng);
        let gen = CoreGen { clocks: ta.clocks().iter().cloned().collect(), freeze: vec![], max_c: 2, fixpoints: false };
        let g = random_core(&mut rng, &gen, 2);
        let a = F::forall(g.clone());
        let b = F::forall_rel(F::ff(), g.clone());
        let c = F::not(F::exists_rel(F::tt(), F::not(g.clone())));
        let s = sat(&ta, &[&a, &b, &c]);
        assert_eq!(s[0], s[1]);
        assert_eq!(s[0], s[2]);
    }
}

#[test]
fn au_of_tt_and_ff_holds_everywhere_on_a_timelock() {
    let ta = fixture("ta1");
    let f = Translator::new(ta.clocks().clone(), ClockStrategy::default(), Embedding::General).au(F::tt(), F::ff());
    let s = &sat(&ta, &[&f])[0];
    assert!(s.is_full());
}

/// The free-time automaton plus an edge enabled at every point. Zero-time
/// loops are then always available, so the automaton is not free of Zeno
/// behaviour and the non-Zeno embedding is not sound on it.
fn always_enabled() -> TimedAutomaton {
    TimedAutomaton::builder("always")
        .clock("x")
        .proposition("p")
        .location("l", true, "x >= 0", &["p"])
        .edge("l", "a", "l", "tt", &[])
        .build()
        .unwrap()
}

#[test]
fn non_zeno_embedding_fails_with_an_always_enabled_edge() {
    let ta = always_enabled();
    let sf = parse_formula("AF x>=1", Logic::Tctl).unwrap();
    let general = embed(&sf, ta.clocks()).unwrap();
    let tn = embed_tn(&sf, ta.clocks()).unwrap();
    let s = sat(&ta, &[&general, &tn]);
    let ra: RegionAutomaton =
        RegionAutomaton::build(&ta, &general.clocks().union(&tn.clocks()).cloned().collect(), 1).unwrap();
    let init = ra.initial()[0];
    assert!(s[0].contains(init));
    assert!(!s[1].contains(init));
}

#[test]
fn non_zeno_fixture_has_no_timelocks() {
    let ta = fixture("nonzeno");
    let tdiv = Translator::new(ta.clocks().clone(), ClockStrategy::default(), Embedding::General).tdiv();
    assert!(sat(&ta, &[&tdiv])[0].is_full());
}

#[test]
fn embeddings_require_tctl() {
    let sf = SurfaceFormula { logic: Logic::LRel, ast: parse_formula("p", Logic::LRel).unwrap().ast };
    assert!(embed(&sf, &ClockSet::new()).is_err());
    assert!(embed_tn(&sf, &ClockSet::new()).is_err());
}

#[test]
fn non_monotone_input_is_rejected() {
    let sf = parse_formula("mu X. !X", Logic::LRel).unwrap();
    assert!(Translator::for_formula(&sf, &ClockSet::new()).translate(&sf).is_err());
    let ok = parse_formula("mu X. (x >= 1 | E{tt}X)", Logic::LRel).unwrap();
    let f = Translator::for_formula(&ok, &ClockSet::new()).translate(&ok).unwrap();
    assert_eq!(f.clocks(), clock_set(&["x"]));
}
