mod common;

use common::*;
use timed_mu::logic::{parse_formula, Ast, Logic};
use timed_mu::Error;

#[test]
fn print_then_parse_round_trips() {
    let mut rng = rng(11);
    for logic in Logic::ALL {
        for i in 0..1000 {
            let ast = random_surface(&mut rng, logic, 4);
            let text = ast.to_string();
            let back = parse_formula(&text, logic).unwrap_or_else(|e| panic!("{logic} #{i}: `{text}`: {e}"));
            assert_eq!(back.ast, ast, "{logic} #{i}: `{text}`");
            assert_eq!(back.to_string(), text);
        }
    }
}

#[test]
fn each_logic_rejects_foreign_constructs() {
    let cases = [
        (Logic::LNu, "p"),
        (Logic::LNu, "mu X. X"),
        (Logic::LMuNu, "!<*>tt"),
        (Logic::LC, "exists tt"),
        (Logic::LC, "mu X. X"),
        (Logic::TMu, "<*>tt"),
        (Logic::TMu, "nu X. X"),
        (Logic::Tctl, "E{tt}tt"),
        (Logic::Tctl, "p ~s q"),
        (Logic::LRel, "EF p"),
        (Logic::LRel, "p |> q"),
    ];
    for (logic, text) in cases {
        match parse_formula(text, logic) {
            Err(Error::Parse { .. }) => {}
            other => panic!("{logic} accepted `{text}`: {other:?}"),
        }
    }
}

#[test]
fn parse_errors_point_at_the_offending_token() {
    let Err(Error::Parse { pos, .. }) = parse_formula("p & (q | ", Logic::LRel) else { panic!() };
    assert_eq!(pos, 9);
    let Err(Error::Parse { pos, .. }) = parse_formula("p & mu", Logic::LRel) else { panic!() };
    assert_eq!(pos, 6);
}

#[test]
fn shadowed_binders_get_distinct_names() {
    let f = parse_formula("mu X. (X | nu X. X)", Logic::LRel).unwrap();
    let Ast::Mu(outer, body) = &f.ast else { panic!() };
    let Ast::Or(a, b) = body.as_ref() else { panic!() };
    let Ast::Nu(inner, c) = b.as_ref() else { panic!() };
    assert_ne!(outer, inner);
    assert_eq!(a.as_ref(), &Ast::Var(outer.clone()));
    assert_eq!(c.as_ref(), &Ast::Var(inner.clone()));
}
