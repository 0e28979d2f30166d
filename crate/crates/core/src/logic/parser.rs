//! Recursive-descent parser for the shared surface grammar.
//!
//! Precedence from tightest: prefix operators, `&`, `|`, then the binary
//! untils `~s`, `~w`, `~s'` and `|>` (right associative). Binders `mu X.`,
//! `nu X.` and `z.` extend as far right as possible.

use std::collections::BTreeSet;

use super::{ActionSet, Ast, Logic, Op, SurfaceFormula};
use crate::clocks::{parse_clock_relation, ClockId};
use crate::error::{Error, Result};
use crate::lexer::{Cursor, Tok};

const KEYWORDS: &[&str] = &["tt", "ff", "mu", "nu", "exists", "forall", "EF", "AF", "EG", "AG", "EU", "AU", "ER", "AR"];

pub fn parse_formula(text: &str, logic: Logic) -> Result<SurfaceFormula> {
    let cur = Cursor::new(text)?;
    let mut used: BTreeSet<String> = crate::lexer::tokenize(text)?
        .into_iter()
        .filter_map(|t| match t.tok {
            Tok::Ident(s) => Some(s),
            _ => None,
        })
        .collect();
    used.extend(KEYWORDS.iter().map(|k| k.to_string()));
    let mut p = Parser { cur, logic, scope: Vec::new(), binders: BTreeSet::new(), used };
    let ast = p.expr()?;
    if !p.cur.at_eof() {
        return Err(p.cur.unexpected("expected end of formula"));
    }
    Ok(SurfaceFormula { logic, ast })
}

struct Parser {
    cur: Cursor,
    logic: Logic,
    /// Enclosing fixpoint binders as (written name, assigned name).
    scope: Vec<(String, String)>,
    binders: BTreeSet<String>,
    used: BTreeSet<String>,
}

impl Parser {
    fn allow(&self, op: Op, pos: usize) -> Result<()> {
        if self.logic.allows(op) {
            Ok(())
        } else {
            Err(Error::parse(pos, format!("{op:?} is not part of {}", self.logic)))
        }
    }

    fn expr(&mut self) -> Result<Ast> {
        let lhs = self.or_expr()?;
        let pos = self.cur.pos();
        let make: fn(Box<Ast>, Box<Ast>) -> Ast = match self.cur.peek() {
            Tok::StrongUntil => Ast::StrongUntil,
            Tok::WeakUntil => Ast::WeakUntil,
            Tok::StrictUntil => Ast::StrictUntil,
            Tok::Trigger => Ast::Trigger,
            _ => return Ok(lhs),
        };
        let op = if matches!(self.cur.peek(), Tok::Trigger) { Op::Trigger } else { Op::Until };
        self.allow(op, pos)?;
        self.cur.bump();
        let rhs = self.expr()?;
        Ok(make(Box::new(lhs), Box::new(rhs)))
    }

    fn or_expr(&mut self) -> Result<Ast> {
        let mut lhs = self.and_expr()?;
        while *self.cur.peek() == Tok::Bar {
            self.cur.bump();
            let rhs = self.and_expr()?;
            lhs = Ast::Or(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn and_expr(&mut self) -> Result<Ast> {
        let mut lhs = self.unary()?;
        while *self.cur.peek() == Tok::Amp {
            self.cur.bump();
            let rhs = self.unary()?;
            lhs = Ast::And(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Ast> {
        let pos = self.cur.pos();
        match self.cur.peek().clone() {
            Tok::Bang => {
                self.allow(Op::Not, pos)?;
                self.cur.bump();
                let body = self.unary()?;
                if self.logic.negates_only_propositions() && !matches!(body, Ast::Prop(_)) {
                    return Err(Error::parse(pos, format!("{} only allows negated propositions", self.logic)));
                }
                Ok(Ast::Not(Box::new(body)))
            }
            Tok::Lt => {
                self.allow(Op::Diamond, pos)?;
                self.cur.bump();
                let k = self.action_set()?;
                self.cur.expect(&Tok::Gt)?;
                Ok(Ast::Diamond(k, Box::new(self.unary()?)))
            }
            Tok::LBracket => {
                self.allow(Op::Box, pos)?;
                self.cur.bump();
                let k = self.action_set()?;
                self.cur.expect(&Tok::RBracket)?;
                Ok(Ast::Box(k, Box::new(self.unary()?)))
            }
            Tok::Ident(name) => self.ident_led(name, pos),
            _ => self.primary(),
        }
    }

    fn ident_led(&mut self, name: String, pos: usize) -> Result<Ast> {
        let next = self.cur.peek_at(1).clone();
        match (name.as_str(), &next) {
            ("E", Tok::LBrace) | ("A", Tok::LBrace) => {
                self.allow(Op::Relativized, pos)?;
                self.cur.bump();
                self.cur.bump();
                let guard = self.expr()?;
                self.cur.expect(&Tok::RBrace)?;
                let body = self.unary()?;
                Ok(if name == "E" {
                    Ast::ExistsRel(Box::new(guard), Box::new(body))
                } else {
                    Ast::ForallRel(Box::new(guard), Box::new(body))
                })
            }
            ("exists", _) | ("forall", _) => {
                self.allow(Op::Unary, pos)?;
                self.cur.bump();
                let body = Box::new(self.unary()?);
                Ok(if name == "exists" { Ast::Exists(body) } else { Ast::Forall(body) })
            }
            ("EF", _) | ("AF", _) | ("EG", _) | ("AG", _) => {
                self.allow(Op::Temporal, pos)?;
                self.cur.bump();
                let body = Box::new(self.unary()?);
                Ok(match name.as_str() {
                    "EF" => Ast::EF(body),
                    "AF" => Ast::AF(body),
                    "EG" => Ast::EG(body),
                    _ => Ast::AG(body),
                })
            }
            ("EU", _) | ("AU", _) | ("ER", _) | ("AR", _) => {
                self.allow(Op::Temporal, pos)?;
                self.cur.bump();
                self.cur.expect(&Tok::LParen)?;
                let a = Box::new(self.expr()?);
                self.cur.expect(&Tok::Comma)?;
                let b = Box::new(self.expr()?);
                self.cur.expect(&Tok::RParen)?;
                Ok(match name.as_str() {
                    "EU" => Ast::EU(a, b),
                    "AU" => Ast::AU(a, b),
                    "ER" => Ast::ER(a, b),
                    _ => Ast::AR(a, b),
                })
            }
            ("mu", _) | ("nu", _) => {
                self.allow(if name == "mu" { Op::Mu } else { Op::Nu }, pos)?;
                self.cur.bump();
                let var_pos = self.cur.pos();
                let var = self.cur.expect_ident()?;
                if KEYWORDS.contains(&var.as_str()) {
                    return Err(Error::parse(var_pos, format!("`{var}` is reserved")));
                }
                self.cur.expect(&Tok::Dot)?;
                let fresh = self.bind(&var);
                self.scope.push((var, fresh.clone()));
                let body = self.expr();
                self.scope.pop();
                let body = Box::new(body?);
                Ok(if name == "mu" { Ast::Mu(fresh, body) } else { Ast::Nu(fresh, body) })
            }
            (_, Tok::Dot) if !KEYWORDS.contains(&name.as_str()) => {
                self.allow(Op::Freeze, pos)?;
                self.cur.bump();
                self.cur.bump();
                let body = self.expr()?;
                Ok(Ast::Freeze(ClockId::new(name), Box::new(body)))
            }
            _ => self.primary(),
        }
    }

    /// Picks a binder name not used by any other binder or identifier.
    fn bind(&mut self, var: &str) -> String {
        let name = if self.binders.contains(var) {
            (1..).map(|k| format!("{var}{k}")).find(|n| !self.used.contains(n)).expect("unbounded search")
        } else {
            var.to_string()
        };
        self.binders.insert(name.clone());
        self.used.insert(name.clone());
        name
    }

    fn primary(&mut self) -> Result<Ast> {
        let pos = self.cur.pos();
        match self.cur.peek().clone() {
            Tok::LParen => {
                self.cur.bump();
                let e = self.expr()?;
                self.cur.expect(&Tok::RParen)?;
                Ok(e)
            }
            Tok::Ident(name) => {
                self.cur.bump();
                match name.as_str() {
                    "tt" => return Ok(Ast::Lit(true)),
                    "ff" => return Ok(Ast::Lit(false)),
                    _ if KEYWORDS.contains(&name.as_str()) => {
                        return Err(Error::parse(pos, format!("unexpected keyword `{name}`")))
                    }
                    _ => {}
                }
                if matches!(self.cur.peek(), Tok::Lt | Tok::Le | Tok::Gt | Tok::Ge | Tok::Eq | Tok::Minus) {
                    let c = parse_clock_relation(&mut self.cur, name)?;
                    return Ok(Ast::Constraint(c));
                }
                if let Some((_, fresh)) = self.scope.iter().rev().find(|(n, _)| *n == name) {
                    return Ok(Ast::Var(fresh.clone()));
                }
                let looks_like_var = name.starts_with(|c: char| c.is_ascii_uppercase());
                if looks_like_var && self.logic.allows(Op::Var) {
                    return Ok(Ast::Var(name));
                }
                self.allow(Op::Prop, pos)?;
                Ok(Ast::Prop(name))
            }
            _ => Err(self.cur.unexpected("expected a formula")),
        }
    }

    fn action_set(&mut self) -> Result<ActionSet> {
        if self.cur.eat(&Tok::Star) {
            return Ok(ActionSet::All);
        }
        let mut names = BTreeSet::new();
        names.insert(self.cur.expect_ident()?);
        while self.cur.eat(&Tok::Comma) {
            names.insert(self.cur.expect_ident()?);
        }
        Ok(ActionSet::Named(names))
    }
}
