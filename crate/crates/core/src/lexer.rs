//! Tokenizer shared by the constraint, formula and automaton parsers.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Nat(u64),
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Minus,
    Amp,
    Bar,
    Bang,
    LParen,
    RParen,
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    Comma,
    Dot,
    Star,
    Trigger,
    StrongUntil,
    WeakUntil,
    StrictUntil,
    Eof,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Nat(n) => format!("number `{n}`"),
            Tok::Eof => "end of input".to_string(),
            other => format!("`{}`", other.symbol()),
        }
    }

    fn symbol(&self) -> &'static str {
        match self {
            Tok::Lt => "<",
            Tok::Le => "<=",
            Tok::Gt => ">",
            Tok::Ge => ">=",
            Tok::Eq => "=",
            Tok::Minus => "-",
            Tok::Amp => "&",
            Tok::Bar => "|",
            Tok::Bang => "!",
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::LBrace => "{",
            Tok::RBrace => "}",
            Tok::LBracket => "[",
            Tok::RBracket => "]",
            Tok::Comma => ",",
            Tok::Dot => ".",
            Tok::Star => "*",
            Tok::Trigger => "|>",
            Tok::StrongUntil => "~s",
            Tok::WeakUntil => "~w",
            Tok::StrictUntil => "~s'",
            Tok::Ident(_) | Tok::Nat(_) | Tok::Eof => "",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Token {
    pub tok: Tok,
    pub pos: usize,
}

pub fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

pub fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '\''
}

pub fn tokenize(src: &str) -> Result<Vec<Token>> {
    let bytes: Vec<(usize, char)> = src.char_indices().collect();
    let mut out = Vec::new();
    let mut i = 0;
    let peek = |j: usize| bytes.get(j).map(|&(_, c)| c);
    while i < bytes.len() {
        let (pos, c) = bytes[i];
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if is_ident_start(c) {
            let mut j = i;
            while j < bytes.len() && is_ident_char(bytes[j].1) {
                j += 1;
            }
            let end = bytes.get(j).map_or(src.len(), |&(p, _)| p);
            out.push(Token { tok: Tok::Ident(src[pos..end].to_string()), pos });
            i = j;
            continue;
        }
        if c.is_ascii_digit() {
            let mut j = i;
            while j < bytes.len() && bytes[j].1.is_ascii_digit() {
                j += 1;
            }
            let end = bytes.get(j).map_or(src.len(), |&(p, _)| p);
            let n = src[pos..end].parse::<u64>().map_err(|_| Error::parse(pos, "numeric constant out of range"))?;
            out.push(Token { tok: Tok::Nat(n), pos });
            i = j;
            continue;
        }
        let (tok, len) = match (c, peek(i + 1), peek(i + 2)) {
            ('<', Some('='), _) => (Tok::Le, 2),
            ('>', Some('='), _) => (Tok::Ge, 2),
            ('|', Some('>'), _) => (Tok::Trigger, 2),
            ('~', Some('s'), Some('\'')) => (Tok::StrictUntil, 3),
            ('~', Some('s'), _) => (Tok::StrongUntil, 2),
            ('~', Some('w'), _) => (Tok::WeakUntil, 2),
            ('<', _, _) => (Tok::Lt, 1),
            ('>', _, _) => (Tok::Gt, 1),
            ('=', _, _) => (Tok::Eq, 1),
            ('-', _, _) => (Tok::Minus, 1),
            ('&', _, _) => (Tok::Amp, 1),
            ('|', _, _) => (Tok::Bar, 1),
            ('!', _, _) => (Tok::Bang, 1),
            ('(', _, _) => (Tok::LParen, 1),
            (')', _, _) => (Tok::RParen, 1),
            ('{', _, _) => (Tok::LBrace, 1),
            ('}', _, _) => (Tok::RBrace, 1),
            ('[', _, _) => (Tok::LBracket, 1),
            (']', _, _) => (Tok::RBracket, 1),
            (',', _, _) => (Tok::Comma, 1),
            ('.', _, _) => (Tok::Dot, 1),
            ('*', _, _) => (Tok::Star, 1),
            _ => return Err(Error::parse(pos, format!("unexpected character `{c}`"))),
        };
        out.push(Token { tok, pos });
        i += len;
    }
    out.push(Token { tok: Tok::Eof, pos: src.len() });
    Ok(out)
}

/// Cursor over a token vector.
pub struct Cursor {
    toks: Vec<Token>,
    idx: usize,
}

impl Cursor {
    pub fn new(src: &str) -> Result<Self> {
        Ok(Cursor { toks: tokenize(src)?, idx: 0 })
    }

    pub fn peek(&self) -> &Tok {
        &self.toks[self.idx].tok
    }

    pub fn peek_at(&self, k: usize) -> &Tok {
        let j = (self.idx + k).min(self.toks.len() - 1);
        &self.toks[j].tok
    }

    pub fn pos(&self) -> usize {
        self.toks[self.idx].pos
    }

    pub fn bump(&mut self) -> Tok {
        let t = self.toks[self.idx].tok.clone();
        if self.idx + 1 < self.toks.len() {
            self.idx += 1;
        }
        t
    }

    pub fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == t {
            self.bump();
            true
        } else {
            false
        }
    }

    pub fn expect(&mut self, t: &Tok) -> Result<()> {
        if self.eat(t) {
            Ok(())
        } else {
            Err(self.unexpected(&format!("expected {}", t.describe())))
        }
    }

    pub fn expect_ident(&mut self) -> Result<String> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                Ok(s)
            }
            _ => Err(self.unexpected("expected identifier")),
        }
    }

    pub fn expect_nat(&mut self) -> Result<u64> {
        match self.peek().clone() {
            Tok::Nat(n) => {
                self.bump();
                Ok(n)
            }
            _ => Err(self.unexpected("expected natural number")),
        }
    }

    pub fn unexpected(&self, what: &str) -> Error {
        Error::parse(self.pos(), format!("{what}, found {}", self.peek().describe()))
    }

    pub fn at_eof(&self) -> bool {
        *self.peek() == Tok::Eof
    }
}
