//! Recursive-descent parser for the `.sop` concrete syntax.
//!
//! ```text
//! formula  := imp ('<->' imp)*
//! imp      := disj ('->' imp)?
//! disj     := conj ('|' conj)*
//! conj     := unary ('&' unary)*
//! unary    := '~' unary | quant | primary
//! quant    := 'Ex' var+ '.' formula
//!           | 'All' var (','? var)* 'in' NAME '.' formula
//!           | 'All' var '.' formula
//!           | ('SEx' | 'SAll') NAME '^{' r ',' k '}' '.' formula
//! primary  := '(' formula ')' | 'true' | 'false'
//!           | NAME ('^{' r ',' k '}')? '(' term (',' term)* ')'
//!           | term ('=' | '!=' | '<=') term
//! term     := var | '0' | '1' | 'logn' | 'max' | '@' NAME
//! ```
//!
//! Quantifier bodies extend as far to the right as possible.

use std::collections::HashMap;

use thiserror::Error;

use super::{Formula, Pred, SoVar, Term};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("syntax error at {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("arity mismatch at {pos}: {name} has arity {expected}, used with {got} arguments")]
    Arity { pos: usize, name: String, expected: usize, got: usize },
}

impl ParseError {
    pub fn position(&self) -> usize {
        match self {
            ParseError::Syntax { pos, .. } | ParseError::Arity { pos, .. } => *pos,
        }
    }
}

const KEYWORDS: &[&str] = &["Ex", "All", "SEx", "SAll", "in", "true", "false", "logn", "max"];

pub(crate) fn is_reserved(name: &str) -> bool {
    KEYWORDS.contains(&name)
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Num(usize),
    LParen,
    RParen,
    Comma,
    Dot,
    Eq,
    Neq,
    Leq,
    Tilde,
    Amp,
    Bar,
    Arrow,
    DArrow,
    Caret,
    LBrace,
    RBrace,
    At,
    End,
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Ident(s) => format!("'{s}'"),
        Tok::Num(n) => format!("'{n}'"),
        Tok::End => "end of input".into(),
        other => format!("{other:?}"),
    }
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let mut out = Vec::new();
    let mut i = 0;
    let err = |pos: usize, msg: String| ParseError::Syntax { pos, msg };
    while i < chars.len() {
        let (pos, c) = chars[i];
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        // line comments
        if c == '#' {
            while i < chars.len() && chars[i].1 != '\n' {
                i += 1;
            }
            continue;
        }
        let peek = chars.get(i + 1).map(|p| p.1);
        let peek2 = chars.get(i + 2).map(|p| p.1);
        let (tok, len) = match c {
            '(' => (Tok::LParen, 1),
            ')' => (Tok::RParen, 1),
            ',' => (Tok::Comma, 1),
            '.' => (Tok::Dot, 1),
            '=' => (Tok::Eq, 1),
            '~' => (Tok::Tilde, 1),
            '&' => (Tok::Amp, 1),
            '|' => (Tok::Bar, 1),
            '^' => (Tok::Caret, 1),
            '{' => (Tok::LBrace, 1),
            '}' => (Tok::RBrace, 1),
            '@' => (Tok::At, 1),
            '!' if peek == Some('=') => (Tok::Neq, 2),
            '-' if peek == Some('>') => (Tok::Arrow, 2),
            '<' if peek == Some('-') && peek2 == Some('>') => (Tok::DArrow, 3),
            '<' if peek == Some('=') => (Tok::Leq, 2),
            c if c.is_ascii_digit() => {
                let mut j = i;
                while j < chars.len() && chars[j].1.is_ascii_digit() {
                    j += 1;
                }
                let s: String = chars[i..j].iter().map(|p| p.1).collect();
                let n = s.parse().map_err(|_| err(pos, format!("number too large: {s}")))?;
                (Tok::Num(n), j - i)
            }
            c if c.is_alphabetic() || c == '_' => {
                let mut j = i;
                while j < chars.len() && (chars[j].1.is_alphanumeric() || chars[j].1 == '_' || chars[j].1 == '\'') {
                    j += 1;
                }
                (Tok::Ident(chars[i..j].iter().map(|p| p.1).collect()), j - i)
            }
            other => return Err(err(pos, format!("unexpected character '{other}'"))),
        };
        out.push((tok, pos));
        i += len;
    }
    out.push((Tok::End, text.len()));
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    i: usize,
    /// Second-order variables bound by enclosing quantifiers, innermost last.
    so_scope: Vec<SoVar>,
    /// Free SO variables seen with an annotation, to check consistent use.
    free_so: HashMap<String, SoVar>,
}

pub fn parse(text: &str) -> Result<Formula, ParseError> {
    let mut p = Parser { toks: lex(text)?, i: 0, so_scope: Vec::new(), free_so: HashMap::new() };
    let f = p.formula()?;
    if p.peek() != &Tok::End {
        return Err(p.unexpected("end of input"));
    }
    Ok(f)
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.i].0
    }

    fn peek_at(&self, k: usize) -> &Tok {
        let j = (self.i + k).min(self.toks.len() - 1);
        &self.toks[j].0
    }

    fn pos(&self) -> usize {
        self.toks[self.i].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.i].0.clone();
        if self.i + 1 < self.toks.len() {
            self.i += 1;
        }
        t
    }

    fn unexpected(&self, wanted: &str) -> ParseError {
        ParseError::Syntax { pos: self.pos(), msg: format!("expected {wanted}, found {}", describe(self.peek())) }
    }

    fn expect(&mut self, t: Tok, wanted: &str) -> Result<(), ParseError> {
        if *self.peek() == t {
            self.bump();
            Ok(())
        } else {
            Err(self.unexpected(wanted))
        }
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn name(&mut self, what: &str) -> Result<String, ParseError> {
        match self.peek().clone() {
            Tok::Ident(s) if !is_reserved(&s) => {
                self.bump();
                Ok(s)
            }
            _ => Err(self.unexpected(what)),
        }
    }

    fn formula(&mut self) -> Result<Formula, ParseError> {
        let mut left = self.imp()?;
        while *self.peek() == Tok::DArrow {
            self.bump();
            let right = self.imp()?;
            left = Formula::Iff(Box::new(left), Box::new(right));
        }
        Ok(left)
    }

    fn imp(&mut self) -> Result<Formula, ParseError> {
        let left = self.disj()?;
        if *self.peek() == Tok::Arrow {
            self.bump();
            let right = self.imp()?;
            return Ok(Formula::Implies(Box::new(left), Box::new(right)));
        }
        Ok(left)
    }

    fn disj(&mut self) -> Result<Formula, ParseError> {
        let first = self.conj()?;
        if *self.peek() != Tok::Bar {
            return Ok(first);
        }
        let mut items = vec![first];
        while *self.peek() == Tok::Bar {
            self.bump();
            items.push(self.conj()?);
        }
        Ok(Formula::Or(items))
    }

    fn conj(&mut self) -> Result<Formula, ParseError> {
        let first = self.unary()?;
        if *self.peek() != Tok::Amp {
            return Ok(first);
        }
        let mut items = vec![first];
        while *self.peek() == Tok::Amp {
            self.bump();
            items.push(self.unary()?);
        }
        Ok(Formula::And(items))
    }

    fn unary(&mut self) -> Result<Formula, ParseError> {
        if *self.peek() == Tok::Tilde {
            self.bump();
            return Ok(Formula::Not(Box::new(self.unary()?)));
        }
        if self.is_kw("Ex") {
            self.bump();
            let mut vars = vec![self.name("variable")?];
            while *self.peek() != Tok::Dot {
                vars.push(self.name("variable or '.'")?);
            }
            self.bump();
            let body = self.formula()?;
            return Ok(vars.into_iter().rev().fold(body, |acc, v| Formula::Exists(v, Box::new(acc))));
        }
        if self.is_kw("All") {
            self.bump();
            let mut vars = vec![self.name("variable")?];
            loop {
                match self.peek() {
                    Tok::Comma => {
                        self.bump();
                        vars.push(self.name("variable")?);
                    }
                    Tok::Ident(s) if s != "in" && !is_reserved(s) => {
                        vars.push(self.name("variable")?);
                    }
                    _ => break,
                }
            }
            if self.is_kw("in") {
                self.bump();
                let gpos = self.pos();
                let gname = self.name("guard name")?;
                let guard = if *self.peek() == Tok::Caret {
                    let (r, k) = self.annotation()?;
                    SoVar { name: gname, arity: r, exponent: k }
                } else {
                    self.lookup_so(&gname).ok_or_else(|| ParseError::Syntax {
                        pos: gpos,
                        msg: format!("guard {gname} is not a bound second-order variable; annotate it as {gname}^{{r,k}}"),
                    })?
                };
                if guard.arity != vars.len() {
                    return Err(ParseError::Arity { pos: gpos, name: guard.name, expected: guard.arity, got: vars.len() });
                }
                self.note_free(&guard, gpos)?;
                self.expect(Tok::Dot, "'.'")?;
                let body = self.formula()?;
                return Ok(Formula::ForallIn(vars, guard, Box::new(body)));
            }
            if vars.len() != 1 {
                return Err(self.unexpected("'in' after several variables"));
            }
            self.expect(Tok::Dot, "'.' or 'in'")?;
            let body = self.formula()?;
            return Ok(Formula::Forall(vars.pop().unwrap(), Box::new(body)));
        }
        if self.is_kw("SEx") || self.is_kw("SAll") {
            let existential = self.is_kw("SEx");
            self.bump();
            let name = self.name("second-order variable")?;
            if *self.peek() != Tok::Caret {
                return Err(self.unexpected("'^{r,k}'"));
            }
            let (arity, exponent) = self.annotation()?;
            let v = SoVar { name, arity, exponent };
            self.expect(Tok::Dot, "'.'")?;
            self.so_scope.push(v.clone());
            let body = self.formula();
            self.so_scope.pop();
            let body = Box::new(body?);
            return Ok(if existential { Formula::SoExists(v, body) } else { Formula::SoForall(v, body) });
        }
        self.primary()
    }

    /// Parses `^{r,k}` and returns (r, k).
    fn annotation(&mut self) -> Result<(usize, usize), ParseError> {
        self.expect(Tok::Caret, "'^'")?;
        self.expect(Tok::LBrace, "'{'")?;
        let rpos = self.pos();
        let r = self.number()?;
        if r == 0 {
            return Err(ParseError::Syntax { pos: rpos, msg: "second-order arity must be at least 1".into() });
        }
        self.expect(Tok::Comma, "','")?;
        let k = self.number()?;
        self.expect(Tok::RBrace, "'}'")?;
        Ok((r, k))
    }

    fn number(&mut self) -> Result<usize, ParseError> {
        match self.peek().clone() {
            Tok::Num(n) => {
                self.bump();
                Ok(n)
            }
            _ => Err(self.unexpected("number")),
        }
    }

    fn lookup_so(&self, name: &str) -> Option<SoVar> {
        self.so_scope.iter().rev().find(|v| v.name == name).cloned()
    }

    fn note_free(&mut self, v: &SoVar, pos: usize) -> Result<(), ParseError> {
        if self.lookup_so(&v.name).is_some() {
            return Ok(());
        }
        if let Some(prev) = self.free_so.get(&v.name) {
            if prev != v {
                return Err(ParseError::Syntax {
                    pos,
                    msg: format!("free variable {} used as {} and as {}", v.name, prev, v),
                });
            }
        } else {
            self.free_so.insert(v.name.clone(), v.clone());
        }
        Ok(())
    }

    fn primary(&mut self) -> Result<Formula, ParseError> {
        match self.peek().clone() {
            Tok::LParen => {
                self.bump();
                let f = self.formula()?;
                self.expect(Tok::RParen, "')'")?;
                Ok(f)
            }
            Tok::Ident(s) if s == "true" => {
                self.bump();
                Ok(Formula::True)
            }
            Tok::Ident(s) if s == "false" => {
                self.bump();
                Ok(Formula::False)
            }
            Tok::Ident(s) if !is_reserved(&s) && matches!(self.peek_at(1), Tok::LParen | Tok::Caret) => {
                let pos = self.pos();
                self.bump();
                let annotated = if *self.peek() == Tok::Caret { Some(self.annotation()?) } else { None };
                self.expect(Tok::LParen, "'('")?;
                let mut args = vec![self.term()?];
                while *self.peek() == Tok::Comma {
                    self.bump();
                    args.push(self.term()?);
                }
                self.expect(Tok::RParen, "')' or ','")?;
                let pred = match annotated {
                    Some((arity, exponent)) => {
                        let v = SoVar { name: s.clone(), arity, exponent };
                        if let Some(bound) = self.lookup_so(&s) {
                            if bound != v {
                                return Err(ParseError::Syntax {
                                    pos,
                                    msg: format!("annotation {v} disagrees with bound {bound}"),
                                });
                            }
                        }
                        self.note_free(&v, pos)?;
                        Pred::So(v)
                    }
                    None => match self.lookup_so(&s) {
                        Some(v) => Pred::So(v),
                        None => Pred::Rel(s.clone()),
                    },
                };
                if let Pred::So(v) = &pred {
                    if v.arity != args.len() {
                        return Err(ParseError::Arity { pos, name: s, expected: v.arity, got: args.len() });
                    }
                }
                Ok(Formula::Atom(pred, args))
            }
            _ => {
                let a = self.term()?;
                let op = self.peek().clone();
                if !matches!(op, Tok::Eq | Tok::Neq | Tok::Leq) {
                    return Err(self.unexpected("'=', '!=' or '<='"));
                }
                self.bump();
                let b = self.term()?;
                Ok(match op {
                    Tok::Eq => Formula::Eq(a, b),
                    Tok::Neq => Formula::Not(Box::new(Formula::Eq(a, b))),
                    _ => Formula::Atom(Pred::Rel("LEQ".into()), vec![a, b]),
                })
            }
        }
    }

    fn term(&mut self) -> Result<Term, ParseError> {
        match self.peek().clone() {
            Tok::Num(0) => {
                self.bump();
                Ok(Term::zero())
            }
            Tok::Num(1) => {
                self.bump();
                Ok(Term::one())
            }
            Tok::Ident(s) if s == "logn" || s == "max" => {
                self.bump();
                Ok(Term::Const(s))
            }
            Tok::At => {
                self.bump();
                Ok(Term::Const(self.name("constant name")?))
            }
            Tok::Ident(s) if !is_reserved(&s) => {
                self.bump();
                Ok(Term::Var(s))
            }
            _ => Err(self.unexpected("term")),
        }
    }
}
