//! Kernel DSL parser.
//!
//! ```text
//! # comment
//! tensor A(1024,1024) format(dense,compressed)
//! tensor B(1024,1024) format(dense,compressed) order(1,0) ptr(32) idx(32)
//! tensor C(1024,1024) format(dense,compressed)
//! index i,j                      (optional; declares broadcast-only vars)
//! C(i,j) = A(i,k) * B(k,j)
//! ```
//!
//! Tensors without `format` are dense. The assignment operator is `=`,
//! `+=` (accumulate into the existing output) or `*=` (shorthand for
//! `X(..) = X(..) * rhs`). Expressions use `+`, `-`, `*`, unary `-`,
//! parentheses, numeric constants and tensor accesses; a rank-0 tensor may
//! be written with or without `()`.

use super::ast::{Access, AssignOp, Expr, Kernel, TensorDecl};
use crate::encoding::{Encoding, LevelType, TensorType};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Num(f64),
    LParen,
    RParen,
    Comma,
    Assign,
    PlusAssign,
    StarAssign,
    Plus,
    Minus,
    Star,
    Newline,
    Eof,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    column: usize,
}

fn lex(text: &str) -> Result<Vec<Token>> {
    let mut out = Vec::new();
    for (li, line) in text.lines().enumerate() {
        let chars: Vec<char> = line.chars().collect();
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            let column = i + 1;
            let push = |out: &mut Vec<Token>, tok| {
                out.push(Token {
                    tok,
                    line: li + 1,
                    column,
                })
            };
            match c {
                '#' => break,
                c if c.is_whitespace() => i += 1,
                ';' => {
                    push(&mut out, Tok::Newline);
                    i += 1;
                }
                '(' | ')' | ',' | '-' => {
                    let tok = match c {
                        '(' => Tok::LParen,
                        ')' => Tok::RParen,
                        ',' => Tok::Comma,
                        _ => Tok::Minus,
                    };
                    push(&mut out, tok);
                    i += 1;
                }
                '=' | '+' | '*' => {
                    let eq = chars.get(i + 1) == Some(&'=');
                    let tok = match (c, eq) {
                        ('=', _) => Tok::Assign,
                        ('+', true) => Tok::PlusAssign,
                        ('*', true) => Tok::StarAssign,
                        ('+', false) => Tok::Plus,
                        _ => Tok::Star,
                    };
                    push(&mut out, tok);
                    i += if eq && c != '=' { 2 } else { 1 };
                }
                c if c.is_ascii_digit() || c == '.' => {
                    let start = i;
                    while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                        i += 1;
                    }
                    // Exponent part.
                    if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                        let mut j = i + 1;
                        if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                            j += 1;
                        }
                        if j < chars.len() && chars[j].is_ascii_digit() {
                            i = j;
                            while i < chars.len() && chars[i].is_ascii_digit() {
                                i += 1;
                            }
                        }
                    }
                    let s: String = chars[start..i].iter().collect();
                    let v = s.parse::<f64>().map_err(|_| Error::Syntax {
                        line: li + 1,
                        column,
                        message: format!("bad number `{s}`"),
                    })?;
                    push(&mut out, Tok::Num(v));
                }
                c if c.is_alphabetic() || c == '_' => {
                    let start = i;
                    while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                        i += 1;
                    }
                    push(&mut out, Tok::Ident(chars[start..i].iter().collect()));
                }
                other => {
                    return Err(Error::Syntax {
                        line: li + 1,
                        column,
                        message: format!("unexpected character `{other}`"),
                    })
                }
            }
        }
        out.push(Token {
            tok: Tok::Newline,
            line: li + 1,
            column: chars.len() + 1,
        });
    }
    let line = out.last().map_or(1, |t| t.line);
    out.push(Token {
        tok: Tok::Eof,
        line,
        column: 1,
    });
    Ok(out)
}

struct Parser {
    toks: Vec<Token>,
    at: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].tok
    }

    fn next(&mut self) -> Tok {
        let t = self.toks[self.at].tok.clone();
        if t != Tok::Eof {
            self.at += 1;
        }
        t
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T> {
        let t = &self.toks[self.at];
        Err(Error::Syntax {
            line: t.line,
            column: t.column,
            message: message.into(),
        })
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<()> {
        if *self.peek() == tok {
            self.next();
            Ok(())
        } else {
            self.err(format!("expected {what}"))
        }
    }

    fn ident(&mut self, what: &str) -> Result<String> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.next();
                Ok(s)
            }
            _ => self.err(format!("expected {what}")),
        }
    }

    fn integer(&mut self) -> Result<usize> {
        match *self.peek() {
            Tok::Num(v) if v >= 0.0 && v.fract() == 0.0 => {
                self.next();
                Ok(v as usize)
            }
            _ => self.err("expected a non-negative integer"),
        }
    }

    /// `( item, item, ... )`, possibly empty.
    fn list<T>(&mut self, mut item: impl FnMut(&mut Self) -> Result<T>) -> Result<Vec<T>> {
        self.expect(Tok::LParen, "`(`")?;
        let mut out = Vec::new();
        if *self.peek() == Tok::RParen {
            self.next();
            return Ok(out);
        }
        loop {
            out.push(item(self)?);
            match self.next() {
                Tok::Comma => continue,
                Tok::RParen => return Ok(out),
                _ => {
                    self.at -= 1;
                    return self.err("expected `,` or `)`");
                }
            }
        }
    }

    fn end_of_statement(&mut self) -> Result<()> {
        match self.peek() {
            Tok::Newline => {
                self.next();
                Ok(())
            }
            Tok::Eof => Ok(()),
            _ => self.err("expected end of line"),
        }
    }

    fn declaration(&mut self) -> Result<TensorDecl> {
        let name = self.ident("tensor name")?;
        let shape = self.list(|p| p.integer())?;
        let encoding = self.clauses().map_err(|e| match e {
            Error::Unsupported(m) => Error::Unsupported(format!("tensor `{name}`: {m}")),
            e => e,
        })?;
        Ok(TensorDecl {
            name,
            ttype: TensorType::new(shape, encoding)?,
        })
    }

    /// Optional `format(..) order(..) ptr(..) idx(..)` clauses.
    fn clauses(&mut self) -> Result<Option<Encoding>> {
        let mut levels = None;
        let mut ordering = None;
        let mut ptr = None;
        let mut idx = None;
        while let Tok::Ident(clause) = self.peek().clone() {
            self.next();
            match clause.as_str() {
                "format" => {
                    levels = Some(self.list(|p| {
                        let s = p.ident("`dense` or `compressed`")?;
                        match s.parse::<LevelType>() {
                            Ok(l) => Ok(l),
                            Err(_) => {
                                p.at -= 1;
                                p.err(format!("unknown level type `{s}`"))
                            }
                        }
                    })?)
                }
                "order" => ordering = Some(self.list(|p| p.integer())?),
                "ptr" => ptr = Some(self.list(|p| p.integer())?),
                "idx" => idx = Some(self.list(|p| p.integer())?),
                other => {
                    self.at -= 1;
                    return self.err(format!("unknown clause `{other}`"));
                }
            }
        }
        let width = |w: Option<Vec<usize>>| -> Result<Option<u32>> {
            match w.as_deref() {
                None => Ok(None),
                Some([w]) => Ok(Some(*w as u32)),
                Some(_) => Err(Error::Unsupported("bit width takes one value".into())),
            }
        };
        let (ptr, idx) = (width(ptr)?, width(idx)?);
        match levels {
            Some(levels) => Ok(Some(Encoding::new(levels, ordering, ptr, idx)?)),
            None if ordering.is_some() || ptr.is_some() || idx.is_some() => Err(
                Error::Unsupported("order/ptr/idx need a format clause".into()),
            ),
            None => Ok(None),
        }
    }

    fn access_or_name(&mut self) -> Result<Access> {
        let tensor = self.ident("tensor access")?;
        let indices = if *self.peek() == Tok::LParen {
            self.list(|p| p.ident("index variable"))?
        } else {
            Vec::new()
        };
        Ok(Access { tensor, indices })
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut e = self.term()?;
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.next();
                    e = Expr::add(e, self.term()?);
                }
                Tok::Minus => {
                    self.next();
                    e = Expr::sub(e, self.term()?);
                }
                _ => return Ok(e),
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut e = self.unary()?;
        while *self.peek() == Tok::Star {
            self.next();
            e = Expr::mul(e, self.unary()?);
        }
        Ok(e)
    }

    fn unary(&mut self) -> Result<Expr> {
        if *self.peek() == Tok::Minus {
            self.next();
            if let Tok::Num(v) = *self.peek() {
                self.next();
                return Ok(Expr::Const(-v));
            }
            return Ok(Expr::neg(self.unary()?));
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<Expr> {
        match self.peek().clone() {
            Tok::Num(v) => {
                self.next();
                Ok(Expr::Const(v))
            }
            Tok::LParen => {
                self.next();
                let e = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            Tok::Ident(_) => Ok(Expr::Access(self.access_or_name()?)),
            _ => self.err("expected an expression"),
        }
    }
}

/// Parses kernel text into a validated [`Kernel`].
/// Parses encoding clauses on their own, e.g. `format(dense,compressed)
/// order(1,0)`. A preset name such as `csr` is also accepted, and `dense`
/// or empty text means no encoding.
pub fn parse_encoding(text: &str) -> Result<Option<Encoding>> {
    let t = text.trim();
    if t.is_empty() || t.eq_ignore_ascii_case("dense") {
        return Ok(None);
    }
    if let Some(e) = Encoding::preset(t) {
        return Ok(Some(e));
    }
    let mut p = Parser {
        toks: lex(t)?,
        at: 0,
    };
    let e = p.clauses()?;
    while *p.peek() == Tok::Newline {
        p.next();
    }
    if *p.peek() != Tok::Eof {
        return p.err("expected an encoding clause");
    }
    if e.is_none() {
        return Err(Error::Unsupported(format!("`{t}` is not an encoding")));
    }
    Ok(e)
}

pub fn parse_kernel(text: &str) -> Result<Kernel> {
    let mut p = Parser {
        toks: lex(text)?,
        at: 0,
    };
    let mut tensors = Vec::new();
    let mut declared = Vec::new();
    let mut assignment = None;
    loop {
        match p.peek().clone() {
            Tok::Eof => break,
            Tok::Newline => {
                p.next();
            }
            Tok::Ident(kw) if kw == "tensor" && matches!(p.toks[p.at + 1].tok, Tok::Ident(_)) => {
                p.next();
                tensors.push(p.declaration()?);
                p.end_of_statement()?;
            }
            Tok::Ident(kw) if kw == "index" && matches!(p.toks[p.at + 1].tok, Tok::Ident(_)) => {
                p.next();
                loop {
                    declared.push(p.ident("index variable")?);
                    if *p.peek() != Tok::Comma {
                        break;
                    }
                    p.next();
                }
                p.end_of_statement()?;
            }
            Tok::Ident(_) => {
                if assignment.is_some() {
                    return p.err("only one assignment is allowed");
                }
                let lhs = p.access_or_name()?;
                let op = match p.next() {
                    Tok::Assign => Tok::Assign,
                    Tok::PlusAssign => Tok::PlusAssign,
                    Tok::StarAssign => Tok::StarAssign,
                    _ => {
                        p.at -= 1;
                        return p.err("expected `=`, `+=` or `*=`");
                    }
                };
                let rhs = p.expr()?;
                p.end_of_statement()?;
                assignment = Some((lhs, op, rhs));
            }
            _ => return p.err("expected a declaration or an assignment"),
        }
    }
    let Some((lhs, op, rhs)) = assignment else {
        return p.err("missing assignment");
    };
    let (op, rhs) = match op {
        Tok::Assign => (AssignOp::Assign, rhs),
        Tok::PlusAssign => (AssignOp::AddAssign, rhs),
        _ => (AssignOp::Assign, Expr::mul(Expr::Access(lhs.clone()), rhs)),
    };
    Kernel::new(tensors, declared, lhs, op, rhs)
}
