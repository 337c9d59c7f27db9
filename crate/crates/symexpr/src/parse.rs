//! Recursive-descent parser for the expression grammar.
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := ('-' | '+') unary | power
//! power   := primary ('^' exponent)?          right associative
//! exponent:= ('-' | '+') exponent | power
//! primary := integer | ident | call | '(' expr ')'
//! call    := ident ('[' integer (',' integer)* ']')? '(' expr (',' expr)* ')'
//! ```
//!
//! `A'(t)`, `A''(t)` are derivatives of a unary opaque function; partial
//! derivatives of several arguments are written `f'[1,0](x, y)`.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_rational::BigRational;

use crate::error::ExprError;
use crate::expr::{Expr, Func, UserFn};

/// Arities of opaque functions seen so far; a later use with a different
/// number of arguments is an error.
#[derive(Clone, Debug, Default)]
pub struct ParseContext {
    arities: HashMap<String, usize>,
}

impl ParseContext {
    pub fn new() -> Self {
        Self::default()
    }

    /// Declares `name` with the given arity. Fails if it conflicts with an
    /// earlier declaration or use.
    pub fn declare(&mut self, name: &str, arity: usize) -> Result<(), ExprError> {
        self.check(name, arity, 0)
    }

    pub fn arity(&self, name: &str) -> Option<usize> {
        self.arities.get(name).copied()
    }

    fn check(&mut self, name: &str, arity: usize, offset: usize) -> Result<(), ExprError> {
        match self.arities.get(name) {
            Some(&a) if a != arity => Err(ExprError::Arity {
                name: name.to_string(),
                expected: a,
                found: arity,
                offset,
            }),
            _ => {
                self.arities.insert(name.to_string(), arity);
                Ok(())
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Int(BigInt),
    Ident(String),
    Sym(char),
    End,
}

fn lex(src: &str) -> Result<Vec<(Tok, usize)>, ExprError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() {
            let s = i;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            if i < bytes.len() && (bytes[i] == b'.' || bytes[i].is_ascii_alphabetic()) {
                return Err(syntax(i, "numbers are integers or integer/integer"));
            }
            out.push((Tok::Int(src[s..i].parse().expect("digits")), s));
        } else if c.is_ascii_alphabetic() || c == b'_' {
            let s = i;
            while i < bytes.len()
                && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_' || bytes[i] == b'\'')
            {
                i += 1;
            }
            out.push((Tok::Ident(src[s..i].to_string()), s));
        } else if b"+-*/^(),[]".contains(&c) {
            out.push((Tok::Sym(c as char), i));
            i += 1;
        } else {
            let ch = src[i..].chars().next().unwrap();
            return Err(syntax(i, &format!("unexpected character `{}`", ch)));
        }
    }
    out.push((Tok::End, src.len()));
    Ok(out)
}

fn syntax(offset: usize, message: &str) -> ExprError {
    ExprError::Syntax {
        offset,
        message: message.to_string(),
    }
}

struct Parser<'c> {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    ctx: &'c mut ParseContext,
}

impl<'c> Parser<'c> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn eat(&mut self, c: char) -> bool {
        if *self.peek() == Tok::Sym(c) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<(), ExprError> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(syntax(self.offset(), &format!("expected `{}`", c)))
        }
    }

    fn expr(&mut self) -> Result<Expr, ExprError> {
        let mut acc = self.term()?;
        loop {
            if self.eat('+') {
                acc = acc + self.term()?;
            } else if self.eat('-') {
                acc = acc - self.term()?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ExprError> {
        let mut acc = self.unary()?;
        loop {
            if self.eat('*') {
                acc = acc * self.unary()?;
            } else if *self.peek() == Tok::Sym('/') {
                let at = self.offset();
                self.bump();
                let d = self.unary()?;
                acc = acc
                    .checked_div(&d)
                    .map_err(|_| syntax(at, "division by zero"))?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ExprError> {
        if self.eat('-') {
            return Ok(-self.unary()?);
        }
        if self.eat('+') {
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ExprError> {
        let base = self.primary()?;
        if *self.peek() != Tok::Sym('^') {
            return Ok(base);
        }
        self.bump();
        let at = self.offset();
        let e = self.exponent()?;
        let r = e
            .as_rational()
            .ok_or_else(|| syntax(at, "exponent must be a rational constant"))?;
        base.pow_rational(r).map_err(|err| match err {
            ExprError::DivisionByZero => syntax(at, "zero raised to a negative power"),
            other => other,
        })
    }

    fn exponent(&mut self) -> Result<Expr, ExprError> {
        if self.eat('-') {
            return Ok(-self.exponent()?);
        }
        if self.eat('+') {
            return self.exponent();
        }
        self.power()
    }

    fn primary(&mut self) -> Result<Expr, ExprError> {
        let at = self.offset();
        match self.bump() {
            Tok::Int(n) => Ok(Expr::from_rational(BigRational::from_integer(n))),
            Tok::Sym('(') => {
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Tok::Ident(name) => self.ident(name, at),
            Tok::End => Err(syntax(at, "unexpected end of input")),
            Tok::Sym(c) => Err(syntax(at, &format!("unexpected `{}`", c))),
        }
    }

    fn ident(&mut self, name: String, at: usize) -> Result<Expr, ExprError> {
        let is_call = matches!(self.peek(), Tok::Sym('(') | Tok::Sym('['));
        let base = name.trim_end_matches('\'');
        let primes = (name.len() - base.len()) as u32;
        if !is_call {
            if primes > 0 {
                return Err(syntax(at, "derivative marker on a non-function"));
            }
            return Ok(match name.as_str() {
                "pi" => Expr::pi(),
                "I" => Expr::i(),
                n if Func::from_name(n).is_some() => {
                    return Err(syntax(at, &format!("`{}` must be called", n)))
                }
                n => Expr::var(n),
            });
        }
        if base.is_empty() || base == "pi" || base == "I" {
            return Err(syntax(at, &format!("`{}` is not a function", name)));
        }
        let orders = if self.eat('[') {
            if primes != 1 {
                return Err(syntax(
                    at,
                    "partial derivative orders follow a single prime",
                ));
            }
            let mut v = Vec::new();
            loop {
                let o = self.offset();
                match self.bump() {
                    Tok::Int(n) => v.push(
                        u32::try_from(n).map_err(|_| syntax(o, "derivative order too large"))?,
                    ),
                    _ => return Err(syntax(o, "expected a derivative order")),
                }
                if self.eat(']') {
                    break;
                }
                self.expect(',')?;
            }
            Some(v)
        } else {
            None
        };
        self.expect('(')?;
        let mut args = vec![self.expr()?];
        while self.eat(',') {
            args.push(self.expr()?);
        }
        self.expect(')')?;

        if let Some(f) = Func::from_name(base) {
            if primes > 0 {
                return Err(syntax(
                    at,
                    "derivative markers apply to opaque functions only",
                ));
            }
            if args.len() != 1 {
                return Err(ExprError::Arity {
                    name: base.to_string(),
                    expected: 1,
                    found: args.len(),
                    offset: at,
                });
            }
            return Ok(Expr::func(f, args.pop().unwrap()));
        }
        self.ctx.check(base, args.len(), at)?;
        let derivs = match orders {
            Some(v) => {
                if v.len() != args.len() {
                    return Err(syntax(at, "one derivative order per argument"));
                }
                v
            }
            None if primes == 0 => vec![0; args.len()],
            None if args.len() == 1 => vec![primes],
            None => return Err(syntax(at, "use f'[i,j,...] for partial derivatives")),
        };
        Ok(Expr::user(
            UserFn {
                name: base.into(),
                derivs,
            },
            args,
        ))
    }
}

/// Parses with a fresh context.
pub fn parse(src: &str) -> Result<Expr, ExprError> {
    parse_with(src, &mut ParseContext::new())
}

/// Parses, checking opaque function arities against `ctx` and recording new
/// ones.
pub fn parse_with(src: &str, ctx: &mut ParseContext) -> Result<Expr, ExprError> {
    let toks = lex(src)?;
    let mut p = Parser { toks, pos: 0, ctx };
    let e = p.expr()?;
    if *p.peek() != Tok::End {
        return Err(syntax(p.offset(), "unexpected trailing input"));
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precedence_and_associativity() {
        assert_eq!(parse("-x^2").unwrap(), -Expr::var("x").powi(2).unwrap());
        assert_eq!(parse("2^3^2").unwrap(), Expr::int(512));
        assert_eq!(parse("1/2/3").unwrap(), Expr::rational(1, 6));
        assert_eq!(parse("x^-1").unwrap(), parse("1/x").unwrap());
    }

    #[test]
    fn syntax_errors_carry_offsets() {
        match parse("1 + * 2") {
            Err(ExprError::Syntax { offset, .. }) => assert_eq!(offset, 4),
            other => panic!("{:?}", other),
        }
        assert!(matches!(
            parse("(x"),
            Err(ExprError::Syntax { offset: 2, .. })
        ));
        assert!(parse("x^y").is_err());
        assert!(parse("1.5").is_err());
    }

    #[test]
    fn arity_conflicts() {
        assert!(matches!(
            parse("f(x) + f(x, y)"),
            Err(ExprError::Arity { .. })
        ));
        let mut ctx = ParseContext::new();
        ctx.declare("A", 1).unwrap();
        assert!(parse_with("A(x, y)", &mut ctx).is_err());
        assert!(parse("sin(x, y)").is_err());
    }

    #[test]
    fn derivative_markers() {
        let e = parse("f'[1,0](x, y)").unwrap();
        assert_eq!(e, parse("f(x, y)").unwrap().diff("x"));
        assert_eq!(
            parse("A''(t)").unwrap(),
            parse("A(t)").unwrap().diff("t").diff("t")
        );
    }

    #[test]
    fn reserved_names() {
        assert_eq!(parse("I*I").unwrap(), Expr::int(-1));
        assert!(parse("pi(x)").is_err());
        assert!(parse("sin").is_err());
    }
}
