//! Scalar expressions in the step size `h`, used by method-definition files.
//!
//! Grammar (EBNF):
//!
//! ```text
//! expr    = term { ("+" | "-") term } ;
//! term    = unary { ("*" | "/") unary } ;
//! unary   = ("-" | "+") unary | power ;
//! power   = primary [ "^" unary ] ;
//! primary = number | "h" | "pi" | "inf"
//!         | ("sin" | "cos" | "sqrt") "(" expr ")"
//!         | "(" expr ")" ;
//! number  = digit { digit } [ "." { digit } ] [ ("e" | "E") [ "+" | "-" ] digit { digit } ] ;
//! ```
//!
//! `^` is right-associative and binds tighter than unary minus, so `-h^2`
//! is `-(h^2)`.

use std::fmt;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Sqrt,
}

impl Func {
    fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Sqrt => "sqrt",
        }
    }

    fn apply(self, x: f64) -> f64 {
        match self {
            Func::Sin => x.sin(),
            Func::Cos => x.cos(),
            Func::Sqrt => x.sqrt(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    H,
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

impl Expr {
    pub fn eval(&self, h: f64) -> f64 {
        match self {
            Expr::Num(v) => *v,
            Expr::H => h,
            Expr::Neg(a) => -a.eval(h),
            Expr::Add(a, b) => a.eval(h) + b.eval(h),
            Expr::Sub(a, b) => a.eval(h) - b.eval(h),
            Expr::Mul(a, b) => a.eval(h) * b.eval(h),
            Expr::Div(a, b) => a.eval(h) / b.eval(h),
            Expr::Pow(a, b) => {
                let e = b.eval(h);
                let base = a.eval(h);
                if e == e.trunc() && e.abs() <= 64.0 {
                    base.powi(e as i32)
                } else {
                    base.powf(e)
                }
            }
            Expr::Call(f, a) => f.apply(a.eval(h)),
        }
    }

    pub fn depends_on_h(&self) -> bool {
        match self {
            Expr::Num(_) => false,
            Expr::H => true,
            Expr::Neg(a) | Expr::Call(_, a) => a.depends_on_h(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) | Expr::Pow(a, b) => {
                a.depends_on_h() || b.depends_on_h()
            }
        }
    }

    /// `c0 + c1 h + c2 h^2`, dropping zero terms.
    pub fn quadratic(c0: f64, c1: f64, c2: f64) -> Expr {
        let mut terms: Vec<Expr> = Vec::new();
        if c0 != 0.0 {
            terms.push(Expr::Num(c0));
        }
        if c1 != 0.0 {
            terms.push(Expr::Mul(Box::new(Expr::Num(c1)), Box::new(Expr::H)));
        }
        if c2 != 0.0 {
            let h2 = Expr::Pow(Box::new(Expr::H), Box::new(Expr::Num(2.0)));
            terms.push(Expr::Mul(Box::new(Expr::Num(c2)), Box::new(h2)));
        }
        let mut it = terms.into_iter();
        match it.next() {
            None => Expr::Num(0.0),
            Some(first) => it.fold(first, |acc, t| Expr::Add(Box::new(acc), Box::new(t))),
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) if v.is_infinite() && *v > 0.0 => write!(f, "inf"),
            Expr::Num(v) if *v < 0.0 || (*v == 0.0 && v.is_sign_negative()) => write!(f, "(-{:?})", -v),
            Expr::Num(v) => write!(f, "{v:?}"),
            Expr::H => write!(f, "h"),
            Expr::Neg(a) => write!(f, "(-{})", Grouped(a, false)),
            Expr::Add(a, b) => write!(f, "({a} + {b})"),
            Expr::Sub(a, b) => write!(f, "({a} - {b})"),
            Expr::Mul(a, b) => write!(f, "{a}*{}", Grouped(b, false)),
            Expr::Div(a, b) => write!(f, "{a}/{}", Grouped(b, false)),
            Expr::Pow(a, b) => write!(f, "{}^{}", Grouped(a, true), Grouped(b, true)),
            Expr::Call(func, a) => write!(f, "{}({a})", func.name()),
        }
    }
}

/// Parenthesizes products and quotients (and powers, if the flag is set) so
/// that the printed form parses back to the same tree.
struct Grouped<'a>(&'a Expr, bool);

impl fmt::Display for Grouped<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            Expr::Mul(..) | Expr::Div(..) => write!(f, "({})", self.0),
            Expr::Pow(..) if self.1 => write!(f, "({})", self.0),
            e => write!(f, "{e}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
    End,
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    column: usize,
}

fn lex(src: &str, line: usize, col0: usize) -> Result<Vec<Spanned>> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    let err = |i: usize, msg: String| Error::Parse {
        line,
        column: col0 + i,
        message: msg,
    };
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        if c.is_ascii_digit() || c == '.' {
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
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
            let text: String = chars[start..i].iter().collect();
            let v: f64 = text
                .parse()
                .map_err(|_| err(start, format!("malformed number '{text}'")))?;
            out.push(Spanned {
                tok: Tok::Num(v),
                column: col0 + start,
            });
        } else if c.is_ascii_alphabetic() || c == '_' {
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push(Spanned {
                tok: Tok::Ident(chars[start..i].iter().collect()),
                column: col0 + start,
            });
        } else if "+-*/^()".contains(c) {
            out.push(Spanned {
                tok: Tok::Op(c),
                column: col0 + start,
            });
            i += 1;
        } else {
            return Err(err(start, format!("unexpected character '{c}'")));
        }
    }
    out.push(Spanned {
        tok: Tok::End,
        column: col0 + chars.len(),
    });
    Ok(out)
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
    line: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn error(&self, message: impl Into<String>) -> Error {
        Error::Parse {
            line: self.line,
            column: self.toks[self.pos].column,
            message: message.into(),
        }
    }

    fn eat(&mut self, op: char) -> bool {
        if *self.peek() == Tok::Op(op) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, op: char) -> Result<()> {
        if self.eat(op) {
            Ok(())
        } else {
            Err(self.error(format!("expected '{op}'")))
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            if self.eat('+') {
                lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat('-') {
                lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat('*') {
                lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
            } else if self.eat('/') {
                lhs = Expr::Div(Box::new(lhs), Box::new(self.unary()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.eat('-') {
            Ok(Expr::Neg(Box::new(self.unary()?)))
        } else if self.eat('+') {
            self.unary()
        } else {
            self.power()
        }
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.primary()?;
        if self.eat('^') {
            Ok(Expr::Pow(Box::new(base), Box::new(self.unary()?)))
        } else {
            Ok(base)
        }
    }

    fn primary(&mut self) -> Result<Expr> {
        match self.peek().clone() {
            Tok::Num(v) => {
                self.pos += 1;
                Ok(Expr::Num(v))
            }
            Tok::Ident(name) => {
                let func = match name.as_str() {
                    "h" => {
                        self.pos += 1;
                        return Ok(Expr::H);
                    }
                    "pi" => {
                        self.pos += 1;
                        return Ok(Expr::Num(std::f64::consts::PI));
                    }
                    "inf" => {
                        self.pos += 1;
                        return Ok(Expr::Num(f64::INFINITY));
                    }
                    "sin" => Func::Sin,
                    "cos" => Func::Cos,
                    "sqrt" => Func::Sqrt,
                    _ => return Err(self.error(format!("unknown identifier '{name}'"))),
                };
                self.pos += 1;
                self.expect('(')?;
                let arg = self.expr()?;
                self.expect(')')?;
                Ok(Expr::Call(func, Box::new(arg)))
            }
            Tok::Op('(') => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Tok::End => Err(self.error("unexpected end of expression")),
            Tok::Op(c) => Err(self.error(format!("unexpected '{c}'"))),
        }
    }
}

/// Parses one expression. `line` and `column` locate `src` inside a larger
/// file so errors point at the right place (both 1-based).
pub fn parse_at(src: &str, line: usize, column: usize) -> Result<Expr> {
    let toks = lex(src, line, column)?;
    let mut p = Parser { toks, pos: 0, line };
    let e = p.expr()?;
    if *p.peek() != Tok::End {
        return Err(p.error("trailing input after expression"));
    }
    Ok(e)
}

pub fn parse(src: &str) -> Result<Expr> {
    parse_at(src, 1, 1)
}
