//! Scalar expressions for target velocity components, e.g.
//! `sin(x)+cos(2*x)+sin(3*x)` or `cos(x)*sin(y)`.
//!
//! Grammar, loosest binding first:
//!
//! ```text
//! sum     := product (('+' | '-') product)*
//! product := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := atom ('^' exponent)?
//! exponent:= '-' exponent | power          (right associative)
//! atom    := number | 'x' | 'y' | 'pi' | func '(' sum ')' | '(' sum ')'
//! func    := 'sin' | 'cos' | 'exp'
//! ```

use std::fmt;

use thiserror::Error;

use crate::grid::Grid;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Var {
    X,
    Y,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Exp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(Var),
    Pi,
    Neg(Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("syntax error at byte {offset}: expected {expected}")]
    Syntax { offset: usize, expected: String },
    #[error("unknown identifier `{name}` at byte {offset}")]
    UnknownIdentifier { offset: usize, name: String },
    #[error("unbalanced parenthesis at byte {offset}")]
    UnbalancedParens { offset: usize },
}

impl ParseError {
    pub fn offset(&self) -> usize {
        match self {
            ParseError::Syntax { offset, .. }
            | ParseError::UnknownIdentifier { offset, .. }
            | ParseError::UnbalancedParens { offset } => *offset,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("variable y used on a {dim}-d grid")]
    UnboundVariable { dim: usize },
    #[error("division by zero at grid point {index} ({coords:?})")]
    DivisionByZero { index: usize, coords: Vec<f64> },
}

pub fn parse(text: &str) -> Result<Expr, ParseError> {
    let mut p = Parser { src: text.as_bytes(), pos: 0 };
    let e = p.sum()?;
    p.skip_ws();
    match p.peek() {
        None => Ok(e),
        Some(b')') => Err(ParseError::UnbalancedParens { offset: p.pos }),
        Some(_) => Err(p.expected("operator or end of input")),
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn skip_ws(&mut self) {
        while self.src.get(self.pos).is_some_and(|c| c.is_ascii_whitespace()) {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    /// Consume `c` if it is the next non-blank byte.
    fn eat(&mut self, c: u8) -> bool {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expected(&self, what: &str) -> ParseError {
        ParseError::Syntax { offset: self.pos, expected: what.to_string() }
    }

    fn sum(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.product()?;
        loop {
            let op = if self.eat(b'+') {
                BinOp::Add
            } else if self.eat(b'-') {
                BinOp::Sub
            } else {
                return Ok(lhs);
            };
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(self.product()?));
        }
    }

    fn product(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let op = if self.eat(b'*') {
                BinOp::Mul
            } else if self.eat(b'/') {
                BinOp::Div
            } else {
                return Ok(lhs);
            };
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(self.unary()?));
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.eat(b'-') {
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if self.eat(b'^') {
            return Ok(Expr::Binary(BinOp::Pow, Box::new(base), Box::new(self.exponent()?)));
        }
        Ok(base)
    }

    fn exponent(&mut self) -> Result<Expr, ParseError> {
        if self.eat(b'-') {
            return Ok(Expr::Neg(Box::new(self.exponent()?)));
        }
        self.power()
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        self.skip_ws();
        let start = self.pos;
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let inner = self.sum()?;
                if !self.eat(b')') {
                    return Err(ParseError::UnbalancedParens { offset: start });
                }
                Ok(inner)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() => {
                while self.peek().is_some_and(|c| c.is_ascii_alphanumeric() || c == b'_') {
                    self.pos += 1;
                }
                let name = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii identifier");
                let func = match name {
                    "x" => return Ok(Expr::Var(Var::X)),
                    "y" => return Ok(Expr::Var(Var::Y)),
                    "pi" => return Ok(Expr::Pi),
                    "sin" => Func::Sin,
                    "cos" => Func::Cos,
                    "exp" => Func::Exp,
                    _ => return Err(ParseError::UnknownIdentifier { offset: start, name: name.to_string() }),
                };
                if !self.eat(b'(') {
                    return Err(self.expected(&format!("`(` after `{name}`")));
                }
                let open = self.pos - 1;
                let arg = self.sum()?;
                if !self.eat(b')') {
                    return Err(ParseError::UnbalancedParens { offset: open });
                }
                Ok(Expr::Call(func, Box::new(arg)))
            }
            Some(b')') => Err(ParseError::UnbalancedParens { offset: start }),
            _ => Err(self.expected("number, variable, function or `(`")),
        }
    }

    fn number(&mut self) -> Result<Expr, ParseError> {
        let start = self.pos;
        let digits = |p: &mut Self| {
            let s = p.pos;
            while p.peek().is_some_and(|c| c.is_ascii_digit()) {
                p.pos += 1;
            }
            p.pos - s
        };
        let mut count = digits(self);
        if self.peek() == Some(b'.') {
            self.pos += 1;
            count += digits(self);
        }
        if count == 0 {
            return Err(ParseError::Syntax { offset: start, expected: "digits".into() });
        }
        if matches!(self.peek(), Some(b'e' | b'E')) {
            let mark = self.pos;
            self.pos += 1;
            if matches!(self.peek(), Some(b'+' | b'-')) {
                self.pos += 1;
            }
            if digits(self) == 0 {
                self.pos = mark;
                return Err(self.expected("exponent digits"));
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii number");
        text.parse().map(Expr::Num).map_err(|_| ParseError::Syntax { offset: start, expected: "number".into() })
    }
}

impl Expr {
    pub fn uses(&self, var: Var) -> bool {
        match self {
            Expr::Var(v) => *v == var,
            Expr::Num(_) | Expr::Pi => false,
            Expr::Neg(e) | Expr::Call(_, e) => e.uses(var),
            Expr::Binary(_, a, b) => a.uses(var) || b.uses(var),
        }
    }

    /// Value at `(x, y)`; `None` on division by zero.
    pub fn eval(&self, x: f64, y: f64) -> Option<f64> {
        Some(match self {
            Expr::Num(v) => *v,
            Expr::Var(Var::X) => x,
            Expr::Var(Var::Y) => y,
            Expr::Pi => std::f64::consts::PI,
            Expr::Neg(e) => -e.eval(x, y)?,
            Expr::Call(f, e) => {
                let v = e.eval(x, y)?;
                match f {
                    Func::Sin => v.sin(),
                    Func::Cos => v.cos(),
                    Func::Exp => v.exp(),
                }
            }
            Expr::Binary(op, a, b) => {
                let (a, b) = (a.eval(x, y)?, b.eval(x, y)?);
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div if b == 0.0 => return None,
                    BinOp::Div => a / b,
                    BinOp::Pow => a.powf(b),
                }
            }
        })
    }
}

/// Evaluate at every grid point in flat-index order.
pub fn eval_on_grid(e: &Expr, grid: &Grid) -> Result<Vec<f64>, EvalError> {
    if grid.dim() < 2 && e.uses(Var::Y) {
        return Err(EvalError::UnboundVariable { dim: grid.dim() });
    }
    (0..grid.len())
        .map(|j| {
            let x = grid.coord(j, 0);
            let y = if grid.dim() > 1 { grid.coord(j, 1) } else { 0.0 };
            e.eval(x, y).ok_or_else(|| EvalError::DivisionByZero {
                index: j,
                coords: (0..grid.dim()).map(|a| grid.coord(j, a)).collect(),
            })
        })
        .collect()
}

/// Fully parenthesized form that parses back to the same tree.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) => write!(f, "{v:?}"),
            Expr::Var(Var::X) => f.write_str("x"),
            Expr::Var(Var::Y) => f.write_str("y"),
            Expr::Pi => f.write_str("pi"),
            Expr::Neg(e) => write!(f, "(-{e})"),
            Expr::Call(func, e) => {
                let name = match func {
                    Func::Sin => "sin",
                    Func::Cos => "cos",
                    Func::Exp => "exp",
                };
                write!(f, "{name}({e})")
            }
            Expr::Binary(op, a, b) => {
                let sym = match op {
                    BinOp::Add => "+",
                    BinOp::Sub => "-",
                    BinOp::Mul => "*",
                    BinOp::Div => "/",
                    BinOp::Pow => "^",
                };
                write!(f, "({a} {sym} {b})")
            }
        }
    }
}
