//! A small arithmetic expression evaluator for user-supplied potentials.
//! Variables are `u1 .. um`; the usual operators, parentheses and a fixed
//! set of functions are supported. Parse errors carry the byte position.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Const(f64),
    Var(usize),
    Neg(Box<Node>),
    Add(Box<Node>, Box<Node>),
    Sub(Box<Node>, Box<Node>),
    Mul(Box<Node>, Box<Node>),
    Div(Box<Node>, Box<Node>),
    Pow(Box<Node>, Box<Node>),
    Call(Func, Box<Node>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Func {
    Sin,
    Cos,
    Tan,
    Exp,
    Log,
    Sqrt,
    Abs,
    Sinh,
    Cosh,
    Tanh,
}

impl Func {
    fn apply(self, x: f64) -> f64 {
        match self {
            Func::Sin => x.sin(),
            Func::Cos => x.cos(),
            Func::Tan => x.tan(),
            Func::Exp => x.exp(),
            Func::Log => x.ln(),
            Func::Sqrt => x.sqrt(),
            Func::Abs => x.abs(),
            Func::Sinh => x.sinh(),
            Func::Cosh => x.cosh(),
            Func::Tanh => x.tanh(),
        }
    }
}

/// A parsed expression over `u1 .. um`.
#[derive(Debug, Clone, PartialEq)]
pub struct Expression {
    root: Node,
    source: String,
    max_var: usize,
}

impl Expression {
    pub fn parse(source: &str) -> Result<Self> {
        let mut p = Parser {
            bytes: source.as_bytes(),
            pos: 0,
            max_var: 0,
        };
        p.skip_ws();
        let root = p.expr(0)?;
        p.skip_ws();
        if p.pos != p.bytes.len() {
            return Err(p.error("unexpected trailing input"));
        }
        Ok(Self {
            root,
            source: source.to_string(),
            max_var: p.max_var,
        })
    }

    /// Highest variable index referenced (1-based); 0 when constant.
    pub fn max_var(&self) -> usize {
        self.max_var
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn eval(&self, u: &[f64]) -> f64 {
        eval(&self.root, u)
    }
}

fn eval(node: &Node, u: &[f64]) -> f64 {
    match node {
        Node::Const(c) => *c,
        Node::Var(i) => u.get(*i).copied().unwrap_or(f64::NAN),
        Node::Neg(a) => -eval(a, u),
        Node::Add(a, b) => eval(a, u) + eval(b, u),
        Node::Sub(a, b) => eval(a, u) - eval(b, u),
        Node::Mul(a, b) => eval(a, u) * eval(b, u),
        Node::Div(a, b) => eval(a, u) / eval(b, u),
        Node::Pow(a, b) => eval(a, u).powf(eval(b, u)),
        Node::Call(f, a) => f.apply(eval(a, u)),
    }
}

struct Parser<'a> {
    bytes: &'a [u8],
    pos: usize,
    max_var: usize,
}

// Pratt-style precedence: 1 add/sub, 2 mul/div, 3 power (right assoc).
impl<'a> Parser<'a> {
    fn error(&self, message: &str) -> Error {
        Error::Expr {
            position: self.pos,
            message: message.to_string(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<u8> {
        self.bytes.get(self.pos).copied()
    }

    fn expr(&mut self, depth: usize) -> Result<Node> {
        if depth > 200 {
            return Err(self.error("expression nests too deeply"));
        }
        let mut lhs = self.term(depth)?;
        loop {
            self.skip_ws();
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    let rhs = self.term(depth)?;
                    lhs = Node::Add(Box::new(lhs), Box::new(rhs));
                }
                Some(b'-') => {
                    self.pos += 1;
                    let rhs = self.term(depth)?;
                    lhs = Node::Sub(Box::new(lhs), Box::new(rhs));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self, depth: usize) -> Result<Node> {
        let mut lhs = self.unary(depth)?;
        loop {
            self.skip_ws();
            match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                    let rhs = self.unary(depth)?;
                    lhs = Node::Mul(Box::new(lhs), Box::new(rhs));
                }
                Some(b'/') => {
                    self.pos += 1;
                    let rhs = self.unary(depth)?;
                    lhs = Node::Div(Box::new(lhs), Box::new(rhs));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self, depth: usize) -> Result<Node> {
        self.skip_ws();
        if self.peek() == Some(b'-') {
            self.pos += 1;
            let inner = self.unary(depth + 1)?;
            return Ok(Node::Neg(Box::new(inner)));
        }
        self.power(depth)
    }

    fn power(&mut self, depth: usize) -> Result<Node> {
        let base = self.atom(depth)?;
        self.skip_ws();
        if self.peek() == Some(b'^') {
            self.pos += 1;
            // right-associative; unary minus binds looser than '^'
            let exp = self.unary(depth + 1)?;
            return Ok(Node::Pow(Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn atom(&mut self, depth: usize) -> Result<Node> {
        self.skip_ws();
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let inner = self.expr(depth + 1)?;
                self.skip_ws();
                if self.peek() != Some(b')') {
                    return Err(self.error("expected `)`"));
                }
                self.pos += 1;
                Ok(inner)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => self.ident(depth),
            Some(_) => Err(self.error("expected a number, name or `(`")),
            None => Err(self.error("unexpected end of expression")),
        }
    }

    fn number(&mut self) -> Result<Node> {
        let start = self.pos;
        while let Some(c) = self.peek() {
            if c.is_ascii_digit() || c == b'.' {
                self.pos += 1;
            } else if (c == b'e' || c == b'E') && self.pos > start {
                self.pos += 1;
                if matches!(self.peek(), Some(b'+') | Some(b'-')) {
                    self.pos += 1;
                }
            } else {
                break;
            }
        }
        let text = std::str::from_utf8(&self.bytes[start..self.pos]).unwrap_or("");
        text.parse::<f64>()
            .map(Node::Const)
            .map_err(|_| Error::Expr {
                position: start,
                message: format!("malformed number `{text}`"),
            })
    }

    fn ident(&mut self, depth: usize) -> Result<Node> {
        let start = self.pos;
        while let Some(c) = self.peek() {
            if c.is_ascii_alphanumeric() || c == b'_' {
                self.pos += 1;
            } else {
                break;
            }
        }
        let name = std::str::from_utf8(&self.bytes[start..self.pos]).unwrap_or("");
        if let Some(rest) = name.strip_prefix('u') {
            if let Ok(idx) = rest.parse::<usize>() {
                if idx == 0 {
                    return Err(Error::Expr {
                        position: start,
                        message: "variables are u1, u2, ...".to_string(),
                    });
                }
                self.max_var = self.max_var.max(idx);
                return Ok(Node::Var(idx - 1));
            }
        }
        match name {
            "pi" => return Ok(Node::Const(std::f64::consts::PI)),
            "e" => return Ok(Node::Const(std::f64::consts::E)),
            _ => {}
        }
        let func = match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "tan" => Func::Tan,
            "exp" => Func::Exp,
            "log" | "ln" => Func::Log,
            "sqrt" => Func::Sqrt,
            "abs" => Func::Abs,
            "sinh" => Func::Sinh,
            "cosh" => Func::Cosh,
            "tanh" => Func::Tanh,
            _ => {
                return Err(Error::Expr {
                    position: start,
                    message: format!("unknown name `{name}`"),
                })
            }
        };
        self.skip_ws();
        if self.peek() != Some(b'(') {
            return Err(self.error("expected `(` after function name"));
        }
        self.pos += 1;
        let arg = self.expr(depth + 1)?;
        self.skip_ws();
        if self.peek() != Some(b')') {
            return Err(self.error("expected `)`"));
        }
        self.pos += 1;
        Ok(Node::Call(func, Box::new(arg)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn values_and_precedence() {
        let e = Expression::parse("1 + 2*3^2").unwrap();
        assert_relative_eq!(e.eval(&[]), 19.0);
        let e = Expression::parse("-2^2").unwrap();
        assert_relative_eq!(e.eval(&[]), -4.0); // unary minus binds looser
        let e = Expression::parse("2^-1").unwrap();
        assert_relative_eq!(e.eval(&[]), 0.5);
        let e = Expression::parse("(1+2)*(3-4)").unwrap();
        assert_relative_eq!(e.eval(&[]), -3.0);
    }

    #[test]
    fn variables_and_functions() {
        let e = Expression::parse("u1*u2 + 0.5").unwrap();
        assert_eq!(e.max_var(), 2);
        assert_relative_eq!(e.eval(&[2.0, 3.0]), 6.5);
        let e = Expression::parse("exp(log(u1))").unwrap();
        assert_relative_eq!(e.eval(&[1.7]), 1.7, epsilon = 1e-14);
        let e = Expression::parse("sin(pi/2) + tanh(0)").unwrap();
        assert_relative_eq!(e.eval(&[]), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn errors_carry_positions() {
        match Expression::parse("1 + foo") {
            Err(Error::Expr { position, .. }) => assert_eq!(position, 4),
            other => panic!("expected Expr error, got {other:?}"),
        }
        assert!(Expression::parse("").is_err());
        assert!(Expression::parse("(1+2").is_err());
        assert!(Expression::parse("1 2").is_err());
        assert!(Expression::parse("u0").is_err());
        assert!(Expression::parse("sin 1").is_err());
    }

    #[test]
    fn odd_inputs_do_not_panic() {
        for s in ["", "^", "...", "1e", "u999999999999999999999", "((((", "--1", "1//2", "\u{0}"] {
            let _ = Expression::parse(s);
        }
        let e = Expression::parse("--1").unwrap();
        assert_relative_eq!(e.eval(&[]), 1.0);
    }
}
