//! Arithmetic expression language for model component functions.
//!
//! ```text
//! expr     := term (('+'|'-') term)*
//! term     := factor (('*'|'/') factor)*
//! factor   := base ('^' exponent)?
//! exponent := factor
//! base     := number | ident | '(' expr ')' | ('-'|'sin'|'cos'|'exp'|'sqrt') base
//! ident    := 'x' digits            (1-based chart coordinate)
//! ```
//!
//! Unary operators bind tighter than `^`, so `-x1^2` is `(-x1)^2`.
//! Callers may register extra identifiers as aliases for coordinates.

use std::fmt;

use thiserror::Error;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Error)]
#[error("syntax error at line {line}, column {column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Neg,
    Sin,
    Cos,
    Exp,
    Sqrt,
}

impl Func {
    fn name(self) -> &'static str {
        match self {
            Func::Neg => "-",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Sqrt => "sqrt",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    fn symbol(self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
            BinOp::Div => '/',
            BinOp::Pow => '^',
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Num(f64),
    Var(usize),
    Unary(Func, Box<Node>),
    Binary(BinOp, Box<Node>, Box<Node>),
}

/// A compiled expression over chart coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Expression {
    root: Node,
    source: String,
}

impl Expression {
    /// Parses `text`; identifiers `x1..xd` refer to coordinates.
    pub fn parse(text: &str) -> Result<Self, ParseError> {
        Self::parse_with_aliases(text, &[])
    }

    pub fn parse_with_aliases(text: &str, aliases: &[(&str, usize)]) -> Result<Self, ParseError> {
        let mut p = Parser {
            src: text,
            chars: text.char_indices().collect(),
            pos: 0,
            aliases,
        };
        p.skip_ws();
        let root = p.expr()?;
        p.skip_ws();
        if p.pos < p.chars.len() {
            return Err(p.error(format!("unexpected `{}`", p.chars[p.pos].1)));
        }
        Ok(Self {
            root,
            source: text.to_string(),
        })
    }

    pub fn constant(v: f64) -> Self {
        Self {
            root: Node::Num(v),
            source: format!("{v:?}"),
        }
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    /// Largest coordinate index (0-based) referenced, if any.
    pub fn max_variable(&self) -> Option<usize> {
        fn walk(n: &Node) -> Option<usize> {
            match n {
                Node::Num(_) => None,
                Node::Var(i) => Some(*i),
                Node::Unary(_, a) => walk(a),
                Node::Binary(_, a, b) => walk(a).max(walk(b)),
            }
        }
        walk(&self.root)
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        eval_node(&self.root, x)
    }

    /// Symbolic partial derivative with respect to coordinate `var`
    /// (0-based). `None` when an exponent depends on `var` (the grammar
    /// has no logarithm).
    pub fn derivative(&self, var: usize) -> Option<Expression> {
        let root = differentiate(&self.root, var)?;
        let mut out = Expression {
            root,
            source: String::new(),
        };
        out.source = out.to_string();
        Some(out)
    }
}

fn depends_on(n: &Node, var: usize) -> bool {
    match n {
        Node::Num(_) => false,
        Node::Var(i) => *i == var,
        Node::Unary(_, a) => depends_on(a, var),
        Node::Binary(_, a, b) => depends_on(a, var) || depends_on(b, var),
    }
}

fn bin(op: BinOp, a: Node, b: Node) -> Node {
    match (op, &a, &b) {
        (BinOp::Mul, Node::Num(z), _) | (BinOp::Mul, _, Node::Num(z)) if *z == 0.0 => Node::Num(0.0),
        (BinOp::Mul, Node::Num(o), _) if *o == 1.0 => b,
        (BinOp::Mul, _, Node::Num(o)) if *o == 1.0 => a,
        (BinOp::Add, Node::Num(z), _) if *z == 0.0 => b,
        (BinOp::Add | BinOp::Sub, _, Node::Num(z)) if *z == 0.0 => a,
        _ => Node::Binary(op, Box::new(a), Box::new(b)),
    }
}

fn differentiate(n: &Node, var: usize) -> Option<Node> {
    use BinOp::*;
    Some(match n {
        Node::Num(_) => Node::Num(0.0),
        Node::Var(i) => Node::Num(if *i == var { 1.0 } else { 0.0 }),
        Node::Unary(f, a) => {
            let da = differentiate(a, var)?;
            let outer = match f {
                Func::Neg => return Some(Node::Unary(Func::Neg, Box::new(da))),
                Func::Sin => Node::Unary(Func::Cos, a.clone()),
                Func::Cos => Node::Unary(Func::Neg, Box::new(Node::Unary(Func::Sin, a.clone()))),
                Func::Exp => n.clone(),
                Func::Sqrt => bin(Div, Node::Num(0.5), n.clone()),
            };
            bin(Mul, outer, da)
        }
        Node::Binary(op, a, b) => {
            let (da, db) = (differentiate(a, var)?, differentiate(b, var)?);
            let (a, b) = (a.as_ref().clone(), b.as_ref().clone());
            match op {
                Add => bin(Add, da, db),
                Sub => bin(Sub, da, db),
                Mul => bin(Add, bin(Mul, da, b), bin(Mul, a, db)),
                Div => bin(
                    Div,
                    bin(Sub, bin(Mul, da, b.clone()), bin(Mul, a, db)),
                    bin(Pow, b, Node::Num(2.0)),
                ),
                Pow if depends_on(&b, var) => return None,
                // d(u^c) = c u^(c-1) du
                Pow => bin(Mul, bin(Mul, b.clone(), bin(Pow, a, bin(Sub, b, Node::Num(1.0)))), da),
            }
        }
    })
}

fn domain_err(what: impl Into<String>) -> Error {
    Error::EvalDomain(what.into())
}

fn eval_node(n: &Node, x: &[f64]) -> Result<f64> {
    let v = match n {
        Node::Num(v) => *v,
        Node::Var(i) => *x
            .get(*i)
            .ok_or_else(|| domain_err(format!("coordinate x{} not in a {}-dimensional chart", i + 1, x.len())))?,
        Node::Unary(f, a) => {
            let a = eval_node(a, x)?;
            match f {
                Func::Neg => -a,
                Func::Sin => a.sin(),
                Func::Cos => a.cos(),
                Func::Exp => a.exp(),
                Func::Sqrt => {
                    if a < 0.0 {
                        return Err(domain_err(format!("sqrt of negative value {a}")));
                    }
                    a.sqrt()
                }
            }
        }
        Node::Binary(op, a, b) => {
            let (a, b) = (eval_node(a, x)?, eval_node(b, x)?);
            match op {
                BinOp::Add => a + b,
                BinOp::Sub => a - b,
                BinOp::Mul => a * b,
                BinOp::Div => {
                    if b == 0.0 {
                        return Err(domain_err("division by zero"));
                    }
                    a / b
                }
                BinOp::Pow => {
                    // integer exponents go through powi so negative bases work
                    if b.fract() == 0.0 && b.abs() <= i32::MAX as f64 {
                        a.powi(b as i32)
                    } else if a < 0.0 {
                        return Err(domain_err(format!("{a} raised to non-integer power {b}")));
                    } else {
                        a.powf(b)
                    }
                }
            }
        }
    };
    if v.is_finite() {
        Ok(v)
    } else {
        Err(domain_err("non-finite value"))
    }
}

impl fmt::Display for Expression {
    /// Fully parenthesized form that re-parses to the same tree values.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn write(n: &Node, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            match n {
                Node::Num(v) if *v < 0.0 || (*v == 0.0 && v.is_sign_negative()) => write!(f, "(-{:?})", -v),
                Node::Num(v) => write!(f, "{v:?}"),
                Node::Var(i) => write!(f, "x{}", i + 1),
                Node::Unary(func, a) => {
                    write!(f, "({}(", func.name())?;
                    write(a, f)?;
                    write!(f, "))")
                }
                Node::Binary(op, a, b) => {
                    write!(f, "(")?;
                    write(a, f)?;
                    write!(f, " {} ", op.symbol())?;
                    write(b, f)?;
                    write!(f, ")")
                }
            }
        }
        write(&self.root, f)
    }
}

struct Parser<'a> {
    src: &'a str,
    chars: Vec<(usize, char)>,
    pos: usize,
    aliases: &'a [(&'a str, usize)],
}

impl Parser<'_> {
    fn location(&self, pos: usize) -> (usize, usize) {
        let offset = self.chars.get(pos).map_or(self.src.len(), |c| c.0);
        let before = &self.src[..offset];
        let line = before.matches('\n').count() + 1;
        let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
        (line, column)
    }

    fn error(&self, message: impl Into<String>) -> ParseError {
        let (line, column) = self.location(self.pos);
        ParseError {
            line,
            column,
            message: message.into(),
        }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).map(|c| c.1)
    }

    fn skip_ws(&mut self) {
        while self.peek().is_some_and(char::is_whitespace) {
            self.pos += 1;
        }
    }

    fn eat(&mut self, c: char) -> bool {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Node, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let op = if self.eat('+') {
                BinOp::Add
            } else if self.eat('-') {
                BinOp::Sub
            } else {
                return Ok(lhs);
            };
            let rhs = self.term()?;
            lhs = Node::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self) -> Result<Node, ParseError> {
        let mut lhs = self.factor()?;
        loop {
            let op = if self.eat('*') {
                BinOp::Mul
            } else if self.eat('/') {
                BinOp::Div
            } else {
                return Ok(lhs);
            };
            let rhs = self.factor()?;
            lhs = Node::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn factor(&mut self) -> Result<Node, ParseError> {
        let base = self.base()?;
        if self.eat('^') {
            let exponent = self.factor()?;
            Ok(Node::Binary(BinOp::Pow, Box::new(base), Box::new(exponent)))
        } else {
            Ok(base)
        }
    }

    fn base(&mut self) -> Result<Node, ParseError> {
        self.skip_ws();
        match self.peek() {
            None => Err(self.error("unexpected end of expression")),
            Some('(') => {
                let open = self.pos;
                self.pos += 1;
                let inner = self.expr()?;
                if !self.eat(')') {
                    let (line, column) = self.location(open);
                    return Err(self.error(format!(
                        "expected `)`: unclosed parenthesis opened at line {line}, column {column}"
                    )));
                }
                Ok(inner)
            }
            Some('-') => {
                self.pos += 1;
                Ok(Node::Unary(Func::Neg, Box::new(self.base()?)))
            }
            Some(c) if c.is_ascii_digit() || c == '.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() || c == '_' => self.word(),
            Some(c) => Err(self.error(format!("unexpected `{c}`"))),
        }
    }

    fn number(&mut self) -> Result<Node, ParseError> {
        let start = self.pos;
        let digits = |p: &mut Self| {
            let s = p.pos;
            while p.peek().is_some_and(|c| c.is_ascii_digit()) {
                p.pos += 1;
            }
            p.pos - s
        };
        let mut count = digits(self);
        if self.peek() == Some('.') {
            self.pos += 1;
            count += digits(self);
        }
        if count == 0 {
            self.pos = start;
            return Err(self.error("malformed number"));
        }
        if matches!(self.peek(), Some('e' | 'E')) {
            let mark = self.pos;
            self.pos += 1;
            if matches!(self.peek(), Some('+' | '-')) {
                self.pos += 1;
            }
            if digits(self) == 0 {
                self.pos = mark;
                return Err(self.error("malformed exponent"));
            }
        }
        let text: String = self.chars[start..self.pos].iter().map(|c| c.1).collect();
        text.parse::<f64>()
            .map(Node::Num)
            .map_err(|_| self.error(format!("malformed number `{text}`")))
    }

    fn word(&mut self) -> Result<Node, ParseError> {
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_alphanumeric() || c == '_') {
            self.pos += 1;
        }
        let word: String = self.chars[start..self.pos].iter().map(|c| c.1).collect();
        let func = match word.as_str() {
            "sin" => Some(Func::Sin),
            "cos" => Some(Func::Cos),
            "exp" => Some(Func::Exp),
            "sqrt" => Some(Func::Sqrt),
            _ => None,
        };
        if let Some(func) = func {
            return Ok(Node::Unary(func, Box::new(self.base()?)));
        }
        if let Some(&(_, idx)) = self.aliases.iter().find(|(name, _)| *name == word) {
            return Ok(Node::Var(idx));
        }
        if let Some(digits) = word.strip_prefix('x') {
            if !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit()) {
                let i: usize = digits.parse().map_err(|_| self.error("coordinate index too large"))?;
                if i == 0 {
                    self.pos = start;
                    return Err(self.error("coordinates are numbered from x1"));
                }
                return Ok(Node::Var(i - 1));
            }
        }
        self.pos = start;
        Err(self.error(format!("unknown identifier `{word}`")))
    }
}
