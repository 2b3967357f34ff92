//! Arithmetic expressions for user-supplied coefficients and nonlinearities.
//!
//! Expressions are parsed against a fixed set of allowed variable names
//! (for example `{r}` for radial coefficients or `{u, v}` for nonlinearities)
//! and evaluated positionally against that set. Parsed expressions are
//! immutable and evaluation is pure, so they can be shared across threads.

use std::fmt;
use thiserror::Error;

/// Built-in single-argument functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnaryFn {
    Exp,
    Ln,
    Sqrt,
    Sinh,
    Asinh,
}

impl UnaryFn {
    fn name(self) -> &'static str {
        match self {
            UnaryFn::Exp => "exp",
            UnaryFn::Ln => "ln",
            UnaryFn::Sqrt => "sqrt",
            UnaryFn::Sinh => "sinh",
            UnaryFn::Asinh => "asinh",
        }
    }
}

/// Built-in two-argument functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinaryFn {
    Pow,
    Min,
    Max,
}

impl BinaryFn {
    fn name(self) -> &'static str {
        match self {
            BinaryFn::Pow => "pow",
            BinaryFn::Min => "min",
            BinaryFn::Max => "max",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Num(f64),
    /// Index into the declared variable set.
    Var(usize),
    Neg(Box<Node>),
    Add(Box<Node>, Box<Node>),
    Sub(Box<Node>, Box<Node>),
    Mul(Box<Node>, Box<Node>),
    Div(Box<Node>, Box<Node>),
    Pow(Box<Node>, Box<Node>),
    Call1(UnaryFn, Box<Node>),
    Call2(BinaryFn, Box<Node>, Box<Node>),
}

/// A parsed expression over a declared, ordered variable set.
#[derive(Debug, Clone, PartialEq)]
pub struct Expr {
    node: Node,
    vars: Vec<String>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    #[error("unexpected character `{0}`")]
    UnexpectedChar(char),
    #[error("unexpected end of input")]
    UnexpectedEnd,
    #[error("unknown identifier `{0}`")]
    UnknownIdentifier(String),
    #[error("`{name}` expects {expected} argument(s), got {got}")]
    ArityMismatch {
        name: String,
        expected: usize,
        got: usize,
    },
    #[error("expected {0}")]
    Expected(&'static str),
    #[error("trailing input")]
    TrailingInput,
    #[error("empty expression")]
    Empty,
    #[error("malformed number literal")]
    BadNumber,
}

/// Syntax error with the byte offset where parsing failed.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("{kind} at position {pos}")]
pub struct ParseError {
    pub pos: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("logarithm of non-positive value {0}")]
    LogDomain(f64),
    #[error("square root of negative value {0}")]
    SqrtDomain(f64),
    #[error("division by zero")]
    DivByZero,
    #[error("power {base}^{exponent} is undefined over the reals")]
    PowDomain { base: f64, exponent: f64 },
    #[error("expression produced a non-finite value")]
    NonFinite,
    #[error("expected {expected} variable bindings, got {got}")]
    BindingCount { expected: usize, got: usize },
    #[error("missing binding for `{0}`")]
    MissingBinding(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Tok {
    Num(f64),
    Op(char),
    Ident { start: usize, end: usize },
}

struct Lexer<'a> {
    src: &'a str,
    toks: Vec<(usize, Tok)>,
}

fn lex(src: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    let bytes = src.as_bytes();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        match c {
            ' ' | '\t' | '\n' | '\r' => i += 1,
            '+' | '-' | '*' | '/' | '^' | '(' | ')' | ',' => {
                toks.push((i, Tok::Op(c)));
                i += 1;
            }
            '0'..='9' | '.' => {
                let start = i;
                while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                    i += 1;
                }
                // optional exponent part
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                        j += 1;
                    }
                    if j < bytes.len() && bytes[j].is_ascii_digit() {
                        i = j;
                        while i < bytes.len() && bytes[i].is_ascii_digit() {
                            i += 1;
                        }
                    }
                }
                let text = &src[start..i];
                let value: f64 = text.parse().map_err(|_| ParseError {
                    pos: start,
                    kind: ParseErrorKind::BadNumber,
                })?;
                toks.push((start, Tok::Num(value)));
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i < bytes.len()
                    && ((bytes[i] as char).is_ascii_alphanumeric() || bytes[i] == b'_')
                {
                    i += 1;
                }
                toks.push((start, Tok::Ident { start, end: i }));
            }
            other => {
                return Err(ParseError {
                    pos: i,
                    kind: ParseErrorKind::UnexpectedChar(other),
                })
            }
        }
    }
    Ok(toks)
}

struct Parser<'a> {
    lx: Lexer<'a>,
    pos: usize,
    vars: &'a [&'a str],
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&(usize, Tok)> {
        self.lx.toks.get(self.pos)
    }

    fn end_pos(&self) -> usize {
        self.lx.src.len()
    }

    fn err_here(&self, kind: ParseErrorKind) -> ParseError {
        let pos = self.peek().map(|(p, _)| *p).unwrap_or(self.end_pos());
        ParseError { pos, kind }
    }

    fn eat_op(&mut self, c: char) -> bool {
        if let Some((_, Tok::Op(op))) = self.peek() {
            if *op == c {
                self.pos += 1;
                return true;
            }
        }
        false
    }

    fn parse_expr(&mut self) -> Result<Node, ParseError> {
        let mut lhs = self.parse_term()?;
        loop {
            if self.eat_op('+') {
                let rhs = self.parse_term()?;
                lhs = Node::Add(Box::new(lhs), Box::new(rhs));
            } else if self.eat_op('-') {
                let rhs = self.parse_term()?;
                lhs = Node::Sub(Box::new(lhs), Box::new(rhs));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn parse_term(&mut self) -> Result<Node, ParseError> {
        let mut lhs = self.parse_unary()?;
        loop {
            if self.eat_op('*') {
                let rhs = self.parse_unary()?;
                lhs = Node::Mul(Box::new(lhs), Box::new(rhs));
            } else if self.eat_op('/') {
                let rhs = self.parse_unary()?;
                lhs = Node::Div(Box::new(lhs), Box::new(rhs));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn parse_unary(&mut self) -> Result<Node, ParseError> {
        if self.eat_op('-') {
            let inner = self.parse_unary()?;
            return Ok(Node::Neg(Box::new(inner)));
        }
        self.parse_power()
    }

    fn parse_power(&mut self) -> Result<Node, ParseError> {
        let base = self.parse_atom()?;
        if self.eat_op('^') {
            // right-associative; the exponent may carry its own sign
            let exponent = self.parse_unary()?;
            return Ok(Node::Pow(Box::new(base), Box::new(exponent)));
        }
        Ok(base)
    }

    fn parse_atom(&mut self) -> Result<Node, ParseError> {
        let (pos, tok) = match self.peek() {
            Some(t) => *t,
            None => return Err(self.err_here(ParseErrorKind::UnexpectedEnd)),
        };
        match tok {
            Tok::Num(v) => {
                self.pos += 1;
                Ok(Node::Num(v))
            }
            Tok::Op('(') => {
                self.pos += 1;
                let inner = self.parse_expr()?;
                if !self.eat_op(')') {
                    return Err(self.err_here(ParseErrorKind::Expected("closing `)`")));
                }
                Ok(inner)
            }
            Tok::Op(_) => Err(self.err_here(ParseErrorKind::Expected("a value"))),
            Tok::Ident { start, end } => {
                self.pos += 1;
                let name = &self.lx.src[start..end];
                if self.eat_op('(') {
                    let mut args = vec![self.parse_expr()?];
                    while self.eat_op(',') {
                        args.push(self.parse_expr()?);
                    }
                    if !self.eat_op(')') {
                        return Err(self.err_here(ParseErrorKind::Expected("closing `)`")));
                    }
                    return self.make_call(name, args, pos);
                }
                match self.vars.iter().position(|v| *v == name) {
                    Some(idx) => Ok(Node::Var(idx)),
                    None => Err(ParseError {
                        pos,
                        kind: ParseErrorKind::UnknownIdentifier(name.to_string()),
                    }),
                }
            }
        }
    }

    fn make_call(&self, name: &str, mut args: Vec<Node>, pos: usize) -> Result<Node, ParseError> {
        let unary = match name {
            "exp" => Some(UnaryFn::Exp),
            "ln" => Some(UnaryFn::Ln),
            "sqrt" => Some(UnaryFn::Sqrt),
            "sinh" => Some(UnaryFn::Sinh),
            "asinh" => Some(UnaryFn::Asinh),
            _ => None,
        };
        if let Some(f) = unary {
            if args.len() != 1 {
                return Err(ParseError {
                    pos,
                    kind: ParseErrorKind::ArityMismatch {
                        name: name.to_string(),
                        expected: 1,
                        got: args.len(),
                    },
                });
            }
            return Ok(Node::Call1(f, Box::new(args.pop().unwrap())));
        }
        let binary = match name {
            "pow" => Some(BinaryFn::Pow),
            "min" => Some(BinaryFn::Min),
            "max" => Some(BinaryFn::Max),
            _ => None,
        };
        if let Some(f) = binary {
            if args.len() != 2 {
                return Err(ParseError {
                    pos,
                    kind: ParseErrorKind::ArityMismatch {
                        name: name.to_string(),
                        expected: 2,
                        got: args.len(),
                    },
                });
            }
            let b = args.pop().unwrap();
            let a = args.pop().unwrap();
            return Ok(Node::Call2(f, Box::new(a), Box::new(b)));
        }
        Err(ParseError {
            pos,
            kind: ParseErrorKind::UnknownIdentifier(name.to_string()),
        })
    }
}

impl Expr {
    /// Parse `text` against the ordered variable set `allowed_vars`.
    ///
    /// Precedence, tightest first: `^` (right-associative, exponents may be
    /// signed), unary `-`, then `*` `/`, then `+` `-`. There is no implicit
    /// multiplication.
    pub fn parse(text: &str, allowed_vars: &[&str]) -> Result<Expr, ParseError> {
        let toks = lex(text)?;
        if toks.is_empty() {
            return Err(ParseError {
                pos: 0,
                kind: ParseErrorKind::Empty,
            });
        }
        let mut parser = Parser {
            lx: Lexer { src: text, toks },
            pos: 0,
            vars: allowed_vars,
        };
        let node = parser.parse_expr()?;
        if parser.pos != parser.lx.toks.len() {
            return Err(parser.err_here(ParseErrorKind::TrailingInput));
        }
        Ok(Expr {
            node,
            vars: allowed_vars.iter().map(|s| s.to_string()).collect(),
        })
    }

    /// Convenience constructor for a constant expression.
    pub fn constant(value: f64, allowed_vars: &[&str]) -> Expr {
        Expr {
            node: Node::Num(value),
            vars: allowed_vars.iter().map(|s| s.to_string()).collect(),
        }
    }

    /// The declared variable names, in binding order.
    pub fn variables(&self) -> &[String] {
        &self.vars
    }

    /// Evaluate with one value per declared variable, in declaration order.
    ///
    /// Domain violations (log/sqrt of a negative, division by zero, powers
    /// undefined over the reals, non-finite results) are reported as errors
    /// rather than silently producing NaN.
    pub fn eval(&self, values: &[f64]) -> Result<f64, EvalError> {
        if values.len() != self.vars.len() {
            return Err(EvalError::BindingCount {
                expected: self.vars.len(),
                got: values.len(),
            });
        }
        let out = eval_node(&self.node, values)?;
        if out.is_finite() {
            Ok(out)
        } else {
            Err(EvalError::NonFinite)
        }
    }

    /// Evaluate with named bindings; every declared variable must be bound.
    pub fn eval_named(&self, bindings: &[(&str, f64)]) -> Result<f64, EvalError> {
        let mut values = Vec::with_capacity(self.vars.len());
        for var in &self.vars {
            match bindings.iter().find(|(name, _)| name == var) {
                Some((_, v)) => values.push(*v),
                None => return Err(EvalError::MissingBinding(var.clone())),
            }
        }
        self.eval(&values)
    }

    /// Canonical form with every compound subexpression parenthesized.
    pub fn full_parens(&self) -> String {
        let mut out = String::new();
        print_full(&self.node, &self.vars, &mut out);
        out
    }
}

fn powf_checked(base: f64, exponent: f64) -> Result<f64, EvalError> {
    if base < 0.0 && exponent.fract() != 0.0 {
        return Err(EvalError::PowDomain { base, exponent });
    }
    if base == 0.0 && exponent < 0.0 {
        return Err(EvalError::PowDomain { base, exponent });
    }
    Ok(base.powf(exponent))
}

fn eval_node(node: &Node, values: &[f64]) -> Result<f64, EvalError> {
    let out = match node {
        Node::Num(v) => *v,
        Node::Var(idx) => values[*idx],
        Node::Neg(a) => -eval_node(a, values)?,
        Node::Add(a, b) => eval_node(a, values)? + eval_node(b, values)?,
        Node::Sub(a, b) => eval_node(a, values)? - eval_node(b, values)?,
        Node::Mul(a, b) => eval_node(a, values)? * eval_node(b, values)?,
        Node::Div(a, b) => {
            let denom = eval_node(b, values)?;
            if denom == 0.0 {
                return Err(EvalError::DivByZero);
            }
            eval_node(a, values)? / denom
        }
        Node::Pow(a, b) => powf_checked(eval_node(a, values)?, eval_node(b, values)?)?,
        Node::Call1(f, a) => {
            let x = eval_node(a, values)?;
            match f {
                UnaryFn::Exp => x.exp(),
                UnaryFn::Ln => {
                    if x <= 0.0 {
                        return Err(EvalError::LogDomain(x));
                    }
                    x.ln()
                }
                UnaryFn::Sqrt => {
                    if x < 0.0 {
                        return Err(EvalError::SqrtDomain(x));
                    }
                    x.sqrt()
                }
                UnaryFn::Sinh => x.sinh(),
                UnaryFn::Asinh => x.asinh(),
            }
        }
        Node::Call2(f, a, b) => {
            let x = eval_node(a, values)?;
            let y = eval_node(b, values)?;
            match f {
                BinaryFn::Pow => powf_checked(x, y)?,
                BinaryFn::Min => x.min(y),
                BinaryFn::Max => x.max(y),
            }
        }
    };
    if out.is_nan() {
        return Err(EvalError::NonFinite);
    }
    Ok(out)
}

// Precedence levels used by the canonical printers: addition 1,
// multiplication 2, unary minus 3, power 4, atoms 5.
fn precedence(node: &Node) -> u8 {
    match node {
        Node::Add(..) | Node::Sub(..) => 1,
        Node::Mul(..) | Node::Div(..) => 2,
        Node::Neg(..) => 3,
        Node::Pow(..) => 4,
        Node::Num(_) | Node::Var(_) | Node::Call1(..) | Node::Call2(..) => 5,
    }
}

fn print_min(node: &Node, vars: &[String], out: &mut String) {
    match node {
        Node::Num(v) => out.push_str(&format_number(*v)),
        Node::Var(idx) => out.push_str(&vars[*idx]),
        Node::Neg(a) => {
            out.push('-');
            print_child(a, vars, out, 4);
        }
        Node::Add(a, b) => {
            print_child(a, vars, out, 1);
            out.push('+');
            print_child(b, vars, out, 2);
        }
        Node::Sub(a, b) => {
            print_child(a, vars, out, 1);
            out.push('-');
            print_child(b, vars, out, 2);
        }
        Node::Mul(a, b) => {
            print_child(a, vars, out, 2);
            out.push('*');
            print_child(b, vars, out, 3);
        }
        Node::Div(a, b) => {
            print_child(a, vars, out, 2);
            out.push('/');
            print_child(b, vars, out, 3);
        }
        Node::Pow(a, b) => {
            print_child(a, vars, out, 5);
            out.push('^');
            // the exponent slot accepts unary minus and nested powers
            print_child(b, vars, out, 3);
        }
        Node::Call1(f, a) => {
            out.push_str(f.name());
            out.push('(');
            print_min(a, vars, out);
            out.push(')');
        }
        Node::Call2(f, a, b) => {
            out.push_str(f.name());
            out.push('(');
            print_min(a, vars, out);
            out.push(',');
            print_min(b, vars, out);
            out.push(')');
        }
    }
}

fn print_child(node: &Node, vars: &[String], out: &mut String, min_prec: u8) {
    if precedence(node) < min_prec {
        out.push('(');
        print_min(node, vars, out);
        out.push(')');
    } else {
        print_min(node, vars, out);
    }
}

fn print_full(node: &Node, vars: &[String], out: &mut String) {
    match node {
        Node::Num(v) => out.push_str(&format_number(*v)),
        Node::Var(idx) => out.push_str(&vars[*idx]),
        Node::Neg(a) => {
            out.push_str("(-");
            print_full(a, vars, out);
            out.push(')');
        }
        Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b)
        | Node::Pow(a, b) => {
            let op = match node {
                Node::Add(..) => '+',
                Node::Sub(..) => '-',
                Node::Mul(..) => '*',
                Node::Div(..) => '/',
                _ => '^',
            };
            out.push('(');
            print_full(a, vars, out);
            out.push(op);
            print_full(b, vars, out);
            out.push(')');
        }
        Node::Call1(f, a) => {
            out.push_str(f.name());
            out.push('(');
            print_full(a, vars, out);
            out.push(')');
        }
        Node::Call2(f, a, b) => {
            out.push_str(f.name());
            out.push('(');
            print_full(a, vars, out);
            out.push(',');
            print_full(b, vars, out);
            out.push(')');
        }
    }
}

fn format_number(v: f64) -> String {
    if v == v.trunc() && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        format!("{v}")
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut out = String::new();
        print_min(&self.node, &self.vars, &mut out);
        f.write_str(&out)
    }
}
