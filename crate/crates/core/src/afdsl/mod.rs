//! A small total expression language for acquisition programs.
//!
//! ```text
//! program   = { "let" ident "=" expr "in" } reduction
//! reduction = ("argmax" | "argmin") "(" expr ")"
//! expr      = term { ("+" | "-") term }
//! term      = unary { ("*" | "/") unary }
//! unary     = "-" unary | power
//! power     = atom [ "^" unary ]
//! atom      = number | VARIABLE | ident | call | "(" expr ")"
//! call      = name "(" expr { "," expr } ")"
//! ```
//!
//! Variables are `MEAN`, `VAR`, `INCUMBENT`, `BETA` and `N_POINTS`. The
//! callable names and their arities are listed in [`Func`]. Evaluation
//! broadcasts scalars over grid vectors; every failure is a typed error.

mod eval;
mod parse;
mod render;

pub use parse::parse;

use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

pub const MAX_DEPTH: usize = 40;
pub const MAX_NODES: usize = 500;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DslError {
    #[error("{line}:{col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("{line}:{col}: unbound identifier `{name}`")]
    Unbound { line: usize, col: usize, name: String },
    #[error("{line}:{col}: `{func}` takes {expected} argument(s), got {got}")]
    Arity { line: usize, col: usize, func: String, expected: usize, got: usize },
    #[error("{line}:{col}: `{name}` is already bound")]
    Rebound { line: usize, col: usize, name: String },
    #[error("program exceeds size bounds: {0}")]
    TooLarge(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Var {
    Mean,
    Var,
    Incumbent,
    Beta,
    NPoints,
}

impl Var {
    pub const ALL: [Var; 5] = [Var::Mean, Var::Var, Var::Incumbent, Var::Beta, Var::NPoints];

    pub fn name(self) -> &'static str {
        match self {
            Var::Mean => "MEAN",
            Var::Var => "VAR",
            Var::Incumbent => "INCUMBENT",
            Var::Beta => "BETA",
            Var::NPoints => "N_POINTS",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    pub const ALL: [BinOp; 5] = [BinOp::Add, BinOp::Sub, BinOp::Mul, BinOp::Div, BinOp::Pow];

    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Pow => "^",
        }
    }
}

/// Named functions. `imin`/`imax` return the index of the first minimum or
/// maximum of their argument as a scalar.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Func {
    Abs,
    Sqrt,
    Exp,
    Log,
    NormCdf,
    NormPdf,
    IMin,
    IMax,
    Min,
    Max,
    NormCdfLoc,
    TruncNormCdf,
    SetAt,
    ZeroPrefix,
}

impl Func {
    pub const ALL: [Func; 14] = [
        Func::Abs,
        Func::Sqrt,
        Func::Exp,
        Func::Log,
        Func::NormCdf,
        Func::NormPdf,
        Func::IMin,
        Func::IMax,
        Func::Min,
        Func::Max,
        Func::NormCdfLoc,
        Func::TruncNormCdf,
        Func::SetAt,
        Func::ZeroPrefix,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Func::Abs => "abs",
            Func::Sqrt => "sqrt",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::NormCdf => "normcdf",
            Func::NormPdf => "normpdf",
            Func::IMin => "imin",
            Func::IMax => "imax",
            Func::Min => "min",
            Func::Max => "max",
            Func::NormCdfLoc => "normcdf_loc",
            Func::TruncNormCdf => "truncnormcdf",
            Func::SetAt => "set_at",
            Func::ZeroPrefix => "zero_prefix",
        }
    }

    pub fn arity(self) -> usize {
        match self {
            Func::Abs
            | Func::Sqrt
            | Func::Exp
            | Func::Log
            | Func::NormCdf
            | Func::NormPdf
            | Func::IMin
            | Func::IMax => 1,
            Func::Min | Func::Max | Func::NormCdfLoc | Func::ZeroPrefix => 2,
            Func::TruncNormCdf | Func::SetAt => 3,
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Func::ALL.into_iter().find(|f| f.name() == name)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Var(Var),
    /// Non-negative finite literal; negative numbers are `Neg(Lit)`.
    Lit(f64),
    Ident(String),
    Neg(Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Vec<Expr>),
}

impl Expr {
    pub fn lit(v: f64) -> Expr {
        if v < 0.0 || (v == 0.0 && v.is_sign_negative()) {
            Expr::Neg(Box::new(Expr::Lit(-v)))
        } else {
            Expr::Lit(v)
        }
    }

    pub fn bin(op: BinOp, a: Expr, b: Expr) -> Expr {
        Expr::Binary(op, Box::new(a), Box::new(b))
    }

    pub fn call(f: Func, args: Vec<Expr>) -> Expr {
        Expr::Call(f, args)
    }

    pub fn neg(e: Expr) -> Expr {
        Expr::Neg(Box::new(e))
    }

    pub fn children(&self) -> Vec<&Expr> {
        match self {
            Expr::Var(_) | Expr::Lit(_) | Expr::Ident(_) => Vec::new(),
            Expr::Neg(e) => vec![e],
            Expr::Binary(_, a, b) => vec![a, b],
            Expr::Call(_, args) => args.iter().collect(),
        }
    }

    pub fn children_mut(&mut self) -> Vec<&mut Expr> {
        match self {
            Expr::Var(_) | Expr::Lit(_) | Expr::Ident(_) => Vec::new(),
            Expr::Neg(e) => vec![e.as_mut()],
            Expr::Binary(_, a, b) => vec![a.as_mut(), b.as_mut()],
            Expr::Call(_, args) => args.iter_mut().collect(),
        }
    }

    pub fn node_count(&self) -> usize {
        1 + self.children().into_iter().map(Expr::node_count).sum::<usize>()
    }

    pub fn depth(&self) -> usize {
        1 + self.children().into_iter().map(Expr::depth).max().unwrap_or(0)
    }

    /// Pre-order traversal.
    pub fn visit<'a>(&'a self, f: &mut dyn FnMut(&'a Expr)) {
        f(self);
        for c in self.children() {
            c.visit(f);
        }
    }

    /// Mutable reference to the `k`-th node in pre-order.
    pub fn nth_mut(&mut self, k: usize) -> Option<&mut Expr> {
        fn go<'a>(e: &'a mut Expr, k: &mut usize) -> Option<&'a mut Expr> {
            if *k == 0 {
                return Some(e);
            }
            *k -= 1;
            for c in e.children_mut() {
                if let Some(found) = go(c, k) {
                    return Some(found);
                }
            }
            None
        }
        let mut k = k;
        go(self, &mut k)
    }

    /// Replaces every identifier bound in `env` by its expression.
    pub fn substitute(&self, env: &[(String, Expr)]) -> Expr {
        match self {
            Expr::Ident(name) => match env.iter().rev().find(|(n, _)| n == name) {
                Some((_, e)) => e.clone(),
                None => self.clone(),
            },
            Expr::Var(_) | Expr::Lit(_) => self.clone(),
            Expr::Neg(e) => Expr::neg(e.substitute(env)),
            Expr::Binary(op, a, b) => Expr::bin(*op, a.substitute(env), b.substitute(env)),
            Expr::Call(f, args) => Expr::Call(*f, args.iter().map(|a| a.substitute(env)).collect()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Reduce {
    Argmax,
    Argmin,
}

impl Reduce {
    pub fn name(self) -> &'static str {
        match self {
            Reduce::Argmax => "argmax",
            Reduce::Argmin => "argmin",
        }
    }
}

/// A parsed acquisition program: zero or more `let` bindings and a terminal
/// reduction over a vector expression.
#[derive(Clone, Debug, PartialEq)]
pub struct Program {
    pub lets: Vec<(String, Expr)>,
    pub reduce: Reduce,
    pub body: Expr,
}

impl Program {
    pub fn new(reduce: Reduce, body: Expr) -> Self {
        Self { lets: Vec::new(), reduce, body }
    }

    /// The expected-improvement seed program.
    pub fn expected_improvement() -> Self {
        parse(EI_TEXT).expect("seed program parses")
    }

    /// Total node count: one per expression node, binding and the reduction.
    pub fn node_count(&self) -> usize {
        1 + self.lets.iter().map(|(_, e)| 1 + e.node_count()).sum::<usize>() + self.body.node_count()
    }

    pub fn depth(&self) -> usize {
        1 + self.lets.iter().map(|(_, e)| e.depth()).chain([self.body.depth()]).max().unwrap_or(0)
    }

    /// Checks the size bounds and that every identifier is bound earlier.
    pub fn check(&self) -> Result<(), DslError> {
        let mut bound: Vec<&str> = Vec::new();
        for (name, e) in &self.lets {
            check_bound(e, &bound)?;
            if bound.contains(&name.as_str()) || !parse::is_identifier(name) {
                return Err(DslError::Rebound { line: 0, col: 0, name: name.clone() });
            }
            bound.push(name);
        }
        check_bound(&self.body, &bound)?;
        if self.depth() > MAX_DEPTH {
            return Err(DslError::TooLarge(format!("depth {} > {MAX_DEPTH}", self.depth())));
        }
        if self.node_count() > MAX_NODES {
            return Err(DslError::TooLarge(format!("{} nodes > {MAX_NODES}", self.node_count())));
        }
        Ok(())
    }

    /// Body with every binding inlined.
    pub fn inlined_body(&self) -> Expr {
        let mut env: Vec<(String, Expr)> = Vec::new();
        for (name, e) in &self.lets {
            let e = e.substitute(&env);
            env.push((name.clone(), e));
        }
        self.body.substitute(&env)
    }

    /// Canonical text.
    pub fn render(&self) -> String {
        render::program(self)
    }

    /// Character count of the canonical text.
    pub fn length(&self) -> usize {
        self.render().chars().count()
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

impl std::str::FromStr for Program {
    type Err = DslError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse(s)
    }
}

impl Serialize for Program {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.render())
    }
}

impl<'de> Deserialize<'de> for Program {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        parse(&text).map_err(serde::de::Error::custom)
    }
}

fn check_bound(e: &Expr, bound: &[&str]) -> Result<(), DslError> {
    let mut err = None;
    e.visit(&mut |n| {
        if let Expr::Ident(name) = n {
            if err.is_none() && !bound.contains(&name.as_str()) {
                err = Some(DslError::Unbound { line: 0, col: 0, name: name.clone() });
            }
        }
    });
    err.map_or(Ok(()), Err)
}

/// Expected improvement written in the DSL.
pub const EI_TEXT: &str = "argmax((INCUMBENT - MEAN) * normcdf((INCUMBENT - MEAN)/sqrt(VAR)) + sqrt(VAR) * normpdf((INCUMBENT - MEAN)/sqrt(VAR)))";

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ei_text_is_canonical() {
        let p = parse(EI_TEXT).unwrap();
        assert_eq!(p.render(), EI_TEXT);
        assert_eq!(p.length(), EI_TEXT.len());
    }

    #[test]
    fn inlining_removes_bindings() {
        let p = parse("let d = INCUMBENT - MEAN in\nlet e = d * 2.0 in\nargmax(e + d)").unwrap();
        let body = p.inlined_body();
        let q = Program::new(Reduce::Argmax, body);
        assert_eq!(q.render(), "argmax((INCUMBENT - MEAN) * 2.0 + (INCUMBENT - MEAN))");
        q.check().unwrap();
    }

    #[test]
    fn nth_mut_walks_preorder() {
        let mut e = parse("argmax(MEAN + VAR)").unwrap().body;
        assert_eq!(e.node_count(), 3);
        *e.nth_mut(2).unwrap() = Expr::Lit(1.0);
        assert_eq!(Program::new(Reduce::Argmax, e).render(), "argmax(MEAN + 1.0)");
    }

    #[test]
    fn check_flags_free_identifiers() {
        let p = Program::new(Reduce::Argmax, Expr::Ident("x".into()));
        assert!(matches!(p.check(), Err(DslError::Unbound { .. })));
    }
}
