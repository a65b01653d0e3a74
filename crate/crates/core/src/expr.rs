//! A minimal prefix (s-expression) calculus for instance files.
//!
//! ```text
//! expr := number | x<i> | ( op expr* )
//! op   := + | - | * | max | min | abs | sqr | norm2
//! ```
//!
//! Coordinates are 1-based. `(- a)` negates, `(- a b c)` is `a - b - c`.
//! `(norm2)` is the Euclidean norm of the whole point, `(norm2 a b ..)` that of
//! its arguments. Gradients are propagated in forward mode; they are reported as
//! absent on the nonsmooth locus (`abs` at 0, ties in `max`/`min`, `norm2` at 0).

use std::fmt;

use thiserror::Error;

use crate::error::OracleError;
use crate::oracle::{check_dim, finite, FunctionOracle};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParseError {
    #[error("unexpected end of expression")]
    UnexpectedEnd,
    #[error("unexpected `{0}`")]
    Unexpected(String),
    #[error("unknown operator `{0}`")]
    UnknownOp(String),
    #[error("`{op}` takes {expected} argument(s), got {got}")]
    Arity { op: &'static str, expected: &'static str, got: usize },
    #[error("bad atom `{0}` (expected a number or x1, x2, ...)")]
    BadAtom(String),
    #[error("coordinate x{index} exceeds dimension {dim}")]
    CoordinateOutOfRange { index: usize, dim: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Op {
    Add,
    Sub,
    Mul,
    Max,
    Min,
    Abs,
    Sqr,
    Norm2,
}

#[derive(Clone, Debug, PartialEq)]
enum Node {
    Const(f64),
    /// zero-based coordinate index
    Coord(usize),
    Apply(Op, Vec<Node>),
}

/// Parsed expression, usable as a [`FunctionOracle`] on `R^dim`.
#[derive(Clone, Debug, PartialEq)]
pub struct Expression {
    source: String,
    root: Node,
    dim: usize,
}

impl Expression {
    pub fn parse(source: &str, dim: usize) -> Result<Self, ParseError> {
        let tokens = tokenize(source);
        let mut pos = 0;
        let root = parse_node(&tokens, &mut pos)?;
        if pos != tokens.len() {
            return Err(ParseError::Unexpected(tokens[pos].clone()));
        }
        let max = max_coord(&root);
        if let Some(i) = max {
            if i >= dim {
                return Err(ParseError::CoordinateOutOfRange { index: i + 1, dim });
            }
        }
        Ok(Self { source: source.trim().to_string(), root, dim })
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    /// Value and, where `f` is differentiable, gradient.
    pub fn eval_with_grad(&self, y: &[f64]) -> (f64, Option<Vec<f64>>) {
        forward(&self.root, y)
    }
}

impl fmt::Display for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.source)
    }
}

impl FunctionOracle for Expression {
    fn eval(&self, y: &[f64]) -> Result<f64, OracleError> {
        check_dim(self.dim, y)?;
        finite(y, value(&self.root, y))
    }

    fn grad(&self, y: &[f64]) -> Option<Vec<f64>> {
        if y.len() != self.dim {
            return None;
        }
        self.eval_with_grad(y).1
    }

    fn descriptor(&self) -> String {
        format!("expr:{}", self.source)
    }
}

fn tokenize(s: &str) -> Vec<String> {
    let s = s.replace('\u{2212}', "-");
    let mut out = Vec::new();
    let mut cur = String::new();
    for ch in s.chars() {
        match ch {
            '(' | ')' => {
                if !cur.is_empty() {
                    out.push(std::mem::take(&mut cur));
                }
                out.push(ch.to_string());
            }
            c if c.is_whitespace() || c == ',' => {
                if !cur.is_empty() {
                    out.push(std::mem::take(&mut cur));
                }
            }
            c => cur.push(c),
        }
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    out
}

fn parse_node(tokens: &[String], pos: &mut usize) -> Result<Node, ParseError> {
    let tok = tokens.get(*pos).ok_or(ParseError::UnexpectedEnd)?;
    *pos += 1;
    match tok.as_str() {
        "(" => {
            let op_tok = tokens.get(*pos).ok_or(ParseError::UnexpectedEnd)?;
            *pos += 1;
            let op = match op_tok.as_str() {
                "+" => Op::Add,
                "-" => Op::Sub,
                "*" => Op::Mul,
                "max" => Op::Max,
                "min" => Op::Min,
                "abs" => Op::Abs,
                "sqr" => Op::Sqr,
                "norm2" => Op::Norm2,
                other => return Err(ParseError::UnknownOp(other.to_string())),
            };
            let mut args = Vec::new();
            loop {
                match tokens.get(*pos).map(String::as_str) {
                    None => return Err(ParseError::UnexpectedEnd),
                    Some(")") => {
                        *pos += 1;
                        break;
                    }
                    Some(_) => args.push(parse_node(tokens, pos)?),
                }
            }
            check_arity(op, args.len())?;
            Ok(Node::Apply(op, args))
        }
        ")" => Err(ParseError::Unexpected(")".into())),
        atom => parse_atom(atom),
    }
}

fn parse_atom(atom: &str) -> Result<Node, ParseError> {
    if let Some(idx) = atom.strip_prefix('x') {
        return match idx.parse::<usize>() {
            Ok(i) if i >= 1 => Ok(Node::Coord(i - 1)),
            _ => Err(ParseError::BadAtom(atom.to_string())),
        };
    }
    match atom.parse::<f64>() {
        Ok(c) if c.is_finite() => Ok(Node::Const(c)),
        _ => Err(ParseError::BadAtom(atom.to_string())),
    }
}

fn check_arity(op: Op, n: usize) -> Result<(), ParseError> {
    let (name, expected, ok) = match op {
        Op::Add => ("+", "at least 1", n >= 1),
        Op::Sub => ("-", "at least 1", n >= 1),
        Op::Mul => ("*", "at least 1", n >= 1),
        Op::Max => ("max", "at least 1", n >= 1),
        Op::Min => ("min", "at least 1", n >= 1),
        Op::Abs => ("abs", "exactly 1", n == 1),
        Op::Sqr => ("sqr", "exactly 1", n == 1),
        Op::Norm2 => ("norm2", "any number of", true),
    };
    if ok {
        Ok(())
    } else {
        Err(ParseError::Arity { op: name, expected, got: n })
    }
}

fn max_coord(node: &Node) -> Option<usize> {
    match node {
        Node::Const(_) => None,
        Node::Coord(i) => Some(*i),
        Node::Apply(_, args) => args.iter().filter_map(max_coord).max(),
    }
}

fn value(node: &Node, y: &[f64]) -> f64 {
    match node {
        Node::Const(c) => *c,
        Node::Coord(i) => y[*i],
        Node::Apply(op, args) => {
            let mut vals = args.iter().map(|a| value(a, y));
            match op {
                Op::Add => vals.sum(),
                Op::Sub => {
                    let first = vals.next().unwrap_or(0.0);
                    if args.len() == 1 {
                        -first
                    } else {
                        vals.fold(first, |acc, v| acc - v)
                    }
                }
                Op::Mul => vals.product(),
                Op::Max => vals.fold(f64::NEG_INFINITY, f64::max),
                Op::Min => vals.fold(f64::INFINITY, f64::min),
                Op::Abs => vals.next().unwrap_or(0.0).abs(),
                Op::Sqr => {
                    let v = vals.next().unwrap_or(0.0);
                    v * v
                }
                Op::Norm2 => {
                    if args.is_empty() {
                        y.iter().map(|c| c * c).sum::<f64>().sqrt()
                    } else {
                        vals.map(|v| v * v).sum::<f64>().sqrt()
                    }
                }
            }
        }
    }
}

fn forward(node: &Node, y: &[f64]) -> (f64, Option<Vec<f64>>) {
    let n = y.len();
    match node {
        Node::Const(c) => (*c, Some(vec![0.0; n])),
        Node::Coord(i) => {
            let mut g = vec![0.0; n];
            g[*i] = 1.0;
            (y[*i], Some(g))
        }
        Node::Apply(op, args) => {
            let parts: Vec<(f64, Option<Vec<f64>>)> = if *op == Op::Norm2 && args.is_empty() {
                (0..n).map(|i| forward(&Node::Coord(i), y)).collect()
            } else {
                args.iter().map(|a| forward(a, y)).collect()
            };
            combine(*op, parts, n)
        }
    }
}

fn combine(op: Op, parts: Vec<(f64, Option<Vec<f64>>)>, n: usize) -> (f64, Option<Vec<f64>>) {
    let vals: Vec<f64> = parts.iter().map(|p| p.0).collect();
    let val = match op {
        Op::Add => vals.iter().sum(),
        Op::Sub if vals.len() == 1 => -vals[0],
        Op::Sub => vals[1..].iter().fold(vals[0], |a, v| a - v),
        Op::Mul => vals.iter().product(),
        Op::Max => vals.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        Op::Min => vals.iter().copied().fold(f64::INFINITY, f64::min),
        Op::Abs => vals[0].abs(),
        Op::Sqr => vals[0] * vals[0],
        Op::Norm2 => vals.iter().map(|v| v * v).sum::<f64>().sqrt(),
    };
    let grads: Option<Vec<Vec<f64>>> = parts.into_iter().map(|p| p.1).collect();
    let Some(grads) = grads else {
        return (val, None);
    };
    let lin = |coefs: &[f64]| -> Vec<f64> {
        let mut g = vec![0.0; n];
        for (c, gi) in coefs.iter().zip(&grads) {
            for (acc, d) in g.iter_mut().zip(gi) {
                *acc += c * d;
            }
        }
        g
    };
    let grad = match op {
        Op::Add => Some(lin(&vec![1.0; vals.len()])),
        Op::Sub if vals.len() == 1 => Some(lin(&[-1.0])),
        Op::Sub => {
            let mut c = vec![-1.0; vals.len()];
            c[0] = 1.0;
            Some(lin(&c))
        }
        Op::Mul => {
            let c: Vec<f64> = (0..vals.len())
                .map(|i| vals.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, v)| v).product())
                .collect();
            Some(lin(&c))
        }
        Op::Max | Op::Min => {
            let winners: Vec<usize> = (0..vals.len()).filter(|&i| vals[i] == val).collect();
            let first = &grads[winners[0]];
            // a tie is smooth only if all tied branches share the gradient
            if winners.iter().all(|&i| grads[i] == *first) {
                Some(first.clone())
            } else {
                None
            }
        }
        Op::Abs => {
            if vals[0] == 0.0 {
                None
            } else {
                Some(lin(&[vals[0].signum()]))
            }
        }
        Op::Sqr => Some(lin(&[2.0 * vals[0]])),
        Op::Norm2 => {
            if val == 0.0 {
                None
            } else {
                let c: Vec<f64> = vals.iter().map(|v| v / val).collect();
                Some(lin(&c))
            }
        }
    };
    (val, grad)
}
