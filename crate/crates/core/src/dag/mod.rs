//! Arithmetic circuits: each node is an input, a constant, a free unary or
//! piecewise-unary operation, or a charged binary operation.

mod analysis;
mod parse;

use std::fmt;

use rand::Rng;

use crate::error::{Error, Result};
use crate::numerics::{binary_op, constant_op, unary_op, BinaryOp, OpMeter, Scalar, UnaryOp};

pub use analysis::{
    analyze, certify_lower_bound, dependency_sets, semantic_dependence, semantic_dependence_exhaustive, DependencyReport, WitnessEdge, DEFAULT_PROBES,
    PROBE_GRID,
};
pub use parse::parse_dag;

/// A free single-variable operation: a unary operation, or a binary operation
/// with one constant operand.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum PieceFn {
    Unary(UnaryOp),
    WithConst { op: BinaryOp, c: Scalar, const_on_left: bool },
}

impl PieceFn {
    pub fn apply(&self, x: &Scalar) -> Result<Scalar> {
        Ok(match self {
            PieceFn::Unary(u) => unary_op(u, x)?,
            PieceFn::WithConst { op, c, const_on_left } => constant_op(*op, x, c, *const_on_left)?,
        })
    }
}

impl fmt::Display for PieceFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PieceFn::Unary(UnaryOp::Const(c)) => write!(f, "const={c}"),
            PieceFn::Unary(u) => write!(f, "{}", u.name()),
            PieceFn::WithConst { op, c, const_on_left } => {
                let prefix = if *const_on_left && matches!(op, BinaryOp::Sub | BinaryOp::Div) { "r" } else { "" };
                write!(f, "{prefix}{}={c}", op.name())
            }
        }
    }
}

/// Half-open interval `(lo, hi]`; `None` is an infinite end.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Interval {
    pub lo: Option<Scalar>,
    pub hi: Option<Scalar>,
}

impl Interval {
    pub fn contains(&self, v: &Scalar) -> bool {
        self.lo.as_ref().is_none_or(|lo| v > lo) && self.hi.as_ref().is_none_or(|hi| v <= hi)
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let lo = self.lo.as_ref().map_or("-inf".to_string(), Scalar::to_string);
        let hi = self.hi.as_ref().map_or("inf".to_string(), Scalar::to_string);
        write!(f, "({lo},{hi}]")
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Node {
    Input(usize),
    Const(Scalar),
    Unary { f: PieceFn, src: usize },
    Piecewise { src: usize, pieces: Vec<(Interval, PieceFn)> },
    Binary { op: BinaryOp, lhs: usize, rhs: usize },
}

impl Node {
    pub fn sources(&self) -> Vec<usize> {
        match self {
            Node::Input(_) | Node::Const(_) => vec![],
            Node::Unary { src, .. } | Node::Piecewise { src, .. } => vec![*src],
            Node::Binary { lhs, rhs, .. } => vec![*lhs, *rhs],
        }
    }
}

/// A validated circuit in topological order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DagProgram {
    nodes: Vec<Node>,
    outputs: Vec<usize>,
    arity: usize,
}

impl DagProgram {
    /// Validates and normalizes (piecewise intervals sorted by lower end).
    pub fn new(mut nodes: Vec<Node>, outputs: Vec<usize>) -> Result<Self> {
        let arity = nodes.iter().filter(|n| matches!(n, Node::Input(_))).count();
        let mut seen = vec![false; arity];
        for (id, node) in nodes.iter_mut().enumerate() {
            for s in node.sources() {
                if s >= id {
                    return Err(Error::Validation(format!("node {id} references node {s}, which does not precede it")));
                }
            }
            match node {
                Node::Input(k) => {
                    if *k >= arity {
                        return Err(Error::Validation(format!("input index {k} is not below the arity {arity}")));
                    }
                    if std::mem::replace(&mut seen[*k], true) {
                        return Err(Error::Validation(format!("input index {k} declared twice")));
                    }
                }
                Node::Piecewise { pieces, .. } => {
                    pieces.sort_by(|a, b| match (&a.0.lo, &b.0.lo) {
                        (None, None) => std::cmp::Ordering::Equal,
                        (None, _) => std::cmp::Ordering::Less,
                        (_, None) => std::cmp::Ordering::Greater,
                        (Some(x), Some(y)) => x.cmp(y),
                    });
                    check_partition(id, pieces)?;
                }
                _ => {}
            }
        }
        if outputs.is_empty() {
            return Err(Error::Validation("program has no outputs".into()));
        }
        if let Some(bad) = outputs.iter().find(|&&o| o >= nodes.len()) {
            return Err(Error::Validation(format!("output references node {bad} of {}", nodes.len())));
        }
        Ok(DagProgram { nodes, outputs, arity })
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn outputs(&self) -> &[usize] {
        &self.outputs
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    /// Number of binary nodes in the program, whether or not they execute.
    pub fn static_binary_count(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, Node::Binary { .. })).count()
    }

    /// Evaluates every node in order, charging one unit per binary node.
    pub fn evaluate(&self, inputs: &[Scalar], meter: &mut OpMeter) -> Result<Vec<Scalar>> {
        if inputs.len() != self.arity {
            return Err(Error::DomainMismatch(format!("program takes {} inputs, got {}", self.arity, inputs.len())));
        }
        let mut vals: Vec<Scalar> = Vec::with_capacity(self.nodes.len());
        for node in &self.nodes {
            let v = match node {
                Node::Input(k) => inputs[*k].clone(),
                Node::Const(c) => c.clone(),
                Node::Unary { f, src } => f.apply(&vals[*src])?,
                Node::Piecewise { src, pieces } => {
                    let x = &vals[*src];
                    let (_, f) = pieces.iter().find(|(iv, _)| iv.contains(x)).expect("validated intervals partition the line");
                    f.apply(x)?
                }
                Node::Binary { op, lhs, rhs } => binary_op(*op, &vals[*lhs], &vals[*rhs], meter)?,
            };
            vals.push(v);
        }
        Ok(self.outputs.iter().map(|&o| vals[o].clone()).collect())
    }

    /// Convenience for single-output programs.
    pub fn evaluate_one(&self, inputs: &[Scalar], meter: &mut OpMeter) -> Result<Scalar> {
        Ok(self.evaluate(inputs, meter)?.swap_remove(0))
    }

    /// The same program with a single output node selected.
    pub fn with_output(&self, out: usize) -> Result<DagProgram> {
        DagProgram::new(self.nodes.clone(), vec![out])
    }
}

fn check_partition(id: usize, pieces: &[(Interval, PieceFn)]) -> Result<()> {
    let bad = |why: &str| Err(Error::Validation(format!("piecewise node {id}: intervals {why}")));
    if pieces.is_empty() {
        return bad("are empty");
    }
    if pieces[0].0.lo.is_some() {
        return bad("do not cover -inf");
    }
    if pieces.last().expect("nonempty").0.hi.is_some() {
        return bad("do not cover +inf");
    }
    for (k, (iv, _)) in pieces.iter().enumerate() {
        if let (Some(lo), Some(hi)) = (&iv.lo, &iv.hi) {
            if lo >= hi {
                return bad("contain an empty interval");
            }
        }
        if k + 1 < pieces.len() {
            let next_lo = &pieces[k + 1].0.lo;
            match (&iv.hi, next_lo) {
                (Some(h), Some(l)) if h == l => {}
                (Some(h), Some(l)) if l < h => return bad("overlap"),
                _ => return bad("leave a gap or overlap"),
            }
        }
    }
    Ok(())
}

impl fmt::Display for DagProgram {
    /// Canonical text form; `parse_dag` reads it back to an equal program.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for node in &self.nodes {
            match node {
                Node::Input(k) => writeln!(f, "i{k}")?,
                Node::Const(c) => writeln!(f, "c {c}")?,
                Node::Unary { f: pf, src } => writeln!(f, "u {pf} {src}")?,
                Node::Piecewise { src, pieces } => {
                    write!(f, "p {src}")?;
                    for (iv, pf) in pieces {
                        write!(f, " {iv}:{pf}")?;
                    }
                    writeln!(f)?;
                }
                Node::Binary { op, lhs, rhs } => writeln!(f, "b {} {lhs} {rhs}", op.name())?,
            }
        }
        let outs: Vec<String> = self.outputs.iter().map(usize::to_string).collect();
        writeln!(f, "out {}", outs.join(" "))
    }
}

/// Sum of `m` inputs with `m - 1` additions.
pub fn sum_dag(m: usize) -> DagProgram {
    assert!(m >= 1);
    let mut nodes: Vec<Node> = (0..m).map(Node::Input).collect();
    let mut acc = 0;
    for k in 1..m {
        nodes.push(Node::Binary { op: BinaryOp::Add, lhs: acc, rhs: k });
        acc = nodes.len() - 1;
    }
    DagProgram::new(nodes, vec![acc]).expect("well formed")
}

/// Dot product of two `n`-vectors laid out as inputs `x_0..x_{n-1}, y_0..y_{n-1}`.
pub fn dot_dag(n: usize) -> DagProgram {
    assert!(n >= 1);
    let mut nodes: Vec<Node> = (0..2 * n).map(Node::Input).collect();
    let mut acc = None;
    for k in 0..n {
        nodes.push(Node::Binary { op: BinaryOp::Mul, lhs: k, rhs: n + k });
        let p = nodes.len() - 1;
        acc = Some(match acc {
            None => p,
            Some(a) => {
                nodes.push(Node::Binary { op: BinaryOp::Add, lhs: a, rhs: p });
                nodes.len() - 1
            }
        });
    }
    DagProgram::new(nodes, vec![acc.expect("n >= 1")]).expect("well formed")
}

/// `⌊d·x⌋ − 2⌊d·x/2⌋` over inputs `(d, x)`: a multiply, a divide by the constant
/// node 2, and a subtraction; the floors and the doubling are free.
pub fn floor_parity_dag() -> DagProgram {
    let nodes = vec![
        Node::Input(0),
        Node::Input(1),
        Node::Binary { op: BinaryOp::Mul, lhs: 0, rhs: 1 },
        Node::Const(Scalar::int(2)),
        Node::Binary { op: BinaryOp::Div, lhs: 2, rhs: 3 },
        Node::Unary { f: PieceFn::Unary(UnaryOp::Floor), src: 2 },
        Node::Unary { f: PieceFn::Unary(UnaryOp::Floor), src: 4 },
        Node::Unary { f: PieceFn::WithConst { op: BinaryOp::Mul, c: Scalar::int(2), const_on_left: false }, src: 6 },
        Node::Binary { op: BinaryOp::Sub, lhs: 5, rhs: 7 },
    ];
    DagProgram::new(nodes, vec![8]).expect("well formed")
}

fn small_rational<R: Rng>(rng: &mut R) -> Scalar {
    let num = rng.gen_range(-4i64..=4);
    let den = rng.gen_range(1i64..=3);
    Scalar::ratio(num, den)
}

fn random_piece<R: Rng>(rng: &mut R) -> PieceFn {
    match rng.gen_range(0..8) {
        0 => PieceFn::Unary(UnaryOp::Identity),
        1 => PieceFn::Unary(UnaryOp::Floor),
        2 => PieceFn::Unary(UnaryOp::Ceil),
        3 => PieceFn::Unary(UnaryOp::Abs),
        4 => PieceFn::Unary(UnaryOp::Const(small_rational(rng))),
        5 => PieceFn::WithConst { op: BinaryOp::Add, c: small_rational(rng), const_on_left: false },
        6 => PieceFn::WithConst { op: BinaryOp::Mul, c: small_rational(rng), const_on_left: false },
        _ => PieceFn::WithConst { op: BinaryOp::Sub, c: small_rational(rng), const_on_left: true },
    }
}

/// A random valid program with `1..=max_arity` inputs and at most `max_nodes` nodes.
/// The last node is the output.
pub fn random_dag<R: Rng>(rng: &mut R, max_arity: usize, max_nodes: usize) -> DagProgram {
    let arity = rng.gen_range(1..=max_arity.min(max_nodes.saturating_sub(1)).max(1));
    let mut nodes: Vec<Node> = (0..arity).map(Node::Input).collect();
    let extra = rng.gen_range(1..=max_nodes.saturating_sub(arity).max(1));
    for _ in 0..extra {
        let len = nodes.len();
        let pick = |rng: &mut R| {
            // lean toward recent nodes so chains form
            if rng.gen_bool(0.5) {
                rng.gen_range(len.saturating_sub(3)..len)
            } else {
                rng.gen_range(0..len)
            }
        };
        let node = match rng.gen_range(0..10) {
            0..=4 => {
                let op = [BinaryOp::Add, BinaryOp::Sub, BinaryOp::Mul, BinaryOp::Div][rng.gen_range(0..4)];
                Node::Binary { op, lhs: pick(rng), rhs: pick(rng) }
            }
            5 | 6 => Node::Unary { f: random_piece(rng), src: pick(rng) },
            7 | 8 => {
                let mut cuts: Vec<Scalar> = (0..rng.gen_range(1..=2)).map(|_| small_rational(rng)).collect();
                cuts.sort();
                cuts.dedup();
                let mut pieces = Vec::new();
                let mut lo = None;
                for c in cuts {
                    pieces.push((Interval { lo: lo.clone(), hi: Some(c.clone()) }, random_piece(rng)));
                    lo = Some(c);
                }
                pieces.push((Interval { lo, hi: None }, random_piece(rng)));
                Node::Piecewise { src: pick(rng), pieces }
            }
            _ => Node::Const(small_rational(rng)),
        };
        nodes.push(node);
    }
    let out = nodes.len() - 1;
    DagProgram::new(nodes, vec![out]).expect("generator emits valid programs")
}
