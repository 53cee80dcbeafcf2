use super::{DagProgram, Interval, Node, PieceFn};
use crate::error::{Error, Result};
use crate::numerics::{BinaryOp, Scalar, UnaryOp};

/// Parses the line-oriented circuit format.
///
/// ```text
/// i0                       # input 0
/// c 3/4                    # constant
/// u floor 1                # free unary on node 1
/// p 0 (-inf,0]:const=0 (0,inf]:id
/// b mul 0 1                # charged binary
/// out 4
/// ```
///
/// Nodes are numbered by their position. `;` may stand in for a newline.
pub fn parse_dag(text: &str) -> Result<DagProgram> {
    let mut nodes = Vec::new();
    let mut outputs: Option<Vec<usize>> = None;
    for (lineno, raw) in text.lines().enumerate() {
        let line_no = lineno + 1;
        let content = raw.split('#').next().unwrap_or("");
        for stmt in content.split(';') {
            let stmt = stmt.trim();
            if stmt.is_empty() {
                continue;
            }
            let err = |msg: String| Error::Parse { line: line_no, msg };
            if outputs.is_some() {
                return Err(err("statements after `out`".into()));
            }
            let toks: Vec<&str> = stmt.split_whitespace().collect();
            let head = toks[0];
            let index = |tok: &str| tok.parse::<usize>().map_err(|_| err(format!("expected a node id, got {tok:?}")));
            let node = if let Some(k) = head.strip_prefix('i').filter(|k| !k.is_empty()) {
                if toks.len() != 1 {
                    return Err(err("input takes no operands".into()));
                }
                Node::Input(k.parse().map_err(|_| err(format!("bad input index {k:?}")))?)
            } else {
                match head {
                    "out" => {
                        if toks.len() < 2 {
                            return Err(err("`out` needs at least one node id".into()));
                        }
                        outputs = Some(toks[1..].iter().map(|t| index(t)).collect::<Result<_>>()?);
                        continue;
                    }
                    "c" => {
                        if toks.len() != 2 {
                            return Err(err("constant takes one value".into()));
                        }
                        Node::Const(Scalar::parse(toks[1]).map_err(err)?)
                    }
                    "u" => {
                        if toks.len() != 3 {
                            return Err(err("unary takes a kind and a source".into()));
                        }
                        Node::Unary { f: parse_piece(toks[1]).map_err(err)?, src: index(toks[2])? }
                    }
                    "b" => {
                        if toks.len() != 4 {
                            return Err(err("binary takes a kind and two sources".into()));
                        }
                        let op = BinaryOp::from_name(toks[1]).ok_or_else(|| err(format!("unknown binary op {:?}", toks[1])))?;
                        Node::Binary { op, lhs: index(toks[2])?, rhs: index(toks[3])? }
                    }
                    "p" => {
                        if toks.len() < 3 {
                            return Err(err("piecewise takes a source and at least one piece".into()));
                        }
                        let src = index(toks[1])?;
                        let pieces = toks[2..].iter().map(|t| parse_interval_piece(t).map_err(err)).collect::<Result<_>>()?;
                        Node::Piecewise { src, pieces }
                    }
                    other => return Err(err(format!("unknown statement {other:?}"))),
                }
            };
            nodes.push(node);
        }
    }
    let outputs = outputs.ok_or(Error::Parse { line: text.lines().count().max(1), msg: "missing `out` line".into() })?;
    DagProgram::new(nodes, outputs)
}

fn parse_bound(tok: &str) -> std::result::Result<Option<Scalar>, String> {
    match tok.trim() {
        "-inf" | "inf" | "+inf" => Ok(None),
        t => Scalar::parse(t).map(Some),
    }
}

fn parse_interval_piece(tok: &str) -> std::result::Result<(Interval, PieceFn), String> {
    let (iv, piece) = tok.split_once("]:").ok_or_else(|| format!("expected `(lo,hi]:piece`, got {tok:?}"))?;
    let body = iv.strip_prefix('(').ok_or_else(|| format!("interval must open with `(`: {tok:?}"))?;
    let (lo, hi) = body.split_once(',').ok_or_else(|| format!("interval needs `lo,hi`: {tok:?}"))?;
    if lo.trim() == "inf" || lo.trim() == "+inf" || hi.trim() == "-inf" {
        return Err(format!("misplaced infinity in {tok:?}"));
    }
    Ok((Interval { lo: parse_bound(lo)?, hi: parse_bound(hi)? }, parse_piece(piece)?))
}

fn parse_piece(tok: &str) -> std::result::Result<PieceFn, String> {
    if let Some((name, val)) = tok.split_once('=') {
        let c = Scalar::parse(val)?;
        let with = |op, const_on_left| Ok(PieceFn::WithConst { op, c: c.clone(), const_on_left });
        return match name {
            "const" => Ok(PieceFn::Unary(UnaryOp::Const(c))),
            "add" => with(BinaryOp::Add, false),
            "sub" => with(BinaryOp::Sub, false),
            "rsub" => with(BinaryOp::Sub, true),
            "mul" => with(BinaryOp::Mul, false),
            "div" => with(BinaryOp::Div, false),
            "rdiv" => with(BinaryOp::Div, true),
            other => Err(format!("unknown constant piece {other:?}")),
        };
    }
    Ok(PieceFn::Unary(match tok {
        "id" => UnaryOp::Identity,
        "floor" => UnaryOp::Floor,
        "ceil" => UnaryOp::Ceil,
        "abs" => UnaryOp::Abs,
        "sqrt" => UnaryOp::Sqrt,
        "exp" => UnaryOp::Exp,
        "ln" => UnaryOp::Ln,
        other => return Err(format!("unknown unary kind {other:?}")),
    }))
}
