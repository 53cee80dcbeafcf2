use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{DagProgram, Node};
use crate::error::Result;
use crate::numerics::{OpMeter, Scalar};

/// Probe pairs per variable used by [`analyze`].
pub const DEFAULT_PROBES: usize = 200;

/// The 16 rationals probes are drawn from.
pub const PROBE_GRID: [(i64, i64); 16] =
    [(-2, 1), (-3, 2), (-1, 1), (-3, 4), (-1, 2), (-1, 3), (-1, 4), (0, 1), (1, 4), (1, 3), (1, 2), (3, 4), (1, 1), (3, 2), (2, 1), (3, 1)];

fn grid(k: usize) -> Scalar {
    let (n, d) = PROBE_GRID[k];
    Scalar::ratio(n, d)
}

/// Reachable-input sets `S_v` for every node (an over-approximation of semantic dependence).
pub fn dependency_sets(dag: &DagProgram) -> Vec<BTreeSet<usize>> {
    let mut sets: Vec<BTreeSet<usize>> = Vec::with_capacity(dag.nodes().len());
    for node in dag.nodes() {
        let s = match node {
            Node::Input(k) => BTreeSet::from([*k]),
            Node::Const(_) => BTreeSet::new(),
            Node::Unary { src, .. } | Node::Piecewise { src, .. } => sets[*src].clone(),
            Node::Binary { lhs, rhs, .. } => sets[*lhs].union(&sets[*rhs]).copied().collect(),
        };
        sets.push(s);
    }
    sets
}

/// Randomized probing: coordinate `i` is reported when some pair of points
/// differing only in `i` yields two different defined outputs. Sound, possibly
/// incomplete. Points where `f` is undefined are skipped.
pub fn semantic_dependence(f: &dyn Fn(&[Scalar]) -> Option<Scalar>, arity: usize, probes: usize, seed: u64) -> BTreeSet<usize> {
    assert!(probes >= 1, "at least one probe pair per variable");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut deps = BTreeSet::new();
    for i in 0..arity {
        for _ in 0..probes {
            let mut point: Vec<Scalar> = (0..arity).map(|_| grid(rng.gen_range(0..PROBE_GRID.len()))).collect();
            let a = rng.gen_range(0..PROBE_GRID.len());
            let b = (a + rng.gen_range(1..PROBE_GRID.len())) % PROBE_GRID.len();
            point[i] = grid(a);
            let fa = f(&point);
            point[i] = grid(b);
            let fb = f(&point);
            if let (Some(x), Some(y)) = (fa, fb) {
                if x != y {
                    deps.insert(i);
                    break;
                }
            }
        }
    }
    deps
}

/// Exhaustive probing over the full grid; intended for arity at most 3.
pub fn semantic_dependence_exhaustive(f: &dyn Fn(&[Scalar]) -> Option<Scalar>, arity: usize) -> BTreeSet<usize> {
    let g = PROBE_GRID.len();
    let mut deps = BTreeSet::new();
    for i in 0..arity {
        let others = arity - 1;
        'outer: for code in 0..g.pow(others as u32) {
            let mut point = vec![Scalar::zero(); arity];
            let mut rest = code;
            for (k, slot) in point.iter_mut().enumerate() {
                if k != i {
                    *slot = grid(rest % g);
                    rest /= g;
                }
            }
            let mut first: Option<Scalar> = None;
            for v in 0..g {
                point[i] = grid(v);
                if let Some(y) = f(&point) {
                    match &first {
                        None => first = Some(y),
                        Some(x) if *x != y => {
                            deps.insert(i);
                            break 'outer;
                        }
                        _ => {}
                    }
                }
            }
        }
    }
    deps
}

/// One union-find edge added for a binary node.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct WitnessEdge {
    pub node: usize,
    pub a: usize,
    pub b: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct DependencyReport {
    pub output: usize,
    /// `S_v` for each node.
    pub reachable: Vec<BTreeSet<usize>>,
    /// Probed semantic dependence of the output, when computed.
    pub semantic: Option<BTreeSet<usize>>,
    /// The dependence size the bound was certified for.
    pub m: usize,
    pub static_binary_ops: usize,
    /// Largest number of binary operations actually executed on a probe point.
    pub executed_ops_max: Option<u64>,
    /// `m - 1`.
    pub bound: usize,
    pub witness: Vec<WitnessEdge>,
    pub pass: bool,
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn find(&mut self, x: usize) -> usize {
        let p = self.0[x];
        if p == x {
            return x;
        }
        let r = self.find(p);
        self.0[x] = r;
        r
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.0[ra.max(rb)] = ra.min(rb);
        true
    }
}

/// Certifies that the static binary-node count is at least `m − 1` and builds the
/// connectivity witness: for each binary node in order, one edge between two inputs
/// of `S_v` that are not yet connected.
pub fn certify_lower_bound(dag: &DagProgram, m: usize) -> DependencyReport {
    assert!(m <= dag.arity(), "dependence size exceeds the arity");
    let reachable = dependency_sets(dag);
    let mut uf = UnionFind((0..dag.arity()).collect());
    let mut witness = Vec::new();
    for (id, node) in dag.nodes().iter().enumerate() {
        if !matches!(node, Node::Binary { .. }) {
            continue;
        }
        let s: Vec<usize> = reachable[id].iter().copied().collect();
        'pair: for (x, &a) in s.iter().enumerate() {
            for &b in &s[x + 1..] {
                if uf.union(a, b) {
                    witness.push(WitnessEdge { node: id, a, b });
                    break 'pair;
                }
            }
        }
    }
    let static_binary_ops = dag.static_binary_count();
    let bound = m.saturating_sub(1);
    DependencyReport {
        output: dag.outputs()[0],
        reachable,
        semantic: None,
        m,
        static_binary_ops,
        executed_ops_max: None,
        bound,
        witness,
        pass: static_binary_ops >= bound,
    }
}

/// Probes each output's semantic dependence and certifies the bound for it.
pub fn analyze(dag: &DagProgram, probes: usize, seed: u64) -> Result<Vec<DependencyReport>> {
    let mut reports = Vec::new();
    for &out in dag.outputs() {
        let single = dag.with_output(out)?;
        let executed = std::cell::Cell::new(0u64);
        let f = |xs: &[Scalar]| {
            let mut meter = OpMeter::unlimited();
            let r = single.evaluate_one(xs, &mut meter).ok();
            executed.set(executed.get().max(meter.used()));
            r
        };
        let semantic = if dag.arity() <= 3 { semantic_dependence_exhaustive(&f, dag.arity()) } else { semantic_dependence(&f, dag.arity(), probes, seed) };
        let mut report = certify_lower_bound(&single, semantic.len());
        report.semantic = Some(semantic);
        report.executed_ops_max = Some(executed.get());
        reports.push(report);
    }
    Ok(reports)
}

#[cfg(test)]
mod tests {
    use super::super::{parse_dag, random_dag, sum_dag};
    use super::*;

    fn eval(d: &DagProgram) -> impl Fn(&[Scalar]) -> Option<Scalar> + '_ {
        move |xs| d.evaluate_one(xs, &mut OpMeter::unlimited()).ok()
    }

    #[test]
    fn reachable_sets() {
        let d = parse_dag("i0; i1; b mul 0 1; c 5; out 2").unwrap();
        let s = dependency_sets(&d);
        assert_eq!(s[2], BTreeSet::from([0, 1]));
        assert!(s[3].is_empty());
        let masked = parse_dag("i0; i1; c 0; b mul 2 1; b add 0 3; out 4").unwrap();
        assert_eq!(dependency_sets(&masked)[4], BTreeSet::from([0, 1]));
        assert_eq!(semantic_dependence_exhaustive(&eval(&masked), 2), BTreeSet::from([0]));
    }

    #[test]
    fn probing_examples() {
        let sum = |xs: &[Scalar]| OpMeter::unlimited().add(&xs[0], &xs[1]).ok();
        assert_eq!(semantic_dependence(&sum, 2, 100, 1), BTreeSet::from([0, 1]));
        let constant = |_: &[Scalar]| Some(Scalar::int(7));
        assert!(semantic_dependence(&constant, 3, 100, 1).is_empty());
        let first = |xs: &[Scalar]| Some(xs[0].clone());
        assert_eq!(semantic_dependence(&first, 2, 100, 1), BTreeSet::from([0]));
    }

    #[test]
    fn certification_examples() {
        let r = certify_lower_bound(&sum_dag(3), 3);
        assert_eq!((r.bound, r.static_binary_ops, r.pass), (2, 2, true));
        assert_eq!(r.witness.len(), 2);
        let single = parse_dag("i0; out 0").unwrap();
        assert!(certify_lower_bound(&single, 1).pass);
        let fake = parse_dag("i0; i1; i2; b add 0 1; out 3").unwrap();
        assert!(!certify_lower_bound(&fake, 3).pass);
        let probed = semantic_dependence_exhaustive(&eval(&fake), 3);
        assert!(probed.len() <= 2);
    }

    #[test]
    fn lemma_holds_on_random_programs() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let d = random_dag(&mut rng, 3, 10);
            let reports = analyze(&d, DEFAULT_PROBES, 5).unwrap();
            let r = &reports[0];
            assert!(r.pass, "violation on\n{d}");
            let sem = r.semantic.as_ref().unwrap();
            let out_set = &r.reachable[r.output];
            assert!(sem.is_subset(out_set));
        }
    }
}
