//! Version-space consistency: does some member satisfy a list of constraints?
//!
//! `NotEquals` is decided exactly for finite codomains (by exclusion), for the
//! affine-parametrized families (linear, polynomial, invertible one-layer,
//! softmax) by moving along a generic direction of the solution set, and for
//! prime fields by enumerating the solution set when it has at most
//! [`FIELD_ENUMERATION_LIMIT`] points. Relu and indicator families accept
//! `Equals` only.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::fourier_motzkin::{feasible_point, Inequality};
use super::{monomials, Family, Hidden, Input, OutputValue};
use crate::error::{Error, Result};
use crate::linalg::{affine_solutions, PrimeField, RationalField};
use crate::numerics::{OpMeter, Scalar};

pub const FIELD_ENUMERATION_LIMIT: u64 = 1 << 16;

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Constraint {
    Equals(Input, OutputValue),
    NotEquals(Input, OutputValue),
}

impl Constraint {
    pub fn input(&self) -> &Input {
        match self {
            Constraint::Equals(x, _) | Constraint::NotEquals(x, _) => x,
        }
    }

    pub fn holds(&self, y: &OutputValue) -> bool {
        match self {
            Constraint::Equals(_, v) => v == y,
            Constraint::NotEquals(_, v) => v != y,
        }
    }
}

/// Returns a member satisfying every constraint, or `None` if there is none.
pub fn consistent(family: &Family, constraints: &[Constraint]) -> Result<Option<Hidden>> {
    for c in constraints {
        family.check_input(c.input())?;
    }
    let found = match family {
        Family::FiniteExplicit { members, .. } => (0..members.len())
            .map(|index| Hidden::Table { index })
            .find(|h| constraints.iter().all(|c| c.holds(&family.eval_free(h, c.input()).expect("validated input")))),
        Family::LinearReal { n } => {
            let sys = scalar_system(constraints, *n, |x| real(x).to_vec(), |y| y.as_scalar().cloned().map(|v| vec![v]))?;
            sys.and_then(|s| s.solve()).map(|v| Hidden::Linear { v })
        }
        Family::BoundedDegreePoly { degrees } => {
            let dim = family.dimension().unwrap();
            let feats = |x: &Input| monomials(degrees, real(x), &mut OpMeter::unlimited()).expect("unmetered");
            let sys = scalar_system(constraints, dim, feats, |y| y.as_scalar().cloned().map(|v| vec![v]))?;
            sys.and_then(|s| s.solve()).map(|coeffs| Hidden::Poly { coeffs })
        }
        Family::OneLayer { n, activation } if activation.is_invertible() => {
            let pre = |y: &OutputValue| match y {
                OutputValue::Tagged { act, pre } if act == activation => Some(vec![pre.clone()]),
                _ => None,
            };
            let sys = scalar_system(constraints, n + 1, appended_one, pre)?;
            sys.and_then(|s| s.solve()).map(|mut w| {
                let b = w.pop().unwrap();
                Hidden::Neuron { w, b }
            })
        }
        Family::OneLayer { n, .. } => relu_consistent(constraints, *n)?,
        Family::SoftmaxLayer { n, k } => softmax_consistent(constraints, *n, *k)?,
        Family::LinearField { p, n } => field_consistent(constraints, *p, *n)?.map(|alpha| Hidden::FieldLinear { alpha }),
        Family::SparseSupport { k, n } => sparse_consistent(constraints, u64::from(*k), *n)?.map(|support| Hidden::Sparse { support }),
        Family::CombinedStar { p, n } => {
            let (field, ints): (Vec<Constraint>, Vec<Constraint>) = constraints.iter().cloned().partition(|c| matches!(c.input(), Input::Field(_)));
            let alpha = field_consistent(&field, *p, *n)?;
            let support = sparse_consistent(&ints, *p, *n)?;
            alpha.zip(support).map(|(alpha, support)| Hidden::Star { alpha, support })
        }
        Family::ReciprocalPair | Family::ReciprocalTuple { .. } => reciprocal_consistent(family, constraints)?,
        Family::FloorParity => floor_parity_consistent(constraints)?,
        Family::TwoLayerReluIndicator { epsilon, .. } => indicator_consistent(constraints, epsilon)?,
        Family::Cart { base, r } => {
            let mut flat = Vec::new();
            for c in constraints {
                let Input::Batch(xs) = c.input() else { unreachable!("checked by check_input") };
                match c {
                    Constraint::Equals(_, OutputValue::Tuple(ys)) if ys.len() == *r => {
                        flat.extend(xs.iter().cloned().zip(ys.iter().cloned()).map(|(x, y)| Constraint::Equals(x, y)))
                    }
                    Constraint::Equals(..) => return Ok(None),
                    Constraint::NotEquals(_, OutputValue::Tuple(ys)) if *r == 1 => flat.push(Constraint::NotEquals(xs[0].clone(), ys[0].clone())),
                    Constraint::NotEquals(_, OutputValue::Tuple(_)) => return Err(Error::UnsupportedConstraintPattern("tuple disequality for r > 1".into())),
                    Constraint::NotEquals(..) => {}
                }
            }
            return consistent(base, &flat);
        }
    };
    if let Some(h) = &found {
        debug_assert!(family.check_member(h).is_ok(), "witness {h:?} is not a member");
    }
    Ok(found)
}

fn real(x: &Input) -> &[Scalar] {
    match x {
        Input::Real(v) => v,
        _ => unreachable!("checked by check_input"),
    }
}

fn appended_one(x: &Input) -> Vec<Scalar> {
    let mut v = real(x).to_vec();
    v.push(Scalar::one());
    v
}

/// An affine system over ℚ: equalities plus groups of pairs, each group
/// requiring that not every pair holds with equality.
struct AffineSystem {
    dim: usize,
    eqs: Vec<(Vec<Scalar>, Scalar)>,
    neqs: Vec<Vec<(Vec<Scalar>, Scalar)>>,
}

fn dot(a: &[Scalar], b: &[Scalar]) -> Scalar {
    a.iter().zip(b).fold(Scalar::zero(), |acc, (x, y)| &acc + &(x * y))
}

impl AffineSystem {
    fn solve(&self) -> Option<Vec<Scalar>> {
        let rows: Vec<Vec<Scalar>> = self.eqs.iter().map(|(r, _)| r.clone()).collect();
        let rhs: Vec<Scalar> = self.eqs.iter().map(|(_, v)| v.clone()).collect();
        let (x0, null) = affine_solutions(&RationalField, &rows, &rhs, self.dim)?;
        // A pair whose row is orthogonal to the nullspace has a fixed value on the solution set.
        let row_null = |row: &[Scalar]| null.iter().map(|nv| dot(row, nv)).collect::<Vec<_>>();
        let pairs = self.neqs.iter().map(Vec::len).sum::<usize>();
        // Σ rn_j λ^j is a nonzero polynomial of degree < |null| for every moving pair, so some
        // λ among the first pairs·|null| + 1 integers keeps all of them moving.
        let lambda = (1..=(pairs * null.len().max(1) + 1) as i64)
            .map(Scalar::int)
            .find(|l| {
                self.neqs.iter().flatten().all(|(row, _)| {
                    let rn = row_null(row);
                    rn.iter().all(Scalar::is_zero) || !poly_at(&rn, l).is_zero()
                })
            })
            .expect("finitely many bad values");
        let g: Vec<Scalar> = (0..null.len()).map(|j| pow(&lambda, j)).collect();
        let dir: Vec<Scalar> = (0..self.dim).map(|i| null.iter().zip(&g).fold(Scalar::zero(), |acc, (nv, gj)| &acc + &(&nv[i] * gj))).collect();
        let mut bad: BTreeSet<Scalar> = BTreeSet::new();
        for group in &self.neqs {
            let moving = group.iter().find(|(row, _)| !dot(row, &dir).is_zero());
            match moving {
                Some((row, v)) => {
                    bad.insert(&(v - &dot(row, &x0)) / &dot(row, &dir));
                }
                None => {
                    if group.iter().all(|(row, v)| dot(row, &x0) == *v) {
                        return None;
                    }
                }
            }
        }
        let s = (0..).map(Scalar::int).find(|s| !bad.contains(s)).unwrap();
        Some(x0.iter().zip(&dir).map(|(a, d)| a + &(&s * d)).collect())
    }
}

fn pow(x: &Scalar, e: usize) -> Scalar {
    (0..e).fold(Scalar::one(), |acc, _| &acc * x)
}

fn poly_at(coeffs: &[Scalar], x: &Scalar) -> Scalar {
    coeffs.iter().rev().fold(Scalar::zero(), |acc, c| &(&acc * x) + c)
}

/// Builds an [`AffineSystem`] where each output maps to one value per block
/// (`values` returns `None` for outputs of the wrong shape, which no member produces).
fn scalar_system(
    constraints: &[Constraint],
    dim: usize,
    features: impl Fn(&Input) -> Vec<Scalar>,
    values: impl Fn(&OutputValue) -> Option<Vec<Scalar>>,
) -> Result<Option<AffineSystem>> {
    let mut sys = AffineSystem { dim, eqs: Vec::new(), neqs: Vec::new() };
    for c in constraints {
        let row = features(c.input());
        match c {
            Constraint::Equals(_, y) => match values(y) {
                Some(v) => sys.eqs.push((row, v[0].clone())),
                None => return Ok(None),
            },
            Constraint::NotEquals(_, y) => {
                if let Some(v) = values(y) {
                    sys.neqs.push(vec![(row, v[0].clone())]);
                }
            }
        }
    }
    Ok(Some(sys))
}

fn softmax_consistent(constraints: &[Constraint], n: usize, k: usize) -> Result<Option<Hidden>> {
    // Unknowns: for each class i ≥ 1 the differences (a_i − a_0, b_i − b_0), stacked.
    let block = n + 1;
    let dim = (k - 1) * block;
    let place = |i: usize, x: &Input| {
        let mut row = vec![Scalar::zero(); dim];
        for (j, v) in appended_one(x).into_iter().enumerate() {
            row[i * block + j] = v;
        }
        row
    };
    let mut sys = AffineSystem { dim, eqs: Vec::new(), neqs: Vec::new() };
    for c in constraints {
        match c {
            Constraint::Equals(x, OutputValue::Logits(l)) if l.len() == k - 1 => sys.eqs.extend(l.iter().enumerate().map(|(i, v)| (place(i, x), v.clone()))),
            Constraint::Equals(..) => return Ok(None),
            Constraint::NotEquals(x, OutputValue::Logits(l)) if l.len() == k - 1 => {
                sys.neqs.push(l.iter().enumerate().map(|(i, v)| (place(i, x), v.clone())).collect())
            }
            Constraint::NotEquals(..) => {}
        }
    }
    Ok(sys.solve().map(|theta| {
        let mut a = vec![vec![Scalar::zero(); n]];
        let mut b = vec![Scalar::zero()];
        for chunk in theta.chunks(block) {
            a.push(chunk[..n].to_vec());
            b.push(chunk[n].clone());
        }
        Hidden::Softmax { a, b }
    }))
}

fn relu_consistent(constraints: &[Constraint], n: usize) -> Result<Option<Hidden>> {
    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    let mut nonpositive = Vec::new();
    for c in constraints {
        match c {
            Constraint::Equals(x, OutputValue::Rational(y)) => {
                if y.is_positive() {
                    rows.push(appended_one(x));
                    rhs.push(y.clone());
                } else if y.is_zero() {
                    nonpositive.push(appended_one(x));
                } else {
                    return Ok(None);
                }
            }
            Constraint::Equals(..) => return Ok(None),
            Constraint::NotEquals(..) => return Err(Error::UnsupportedConstraintPattern("relu families accept equalities only".into())),
        }
    }
    let Some((x0, null)) = affine_solutions(&RationalField, &rows, &rhs, n + 1) else {
        return Ok(None);
    };
    // θ = x0 + N t with (row·N) t ≤ −row·x0 for every zero output.
    let system: Vec<Inequality> =
        nonpositive.iter().map(|row| Inequality { coeffs: null.iter().map(|nv| dot(row, nv)).collect(), bound: -&dot(row, &x0) }).collect();
    Ok(feasible_point(&system, null.len()).map(|t| {
        let mut theta: Vec<Scalar> = x0.clone();
        for (tj, nv) in t.iter().zip(&null) {
            for (th, v) in theta.iter_mut().zip(nv) {
                *th = &*th + &(tj * v);
            }
        }
        let b = theta.pop().unwrap();
        Hidden::Neuron { w: theta, b }
    }))
}

fn field_consistent(constraints: &[Constraint], p: u64, n: usize) -> Result<Option<Vec<u64>>> {
    let field = PrimeField::new(p);
    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    let mut neqs = Vec::new();
    for c in constraints {
        let x = match c.input() {
            Input::Field(x) => x.clone(),
            _ => unreachable!("checked by check_input"),
        };
        match c {
            Constraint::Equals(_, OutputValue::FieldElem(y)) => {
                rows.push(x);
                rhs.push(*y);
            }
            Constraint::Equals(..) => return Ok(None),
            Constraint::NotEquals(_, OutputValue::FieldElem(y)) => neqs.push((x, *y)),
            Constraint::NotEquals(..) => {}
        }
    }
    let Some((x0, null)) = affine_solutions(&field, &rows, &rhs, n) else {
        return Ok(None);
    };
    let eval = |alpha: &[u64], x: &[u64]| alpha.iter().zip(x).fold(0u64, |acc, (a, b)| (acc + a * b % p) % p);
    if neqs.is_empty() {
        return Ok(Some(x0));
    }
    let size = (p as u128).checked_pow(null.len() as u32).filter(|s| *s <= u128::from(FIELD_ENUMERATION_LIMIT));
    let Some(size) = size else {
        return Err(Error::UnsupportedConstraintPattern(format!("field disequalities over a solution set larger than {FIELD_ENUMERATION_LIMIT}")));
    };
    for code in 0..size as u64 {
        let mut alpha = x0.clone();
        let mut rest = code;
        for nv in &null {
            let t = rest % p;
            rest /= p;
            for (a, v) in alpha.iter_mut().zip(nv) {
                *a = (*a + t * v) % p;
            }
        }
        if neqs.iter().all(|(x, y)| eval(&alpha, x) != *y) {
            return Ok(Some(alpha));
        }
    }
    Ok(None)
}

fn sparse_consistent(constraints: &[Constraint], k: u64, n: usize) -> Result<Option<BTreeMap<i64, u32>>> {
    let mut fixed: BTreeMap<i64, u32> = BTreeMap::new();
    let mut excluded: BTreeMap<i64, BTreeSet<u32>> = BTreeMap::new();
    for c in constraints {
        let Input::Int(i) = c.input() else { unreachable!("checked by check_input") };
        match c {
            Constraint::Equals(_, OutputValue::Label(v)) if u64::from(*v) < k => {
                if *fixed.entry(*i).or_insert(*v) != *v {
                    return Ok(None);
                }
            }
            Constraint::Equals(..) => return Ok(None),
            Constraint::NotEquals(_, OutputValue::Label(v)) => {
                excluded.entry(*i).or_default().insert(*v);
            }
            Constraint::NotEquals(..) => {}
        }
    }
    let mut support = BTreeMap::new();
    let points: BTreeSet<i64> = fixed.keys().chain(excluded.keys()).copied().collect();
    for i in points {
        let ex = excluded.get(&i).cloned().unwrap_or_default();
        let v = match fixed.get(&i) {
            Some(v) if ex.contains(v) => return Ok(None),
            Some(v) => *v,
            None if !ex.contains(&0) => 0,
            None => match (1..k as u32).find(|v| !ex.contains(v)) {
                Some(v) => v,
                None => return Ok(None),
            },
        };
        if v != 0 {
            support.insert(i, v);
        }
    }
    Ok((support.len() <= n).then_some(support))
}

/// Binary outputs: turns every constraint into an `Equals` on a bit.
fn bit_claims(constraints: &[Constraint]) -> Option<Vec<(Input, bool)>> {
    let mut out = Vec::new();
    for c in constraints {
        match c {
            Constraint::Equals(x, OutputValue::Bit(b)) => out.push((x.clone(), *b)),
            Constraint::NotEquals(x, OutputValue::Bit(b)) => out.push((x.clone(), !*b)),
            Constraint::Equals(..) => return None,
            Constraint::NotEquals(..) => {}
        }
    }
    Some(out)
}

fn reciprocal_consistent(family: &Family, constraints: &[Constraint]) -> Result<Option<Hidden>> {
    let Some(claims) = bit_claims(constraints) else { return Ok(None) };
    let ones: Vec<Vec<Scalar>> = claims.iter().filter(|(_, b)| *b).map(|(x, _)| real(x).to_vec()).collect::<BTreeSet<_>>().into_iter().collect();
    let zeros: BTreeSet<Vec<Scalar>> = claims.iter().filter(|(_, b)| !*b).map(|(x, _)| real(x).to_vec()).collect();
    if ones.iter().any(|x| zeros.contains(x)) {
        return Ok(None);
    }
    let recip = |v: &[Scalar]| -> Option<Vec<Scalar>> { v.iter().map(|x| (!x.is_zero()).then(|| &Scalar::one() / x)).collect() };
    let candidate = |a: Vec<Scalar>| -> Option<Hidden> {
        let h = Hidden::Reciprocal { a: a.clone() };
        family.check_member(&h).ok()?;
        let b = recip(&a)?;
        (!zeros.contains(&a) && !zeros.contains(&b) && ones.iter().all(|x| *x == a || *x == b)).then_some(h)
    };
    Ok(match ones.len() {
        0 => {
            let r = match family {
                Family::ReciprocalTuple { r } => *r,
                _ => 1,
            };
            (2..).find_map(|t| candidate(vec![Scalar::int(t); r]))
        }
        1 | 2 => candidate(ones[0].clone()),
        _ => None,
    })
}

fn floor_parity_consistent(constraints: &[Constraint]) -> Result<Option<Hidden>> {
    let Some(claims) = bit_claims(constraints) else { return Ok(None) };
    let mut bits: BTreeMap<u32, bool> = BTreeMap::new();
    for (x, b) in claims {
        let d = &real(&x)[0];
        let j = (0..64)
            .find(|&j| *d == Scalar::pow2(j))
            .ok_or_else(|| Error::UnsupportedConstraintPattern(format!("floor parity constraints at {d}; only powers of two are decided")))?;
        if *bits.entry(j as u32).or_insert(b) != b {
            return Ok(None);
        }
    }
    let depth = bits.keys().next_back().copied().unwrap_or(0);
    // Midpoint of the dyadic interval fixed by digits 0..=depth (digit 0 is the parity of ⌊x⌋).
    let mut x = Scalar::pow2(-(depth as i32) - 1);
    for (j, b) in bits {
        if b {
            x = &x + &Scalar::pow2(-(j as i32));
        }
    }
    Ok(Some(Hidden::FloorParity { x }))
}

fn indicator_consistent(constraints: &[Constraint], max_eps: &Scalar) -> Result<Option<Hidden>> {
    let mut ones = Vec::new();
    let mut zeros = Vec::new();
    for c in constraints {
        match c {
            Constraint::Equals(x, OutputValue::Rational(y)) if *y == Scalar::one() => ones.push(real(x)[0].clone()),
            Constraint::Equals(x, OutputValue::Rational(y)) if y.is_zero() => zeros.push(real(x)[0].clone()),
            _ => return Err(Error::UnsupportedConstraintPattern("indicator families accept equalities to 0 or 1 only".into())),
        }
    }
    let zero = Scalar::zero();
    if ones.iter().any(Scalar::is_negative) {
        return Ok(None);
    }
    let c = ones.into_iter().max().unwrap_or_else(Scalar::zero);
    let mut eps = max_eps.clone();
    for z in zeros {
        let gap = if z > c {
            &z - &c
        } else if z < zero {
            -&z
        } else {
            return Ok(None);
        };
        eps = eps.min(gap);
    }
    Ok(Some(Hidden::Indicator { c, epsilon: eps }))
}

#[cfg(test)]
mod tests {
    use super::super::Activation;
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn q(n: i64, d: i64) -> Scalar {
        Scalar::ratio(n, d)
    }

    fn real(v: &[i64]) -> Input {
        Input::Real(v.iter().map(|&x| Scalar::int(x)).collect())
    }

    fn rat(v: i64) -> OutputValue {
        OutputValue::Rational(Scalar::int(v))
    }

    #[test]
    fn contradictory_linear_equalities() {
        let f = Family::LinearReal { n: 2 };
        let cs = [Constraint::Equals(real(&[1, 0]), rat(1)), Constraint::Equals(real(&[1, 0]), rat(2))];
        assert_eq!(consistent(&f, &cs).unwrap(), None);
    }

    #[test]
    fn linear_disequality_moves_off_the_bad_value() {
        let f = Family::LinearReal { n: 2 };
        let cs = [Constraint::Equals(real(&[1, 1]), rat(2)), Constraint::NotEquals(real(&[1, 0]), rat(1)), Constraint::NotEquals(real(&[0, 1]), rat(0))];
        let h = consistent(&f, &cs).unwrap().unwrap();
        for c in &cs {
            assert!(c.holds(&f.eval_free(&h, c.input()).unwrap()));
        }
        let fixed = [Constraint::Equals(real(&[1, 0]), rat(3)), Constraint::NotEquals(real(&[2, 0]), rat(6))];
        assert_eq!(consistent(&f, &fixed).unwrap(), None);
    }

    #[test]
    fn floor_parity_witness_is_the_dyadic_midpoint() {
        let f = Family::FloorParity;
        let cs = [Constraint::Equals(real(&[2]), OutputValue::Bit(true)), Constraint::Equals(real(&[4]), OutputValue::Bit(true))];
        assert_eq!(consistent(&f, &cs).unwrap(), Some(Hidden::FloorParity { x: q(7, 8) }));
        let odd = [Constraint::Equals(real(&[3]), OutputValue::Bit(true))];
        assert!(matches!(consistent(&f, &odd), Err(Error::UnsupportedConstraintPattern(_))));
    }

    #[test]
    fn sparse_support_counts_forced_nonzeros() {
        let f = Family::SparseSupport { k: 3, n: 2 };
        let three: Vec<Constraint> = (1..=3).map(|i| Constraint::NotEquals(Input::Int(i), OutputValue::Label(0))).collect();
        assert_eq!(consistent(&f, &three).unwrap(), None);
        assert!(consistent(&f, &three[..2]).unwrap().is_some());
        let pinned = [Constraint::Equals(Input::Int(4), OutputValue::Label(2)), Constraint::NotEquals(Input::Int(4), OutputValue::Label(2))];
        assert_eq!(consistent(&f, &pinned).unwrap(), None);
    }

    #[test]
    fn reciprocal_cases() {
        let f = Family::ReciprocalPair;
        let one = |v: Scalar| Constraint::Equals(Input::Real(vec![v]), OutputValue::Bit(true));
        let zero = |v: Scalar| Constraint::Equals(Input::Real(vec![v]), OutputValue::Bit(false));
        assert!(consistent(&f, &[one(q(2, 1)), one(q(1, 2))]).unwrap().is_some());
        assert_eq!(consistent(&f, &[one(q(2, 1)), one(q(1, 3))]).unwrap(), None);
        assert_eq!(consistent(&f, &[one(q(2, 1)), zero(q(1, 2))]).unwrap(), None);
        assert_eq!(consistent(&f, &[one(q(1, 1))]).unwrap(), None);
        let h = consistent(&f, &[zero(q(2, 1)), zero(q(1, 2)), zero(q(3, 1))]).unwrap().unwrap();
        assert_eq!(h, Hidden::Reciprocal { a: vec![q(4, 1)] });
    }

    #[test]
    fn relu_uses_inequalities_for_zero_outputs() {
        let f = Family::OneLayer { n: 1, activation: Activation::Relu };
        let cs = [Constraint::Equals(real(&[1]), rat(1)), Constraint::Equals(real(&[0]), rat(0)), Constraint::Equals(real(&[-3]), rat(0))];
        let h = consistent(&f, &cs).unwrap().unwrap();
        for c in &cs {
            assert!(c.holds(&f.eval_free(&h, c.input()).unwrap()));
        }
        let bad = [Constraint::Equals(real(&[1]), rat(1)), Constraint::Equals(real(&[2]), rat(0)), Constraint::Equals(real(&[0]), rat(0))];
        // w + b = 1, 2w + b ≤ 0, b ≤ 0 is infeasible.
        assert_eq!(consistent(&f, &bad).unwrap(), None);
    }

    #[test]
    fn indicator_picks_the_smallest_interval() {
        let f = Family::TwoLayerReluIndicator { alpha: q(0, 1), epsilon: q(1, 2) };
        let cs = [
            Constraint::Equals(Input::Real(vec![q(1, 2)]), OutputValue::Rational(q(1, 1))),
            Constraint::Equals(Input::Real(vec![q(3, 4)]), OutputValue::Rational(q(0, 1))),
        ];
        assert_eq!(consistent(&f, &cs).unwrap(), Some(Hidden::Indicator { c: q(1, 2), epsilon: q(1, 4) }));
        let at_zero = [Constraint::Equals(Input::Real(vec![q(0, 1)]), OutputValue::Rational(q(0, 1)))];
        assert_eq!(consistent(&f, &at_zero).unwrap(), None);
    }

    fn all_families() -> Vec<Family> {
        vec![
            Family::LinearReal { n: 3 },
            Family::LinearField { p: 5, n: 3 },
            Family::SparseSupport { k: 3, n: 2 },
            Family::CombinedStar { p: 3, n: 2 },
            Family::ReciprocalPair,
            Family::ReciprocalTuple { r: 2 },
            Family::BoundedDegreePoly { degrees: vec![2, 1] },
            Family::FiniteExplicit { domain: 5, k: 3, members: vec![vec![0, 1, 2, 0, 1], vec![1, 1, 1, 0, 0], vec![2, 0, 1, 2, 2]] },
            Family::OneLayer { n: 2, activation: Activation::LeakyRelu { alpha: q(1, 2) } },
            Family::OneLayer { n: 2, activation: Activation::Sigmoid },
            Family::OneLayer { n: 2, activation: Activation::Relu },
            Family::SoftmaxLayer { n: 2, k: 3 },
            Family::FloorParity,
            Family::TwoLayerReluIndicator { alpha: q(1, 2), epsilon: q(1, 4) },
            Family::Cart { base: Box::new(Family::LinearReal { n: 2 }), r: 2 },
        ]
    }

    #[test]
    fn real_transcripts_are_consistent() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for family in all_families() {
            for _ in 0..40 {
                let h = family.random_member(&mut rng);
                family.check_member(&h).unwrap();
                let cs: Vec<Constraint> = (0..6)
                    .map(|_| {
                        let x = family.random_input(&mut rng);
                        let y = family.eval_free(&h, &x).unwrap();
                        Constraint::Equals(x, y)
                    })
                    // Indicator consistency is decided for 0/1 claims only.
                    .filter(|c| match (&family, c) {
                        (Family::TwoLayerReluIndicator { .. }, Constraint::Equals(_, OutputValue::Rational(y))) => y.is_zero() || *y == Scalar::one(),
                        _ => true,
                    })
                    .collect();
                let w = consistent(&family, &cs).unwrap().unwrap_or_else(|| panic!("{} rejected {h:?}", family.name()));
                for c in &cs {
                    assert!(c.holds(&family.eval_free(&w, c.input()).unwrap()), "{} witness {w:?}", family.name());
                }
            }
        }
    }
}
