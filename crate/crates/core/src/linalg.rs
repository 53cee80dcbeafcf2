//! Fraction-free (Bareiss) row reduction over counted fields.
//!
//! The elimination is written as a resumable task so that a learner can spread
//! one reduction over several rounds, spending a bounded number of operations
//! per call. Pivots are chosen as the first nonzero entry in the column.

use std::fmt;

use crate::numerics::{binary_op, BinaryOp, NumericError, OpMeter, Scalar};

/// A field whose binary operations are charged to an [`OpMeter`].
pub trait CountedField: Clone + fmt::Debug + Send + Sync + 'static {
    type Elem: Clone + PartialEq + fmt::Debug + Send + Sync;

    fn zero(&self) -> Self::Elem;
    fn one(&self) -> Self::Elem;
    fn is_zero(&self, a: &Self::Elem) -> bool;
    fn op(&self, kind: BinaryOp, a: &Self::Elem, b: &Self::Elem, meter: &mut OpMeter) -> Result<Self::Elem, NumericError>;

    fn add(&self, a: &Self::Elem, b: &Self::Elem, m: &mut OpMeter) -> Result<Self::Elem, NumericError> {
        self.op(BinaryOp::Add, a, b, m)
    }
    fn sub(&self, a: &Self::Elem, b: &Self::Elem, m: &mut OpMeter) -> Result<Self::Elem, NumericError> {
        self.op(BinaryOp::Sub, a, b, m)
    }
    fn mul(&self, a: &Self::Elem, b: &Self::Elem, m: &mut OpMeter) -> Result<Self::Elem, NumericError> {
        self.op(BinaryOp::Mul, a, b, m)
    }
    fn div(&self, a: &Self::Elem, b: &Self::Elem, m: &mut OpMeter) -> Result<Self::Elem, NumericError> {
        self.op(BinaryOp::Div, a, b, m)
    }

    /// `a · b` with `n` multiplies and `n - 1` additions.
    fn dot(&self, a: &[Self::Elem], b: &[Self::Elem], m: &mut OpMeter) -> Result<Self::Elem, NumericError> {
        let mut acc: Option<Self::Elem> = None;
        for (x, y) in a.iter().zip(b) {
            let p = self.mul(x, y, m)?;
            acc = Some(match acc {
                None => p,
                Some(s) => self.add(&s, &p, m)?,
            });
        }
        Ok(acc.unwrap_or_else(|| self.zero()))
    }
}

/// The rationals (or approximate reals), element type [`Scalar`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct RationalField;

impl CountedField for RationalField {
    type Elem = Scalar;

    fn zero(&self) -> Scalar {
        Scalar::zero()
    }
    fn one(&self) -> Scalar {
        Scalar::one()
    }
    fn is_zero(&self, a: &Scalar) -> bool {
        a.is_zero()
    }
    fn op(&self, kind: BinaryOp, a: &Scalar, b: &Scalar, meter: &mut OpMeter) -> Result<Scalar, NumericError> {
        binary_op(kind, a, b, meter)
    }
}

/// Integers modulo a prime `p`; every field operation costs one unit.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PrimeField {
    pub p: u64,
}

impl PrimeField {
    pub fn new(p: u64) -> Self {
        PrimeField { p }
    }

    pub fn reduce(&self, v: i64) -> u64 {
        v.rem_euclid(self.p as i64) as u64
    }

    /// Uncharged multiplicative inverse.
    pub fn inverse(&self, a: u64) -> Option<u64> {
        if a.is_multiple_of(self.p) {
            return None;
        }
        let (mut base, mut exp, mut acc) = (a % self.p, self.p - 2, 1u64);
        while exp > 0 {
            if exp & 1 == 1 {
                acc = mul_mod(acc, base, self.p);
            }
            base = mul_mod(base, base, self.p);
            exp >>= 1;
        }
        Some(acc)
    }

    /// Uncharged arithmetic, for oracles and bookkeeping outside a learner.
    pub fn apply(&self, kind: BinaryOp, a: u64, b: u64) -> Result<u64, NumericError> {
        let p = self.p;
        Ok(match kind {
            BinaryOp::Add => (a + b) % p,
            BinaryOp::Sub => (a + p - b % p) % p,
            BinaryOp::Mul => mul_mod(a, b, p),
            BinaryOp::Div => mul_mod(a, self.inverse(b).ok_or(NumericError::DivisionByZero)?, p),
        })
    }
}

fn mul_mod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

pub fn is_prime(p: u64) -> bool {
    p >= 2 && (2..).take_while(|d: &u64| d * d <= p).all(|d| !p.is_multiple_of(d))
}

impl CountedField for PrimeField {
    type Elem = u64;

    fn zero(&self) -> u64 {
        0
    }
    fn one(&self) -> u64 {
        1
    }
    fn is_zero(&self, a: &u64) -> bool {
        a.is_multiple_of(self.p)
    }
    fn op(&self, kind: BinaryOp, a: &u64, b: &u64, meter: &mut OpMeter) -> Result<u64, NumericError> {
        if meter.is_sealed() {
            return Err(NumericError::SealedMeter);
        }
        if kind == BinaryOp::Div && self.is_zero(b) {
            return Err(NumericError::DivisionByZero);
        }
        meter.charge()?;
        self.apply(kind, *a, *b)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Pc {
    FindPivot,
    Entry(u8),
    EndPivot,
    BackInit,
    Back(u8),
    Done,
}

/// Resumable solve of `A X = B` for an `m × d` matrix `A` and `m × t` right-hand side `B`.
///
/// Forward elimination is Bareiss's fraction-free update
/// `a[i][j] = (a[r][c]·a[i][j] − a[i][c]·a[r][j]) / prev`, four operations per entry
/// (the division is omitted while `prev` is still the literal 1). Back substitution
/// sets free variables to zero.
#[derive(Clone, Debug)]
pub struct Elimination<F: CountedField> {
    field: F,
    a: Vec<Vec<F::Elem>>,
    d: usize,
    t: usize,
    pc: Pc,
    c: usize,
    r: usize,
    i: usize,
    j: usize,
    prev: Option<F::Elem>,
    tmp: Option<F::Elem>,
    pivots: Vec<usize>,
    consistent: bool,
    x: Vec<Vec<F::Elem>>,
    bt: usize,
    bk: usize,
    bq: usize,
    ops: u64,
}

impl<F: CountedField> Elimination<F> {
    pub fn new(field: F, rows: Vec<Vec<F::Elem>>, rhs: Vec<Vec<F::Elem>>, d: usize) -> Self {
        let t = rhs.first().map_or(0, Vec::len);
        assert_eq!(rows.len(), rhs.len(), "row count mismatch");
        let a: Vec<Vec<F::Elem>> = rows
            .into_iter()
            .zip(rhs)
            .map(|(mut row, b)| {
                assert_eq!(row.len(), d, "coefficient width mismatch");
                row.extend(b);
                row
            })
            .collect();
        let zero = field.zero();
        Elimination {
            x: vec![vec![zero; t]; d],
            field,
            a,
            d,
            t,
            pc: Pc::FindPivot,
            c: 0,
            r: 0,
            i: 0,
            j: 0,
            prev: None,
            tmp: None,
            pivots: Vec::new(),
            consistent: true,
            bt: 0,
            bk: 0,
            bq: 0,
            ops: 0,
        }
    }

    fn ncols(&self) -> usize {
        self.d + self.t
    }

    fn m(&self) -> usize {
        self.a.len()
    }

    pub fn is_done(&self) -> bool {
        self.pc == Pc::Done
    }

    /// Operations spent so far across all calls.
    pub fn ops_spent(&self) -> u64 {
        self.ops
    }

    /// Runs until finished or until `budget` operations have been spent in this call.
    /// Returns `true` once the solve is complete.
    pub fn run(&mut self, meter: &mut OpMeter, budget: Option<u64>) -> Result<bool, NumericError> {
        let mut spent = 0u64;
        let f = self.field.clone();
        loop {
            let needs_op = matches!(self.pc, Pc::Entry(_) | Pc::Back(_));
            if needs_op && budget.is_some_and(|b| spent >= b) {
                return Ok(false);
            }
            match self.pc.clone() {
                Pc::Done => return Ok(true),
                Pc::FindPivot => {
                    if self.c >= self.d || self.r >= self.m() {
                        self.pc = Pc::BackInit;
                        continue;
                    }
                    let (c, r) = (self.c, self.r);
                    match (r..self.m()).find(|&p| !f.is_zero(&self.a[p][c])) {
                        None => self.c += 1,
                        Some(p) => {
                            self.a.swap(p, r);
                            self.i = r + 1;
                            self.j = c + 1;
                            if self.i >= self.m() {
                                self.pc = Pc::EndPivot;
                            } else if self.j >= self.ncols() {
                                for i in r + 1..self.m() {
                                    self.a[i][c] = f.zero();
                                }
                                self.pc = Pc::EndPivot;
                            } else {
                                self.pc = Pc::Entry(0);
                            }
                        }
                    }
                }
                Pc::Entry(step) => {
                    let (r, c, i, j) = (self.r, self.c, self.i, self.j);
                    match step {
                        0 => {
                            self.tmp = Some(f.mul(&self.a[r][c], &self.a[i][j], meter)?);
                            self.pc = Pc::Entry(1);
                        }
                        1 => {
                            let t2 = f.mul(&self.a[i][c], &self.a[r][j], meter)?;
                            // park the second product in the target cell until the subtraction
                            self.a[i][j] = t2;
                            self.pc = Pc::Entry(2);
                        }
                        2 => {
                            let t1 = self.tmp.take().expect("first product");
                            let diff = f.sub(&t1, &self.a[i][j], meter)?;
                            if self.prev.is_some() {
                                self.tmp = Some(diff);
                                self.pc = Pc::Entry(3);
                            } else {
                                self.a[i][j] = diff;
                                self.advance_entry();
                            }
                        }
                        _ => {
                            let diff = self.tmp.take().expect("difference");
                            let prev = self.prev.clone().expect("previous pivot");
                            self.a[i][j] = f.div(&diff, &prev, meter)?;
                            self.advance_entry();
                        }
                    }
                    spent += 1;
                    self.ops += 1;
                }
                Pc::EndPivot => {
                    self.prev = Some(self.a[self.r][self.c].clone());
                    self.pivots.push(self.c);
                    self.r += 1;
                    self.c += 1;
                    self.pc = Pc::FindPivot;
                }
                Pc::BackInit => {
                    let rank = self.pivots.len();
                    self.consistent = self.a[rank..].iter().all(|row| row[self.d..].iter().all(|v| f.is_zero(v)));
                    if !self.consistent || rank == 0 || self.t == 0 {
                        self.pc = Pc::Done;
                    } else {
                        self.bt = 0;
                        self.start_back_row(rank - 1);
                    }
                }
                Pc::Back(step) => {
                    let (k, col) = (self.bk, self.d + self.bt);
                    let rank = self.pivots.len();
                    match step {
                        0 => {
                            let q = self.pivots[self.bq];
                            let prod = f.mul(&self.a[k][q], &self.x[q][self.bt], meter)?;
                            self.tmp = Some(prod);
                            self.pc = Pc::Back(1);
                        }
                        1 => {
                            let prod = self.tmp.take().expect("product");
                            self.a[k][col] = f.sub(&self.a[k][col], &prod, meter)?;
                            self.bq += 1;
                            self.pc = if self.bq < rank { Pc::Back(0) } else { Pc::Back(2) };
                        }
                        _ => {
                            let pc = self.pivots[k];
                            self.x[pc][self.bt] = f.div(&self.a[k][col], &self.a[k][pc], meter)?;
                            if k > 0 {
                                self.start_back_row(k - 1);
                            } else if self.bt + 1 < self.t {
                                self.bt += 1;
                                self.start_back_row(rank - 1);
                            } else {
                                self.pc = Pc::Done;
                            }
                        }
                    }
                    spent += 1;
                    self.ops += 1;
                }
            }
        }
    }

    fn advance_entry(&mut self) {
        self.j += 1;
        if self.j >= self.ncols() {
            let (i, c) = (self.i, self.c);
            self.a[i][c] = self.field.zero();
            self.i += 1;
            self.j = self.c + 1;
        }
        self.pc = if self.i >= self.m() { Pc::EndPivot } else { Pc::Entry(0) };
    }

    fn start_back_row(&mut self, k: usize) {
        self.bk = k;
        self.bq = k + 1;
        self.pc = if self.bq < self.pivots.len() { Pc::Back(0) } else { Pc::Back(2) };
    }

    /// Whether `A X = B` has a solution. Meaningful once done.
    pub fn is_consistent(&self) -> bool {
        self.consistent
    }

    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    pub fn pivot_columns(&self) -> &[usize] {
        &self.pivots
    }

    /// The `d × t` solution with free variables set to zero.
    pub fn solution(&self) -> &[Vec<F::Elem>] {
        &self.x
    }

    /// Echelon form after forward elimination (right-hand sides are modified by
    /// back substitution).
    pub fn echelon(&self) -> &[Vec<F::Elem>] {
        &self.a
    }
}

/// Result of a completed solve.
#[derive(Clone, Debug)]
pub struct Solved<E> {
    pub consistent: bool,
    pub rank: usize,
    pub pivots: Vec<usize>,
    /// `d × t`, free variables zero.
    pub x: Vec<Vec<E>>,
}

/// Solves `A X = B` to completion on `meter`.
pub fn solve<F: CountedField>(
    field: &F,
    rows: Vec<Vec<F::Elem>>,
    rhs: Vec<Vec<F::Elem>>,
    d: usize,
    meter: &mut OpMeter,
) -> Result<Solved<F::Elem>, NumericError> {
    let mut task = Elimination::new(field.clone(), rows, rhs, d);
    task.run(meter, None)?;
    Ok(Solved { consistent: task.consistent, rank: task.rank(), pivots: task.pivots.clone(), x: task.x })
}

/// Coefficients `c` with `Σ c_j basis_j = target`, if the target is in the span.
pub fn span_coefficients<F: CountedField>(
    field: &F,
    basis: &[Vec<F::Elem>],
    target: &[F::Elem],
    meter: &mut OpMeter,
) -> Result<Option<Vec<F::Elem>>, NumericError> {
    if basis.is_empty() {
        return Ok(target.iter().all(|v| field.is_zero(v)).then(Vec::new));
    }
    let dim = target.len();
    let rows: Vec<Vec<F::Elem>> = (0..dim).map(|i| basis.iter().map(|b| b[i].clone()).collect()).collect();
    let rhs: Vec<Vec<F::Elem>> = target.iter().map(|v| vec![v.clone()]).collect();
    let s = solve(field, rows, rhs, basis.len(), meter)?;
    Ok(s.consistent.then(|| s.x.into_iter().map(|col| col[0].clone()).collect()))
}

/// Uncharged affine solution set of `A x = b`: a particular solution and a nullspace basis.
pub fn affine_solutions<F: CountedField>(field: &F, rows: &[Vec<F::Elem>], rhs: &[F::Elem], d: usize) -> Option<(Vec<F::Elem>, Vec<Vec<F::Elem>>)> {
    let mut meter = OpMeter::unlimited();
    let b: Vec<Vec<F::Elem>> = rhs.iter().map(|v| vec![v.clone()]).collect();
    if rows.is_empty() {
        let basis = (0..d).map(|i| (0..d).map(|j| if i == j { field.one() } else { field.zero() }).collect()).collect();
        return Some((vec![field.zero(); d], basis));
    }
    let mut task = Elimination::new(field.clone(), rows.to_vec(), b, d);
    task.run(&mut meter, None).expect("unmetered solve cannot hit a cap");
    if !task.consistent {
        return None;
    }
    let x0: Vec<F::Elem> = task.x.iter().map(|col| col[0].clone()).collect();
    let pivots = task.pivots.clone();
    let ech = task.a.clone();
    let mut basis = Vec::new();
    for free in (0..d).filter(|c| !pivots.contains(c)) {
        let mut v = vec![field.zero(); d];
        v[free] = field.one();
        for k in (0..pivots.len()).rev() {
            let pc = pivots[k];
            let mut acc = field.zero();
            for c in pc + 1..d {
                let p = field.mul(&ech[k][c], &v[c], &mut meter).expect("unmetered");
                acc = field.add(&acc, &p, &mut meter).expect("unmetered");
            }
            let neg = field.sub(&field.zero(), &acc, &mut meter).expect("unmetered");
            v[pc] = field.div(&neg, &ech[k][pc], &mut meter).expect("pivot nonzero");
        }
        basis.push(v);
    }
    Some((x0, basis))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q(n: i64, d: i64) -> Scalar {
        Scalar::ratio(n, d)
    }

    #[test]
    fn two_by_two_solve() {
        let rows = vec![vec![q(1, 1), q(0, 1)], vec![q(3, 1), q(4, 1)]];
        let rhs = vec![vec![q(1, 1)], vec![q(11, 1)]];
        let mut m = OpMeter::unlimited();
        let s = solve(&RationalField, rows, rhs, 2, &mut m).unwrap();
        assert!(s.consistent);
        assert_eq!(s.x, vec![vec![q(1, 1)], vec![q(2, 1)]]);
        assert!(m.used() > 0);
    }

    #[test]
    fn inconsistent_system_is_detected() {
        let rows = vec![vec![q(1, 1), q(0, 1)], vec![q(1, 1), q(0, 1)]];
        let rhs = vec![vec![q(1, 1)], vec![q(2, 1)]];
        let s = solve(&RationalField, rows, rhs, 2, &mut OpMeter::unlimited()).unwrap();
        assert!(!s.consistent);
    }

    #[test]
    fn prime_field_inverse_and_solve() {
        let f = PrimeField::new(5);
        assert_eq!(f.inverse(2), Some(3));
        // x + 2y = 1, 3x + 4y = 0 over F_5
        let rows = vec![vec![1, 2], vec![3, 4]];
        let rhs = vec![vec![1], vec![0]];
        let s = solve(&f, rows, rhs, 2, &mut OpMeter::unlimited()).unwrap();
        assert!(s.consistent);
        let (x, y) = (s.x[0][0], s.x[1][0]);
        assert_eq!((x + 2 * y) % 5, 1);
        assert_eq!((3 * x + 4 * y) % 5, 0);
    }

    #[test]
    fn span_test() {
        let basis = vec![vec![q(1, 1), q(1, 1), q(0, 1)], vec![q(0, 1), q(1, 1), q(1, 1)]];
        let mut m = OpMeter::unlimited();
        let c = span_coefficients(&RationalField, &basis, &[q(2, 1), q(5, 1), q(3, 1)], &mut m).unwrap();
        assert_eq!(c, Some(vec![q(2, 1), q(3, 1)]));
        let none = span_coefficients(&RationalField, &basis, &[q(1, 1), q(0, 1), q(0, 1)], &mut m).unwrap();
        assert_eq!(none, None);
    }

    #[test]
    fn resumable_run_matches_one_shot() {
        let rows = vec![vec![q(2, 1), q(1, 3), q(-1, 1)], vec![q(1, 2), q(5, 1), q(2, 1)], vec![q(3, 1), q(0, 1), q(7, 4)]];
        let rhs = vec![vec![q(1, 1)], vec![q(-2, 1)], vec![q(3, 5)]];
        let mut full = OpMeter::unlimited();
        let one = solve(&RationalField, rows.clone(), rhs.clone(), 3, &mut full).unwrap();
        let mut task = Elimination::new(RationalField, rows, rhs, 3);
        let mut calls = 0;
        loop {
            let mut m = OpMeter::capped(3);
            let done = task.run(&mut m, Some(3)).unwrap();
            assert!(m.used() <= 3);
            calls += 1;
            if done {
                break;
            }
        }
        assert_eq!(task.solution(), &one.x[..]);
        assert_eq!(task.ops_spent(), full.used());
        assert_eq!(calls as u64, full.used().div_ceil(3).max(1));
    }

    #[test]
    fn nullspace_of_rank_one() {
        let rows = vec![vec![q(1, 1), q(2, 1), q(3, 1)]];
        let (x0, basis) = affine_solutions(&RationalField, &rows, &[q(6, 1)], 3).unwrap();
        assert_eq!(basis.len(), 2);
        let dot = |v: &[Scalar]| -> Scalar {
            let mut m = OpMeter::unlimited();
            m.dot(&rows[0], v).unwrap()
        };
        assert_eq!(dot(&x0), q(6, 1));
        for b in &basis {
            assert!(dot(b).is_zero());
        }
    }

    fn small_matrix() -> impl Strategy<Value = (Vec<Vec<i64>>, Vec<i64>)> {
        (1usize..5, 1usize..5)
            .prop_flat_map(|(m, d)| (proptest::collection::vec(proptest::collection::vec(-3i64..4, d), m), proptest::collection::vec(-5i64..6, m)))
    }

    proptest! {
        #[test]
        fn solutions_satisfy_the_system((a, b) in small_matrix()) {
            let d = a[0].len();
            let rows: Vec<Vec<Scalar>> = a.iter().map(|r| r.iter().map(|&v| Scalar::int(v)).collect()).collect();
            let rhs: Vec<Scalar> = b.iter().map(|&v| Scalar::int(v)).collect();
            if let Some((x0, basis)) = affine_solutions(&RationalField, &rows, &rhs, d) {
                let mut m = OpMeter::unlimited();
                for (row, y) in rows.iter().zip(&rhs) {
                    prop_assert_eq!(&m.dot(row, &x0).unwrap(), y);
                    for v in &basis {
                        prop_assert!(m.dot(row, v).unwrap().is_zero());
                    }
                }
            }
        }

        #[test]
        fn prime_field_solutions_satisfy_the_system((a, b) in small_matrix(), pi in 0usize..3) {
            let f = PrimeField::new([2u64, 3, 7][pi]);
            let d = a[0].len();
            let rows: Vec<Vec<u64>> = a.iter().map(|r| r.iter().map(|&v| f.reduce(v)).collect()).collect();
            let rhs: Vec<u64> = b.iter().map(|&v| f.reduce(v)).collect();
            if let Some((x0, basis)) = affine_solutions(&f, &rows, &rhs, d) {
                let mut m = OpMeter::unlimited();
                for (row, y) in rows.iter().zip(&rhs) {
                    prop_assert_eq!(f.dot(row, &x0, &mut m).unwrap(), *y);
                    for v in &basis {
                        prop_assert_eq!(f.dot(row, v, &mut m).unwrap(), 0);
                    }
                }
            }
        }
    }
}
