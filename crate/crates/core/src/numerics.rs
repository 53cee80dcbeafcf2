//! Counted arithmetic.
//!
//! Every binary arithmetic operation a learner performs inside a round goes
//! through an [`OpMeter`], which charges exactly one unit per call. Unary
//! operations (floor, ceil, abs, constants, identity, sqrt, exp, ln) are free.
//!
//! Values are [`Scalar`]s: exact rationals by default, with an approximate
//! `f64` representation reserved for activation outputs that are genuinely
//! transcendental.

use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Arbitrary-precision rational in lowest terms.
pub type Rational = BigRational;

/// Relative tolerance used when comparing approximate scalars.
pub const APPROX_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NumericError {
    #[error("operation cap exceeded: cap {cap}, attempted charge #{attempted}")]
    CapExceeded { cap: u64, attempted: u64 },
    #[error("division by zero")]
    DivisionByZero,
    #[error("meter is sealed: no arithmetic after answering")]
    SealedMeter,
    #[error("domain error: {0}")]
    DomainError(String),
    #[error("{0} has no exact rational result for this input")]
    InexactUnary(&'static str),
}

/// A value flowing through a learner's computation.
#[derive(Clone, Debug)]
pub enum Scalar {
    Exact(Rational),
    Approx(f64),
}

impl Scalar {
    pub fn zero() -> Self {
        Scalar::Exact(Rational::zero())
    }

    pub fn one() -> Self {
        Scalar::Exact(Rational::one())
    }

    pub fn int(v: i64) -> Self {
        Scalar::Exact(Rational::from_integer(BigInt::from(v)))
    }

    /// `num/den`; panics if `den == 0`.
    pub fn ratio(num: i64, den: i64) -> Self {
        Scalar::Exact(Rational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn from_rational(q: Rational) -> Self {
        Scalar::Exact(q)
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Scalar::Exact(_))
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Scalar::Exact(q) => q.is_zero(),
            Scalar::Approx(f) => *f == 0.0,
        }
    }

    pub fn is_positive(&self) -> bool {
        match self {
            Scalar::Exact(q) => q.is_positive(),
            Scalar::Approx(f) => *f > 0.0,
        }
    }

    pub fn is_negative(&self) -> bool {
        match self {
            Scalar::Exact(q) => q.is_negative(),
            Scalar::Approx(f) => *f < 0.0,
        }
    }

    /// The exact value, if this scalar is exact.
    pub fn exact(&self) -> Option<&Rational> {
        match self {
            Scalar::Exact(q) => Some(q),
            Scalar::Approx(_) => None,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Scalar::Exact(q) => q.to_f64().unwrap_or(f64::NAN),
            Scalar::Approx(f) => *f,
        }
    }

    /// Converts to the approximate representation.
    pub fn to_approx(&self) -> Scalar {
        Scalar::Approx(self.to_f64())
    }

    /// Equality with relative tolerance when either side is approximate.
    pub fn approx_eq(&self, other: &Scalar, rel_tol: f64) -> bool {
        match (self, other) {
            (Scalar::Exact(a), Scalar::Exact(b)) => a == b,
            _ => {
                let (a, b) = (self.to_f64(), other.to_f64());
                let scale = a.abs().max(b.abs()).max(1.0);
                (a - b).abs() <= rel_tol * scale
            }
        }
    }

    /// Parses `p/q`, an integer, or a finite decimal such as `-0.125`.
    pub fn parse(text: &str) -> Result<Scalar, String> {
        let t = text.trim();
        if let Some((n, d)) = t.split_once('/') {
            let n = BigInt::from_str(n.trim()).map_err(|e| format!("bad numerator {n:?}: {e}"))?;
            let d = BigInt::from_str(d.trim()).map_err(|e| format!("bad denominator {d:?}: {e}"))?;
            if d.is_zero() {
                return Err("zero denominator".into());
            }
            return Ok(Scalar::Exact(Rational::new(n, d)));
        }
        if let Some((int_part, frac_part)) = t.split_once('.') {
            let negative = int_part.trim_start().starts_with('-');
            let digits = format!("{}{}", int_part.trim_start_matches(['-', '+']), frac_part);
            let num = BigInt::from_str(if digits.is_empty() { "0" } else { &digits }).map_err(|e| format!("bad decimal {t:?}: {e}"))?;
            let den = num_traits::pow(BigInt::from(10), frac_part.len());
            let q = Rational::new(num, den);
            return Ok(Scalar::Exact(if negative { -q } else { q }));
        }
        BigInt::from_str(t).map(|n| Scalar::Exact(Rational::from_integer(n))).map_err(|e| format!("bad number {t:?}: {e}"))
    }

    fn total_cmp(&self, other: &Scalar) -> Ordering {
        match (self, other) {
            (Scalar::Exact(a), Scalar::Exact(b)) => a.cmp(b),
            (Scalar::Approx(a), Scalar::Approx(b)) => a.total_cmp(b),
            (Scalar::Exact(_), Scalar::Approx(_)) => self.to_f64().total_cmp(&other.to_f64()).then(Ordering::Less),
            (Scalar::Approx(_), Scalar::Exact(_)) => self.to_f64().total_cmp(&other.to_f64()).then(Ordering::Greater),
        }
    }
}

impl PartialEq for Scalar {
    fn eq(&self, other: &Self) -> bool {
        self.total_cmp(other) == Ordering::Equal
    }
}

impl Eq for Scalar {}

impl PartialOrd for Scalar {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Scalar {
    fn cmp(&self, other: &Self) -> Ordering {
        self.total_cmp(other)
    }
}

impl Hash for Scalar {
    fn hash<H: Hasher>(&self, state: &mut H) {
        match self {
            Scalar::Exact(q) => {
                0u8.hash(state);
                q.hash(state);
            }
            Scalar::Approx(f) => {
                1u8.hash(state);
                f.to_bits().hash(state);
            }
        }
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Exact(q) if q.is_integer() => write!(f, "{}", q.numer()),
            Scalar::Exact(q) => write!(f, "{}/{}", q.numer(), q.denom()),
            Scalar::Approx(x) => write!(f, "~{x}"),
        }
    }
}

impl From<i64> for Scalar {
    fn from(v: i64) -> Self {
        Scalar::int(v)
    }
}

impl From<Rational> for Scalar {
    fn from(q: Rational) -> Self {
        Scalar::Exact(q)
    }
}

impl Serialize for Scalar {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Scalar::Exact(_) => s.serialize_str(&self.to_string()),
            Scalar::Approx(x) => s.serialize_f64(*x),
        }
    }
}

impl<'de> Deserialize<'de> for Scalar {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Int(i64),
            Float(f64),
            Text(String),
        }
        match Repr::deserialize(d)? {
            Repr::Int(v) => Ok(Scalar::int(v)),
            // Decimal literals in configs are read as the exact decimal they spell.
            Repr::Float(x) => Scalar::parse(&format!("{x}")).map_err(serde::de::Error::custom),
            Repr::Text(t) => {
                if let Some(rest) = t.strip_prefix('~') {
                    rest.parse::<f64>().map(Scalar::Approx).map_err(serde::de::Error::custom)
                } else {
                    Scalar::parse(&t).map_err(serde::de::Error::custom)
                }
            }
        }
    }
}

// Uncharged operators for oracles, adversaries and bookkeeping outside a
// learner's round. Learners go through an `OpMeter` instead.
macro_rules! uncharged_op {
    ($tr:ident, $method:ident, $kind:expr) => {
        impl std::ops::$tr for &Scalar {
            type Output = Scalar;
            fn $method(self, rhs: &Scalar) -> Scalar {
                apply_binary($kind, self, rhs).expect("uncharged division by zero")
            }
        }
        impl std::ops::$tr for Scalar {
            type Output = Scalar;
            fn $method(self, rhs: Scalar) -> Scalar {
                apply_binary($kind, &self, &rhs).expect("uncharged division by zero")
            }
        }
    };
}

uncharged_op!(Add, add, BinaryOp::Add);
uncharged_op!(Sub, sub, BinaryOp::Sub);
uncharged_op!(Mul, mul, BinaryOp::Mul);
uncharged_op!(Div, div, BinaryOp::Div);

impl std::ops::Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        match self {
            Scalar::Exact(q) => Scalar::Exact(-q),
            Scalar::Approx(f) => Scalar::Approx(-f),
        }
    }
}

impl Scalar {
    pub fn abs(&self) -> Scalar {
        unary_op(&UnaryOp::Abs, self).expect("abs is total")
    }

    pub fn floor(&self) -> Scalar {
        unary_op(&UnaryOp::Floor, self).expect("floor is total")
    }

    /// `2^e` for any integer `e`.
    pub fn pow2(e: i32) -> Scalar {
        let p = num_traits::pow(BigInt::from(2), e.unsigned_abs() as usize);
        Scalar::Exact(if e >= 0 { Rational::from_integer(p) } else { Rational::new(BigInt::one(), p) })
    }

    /// The integer value, if this is an exact integer that fits in `i64`.
    pub fn to_i64(&self) -> Option<i64> {
        self.exact().filter(|q| q.is_integer()).and_then(|q| q.numer().to_i64())
    }
}

/// Binary arithmetic kinds; each execution costs one meter unit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl BinaryOp {
    pub fn name(self) -> &'static str {
        match self {
            BinaryOp::Add => "add",
            BinaryOp::Sub => "sub",
            BinaryOp::Mul => "mul",
            BinaryOp::Div => "div",
        }
    }

    pub fn from_name(s: &str) -> Option<BinaryOp> {
        match s {
            "add" => Some(BinaryOp::Add),
            "sub" => Some(BinaryOp::Sub),
            "mul" => Some(BinaryOp::Mul),
            "div" => Some(BinaryOp::Div),
            _ => None,
        }
    }
}

/// Free unary operations.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum UnaryOp {
    Identity,
    Const(Scalar),
    Floor,
    Ceil,
    Abs,
    Sqrt,
    Exp,
    Ln,
}

impl UnaryOp {
    pub fn name(&self) -> &'static str {
        match self {
            UnaryOp::Identity => "id",
            UnaryOp::Const(_) => "const",
            UnaryOp::Floor => "floor",
            UnaryOp::Ceil => "ceil",
            UnaryOp::Abs => "abs",
            UnaryOp::Sqrt => "sqrt",
            UnaryOp::Exp => "exp",
            UnaryOp::Ln => "ln",
        }
    }
}

/// Per-round counter of binary arithmetic operations.
#[derive(Clone, Debug)]
pub struct OpMeter {
    used: u64,
    cap: Option<u64>,
    sealed: bool,
}

impl OpMeter {
    pub fn new(cap: Option<u64>) -> Self {
        OpMeter { used: 0, cap, sealed: false }
    }

    pub fn unlimited() -> Self {
        OpMeter::new(None)
    }

    pub fn capped(cap: u64) -> Self {
        OpMeter::new(Some(cap))
    }

    pub fn used(&self) -> u64 {
        self.used
    }

    pub fn cap(&self) -> Option<u64> {
        self.cap
    }

    pub fn is_sealed(&self) -> bool {
        self.sealed
    }

    /// Operations still available this round (`None` when unlimited).
    pub fn remaining(&self) -> Option<u64> {
        self.cap.map(|c| c.saturating_sub(self.used))
    }

    /// Start of round: zero the counter and unseal.
    pub fn reset(&mut self) {
        self.used = 0;
        self.sealed = false;
    }

    /// The learner has answered; further charges fail until the next reset.
    pub fn seal(&mut self) {
        self.sealed = true;
    }

    /// Charges one binary operation.
    pub fn charge(&mut self) -> Result<(), NumericError> {
        self.charge_n(1)
    }

    /// Charges `n` operations at once, all or nothing.
    pub fn charge_n(&mut self, n: u64) -> Result<(), NumericError> {
        if self.sealed {
            return Err(NumericError::SealedMeter);
        }
        if let Some(cap) = self.cap {
            if self.used + n > cap {
                return Err(NumericError::CapExceeded { cap, attempted: self.used + n });
            }
        }
        self.used += n;
        Ok(())
    }

    pub fn add(&mut self, a: &Scalar, b: &Scalar) -> Result<Scalar, NumericError> {
        binary_op(BinaryOp::Add, a, b, self)
    }

    pub fn sub(&mut self, a: &Scalar, b: &Scalar) -> Result<Scalar, NumericError> {
        binary_op(BinaryOp::Sub, a, b, self)
    }

    pub fn mul(&mut self, a: &Scalar, b: &Scalar) -> Result<Scalar, NumericError> {
        binary_op(BinaryOp::Mul, a, b, self)
    }

    pub fn div(&mut self, a: &Scalar, b: &Scalar) -> Result<Scalar, NumericError> {
        binary_op(BinaryOp::Div, a, b, self)
    }

    /// Dot product with `n` multiplies and `n - 1` adds.
    pub fn dot(&mut self, a: &[Scalar], b: &[Scalar]) -> Result<Scalar, NumericError> {
        let mut acc: Option<Scalar> = None;
        for (x, y) in a.iter().zip(b) {
            let p = self.mul(x, y)?;
            acc = Some(match acc {
                None => p,
                Some(s) => self.add(&s, &p)?,
            });
        }
        Ok(acc.unwrap_or_else(Scalar::zero))
    }
}

/// Uncharged arithmetic shared by [`binary_op`] and free constant pieces.
pub(crate) fn apply_binary(kind: BinaryOp, lhs: &Scalar, rhs: &Scalar) -> Result<Scalar, NumericError> {
    if kind == BinaryOp::Div && rhs.is_zero() {
        return Err(NumericError::DivisionByZero);
    }
    Ok(match (lhs, rhs) {
        (Scalar::Exact(a), Scalar::Exact(b)) => Scalar::Exact(match kind {
            BinaryOp::Add => a + b,
            BinaryOp::Sub => a - b,
            BinaryOp::Mul => a * b,
            BinaryOp::Div => a / b,
        }),
        _ => {
            let (a, b) = (lhs.to_f64(), rhs.to_f64());
            Scalar::Approx(match kind {
                BinaryOp::Add => a + b,
                BinaryOp::Sub => a - b,
                BinaryOp::Mul => a * b,
                BinaryOp::Div => a / b,
            })
        }
    })
}

/// Performs one binary operation and charges it to `meter`.
///
/// Errors leave the meter unchanged.
pub fn binary_op(kind: BinaryOp, lhs: &Scalar, rhs: &Scalar, meter: &mut OpMeter) -> Result<Scalar, NumericError> {
    if meter.is_sealed() {
        return Err(NumericError::SealedMeter);
    }
    if kind == BinaryOp::Div && rhs.is_zero() {
        return Err(NumericError::DivisionByZero);
    }
    meter.charge()?;
    apply_binary(kind, lhs, rhs)
}

/// `x kind c` (or `c kind x` when `const_on_left`), a piecewise-unary piece.
/// Not charged: it has a single variable input.
pub fn constant_op(kind: BinaryOp, x: &Scalar, c: &Scalar, const_on_left: bool) -> Result<Scalar, NumericError> {
    if const_on_left {
        apply_binary(kind, c, x)
    } else {
        apply_binary(kind, x, c)
    }
}

fn exact_sqrt(q: &Rational) -> Option<Rational> {
    let (n, d) = (q.numer(), q.denom());
    let (rn, rd) = (n.sqrt(), d.sqrt());
    (&rn * &rn == *n && &rd * &rd == *d).then(|| Rational::new(rn, rd))
}

/// Applies a free unary operation. Never touches a meter.
pub fn unary_op(kind: &UnaryOp, x: &Scalar) -> Result<Scalar, NumericError> {
    match kind {
        UnaryOp::Identity => Ok(x.clone()),
        UnaryOp::Const(c) => Ok(c.clone()),
        UnaryOp::Floor => Ok(match x {
            Scalar::Exact(q) => Scalar::Exact(q.floor()),
            Scalar::Approx(f) => Scalar::Approx(f.floor()),
        }),
        UnaryOp::Ceil => Ok(match x {
            Scalar::Exact(q) => Scalar::Exact(q.ceil()),
            Scalar::Approx(f) => Scalar::Approx(f.ceil()),
        }),
        UnaryOp::Abs => Ok(match x {
            Scalar::Exact(q) => Scalar::Exact(q.abs()),
            Scalar::Approx(f) => Scalar::Approx(f.abs()),
        }),
        UnaryOp::Sqrt => {
            if x.is_negative() {
                return Err(NumericError::DomainError("sqrt of a negative number".into()));
            }
            match x {
                Scalar::Exact(q) => exact_sqrt(q).map(Scalar::Exact).ok_or(NumericError::InexactUnary("sqrt")),
                Scalar::Approx(f) => Ok(Scalar::Approx(f.sqrt())),
            }
        }
        UnaryOp::Exp => match x {
            Scalar::Exact(q) if q.is_zero() => Ok(Scalar::one()),
            Scalar::Exact(_) => Err(NumericError::InexactUnary("exp")),
            Scalar::Approx(f) => Ok(Scalar::Approx(f.exp())),
        },
        UnaryOp::Ln => {
            if !x.is_positive() {
                return Err(NumericError::DomainError("ln of a non-positive number".into()));
            }
            match x {
                Scalar::Exact(q) if q.is_one() => Ok(Scalar::zero()),
                Scalar::Exact(_) => Err(NumericError::InexactUnary("ln")),
                Scalar::Approx(f) => Ok(Scalar::Approx(f.ln())),
            }
        }
    }
}
