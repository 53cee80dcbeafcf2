//! Function classes, their members, counted evaluation and version-space
//! consistency.

mod consistency;
mod fourier_motzkin;
mod indicator;

use std::collections::BTreeMap;
use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{is_prime, CountedField, PrimeField};
use crate::numerics::{OpMeter, Scalar};

pub use consistency::{consistent, Constraint};
pub use fourier_motzkin::{feasible_point, Inequality};
pub use indicator::{indicator_witness, IndicatorNetwork};

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Activation {
    LeakyRelu { alpha: Scalar },
    Relu,
    Sigmoid,
    Tanh,
}

impl Activation {
    pub fn is_invertible(&self) -> bool {
        !matches!(self, Activation::Relu)
    }

    /// Exact where possible (relu and leaky relu), approximate otherwise.
    pub fn apply(&self, z: &Scalar) -> Scalar {
        match self {
            Activation::LeakyRelu { alpha } => {
                if z.is_positive() {
                    z.clone()
                } else {
                    alpha * z
                }
            }
            Activation::Relu => {
                if z.is_positive() {
                    z.clone()
                } else {
                    Scalar::zero()
                }
            }
            Activation::Sigmoid => Scalar::Approx(1.0 / (1.0 + (-z.to_f64()).exp())),
            Activation::Tanh => Scalar::Approx(z.to_f64().tanh()),
        }
    }

    /// Inverse on the range, for realized (possibly approximate) outputs.
    pub fn invert(&self, y: &Scalar) -> Option<Scalar> {
        match self {
            Activation::LeakyRelu { alpha } => Some(if y.is_positive() { y.clone() } else { y / alpha }),
            Activation::Relu => None,
            Activation::Sigmoid => {
                let v = y.to_f64();
                (v > 0.0 && v < 1.0).then(|| Scalar::Approx((v / (1.0 - v)).ln()))
            }
            Activation::Tanh => {
                let v = y.to_f64();
                (v > -1.0 && v < 1.0).then(|| Scalar::Approx(v.atanh()))
            }
        }
    }
}

/// A function class and its parameters.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
pub enum Family {
    /// `x ↦ v·x` on `ℚⁿ`.
    LinearReal { n: usize },
    /// `x ↦ α·x` on `F_pⁿ`.
    LinearField { p: u64, n: usize },
    /// Maps `ℤ → {0..k−1}` that are zero off at most `n` points.
    SparseSupport { k: u32, n: usize },
    /// Field-linear on `F_pⁿ` inputs, sparse-support on integer inputs.
    CombinedStar { p: u64, n: usize },
    /// `1` on `{x, 1/x}` with `x ≠ ±1`, `0` elsewhere.
    ReciprocalPair,
    /// `1` on `a` and on `b = 1/a` (coordinatewise, positive entries), `0` elsewhere.
    ReciprocalTuple { r: usize },
    /// Polynomials where variable `i` has degree at most `degrees[i]`.
    BoundedDegreePoly { degrees: Vec<u32> },
    /// Explicit tables over the domain `{0..domain−1}` with values in `{0..k−1}`.
    FiniteExplicit { domain: u32, k: u32, members: Vec<Vec<u32>> },
    /// `x ↦ a(w·x + b)`.
    OneLayer { n: usize, activation: Activation },
    /// `x ↦ softmax(A x + b)` over `k` classes.
    SoftmaxLayer { n: usize, k: usize },
    /// `d ↦ ⌊dx⌋ mod 2`.
    FloorParity,
    /// Two-layer networks equal to the indicator of `[0, c]` away from a margin
    /// of width at most `epsilon`, built from `ReLU_alpha` units.
    TwoLayerReluIndicator { alpha: Scalar, epsilon: Scalar },
    /// One base member applied coordinatewise to `r`-tuples.
    Cart { base: Box<Family>, r: usize },
}

/// A point of a family's domain.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Input {
    Real(Vec<Scalar>),
    Field(Vec<u64>),
    Int(i64),
    Point(u32),
    Batch(Vec<Input>),
}

impl fmt::Display for Input {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn list<T: fmt::Display>(f: &mut fmt::Formatter<'_>, xs: &[T]) -> fmt::Result {
            write!(f, "(")?;
            for (i, x) in xs.iter().enumerate() {
                if i > 0 {
                    write!(f, " ")?;
                }
                write!(f, "{x}")?;
            }
            write!(f, ")")
        }
        match self {
            Input::Real(v) => list(f, v),
            Input::Field(v) => list(f, v),
            Input::Int(v) => write!(f, "{v}"),
            Input::Point(v) => write!(f, "#{v}"),
            Input::Batch(v) => list(f, v),
        }
    }
}

/// An output, kept in an exact representation.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputValue {
    Rational(Scalar),
    FieldElem(u64),
    Label(u32),
    /// `a(pre)`, represented by its preimage.
    Tagged {
        act: Activation,
        pre: Scalar,
    },
    /// `ln(y_i / y_0)` for `i = 1..k−1`.
    Logits(Vec<Scalar>),
    Bit(bool),
    Tuple(Vec<OutputValue>),
}

impl PartialOrd for Activation {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Activation {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        let rank = |a: &Activation| match a {
            Activation::LeakyRelu { alpha } => (0, Some(alpha.clone())),
            Activation::Relu => (1, None),
            Activation::Sigmoid => (2, None),
            Activation::Tanh => (3, None),
        };
        rank(self).cmp(&rank(other))
    }
}

impl fmt::Display for OutputValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OutputValue::Rational(v) => write!(f, "{v}"),
            OutputValue::FieldElem(v) => write!(f, "{v}"),
            OutputValue::Label(v) => write!(f, "{v}"),
            OutputValue::Tagged { pre, .. } => write!(f, "a({pre})"),
            OutputValue::Logits(v) => {
                write!(f, "logits[")?;
                for (i, x) in v.iter().enumerate() {
                    write!(f, "{}{x}", if i > 0 { " " } else { "" })?;
                }
                write!(f, "]")
            }
            OutputValue::Bit(b) => write!(f, "{}", u8::from(*b)),
            OutputValue::Tuple(v) => {
                write!(f, "<")?;
                for (i, x) in v.iter().enumerate() {
                    write!(f, "{}{x}", if i > 0 { " " } else { "" })?;
                }
                write!(f, ">")
            }
        }
    }
}

impl OutputValue {
    /// Realized numeric output: the activation value, the probability vector, etc.
    pub fn realize(&self) -> Vec<f64> {
        match self {
            OutputValue::Rational(v) => vec![v.to_f64()],
            OutputValue::FieldElem(v) => vec![*v as f64],
            OutputValue::Label(v) => vec![f64::from(*v)],
            OutputValue::Tagged { act, pre } => vec![act.apply(pre).to_f64()],
            OutputValue::Logits(l) => {
                let e: Vec<f64> = std::iter::once(0.0).chain(l.iter().map(Scalar::to_f64)).map(f64::exp).collect();
                let z: f64 = e.iter().sum();
                e.into_iter().map(|v| v / z).collect()
            }
            OutputValue::Bit(b) => vec![f64::from(u8::from(*b))],
            OutputValue::Tuple(v) => v.iter().flat_map(OutputValue::realize).collect(),
        }
    }

    /// Equality of realized outputs within a relative tolerance.
    pub fn approx_eq(&self, other: &OutputValue, rel_tol: f64) -> bool {
        let (a, b) = (self.realize(), other.realize());
        a.len() == b.len() && a.iter().zip(&b).all(|(x, y)| (x - y).abs() <= rel_tol * x.abs().max(y.abs()).max(1.0))
    }

    pub fn as_scalar(&self) -> Option<&Scalar> {
        match self {
            OutputValue::Rational(v) => Some(v),
            _ => None,
        }
    }
}

/// A concrete member of a family.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Hidden {
    Linear {
        v: Vec<Scalar>,
    },
    FieldLinear {
        alpha: Vec<u64>,
    },
    Sparse {
        support: BTreeMap<i64, u32>,
    },
    Star {
        alpha: Vec<u64>,
        support: BTreeMap<i64, u32>,
    },
    /// One of the two 1-inputs; the other is its coordinatewise reciprocal.
    Reciprocal {
        a: Vec<Scalar>,
    },
    /// Coefficients indexed by mixed-radix exponent code (see [`monomial_exponents`]).
    Poly {
        coeffs: Vec<Scalar>,
    },
    Table {
        index: usize,
    },
    Neuron {
        w: Vec<Scalar>,
        b: Scalar,
    },
    /// Row `i` holds class `i`'s weights.
    Softmax {
        a: Vec<Vec<Scalar>>,
        b: Vec<Scalar>,
    },
    /// The binary expansion of `x` is only ever read to finitely many places.
    FloorParity {
        x: Scalar,
    },
    Indicator {
        c: Scalar,
        epsilon: Scalar,
    },
}

/// Declared mistake-bound facts for reporting.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum Bound {
    Exact(u64),
    AtMost(u64),
    Infinite,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Declared {
    pub opt_std: Bound,
    /// Least cap with finitely many mistakes, when known.
    pub l_f: Option<Bound>,
    /// Least cap achieving the uncapped optimum, when known.
    pub u_f: Option<Bound>,
    /// Worst-case evaluation cost of a member.
    pub w_f: Option<u64>,
}

fn mismatch(family: &Family, x: &Input) -> Error {
    Error::DomainMismatch(format!("{x} is not an input of {}", family.name()))
}

/// Exponent vector for mixed-radix code `code`, with variable 0 least significant.
pub fn monomial_exponents(degrees: &[u32], mut code: usize) -> Vec<u32> {
    degrees
        .iter()
        .map(|&d| {
            let e = code % (d as usize + 1);
            code /= d as usize + 1;
            e as u32
        })
        .collect()
}

/// All monomials of `x` in code order, with one charged multiply for each
/// monomial that is not 1 or a bare variable.
pub fn monomials(degrees: &[u32], x: &[Scalar], meter: &mut OpMeter) -> Result<Vec<Scalar>> {
    let count: usize = degrees.iter().map(|&d| d as usize + 1).product();
    let mut out: Vec<Scalar> = Vec::with_capacity(count);
    for code in 0..count {
        let e = monomial_exponents(degrees, code);
        let v = match e.iter().position(|&ei| ei > 0) {
            None => Scalar::one(),
            Some(i) => {
                let radix: usize = degrees[..i].iter().map(|&d| d as usize + 1).product();
                if e.iter().sum::<u32>() == 1 {
                    x[i].clone()
                } else {
                    meter.mul(&out[code - radix], &x[i])?
                }
            }
        };
        out.push(v);
    }
    Ok(out)
}

impl Family {
    pub fn name(&self) -> String {
        match self {
            Family::LinearReal { n } => format!("linear_real(n={n})"),
            Family::LinearField { p, n } => format!("linear_field(p={p},n={n})"),
            Family::SparseSupport { k, n } => format!("sparse_support(k={k},n={n})"),
            Family::CombinedStar { p, n } => format!("combined_star(p={p},n={n})"),
            Family::ReciprocalPair => "reciprocal_pair".into(),
            Family::ReciprocalTuple { r } => format!("reciprocal_tuple(r={r})"),
            Family::BoundedDegreePoly { degrees } => format!("bounded_degree_poly(d={degrees:?})"),
            Family::FiniteExplicit { domain, k, members } => {
                format!("finite_explicit(|X|={domain},k={k},|F|={})", members.len())
            }
            Family::OneLayer { n, activation } => format!("one_layer(n={n},{})", activation_name(activation)),
            Family::SoftmaxLayer { n, k } => format!("softmax_layer(n={n},k={k})"),
            Family::FloorParity => "floor_parity".into(),
            Family::TwoLayerReluIndicator { alpha, epsilon } => format!("two_layer_indicator(alpha={alpha},eps={epsilon})"),
            Family::Cart { base, r } => format!("cart{r}({})", base.name()),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Validation(format!("{}: {m}", self.name())));
        match self {
            Family::LinearReal { n } | Family::SparseSupport { n, .. } if *n == 0 => bad("n must be positive"),
            Family::LinearField { p, n } | Family::CombinedStar { p, n } => {
                if !is_prime(*p) {
                    bad("p must be prime")
                } else if *n == 0 {
                    bad("n must be positive")
                } else {
                    Ok(())
                }
            }
            Family::SparseSupport { k, .. } if *k < 2 => bad("k must be at least 2"),
            Family::ReciprocalTuple { r } if *r == 0 => bad("r must be positive"),
            Family::BoundedDegreePoly { degrees } if degrees.is_empty() => bad("need at least one variable"),
            Family::FiniteExplicit { domain, k, members } => {
                if *k < 2 {
                    return bad("k must be at least 2");
                }
                if members.is_empty() {
                    return bad("need at least one member");
                }
                for m in members {
                    if m.len() != *domain as usize || m.iter().any(|v| v >= k) {
                        return bad("every member must be a table of length |X| with values below k");
                    }
                }
                Ok(())
            }
            Family::OneLayer { n, activation } => {
                if *n == 0 {
                    return bad("n must be positive");
                }
                match activation {
                    Activation::LeakyRelu { alpha } if !alpha.is_positive() => bad("leaky relu slope must be positive"),
                    _ => Ok(()),
                }
            }
            Family::SoftmaxLayer { n, k } => {
                if *n == 0 || *k < 2 {
                    bad("need n ≥ 1 and k ≥ 2")
                } else {
                    Ok(())
                }
            }
            Family::TwoLayerReluIndicator { alpha, epsilon } => {
                if alpha.is_negative() || *alpha >= Scalar::one() || !epsilon.is_positive() {
                    bad("need 0 ≤ alpha < 1 and epsilon > 0")
                } else {
                    Ok(())
                }
            }
            Family::Cart { base, r } => {
                if *r == 0 {
                    return bad("r must be positive");
                }
                base.validate()
            }
            _ => Ok(()),
        }
    }

    /// Size of the codomain when finite.
    pub fn codomain_size(&self) -> Option<usize> {
        match self {
            Family::LinearField { p, .. } | Family::CombinedStar { p, .. } => Some(*p as usize),
            Family::SparseSupport { k, .. } | Family::FiniteExplicit { k, .. } => Some(*k as usize),
            Family::ReciprocalPair | Family::ReciprocalTuple { .. } | Family::FloorParity => Some(2),
            _ => None,
        }
    }

    /// The finite set of possible outputs at `x`, in increasing order.
    pub fn codomain_at(&self, x: &Input) -> Option<Vec<OutputValue>> {
        match (self, x) {
            (Family::LinearField { p, .. }, _) | (Family::CombinedStar { p, .. }, Input::Field(_)) => Some((0..*p).map(OutputValue::FieldElem).collect()),
            (Family::CombinedStar { p, .. }, _) => Some((0..*p as u32).map(OutputValue::Label).collect()),
            (Family::SparseSupport { k, .. }, _) | (Family::FiniteExplicit { k, .. }, _) => Some((0..*k).map(OutputValue::Label).collect()),
            (Family::ReciprocalPair | Family::ReciprocalTuple { .. } | Family::FloorParity, _) => Some(vec![OutputValue::Bit(false), OutputValue::Bit(true)]),
            _ => None,
        }
    }

    /// The output learners answer before they know anything.
    pub fn default_output(&self, x: &Input) -> OutputValue {
        match self {
            Family::LinearField { .. } => OutputValue::FieldElem(0),
            Family::CombinedStar { .. } => match x {
                Input::Field(_) => OutputValue::FieldElem(0),
                _ => OutputValue::Label(0),
            },
            Family::SparseSupport { .. } | Family::FiniteExplicit { .. } => OutputValue::Label(0),
            Family::ReciprocalPair | Family::ReciprocalTuple { .. } | Family::FloorParity => OutputValue::Bit(false),
            Family::OneLayer { activation, .. } if activation.is_invertible() => OutputValue::Tagged { act: activation.clone(), pre: Scalar::zero() },
            Family::SoftmaxLayer { k, .. } => OutputValue::Logits(vec![Scalar::zero(); k - 1]),
            Family::Cart { base, .. } => match x {
                Input::Batch(xs) => OutputValue::Tuple(xs.iter().map(|x| base.default_output(x)).collect()),
                _ => base.default_output(x),
            },
            _ => OutputValue::Rational(Scalar::zero()),
        }
    }

    /// A canonical output built from a small integer, used by baseline learners
    /// and adversaries that pick between two outputs.
    pub fn output_from_int(&self, x: &Input, v: i64) -> OutputValue {
        match self {
            Family::LinearField { p, .. } => OutputValue::FieldElem(v.rem_euclid(*p as i64) as u64),
            Family::CombinedStar { p, .. } => match x {
                Input::Field(_) => OutputValue::FieldElem(v.rem_euclid(*p as i64) as u64),
                _ => OutputValue::Label(v.rem_euclid(*p as i64) as u32),
            },
            Family::SparseSupport { k, .. } | Family::FiniteExplicit { k, .. } => OutputValue::Label(v.rem_euclid(i64::from(*k)) as u32),
            Family::ReciprocalPair | Family::ReciprocalTuple { .. } | Family::FloorParity => OutputValue::Bit(v.rem_euclid(2) == 1),
            Family::OneLayer { activation, .. } if activation.is_invertible() => OutputValue::Tagged { act: activation.clone(), pre: Scalar::int(v) },
            Family::SoftmaxLayer { k, .. } => {
                let mut l = vec![Scalar::zero(); k - 1];
                l[k - 2] = Scalar::int(v);
                OutputValue::Logits(l)
            }
            Family::Cart { base, .. } => match x {
                Input::Batch(xs) => OutputValue::Tuple(xs.iter().map(|x| base.output_from_int(x, v)).collect()),
                _ => base.output_from_int(x, v),
            },
            _ => OutputValue::Rational(Scalar::int(v)),
        }
    }

    /// Number of parameters of a member, for families with a linear parametrization.
    pub fn dimension(&self) -> Option<usize> {
        match self {
            Family::LinearReal { n } | Family::LinearField { n, .. } => Some(*n),
            Family::BoundedDegreePoly { degrees } => Some(degrees.iter().map(|&d| d as usize + 1).product()),
            Family::OneLayer { n, .. } | Family::SoftmaxLayer { n, .. } => Some(n + 1),
            _ => None,
        }
    }

    pub fn declared(&self) -> Declared {
        use Bound::*;
        let exact = |m: u64| Declared { opt_std: Exact(m), l_f: None, u_f: None, w_f: None };
        match self {
            Family::LinearReal { n } => Declared { w_f: Some(2 * *n as u64 - 1), ..exact(*n as u64) },
            Family::LinearField { n, .. } => exact(*n as u64),
            Family::SparseSupport { n, .. } => Declared { l_f: Some(Exact(0)), u_f: Some(Exact(0)), w_f: Some(0), ..exact(*n as u64) },
            Family::CombinedStar { n, .. } => Declared { opt_std: AtMost(2 * *n as u64), l_f: None, u_f: None, w_f: None },
            Family::ReciprocalPair => Declared { opt_std: Exact(1), l_f: Some(Exact(0)), u_f: Some(Exact(1)), w_f: Some(0) },
            Family::ReciprocalTuple { r } => Declared { opt_std: Exact(1), l_f: Some(Exact(0)), u_f: Some(Exact(*r as u64)), w_f: Some(0) },
            Family::BoundedDegreePoly { degrees } => exact(degrees.iter().map(|&d| u64::from(d) + 1).product()),
            Family::FiniteExplicit { members, .. } => {
                Declared { opt_std: AtMost(members.len() as u64 - 1), l_f: Some(Exact(0)), u_f: Some(Exact(0)), w_f: Some(0) }
            }
            Family::OneLayer { n, .. } | Family::SoftmaxLayer { n, .. } => exact(*n as u64 + 1),
            Family::FloorParity => Declared { opt_std: Infinite, l_f: Some(Infinite), u_f: Some(Infinite), w_f: Some(3) },
            Family::TwoLayerReluIndicator { .. } => Declared { opt_std: Infinite, l_f: Some(Infinite), u_f: Some(Infinite), w_f: None },
            Family::Cart { base, .. } => Declared { opt_std: base.declared().opt_std, l_f: None, u_f: None, w_f: None },
        }
    }

    /// Checks that `x` lies in the domain.
    pub fn check_input(&self, x: &Input) -> Result<()> {
        let ok = match (self, x) {
            (Family::LinearReal { n }, Input::Real(v)) | (Family::OneLayer { n, .. }, Input::Real(v)) => v.len() == *n,
            (Family::SoftmaxLayer { n, .. }, Input::Real(v)) => v.len() == *n,
            (Family::LinearField { p, n }, Input::Field(v)) | (Family::CombinedStar { p, n }, Input::Field(v)) => v.len() == *n && v.iter().all(|e| e < p),
            (Family::SparseSupport { .. } | Family::CombinedStar { .. }, Input::Int(_)) => true,
            (Family::ReciprocalPair, Input::Real(v)) => v.len() == 1,
            (Family::ReciprocalTuple { r }, Input::Real(v)) => v.len() == *r && v.iter().all(Scalar::is_positive),
            (Family::BoundedDegreePoly { degrees }, Input::Real(v)) => v.len() == degrees.len(),
            (Family::FiniteExplicit { domain, .. }, Input::Point(i)) => i < domain,
            (Family::FloorParity | Family::TwoLayerReluIndicator { .. }, Input::Real(v)) => v.len() == 1,
            (Family::Cart { base, r }, Input::Batch(xs)) => {
                return if xs.len() == *r { xs.iter().try_for_each(|x| base.check_input(x)) } else { Err(mismatch(self, x)) }
            }
            _ => false,
        };
        if ok {
            Ok(())
        } else {
            Err(mismatch(self, x))
        }
    }

    /// Checks that `h` is a member.
    pub fn check_member(&self, h: &Hidden) -> Result<()> {
        let bad = |m: &str| Err(Error::Validation(format!("not a member of {}: {m}", self.name())));
        match (self, h) {
            (Family::LinearReal { n }, Hidden::Linear { v }) if v.len() == *n => Ok(()),
            (Family::LinearField { p, n }, Hidden::FieldLinear { alpha }) if alpha.len() == *n && alpha.iter().all(|a| a < p) => Ok(()),
            (Family::SparseSupport { k, n }, Hidden::Sparse { support }) => {
                if support.len() <= *n && support.values().all(|v| *v > 0 && v < k) {
                    Ok(())
                } else {
                    bad("support larger than n or values out of range")
                }
            }
            (Family::CombinedStar { p, n }, Hidden::Star { alpha, support }) => {
                if alpha.len() == *n && alpha.iter().all(|a| a < p) && support.len() <= *n && support.values().all(|v| *v > 0 && u64::from(*v) < *p) {
                    Ok(())
                } else {
                    bad("bad field vector or support")
                }
            }
            (Family::ReciprocalPair, Hidden::Reciprocal { a }) => {
                if a.len() == 1 && !a[0].is_zero() && a[0].abs() != Scalar::one() {
                    Ok(())
                } else {
                    bad("need x ≠ 0, ±1")
                }
            }
            (Family::ReciprocalTuple { r }, Hidden::Reciprocal { a }) => {
                if a.len() == *r && a.iter().all(Scalar::is_positive) && a.iter().any(|v| *v != Scalar::one()) {
                    Ok(())
                } else {
                    bad("need positive entries, not all 1")
                }
            }
            (Family::BoundedDegreePoly { .. }, Hidden::Poly { coeffs }) if Some(coeffs.len()) == self.dimension() => Ok(()),
            (Family::FiniteExplicit { members, .. }, Hidden::Table { index }) if *index < members.len() => Ok(()),
            (Family::OneLayer { n, .. }, Hidden::Neuron { w, .. }) if w.len() == *n => Ok(()),
            (Family::SoftmaxLayer { n, k }, Hidden::Softmax { a, b }) if a.len() == *k && b.len() == *k && a.iter().all(|r| r.len() == *n) => Ok(()),
            (Family::FloorParity, Hidden::FloorParity { .. }) => Ok(()),
            (Family::TwoLayerReluIndicator { epsilon, .. }, Hidden::Indicator { c, epsilon: e }) => {
                if c.is_negative() || !e.is_positive() || e > epsilon {
                    bad("need c ≥ 0 and 0 < epsilon ≤ the family width")
                } else {
                    Ok(())
                }
            }
            (Family::Cart { base, .. }, h) => base.check_member(h),
            _ => bad("parameter shape does not match the family"),
        }
    }

    /// Evaluates `h` at `x`, charging the documented cost:
    /// linear `2n − 1`; one-layer `2n`; softmax `2nk + k − 1`; polynomials the
    /// monomial multiplies plus a dot product; floor parity 3; the indicator 3;
    /// table lookups, sparse maps and reciprocal tests 0; field operations 1 each.
    pub fn evaluate(&self, h: &Hidden, x: &Input, meter: &mut OpMeter) -> Result<OutputValue> {
        self.check_input(x)?;
        Ok(match (self, h, x) {
            (Family::LinearReal { .. }, Hidden::Linear { v }, Input::Real(x)) => OutputValue::Rational(meter.dot(v, x)?),
            (Family::LinearField { p, .. }, Hidden::FieldLinear { alpha }, Input::Field(x))
            | (Family::CombinedStar { p, .. }, Hidden::Star { alpha, .. }, Input::Field(x)) => {
                OutputValue::FieldElem(PrimeField::new(*p).dot(alpha, x, meter)?)
            }
            (Family::SparseSupport { .. }, Hidden::Sparse { support }, Input::Int(i))
            | (Family::CombinedStar { .. }, Hidden::Star { support, .. }, Input::Int(i)) => OutputValue::Label(support.get(i).copied().unwrap_or(0)),
            (Family::ReciprocalPair | Family::ReciprocalTuple { .. }, Hidden::Reciprocal { a }, Input::Real(x)) => {
                let b: Vec<Scalar> = a.iter().map(|v| &Scalar::one() / v).collect();
                OutputValue::Bit(*x == *a || *x == b)
            }
            (Family::BoundedDegreePoly { degrees }, Hidden::Poly { coeffs }, Input::Real(x)) => {
                let mono = monomials(degrees, x, meter)?;
                OutputValue::Rational(meter.dot(coeffs, &mono)?)
            }
            (Family::FiniteExplicit { members, .. }, Hidden::Table { index }, Input::Point(i)) => OutputValue::Label(members[*index][*i as usize]),
            (Family::OneLayer { activation, .. }, Hidden::Neuron { w, b }, Input::Real(x)) => {
                let dot = meter.dot(w, x)?;
                let z = meter.add(&dot, b)?;
                if activation.is_invertible() {
                    OutputValue::Tagged { act: activation.clone(), pre: z }
                } else {
                    OutputValue::Rational(activation.apply(&z))
                }
            }
            (Family::SoftmaxLayer { .. }, Hidden::Softmax { a, b }, Input::Real(x)) => {
                let mut z = Vec::with_capacity(a.len());
                for (row, bi) in a.iter().zip(b) {
                    let d = meter.dot(row, x)?;
                    z.push(meter.add(&d, bi)?);
                }
                let mut l = Vec::with_capacity(z.len() - 1);
                for zi in &z[1..] {
                    l.push(meter.sub(zi, &z[0])?);
                }
                OutputValue::Logits(l)
            }
            (Family::FloorParity, Hidden::FloorParity { x: hx }, Input::Real(d)) => {
                // ⌊dx⌋ − 2⌊dx/2⌋: multiply, divide, subtract; floors and doubling are free.
                let dx = meter.mul(&d[0], hx)?;
                let half = meter.div(&dx, &Scalar::int(2))?;
                let twice = &half.floor() * &Scalar::int(2);
                let r = meter.sub(&dx.floor(), &twice)?;
                OutputValue::Bit(!r.is_zero())
            }
            (Family::TwoLayerReluIndicator { alpha, .. }, Hidden::Indicator { c, epsilon }, Input::Real(x)) => {
                OutputValue::Rational(IndicatorNetwork::new(c.clone(), epsilon.clone(), alpha.clone()).evaluate(&x[0], meter)?)
            }
            (Family::Cart { base, .. }, h, Input::Batch(xs)) => OutputValue::Tuple(xs.iter().map(|x| base.evaluate(h, x, meter)).collect::<Result<_>>()?),
            _ => return Err(Error::Validation(format!("member {h:?} does not belong to {}", self.name()))),
        })
    }

    /// Evaluation without a budget.
    pub fn eval_free(&self, h: &Hidden, x: &Input) -> Result<OutputValue> {
        self.evaluate(h, x, &mut OpMeter::unlimited())
    }

    pub fn random_member<R: Rng>(&self, rng: &mut R) -> Hidden {
        let small = |rng: &mut R| Scalar::int(rng.gen_range(-3..=3));
        match self {
            Family::LinearReal { n } => Hidden::Linear { v: (0..*n).map(|_| small(rng)).collect() },
            Family::LinearField { p, n } => Hidden::FieldLinear { alpha: (0..*n).map(|_| rng.gen_range(0..*p)).collect() },
            Family::SparseSupport { k, n } => Hidden::Sparse { support: random_support(rng, *n, u64::from(*k)) },
            Family::CombinedStar { p, n } => Hidden::Star { alpha: (0..*n).map(|_| rng.gen_range(0..*p)).collect(), support: random_support(rng, *n, *p) },
            Family::ReciprocalPair => {
                let sign = if rng.gen_bool(0.5) { 1 } else { -1 };
                let t = rng.gen_range(2..9);
                let a = if rng.gen_bool(0.5) { Scalar::ratio(sign * t, 1) } else { Scalar::ratio(sign, t) };
                Hidden::Reciprocal { a: vec![a] }
            }
            Family::ReciprocalTuple { r } => Hidden::Reciprocal {
                a: (0..*r).map(|i| if i == 0 { Scalar::int(rng.gen_range(2..9)) } else { Scalar::ratio(rng.gen_range(1..9), rng.gen_range(1..5)) }).collect(),
            },
            Family::BoundedDegreePoly { .. } => Hidden::Poly { coeffs: (0..self.dimension().unwrap()).map(|_| small(rng)).collect() },
            Family::FiniteExplicit { members, .. } => Hidden::Table { index: rng.gen_range(0..members.len()) },
            Family::OneLayer { n, .. } => Hidden::Neuron { w: (0..*n).map(|_| small(rng)).collect(), b: small(rng) },
            Family::SoftmaxLayer { n, k } => {
                Hidden::Softmax { a: (0..*k).map(|_| (0..*n).map(|_| small(rng)).collect()).collect(), b: (0..*k).map(|_| small(rng)).collect() }
            }
            Family::FloorParity => Hidden::FloorParity { x: Scalar::ratio(rng.gen_range(0..1024), 1024) },
            Family::TwoLayerReluIndicator { epsilon, .. } => Hidden::Indicator { c: Scalar::ratio(rng.gen_range(0..8), 8), epsilon: epsilon.clone() },
            Family::Cart { base, .. } => base.random_member(rng),
        }
    }

    pub fn random_input<R: Rng>(&self, rng: &mut R) -> Input {
        let small = |rng: &mut R| Scalar::int(rng.gen_range(-4..=4));
        match self {
            Family::LinearReal { n } | Family::OneLayer { n, .. } | Family::SoftmaxLayer { n, .. } => Input::Real((0..*n).map(|_| small(rng)).collect()),
            Family::LinearField { p, n } => Input::Field((0..*n).map(|_| rng.gen_range(0..*p)).collect()),
            Family::SparseSupport { .. } => Input::Int(rng.gen_range(-8..=8)),
            Family::CombinedStar { p, n } => {
                if rng.gen_bool(0.5) {
                    Input::Field((0..*n).map(|_| rng.gen_range(0..*p)).collect())
                } else {
                    Input::Int(rng.gen_range(-8..=8))
                }
            }
            Family::ReciprocalPair => Input::Real(vec![Scalar::ratio(rng.gen_range(-8..=8), rng.gen_range(1..=8))]),
            Family::ReciprocalTuple { r } => Input::Real((0..*r).map(|_| Scalar::ratio(rng.gen_range(1..=8), rng.gen_range(1..=8))).collect()),
            Family::BoundedDegreePoly { degrees } => Input::Real(degrees.iter().map(|_| small(rng)).collect()),
            Family::FiniteExplicit { domain, .. } => Input::Point(rng.gen_range(0..*domain)),
            Family::FloorParity => Input::Real(vec![Scalar::pow2(rng.gen_range(0..10))]),
            Family::TwoLayerReluIndicator { .. } => Input::Real(vec![Scalar::ratio(rng.gen_range(-8..=16), 8)]),
            Family::Cart { base, r } => Input::Batch((0..*r).map(|_| base.random_input(rng)).collect()),
        }
    }
}

fn activation_name(a: &Activation) -> String {
    match a {
        Activation::LeakyRelu { alpha } => format!("leaky_relu({alpha})"),
        Activation::Relu => "relu".into(),
        Activation::Sigmoid => "sigmoid".into(),
        Activation::Tanh => "tanh".into(),
    }
}

fn random_support<R: Rng>(rng: &mut R, n: usize, k: u64) -> BTreeMap<i64, u32> {
    let size = rng.gen_range(0..=n);
    let mut s = BTreeMap::new();
    while s.len() < size {
        s.insert(rng.gen_range(-8..=8), rng.gen_range(1..k) as u32);
    }
    s
}

/// `CART_r(F)`: members of `F` applied coordinatewise to `r`-tuples.
pub fn cart_lift(family: &Family, r: usize) -> Family {
    Family::Cart { base: Box::new(family.clone()), r }
}
