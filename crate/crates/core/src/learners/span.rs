use std::fmt;

use super::phase::SimpleOnline;
use super::{Feedback, Last, Learner};
use crate::error::{Error, Result};
use crate::families::{monomials, Activation, Family, Input, OutputValue};
use crate::linalg::{span_coefficients, CountedField, Elimination, PrimeField, RationalField};
use crate::numerics::{OpMeter, Scalar};

/// Per-round operations of [`CappedSpan`] stay below `SPAN_OPS_CONSTANT · d³`
/// once `d ≥ 2`, where `d` is the feature dimension.
pub const SPAN_OPS_CONSTANT: u64 = 6;

/// Maps inputs to feature vectors and outputs to coordinate vectors, so that
/// every member is a linear map from features to coordinates.
pub trait Codec: Clone + fmt::Debug + Send + Sync + 'static {
    type F: CountedField;
    fn field(&self) -> Self::F;
    fn name(&self) -> String;
    /// Feature dimension.
    fn dim(&self) -> usize;
    /// Output coordinates.
    fn width(&self) -> usize;
    fn features(&self, x: &Input, meter: &mut OpMeter) -> Result<Vec<<Self::F as CountedField>::Elem>>;
    fn encode(&self, y: &OutputValue) -> Result<Vec<<Self::F as CountedField>::Elem>>;
    fn decode(&self, v: Vec<<Self::F as CountedField>::Elem>) -> OutputValue;
    fn codomain(&self) -> Option<Vec<OutputValue>> {
        None
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum RealKind {
    Linear,
    Poly(Vec<u32>),
    /// `(x, 1)` features; the output is the activation preimage.
    Affine(Activation),
    /// `(x, 1)` features; `k − 1` log-ratio coordinates.
    Softmax(usize),
}

#[derive(Clone, Debug, PartialEq)]
pub struct RealCodec {
    pub n: usize,
    pub kind: RealKind,
}

impl RealCodec {
    pub fn for_family(family: &Family) -> Option<Self> {
        Some(match family {
            Family::LinearReal { n } => RealCodec { n: *n, kind: RealKind::Linear },
            Family::BoundedDegreePoly { degrees } => RealCodec { n: degrees.len(), kind: RealKind::Poly(degrees.clone()) },
            Family::OneLayer { n, activation } if activation.is_invertible() => RealCodec { n: *n, kind: RealKind::Affine(activation.clone()) },
            Family::SoftmaxLayer { n, k } => RealCodec { n: *n, kind: RealKind::Softmax(*k) },
            _ => return None,
        })
    }
}

fn mismatch_output(y: &OutputValue) -> Error {
    Error::InconsistentFeedback(format!("output {y} has the wrong type"))
}

impl Codec for RealCodec {
    type F = RationalField;

    fn field(&self) -> RationalField {
        RationalField
    }

    fn name(&self) -> String {
        match &self.kind {
            RealKind::Linear => format!("linear(n={})", self.n),
            RealKind::Poly(d) => format!("poly{d:?}"),
            RealKind::Affine(_) => format!("affine(n={})", self.n),
            RealKind::Softmax(k) => format!("softmax(n={},k={k})", self.n),
        }
    }

    fn dim(&self) -> usize {
        match &self.kind {
            RealKind::Linear => self.n,
            RealKind::Poly(d) => d.iter().map(|&e| e as usize + 1).product(),
            RealKind::Affine(_) | RealKind::Softmax(_) => self.n + 1,
        }
    }

    fn width(&self) -> usize {
        match &self.kind {
            RealKind::Softmax(k) => k - 1,
            _ => 1,
        }
    }

    fn features(&self, x: &Input, meter: &mut OpMeter) -> Result<Vec<Scalar>> {
        let Input::Real(v) = x else {
            return Err(Error::DomainMismatch(format!("{x} is not a real vector")));
        };
        if v.len() != self.n {
            return Err(Error::DomainMismatch(format!("{x} has the wrong length")));
        }
        Ok(match &self.kind {
            RealKind::Linear => v.clone(),
            RealKind::Poly(d) => monomials(d, v, meter)?,
            RealKind::Affine(_) | RealKind::Softmax(_) => v.iter().cloned().chain([Scalar::one()]).collect(),
        })
    }

    fn encode(&self, y: &OutputValue) -> Result<Vec<Scalar>> {
        match (&self.kind, y) {
            (RealKind::Linear | RealKind::Poly(_), OutputValue::Rational(v)) => Ok(vec![v.clone()]),
            (RealKind::Affine(_), OutputValue::Tagged { pre, .. }) => Ok(vec![pre.clone()]),
            (RealKind::Softmax(k), OutputValue::Logits(l)) if l.len() == k - 1 => Ok(l.clone()),
            _ => Err(mismatch_output(y)),
        }
    }

    fn decode(&self, mut v: Vec<Scalar>) -> OutputValue {
        match &self.kind {
            RealKind::Linear | RealKind::Poly(_) => OutputValue::Rational(v.remove(0)),
            RealKind::Affine(act) => OutputValue::Tagged { act: act.clone(), pre: v.remove(0) },
            RealKind::Softmax(_) => OutputValue::Logits(v),
        }
    }
}

/// Linear functionals over `F_p^n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FieldCodec {
    pub p: u64,
    pub n: usize,
}

impl Codec for FieldCodec {
    type F = PrimeField;

    fn field(&self) -> PrimeField {
        PrimeField::new(self.p)
    }

    fn name(&self) -> String {
        format!("field(p={},n={})", self.p, self.n)
    }

    fn dim(&self) -> usize {
        self.n
    }

    fn width(&self) -> usize {
        1
    }

    fn features(&self, x: &Input, _meter: &mut OpMeter) -> Result<Vec<u64>> {
        match x {
            Input::Field(v) if v.len() == self.n => Ok(v.clone()),
            _ => Err(Error::DomainMismatch(format!("{x} is not in F_{}^{}", self.p, self.n))),
        }
    }

    fn encode(&self, y: &OutputValue) -> Result<Vec<u64>> {
        match y {
            OutputValue::FieldElem(v) if *v < self.p => Ok(vec![*v]),
            _ => Err(mismatch_output(y)),
        }
    }

    fn decode(&self, v: Vec<u64>) -> OutputValue {
        OutputValue::FieldElem(v[0])
    }

    fn codomain(&self) -> Option<Vec<OutputValue>> {
        Some((0..self.p).map(OutputValue::FieldElem).collect())
    }
}

type Elem<C> = <<C as Codec>::F as CountedField>::Elem;

/// Keeps the rows of every mistake and answers with a solution of that
/// system (free variables zero). Each correction re-solves from scratch.
#[derive(Clone, Debug)]
pub struct SpanSolver<C: Codec> {
    codec: C,
    rows: Vec<Vec<Elem<C>>>,
    rhs: Vec<Vec<Elem<C>>>,
    /// `d × t`.
    theta: Vec<Vec<Elem<C>>>,
    task: Option<Elimination<C::F>>,
    last_features: Option<(Input, Vec<Elem<C>>)>,
}

impl<C: Codec> SpanSolver<C> {
    pub fn new(codec: C) -> Self {
        let zero = codec.field().zero();
        let theta = vec![vec![zero; codec.width()]; codec.dim()];
        SpanSolver { codec, rows: Vec::new(), rhs: Vec::new(), theta, task: None, last_features: None }
    }

    pub fn mistake_rows(&self) -> usize {
        self.rows.len()
    }
}

impl<C: Codec> SimpleOnline for SpanSolver<C> {
    fn name(&self) -> String {
        format!("span[{}]", self.codec.name())
    }

    fn guess(&mut self, x: &Input, meter: &mut OpMeter) -> Result<OutputValue> {
        let f = self.codec.field();
        let feats = self.codec.features(x, meter)?;
        let mut out = Vec::with_capacity(self.codec.width());
        for j in 0..self.codec.width() {
            let col: Vec<Elem<C>> = self.theta.iter().map(|row| row[j].clone()).collect();
            out.push(f.dot(&feats, &col, meter)?);
        }
        self.last_features = Some((x.clone(), feats));
        Ok(self.codec.decode(out))
    }

    fn start_update(&mut self, x: &Input, y: &OutputValue) -> Result<()> {
        let feats = match self.last_features.take() {
            Some((lx, feats)) if lx == *x => feats,
            _ => return Err(Error::InconsistentFeedback("correction for an input that was not just answered".into())),
        };
        if self.rows.len() >= self.codec.dim() {
            return Err(Error::InconsistentFeedback("more mistakes than the feature dimension".into()));
        }
        self.rows.push(feats);
        self.rhs.push(self.codec.encode(y)?);
        self.task = Some(Elimination::new(self.codec.field(), self.rows.clone(), self.rhs.clone(), self.codec.dim()));
        Ok(())
    }

    fn work(&mut self, meter: &mut OpMeter, budget: Option<u64>) -> Result<bool> {
        let Some(task) = self.task.as_mut() else { return Ok(true) };
        if !task.run(meter, budget)? {
            return Ok(false);
        }
        if !task.is_consistent() {
            return Err(Error::InconsistentFeedback("no member fits the corrections".into()));
        }
        self.theta = task.solution().to_vec();
        self.task = None;
        Ok(true)
    }

    fn is_idle(&self) -> bool {
        self.task.is_none()
    }

    fn default_output(&self, _x: &Input) -> OutputValue {
        self.codec.decode(vec![self.codec.field().zero(); self.codec.width()])
    }

    fn codomain(&self) -> Option<Vec<OutputValue>> {
        self.codec.codomain()
    }
}

/// Keeps a linearly independent set `T` of labelled examples and answers
/// through the span coefficients of the query against `T` (default output
/// when the query is outside the span). Works within a per-round budget of
/// order `d³`.
#[derive(Clone, Debug)]
pub struct CappedSpan<C: Codec> {
    codec: C,
    basis: Vec<Vec<Elem<C>>>,
    values: Vec<Vec<Elem<C>>>,
    last: Option<(Last, Vec<Elem<C>>, bool)>,
    pending: Option<(Vec<Elem<C>>, Vec<Elem<C>>)>,
}

impl<C: Codec> CappedSpan<C> {
    pub fn new(codec: C) -> Self {
        CappedSpan { codec, basis: Vec::new(), values: Vec::new(), last: None, pending: None }
    }

    pub fn basis_size(&self) -> usize {
        self.basis.len() + usize::from(self.pending.is_some())
    }
}

impl<C: Codec> Learner for CappedSpan<C> {
    fn name(&self) -> String {
        format!("capped_span[{}]", self.codec.name())
    }

    fn predict(&mut self, x: &Input, meter: &mut OpMeter) -> Result<OutputValue> {
        if let Some((f, v)) = self.pending.take() {
            self.basis.push(f);
            self.values.push(v);
        }
        let field = self.codec.field();
        let feats = self.codec.features(x, meter)?;
        let coeffs = span_coefficients(&field, &self.basis, &feats, meter)?;
        let in_span = coeffs.is_some();
        let mut out = vec![field.zero(); self.codec.width()];
        if let Some(c) = coeffs {
            for (j, o) in out.iter_mut().enumerate() {
                let col: Vec<Elem<C>> = self.values.iter().map(|v| v[j].clone()).collect();
                *o = field.dot(&c, &col, meter)?;
            }
        }
        let guess = self.codec.decode(out);
        self.last = Some((Last { x: x.clone(), guess: guess.clone() }, feats, in_span));
        Ok(guess)
    }

    fn feedback(&mut self, fb: Feedback) -> Result<()> {
        let Some((last, feats, in_span)) = self.last.take() else { return Ok(()) };
        let truth = match &fb {
            Feedback::Verdict(false) => self.codec.codomain().filter(|c| c.len() == 2).and_then(|c| c.into_iter().find(|v| *v != last.guess)),
            Feedback::Reveal(y) => Some(y.clone()),
            Feedback::Verdict(true) => Some(last.guess.clone()),
            Feedback::Skip => None,
        };
        if let (Some(y), false) = (truth, in_span) {
            self.pending = Some((feats, self.codec.encode(&y)?));
        }
        Ok(())
    }

    fn box_clone(&self) -> Box<dyn Learner> {
        Box::new(self.clone())
    }

    fn diagnostics(&self) -> serde_json::Value {
        serde_json::json!({ "basis": self.basis_size() })
    }
}

/// Learns a single ReLU neuron from its positive examples: on `x`, if `(x, 1)`
/// lies in the span of the stored positive rows, answers the ReLU of the
/// same combination of their pre-activations, otherwise 0.
#[derive(Clone, Debug)]
pub struct ReluLearner {
    n: usize,
    capped: bool,
    rows: Vec<Vec<Scalar>>,
    vals: Vec<Scalar>,
    last: Option<(Vec<Scalar>, OutputValue, bool)>,
    pending: Option<(Vec<Scalar>, Scalar)>,
}

impl ReluLearner {
    /// `capped` keeps only rows outside the current span.
    pub fn new(n: usize, capped: bool) -> Self {
        ReluLearner { n, capped, rows: Vec::new(), vals: Vec::new(), last: None, pending: None }
    }

    pub fn stored_rows(&self) -> usize {
        self.rows.len() + usize::from(self.pending.is_some())
    }
}

impl Learner for ReluLearner {
    fn name(&self) -> String {
        format!("relu{}(n={})", if self.capped { "_capped" } else { "" }, self.n)
    }

    fn predict(&mut self, x: &Input, meter: &mut OpMeter) -> Result<OutputValue> {
        if let Some((r, v)) = self.pending.take() {
            self.rows.push(r);
            self.vals.push(v);
        }
        let feats: Vec<Scalar> = match x {
            Input::Real(v) if v.len() == self.n => v.iter().cloned().chain([Scalar::one()]).collect(),
            _ => return Err(Error::DomainMismatch(format!("{x} is not in R^{}", self.n))),
        };
        let coeffs = span_coefficients(&RationalField, &self.rows, &feats, meter)?;
        let in_span = coeffs.is_some();
        let z = match coeffs {
            Some(c) => RationalField.dot(&c, &self.vals, meter)?,
            None => Scalar::zero(),
        };
        let guess = OutputValue::Rational(Activation::Relu.apply(&z));
        self.last = Some((feats, guess.clone(), in_span));
        Ok(guess)
    }

    fn feedback(&mut self, fb: Feedback) -> Result<()> {
        let Some((feats, guess, in_span)) = self.last.take() else { return Ok(()) };
        let truth = match fb {
            Feedback::Reveal(y) => y,
            Feedback::Verdict(true) => guess,
            _ => return Ok(()),
        };
        let OutputValue::Rational(y) = &truth else { return Err(mismatch_output(&truth)) };
        if y.is_positive() && !(self.capped && in_span) {
            self.pending = Some((feats, y.clone()));
        }
        Ok(())
    }

    fn box_clone(&self) -> Box<dyn Learner> {
        Box::new(self.clone())
    }

    fn diagnostics(&self) -> serde_json::Value {
        serde_json::json!({ "rows": self.stored_rows() })
    }
}

#[cfg(test)]
mod tests {
    use super::super::Eager;
    use super::*;
    use crate::families::Hidden;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn play(l: &mut dyn Learner, f: &Family, h: &Hidden, xs: &[Input]) -> (usize, u64) {
        let mut mistakes = 0;
        let mut max_ops = 0;
        for x in xs {
            let mut m = OpMeter::unlimited();
            let g = l.predict(x, &mut m).unwrap();
            max_ops = max_ops.max(m.used());
            let y = f.eval_free(h, x).unwrap();
            mistakes += usize::from(g != y);
            l.feedback(Feedback::Reveal(y)).unwrap();
        }
        (mistakes, max_ops)
    }

    fn families() -> Vec<Family> {
        vec![
            Family::LinearReal { n: 4 },
            Family::LinearField { p: 7, n: 3 },
            Family::BoundedDegreePoly { degrees: vec![2, 1] },
            Family::OneLayer { n: 3, activation: Activation::Sigmoid },
            Family::SoftmaxLayer { n: 2, k: 3 },
        ]
    }

    fn learner(f: &Family, capped: bool) -> Box<dyn Learner> {
        super::super::build_learner(&super::super::LearnerSpec::Span { capped }, f).unwrap()
    }

    #[test]
    fn mistakes_within_dimension() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for f in families() {
            let d = f.dimension().unwrap();
            for _ in 0..5 {
                let h = f.random_member(&mut rng);
                let xs: Vec<Input> = (0..30).map(|_| f.random_input(&mut rng)).collect();
                for capped in [false, true] {
                    let (m, _) = play(learner(&f, capped).as_mut(), &f, &h, &xs);
                    assert!(m <= d, "{} capped={capped}: {m} > {d}", f.name());
                }
            }
        }
    }

    #[test]
    fn capped_span_ops_constant() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for n in 2..=6 {
            let f = Family::LinearReal { n };
            let h = f.random_member(&mut rng);
            let xs: Vec<Input> = (0..40).map(|_| f.random_input(&mut rng)).collect();
            let (_, ops) = play(&mut CappedSpan::new(RealCodec::for_family(&f).unwrap()), &f, &h, &xs);
            assert!(ops <= SPAN_OPS_CONSTANT * (n as u64).pow(3), "n={n}: {ops}");
        }
    }

    #[test]
    fn uncapped_solver_answers_exactly_after_learning() {
        let f = Family::LinearReal { n: 2 };
        let h = Hidden::Linear { v: vec![Scalar::int(3), Scalar::ratio(-1, 2)] };
        let xs = [[1, 0], [0, 1], [5, 7], [2, -3]].map(|p| Input::Real(p.iter().map(|&v| Scalar::int(v)).collect()));
        let mut l = Eager::new(SpanSolver::new(RealCodec::for_family(&f).unwrap()));
        assert_eq!(play(&mut l, &f, &h, &xs).0, 2);
    }

    #[test]
    fn relu_learner_counts() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let f = Family::OneLayer { n: 3, activation: Activation::Relu };
        for _ in 0..10 {
            let h = f.random_member(&mut rng);
            let xs: Vec<Input> = (0..40).map(|_| f.random_input(&mut rng)).collect();
            for capped in [false, true] {
                let mut l = ReluLearner::new(3, capped);
                let (m, _) = play(&mut l, &f, &h, &xs);
                assert!(m <= 4);
                if capped {
                    assert!(l.stored_rows() <= 4);
                }
            }
        }
    }
}
