//! Adversaries: deterministic procedures that pick inputs and claim outputs,
//! each able to name a family member that reproduces its claims.

use std::collections::{BTreeMap, BTreeSet};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::families::{Family, Hidden, Input, OutputValue};
use crate::linalg::{solve, RationalField};
use crate::numerics::{OpMeter, Scalar};

pub trait Adversary: Send {
    fn name(&self) -> String;
    /// The next input, or `None` once the strategy has nothing left to ask.
    fn next_input(&mut self) -> Result<Option<Input>>;
    /// The claimed output at `x`, which has just been answered with `guess`.
    fn respond(&mut self, x: &Input, guess: &OutputValue) -> Result<OutputValue>;
    /// A member agreeing with every claim that was not a deliberate lie.
    fn witness(&self) -> Option<Hidden>;
    /// Claims so far that disagree with [`Adversary::witness`] on purpose.
    fn lies(&self) -> usize {
        0
    }
}

/// Picks the claim from `{v(0), v(1)}` that differs from the guess.
fn other_of_two(family: &Family, x: &Input, guess: &OutputValue) -> OutputValue {
    let zero = family.output_from_int(x, 0);
    if *guess == zero {
        family.output_from_int(x, 1)
    } else {
        zero
    }
}

/// Answers truthfully for a fixed member, on a fixed input list or on seeded
/// random inputs.
pub struct Honest {
    family: Family,
    hidden: Hidden,
    script: Option<std::vec::IntoIter<Input>>,
    rng: ChaCha8Rng,
}

impl Honest {
    pub fn random(family: Family, hidden: Hidden, seed: u64) -> Result<Self> {
        family.check_member(&hidden)?;
        Ok(Honest { family, hidden, script: None, rng: ChaCha8Rng::seed_from_u64(seed) })
    }

    pub fn scripted(family: Family, hidden: Hidden, inputs: Vec<Input>) -> Result<Self> {
        family.check_member(&hidden)?;
        for x in &inputs {
            family.check_input(x)?;
        }
        Ok(Honest { family, hidden, script: Some(inputs.into_iter()), rng: ChaCha8Rng::seed_from_u64(0) })
    }
}

impl Adversary for Honest {
    fn name(&self) -> String {
        if self.script.is_some() { "scripted" } else { "honest" }.into()
    }

    fn next_input(&mut self) -> Result<Option<Input>> {
        Ok(match &mut self.script {
            Some(it) => it.next(),
            None => Some(self.family.random_input(&mut self.rng)),
        })
    }

    fn respond(&mut self, x: &Input, _guess: &OutputValue) -> Result<OutputValue> {
        self.family.eval_free(&self.hidden, x)
    }

    fn witness(&self) -> Option<Hidden> {
        Some(self.hidden.clone())
    }
}

/// Serves the zero vector (skipped for linear families) and then the unit
/// vectors, declaring every answer wrong.
pub struct Basis {
    family: Family,
    queue: Vec<Input>,
    claims: Vec<OutputValue>,
}

impl Basis {
    pub fn new(family: Family) -> Result<Self> {
        let real_unit = |n: usize, i: Option<usize>| Input::Real((0..n).map(|j| if Some(j) == i { Scalar::one() } else { Scalar::zero() }).collect());
        let queue = match &family {
            Family::LinearReal { n } => (0..*n).map(|i| real_unit(*n, Some(i))).collect(),
            Family::LinearField { n, .. } => (0..*n).map(|i| Input::Field((0..*n).map(|j| u64::from(i == j)).collect())).collect(),
            Family::OneLayer { n, .. } | Family::SoftmaxLayer { n, .. } => {
                std::iter::once(real_unit(*n, None)).chain((0..*n).map(|i| real_unit(*n, Some(i)))).collect()
            }
            f => return Err(Error::Validation(format!("basis adversary does not apply to {}", f.name()))),
        };
        let mut queue: Vec<Input> = queue;
        queue.reverse();
        Ok(Basis { family, queue, claims: Vec::new() })
    }

    /// Scalar carried by a claim: the value, preimage or last logit.
    fn level(y: &OutputValue) -> Scalar {
        match y {
            OutputValue::Rational(v) | OutputValue::Tagged { pre: v, .. } => v.clone(),
            OutputValue::FieldElem(v) => Scalar::int(*v as i64),
            OutputValue::Logits(l) => l.last().cloned().unwrap_or_else(Scalar::zero),
            _ => Scalar::zero(),
        }
    }
}

impl Adversary for Basis {
    fn name(&self) -> String {
        "basis".into()
    }

    fn next_input(&mut self) -> Result<Option<Input>> {
        Ok(self.queue.pop())
    }

    fn respond(&mut self, x: &Input, guess: &OutputValue) -> Result<OutputValue> {
        let c = other_of_two(&self.family, x, guess);
        self.claims.push(c.clone());
        Ok(c)
    }

    fn witness(&self) -> Option<Hidden> {
        let levels: Vec<Scalar> = self.claims.iter().map(Basis::level).collect();
        Some(match &self.family {
            Family::LinearReal { n } => Hidden::Linear { v: (0..*n).map(|i| levels.get(i).cloned().unwrap_or_else(Scalar::zero)).collect() },
            Family::LinearField { n, .. } => Hidden::FieldLinear {
                alpha: (0..*n)
                    .map(|i| match self.claims.get(i) {
                        Some(OutputValue::FieldElem(v)) => *v,
                        _ => 0,
                    })
                    .collect(),
            },
            Family::OneLayer { n, .. } | Family::SoftmaxLayer { n, .. } => {
                let b = levels.first().cloned().unwrap_or_else(Scalar::zero);
                let w: Vec<Scalar> = (0..*n).map(|i| levels.get(i + 1).map_or_else(Scalar::zero, |c| c - &b)).collect();
                match &self.family {
                    Family::SoftmaxLayer { k, .. } => {
                        let mut a = vec![vec![Scalar::zero(); *n]; *k];
                        let mut bs = vec![Scalar::zero(); *k];
                        a[k - 1] = w;
                        bs[k - 1] = b;
                        Hidden::Softmax { a, b: bs }
                    }
                    _ => Hidden::Neuron { w, b },
                }
            }
            _ => unreachable!(),
        })
    }
}

/// Round `t = 1..D` serves `x_1 = t`, `x_i = t^{(d_1+1)⋯(d_{i−1}+1)}` and
/// claims whichever of 0 and 1 the answer is not.
pub struct PolyPower {
    degrees: Vec<u32>,
    t: u64,
    points: Vec<(Scalar, Scalar)>,
}

impl PolyPower {
    pub fn new(family: &Family) -> Result<Self> {
        match family {
            Family::BoundedDegreePoly { degrees } => Ok(PolyPower { degrees: degrees.clone(), t: 0, points: Vec::new() }),
            f => Err(Error::Validation(format!("power-pattern adversary does not apply to {}", f.name()))),
        }
    }

    fn total(&self) -> u64 {
        self.degrees.iter().map(|&d| u64::from(d) + 1).product()
    }
}

/// Coefficients of the interpolating polynomial through `points`, lowest degree first.
pub fn interpolate(points: &[(Scalar, Scalar)]) -> Vec<Scalar> {
    let d = points.len();
    if d == 0 {
        return Vec::new();
    }
    let rows: Vec<Vec<Scalar>> = points
        .iter()
        .map(|(t, _)| {
            let mut row = Vec::with_capacity(d);
            let mut p = Scalar::one();
            for _ in 0..d {
                row.push(p.clone());
                p = &p * t;
            }
            row
        })
        .collect();
    let rhs = points.iter().map(|(_, y)| vec![y.clone()]).collect();
    let s = solve(&RationalField, rows, rhs, d, &mut OpMeter::unlimited()).expect("unmetered");
    assert!(s.consistent, "interpolation nodes must be distinct");
    s.x.into_iter().map(|c| c[0].clone()).collect()
}

impl Adversary for PolyPower {
    fn name(&self) -> String {
        "poly_power".into()
    }

    fn next_input(&mut self) -> Result<Option<Input>> {
        if self.t >= self.total() {
            return Ok(None);
        }
        self.t += 1;
        let t = Scalar::int(self.t as i64);
        let mut exponent = 1u32;
        let mut x = Vec::with_capacity(self.degrees.len());
        for &d in &self.degrees {
            let mut v = Scalar::one();
            for _ in 0..exponent {
                v = &v * &t;
            }
            x.push(v);
            exponent *= d + 1;
        }
        Ok(Some(Input::Real(x)))
    }

    fn respond(&mut self, _x: &Input, guess: &OutputValue) -> Result<OutputValue> {
        let c = if *guess == OutputValue::Rational(Scalar::zero()) { Scalar::one() } else { Scalar::zero() };
        self.points.push((Scalar::int(self.t as i64), c.clone()));
        Ok(OutputValue::Rational(c))
    }

    fn witness(&self) -> Option<Hidden> {
        let mut coeffs = interpolate(&self.points);
        coeffs.resize(self.total() as usize, Scalar::zero());
        Some(Hidden::Poly { coeffs })
    }
}

/// Serves 2, 4, 8, ... and always claims the bit the learner did not answer.
#[derive(Default)]
pub struct FloorParityAdversary {
    bits: Vec<bool>,
}

impl FloorParityAdversary {
    pub fn new() -> Self {
        FloorParityAdversary::default()
    }
}

impl Adversary for FloorParityAdversary {
    fn name(&self) -> String {
        "floor_parity".into()
    }

    fn next_input(&mut self) -> Result<Option<Input>> {
        Ok(Some(Input::Real(vec![Scalar::pow2(self.bits.len() as i32 + 1)])))
    }

    fn respond(&mut self, _x: &Input, guess: &OutputValue) -> Result<OutputValue> {
        let b = *guess != OutputValue::Bit(true);
        self.bits.push(b);
        Ok(OutputValue::Bit(b))
    }

    /// Midpoint of the binary interval fixed by the claimed digits.
    fn witness(&self) -> Option<Hidden> {
        let mut x = Scalar::zero();
        for (j, &b) in self.bits.iter().enumerate() {
            if b {
                x = &x + &Scalar::pow2(-(j as i32 + 1));
            }
        }
        x = &x + &Scalar::pow2(-(self.bits.len() as i32 + 1));
        Some(Hidden::FloorParity { x })
    }
}

/// Keeps `[lo, hi]` with `f(lo) = 1`, `f(hi) = 0`, queries the midpoint and
/// claims whichever of 0 and 1 is at least 1/2 away from the answer.
pub struct Bisection {
    family_epsilon: Scalar,
    lo: Scalar,
    hi: Scalar,
    next_tie_is_one: bool,
}

impl Bisection {
    pub fn new(family: &Family) -> Result<Self> {
        match family {
            Family::TwoLayerReluIndicator { epsilon, .. } => {
                Ok(Bisection { family_epsilon: epsilon.clone(), lo: Scalar::zero(), hi: Scalar::one(), next_tie_is_one: true })
            }
            f => Err(Error::Validation(format!("bisection adversary does not apply to {}", f.name()))),
        }
    }

    pub fn interval(&self) -> (&Scalar, &Scalar) {
        (&self.lo, &self.hi)
    }
}

impl Adversary for Bisection {
    fn name(&self) -> String {
        "bisection".into()
    }

    fn next_input(&mut self) -> Result<Option<Input>> {
        Ok(Some(Input::Real(vec![&(&self.lo + &self.hi) / &Scalar::int(2)])))
    }

    fn respond(&mut self, x: &Input, guess: &OutputValue) -> Result<OutputValue> {
        let Input::Real(v) = x else { return Err(Error::DomainMismatch(format!("{x}"))) };
        let g = guess.as_scalar().cloned().unwrap_or_else(Scalar::zero);
        let half = Scalar::ratio(1, 2);
        let one = if g < half {
            true
        } else if g > half {
            false
        } else {
            let t = self.next_tie_is_one;
            self.next_tie_is_one = !t;
            t
        };
        if one {
            self.lo = v[0].clone();
        } else {
            self.hi = v[0].clone();
        }
        Ok(OutputValue::Rational(Scalar::int(i64::from(one))))
    }

    fn witness(&self) -> Option<Hidden> {
        let gap = &(&self.hi - &self.lo) / &Scalar::int(2);
        Some(Hidden::Indicator { c: self.lo.clone(), epsilon: gap.min(self.family_epsilon.clone()) })
    }
}

/// Tracks the members of an explicit family consistent with its claims,
/// queries the first point where they disagree and claims the value other
/// than the answer that keeps the most members alive.
pub struct VersionSpace {
    members: Vec<Vec<u32>>,
    domain: u32,
    alive: Vec<usize>,
}

impl VersionSpace {
    pub fn new(family: &Family) -> Result<Self> {
        match family {
            Family::FiniteExplicit { domain, members, .. } => {
                Ok(VersionSpace { members: members.clone(), domain: *domain, alive: (0..members.len()).collect() })
            }
            f => Err(Error::Validation(format!("version-space adversary does not apply to {}", f.name()))),
        }
    }

    pub fn alive(&self) -> &[usize] {
        &self.alive
    }
}

impl Adversary for VersionSpace {
    fn name(&self) -> String {
        "version_space".into()
    }

    fn next_input(&mut self) -> Result<Option<Input>> {
        let splits = |x: u32| {
            let mut vals = self.alive.iter().map(|&m| self.members[m][x as usize]);
            let first = vals.next();
            vals.any(|v| Some(v) != first)
        };
        Ok((0..self.domain).find(|&x| splits(x)).map(Input::Point))
    }

    fn respond(&mut self, x: &Input, guess: &OutputValue) -> Result<OutputValue> {
        let Input::Point(p) = x else { return Err(Error::DomainMismatch(format!("{x}"))) };
        let mut groups: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
        for &m in &self.alive {
            groups.entry(self.members[m][*p as usize]).or_default().push(m);
        }
        let pick = groups
            .iter()
            .filter(|(v, _)| OutputValue::Label(**v) != *guess)
            .max_by(|a, b| a.1.len().cmp(&b.1.len()).then(b.0.cmp(a.0)))
            .or_else(|| groups.iter().next())
            .map(|(v, _)| *v)
            .ok_or_else(|| Error::AdversaryInconsistent("empty version space".into()))?;
        self.alive = groups.remove(&pick).unwrap_or_default();
        Ok(OutputValue::Label(pick))
    }

    fn witness(&self) -> Option<Hidden> {
        self.alive.first().map(|&index| Hidden::Table { index })
    }
}

/// Forces `n` mistakes on integer inputs (`ints_only`), or alternates unit
/// field vectors with fresh integers to force `2n` on the combined family.
pub struct StarComposed {
    family: Family,
    n: usize,
    ints_only: bool,
    served: usize,
    field_claims: Vec<u64>,
    support: BTreeMap<i64, u32>,
}

impl StarComposed {
    pub fn new(family: &Family, ints_only: bool) -> Result<Self> {
        let n = match family {
            Family::CombinedStar { n, .. } => *n,
            Family::SparseSupport { n, .. } if ints_only => *n,
            f => return Err(Error::Validation(format!("support adversary does not apply to {}", f.name()))),
        };
        Ok(StarComposed { family: family.clone(), n, ints_only, served: 0, field_claims: Vec::new(), support: BTreeMap::new() })
    }
}

impl Adversary for StarComposed {
    fn name(&self) -> String {
        if self.ints_only { "support_hiding" } else { "star_composed" }.into()
    }

    fn next_input(&mut self) -> Result<Option<Input>> {
        let total = if self.ints_only { self.n } else { 2 * self.n };
        if self.served >= total {
            return Ok(None);
        }
        let i = self.served;
        self.served += 1;
        Ok(Some(if !self.ints_only && i.is_multiple_of(2) {
            Input::Field((0..self.n).map(|j| u64::from(j == i / 2)).collect())
        } else {
            Input::Int(self.served as i64)
        }))
    }

    fn respond(&mut self, x: &Input, guess: &OutputValue) -> Result<OutputValue> {
        let c = other_of_two(&self.family, x, guess);
        match (x, &c) {
            (Input::Field(_), OutputValue::FieldElem(v)) => self.field_claims.push(*v),
            (Input::Int(i), OutputValue::Label(v)) if *v > 0 => {
                self.support.insert(*i, *v);
            }
            _ => {}
        }
        Ok(c)
    }

    fn witness(&self) -> Option<Hidden> {
        Some(match &self.family {
            Family::SparseSupport { .. } => Hidden::Sparse { support: self.support.clone() },
            _ => {
                let mut alpha = self.field_claims.clone();
                alpha.resize(self.n, 0);
                Hidden::Star { alpha, support: self.support.clone() }
            }
        })
    }
}

/// Serves `a`, then `1/a` coordinatewise, then a few inputs that are not
/// reciprocal to `a`, answering truthfully.
pub fn reciprocal_probe(family: &Family, hidden: &Hidden) -> Result<Honest> {
    let Hidden::Reciprocal { a } = hidden else {
        return Err(Error::Validation("reciprocal probe needs a reciprocal member".into()));
    };
    let inv: Vec<Scalar> = a.iter().map(|v| &Scalar::one() / v).collect();
    let doubled: Vec<Scalar> = a.iter().map(|v| v * &Scalar::int(2)).collect();
    let inputs = vec![Input::Real(a.clone()), Input::Real(inv.clone()), Input::Real(doubled), Input::Real(a.clone()), Input::Real(inv)];
    Honest::scripted(family.clone(), hidden.clone(), inputs)
}

/// Replays another adversary but lies on scheduled rounds. A strong lie
/// claims the lowest value that is neither the truth nor the answer (the
/// answer itself when no such value exists); a weak lie picks the claim that
/// flips the right/wrong verdict.
pub struct LyingWrapper {
    base: Box<dyn Adversary>,
    family: Family,
    schedule: BTreeSet<usize>,
    weak: bool,
    round: usize,
    lies: usize,
}

impl LyingWrapper {
    pub fn new(base: Box<dyn Adversary>, family: Family, eta: usize, schedule: &[usize], weak: bool) -> Result<Self> {
        let schedule: BTreeSet<usize> = schedule.iter().copied().collect();
        if schedule.len() > eta {
            return Err(Error::BudgetExceeded { scheduled: schedule.len(), eta });
        }
        Ok(LyingWrapper { base, family, schedule, weak, round: 0, lies: 0 })
    }
}

impl Adversary for LyingWrapper {
    fn name(&self) -> String {
        format!("lying({})[{}]", if self.weak { "weak" } else { "strong" }, self.base.name())
    }

    fn next_input(&mut self) -> Result<Option<Input>> {
        self.base.next_input()
    }

    fn respond(&mut self, x: &Input, guess: &OutputValue) -> Result<OutputValue> {
        let truth = self.base.respond(x, guess)?;
        let round = self.round;
        self.round += 1;
        if !self.schedule.contains(&round) {
            return Ok(truth);
        }
        let values = self.family.codomain_at(x).ok_or_else(|| Error::Validation("lies need a finite codomain".into()))?;
        let lowest_other = |avoid: &[&OutputValue]| values.iter().find(|v| !avoid.contains(v)).cloned();
        let claim = if self.weak {
            if truth == *guess {
                lowest_other(&[guess])
            } else {
                Some(guess.clone())
            }
        } else {
            lowest_other(&[&truth, guess]).or_else(|| Some(guess.clone()))
        };
        let claim = claim.expect("codomain has at least two values");
        if claim != truth {
            self.lies += 1;
        }
        Ok(claim)
    }

    fn witness(&self) -> Option<Hidden> {
        self.base.witness()
    }

    fn lies(&self) -> usize {
        self.lies
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum AdversarySpec {
    /// Truthful answers on random inputs drawn from the game seed.
    Honest,
    /// Truthful answers on a fixed input list.
    Scripted {
        inputs: Vec<Input>,
    },
    Basis,
    PolyPower,
    FloorParity,
    Bisection,
    VersionSpace,
    StarComposed,
    SupportHiding,
    /// `a`, `1/a` and a few other points for reciprocal families.
    ReciprocalProbe,
}

/// Lies injected on top of the adversary.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LieSpec {
    pub eta: usize,
    /// 0-based rounds to lie on.
    pub schedule: Vec<usize>,
    #[serde(default)]
    pub weak: bool,
}

/// Builds the adversary. Strategies that play a fixed member use `hidden`,
/// or draw one from `seed` when it is absent.
pub fn build_adversary(spec: &AdversarySpec, family: &Family, hidden: Option<&Hidden>, seed: u64) -> Result<Box<dyn Adversary>> {
    let member = || -> Hidden {
        match hidden {
            Some(h) => h.clone(),
            None => family.random_member(&mut ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15)),
        }
    };
    Ok(match spec {
        AdversarySpec::Honest => Box::new(Honest::random(family.clone(), member(), seed)?),
        AdversarySpec::Scripted { inputs } => Box::new(Honest::scripted(family.clone(), member(), inputs.clone())?),
        AdversarySpec::Basis => Box::new(Basis::new(family.clone())?),
        AdversarySpec::PolyPower => Box::new(PolyPower::new(family)?),
        AdversarySpec::FloorParity => match family {
            Family::FloorParity => Box::new(FloorParityAdversary::new()),
            f => return Err(Error::Validation(format!("floor-parity adversary does not apply to {}", f.name()))),
        },
        AdversarySpec::Bisection => Box::new(Bisection::new(family)?),
        AdversarySpec::VersionSpace => Box::new(VersionSpace::new(family)?),
        AdversarySpec::StarComposed => Box::new(StarComposed::new(family, false)?),
        AdversarySpec::SupportHiding => Box::new(StarComposed::new(family, true)?),
        AdversarySpec::ReciprocalProbe => Box::new(reciprocal_probe(family, &member())?),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::Activation;

    fn q(n: i64, d: i64) -> Scalar {
        Scalar::ratio(n, d)
    }

    /// Plays `adv` against a learner that always answers `answer` and checks
    /// the witness against every claim.
    fn drive(adv: &mut dyn Adversary, family: &Family, answer: impl Fn(&Input) -> OutputValue, rounds: usize) -> Vec<(Input, OutputValue)> {
        let mut log = Vec::new();
        for _ in 0..rounds {
            let Some(x) = adv.next_input().unwrap() else { break };
            let g = answer(&x);
            let c = adv.respond(&x, &g).unwrap();
            log.push((x, c));
        }
        let w = adv.witness().unwrap();
        family.check_member(&w).unwrap();
        for (x, c) in &log {
            assert_eq!(family.eval_free(&w, x).unwrap(), *c, "witness disagrees at {x}");
        }
        log
    }

    #[test]
    fn basis_witnesses() {
        let fams = [
            Family::LinearReal { n: 3 },
            Family::LinearField { p: 5, n: 3 },
            Family::OneLayer { n: 3, activation: Activation::Tanh },
            Family::OneLayer { n: 2, activation: Activation::Relu },
            Family::SoftmaxLayer { n: 2, k: 3 },
        ];
        for f in fams {
            let expected = f.declared().opt_std;
            let mut adv = Basis::new(f.clone()).unwrap();
            let f2 = f.clone();
            let log = drive(&mut adv, &f, move |x| f2.default_output(x), 100);
            assert_eq!(crate::families::Bound::Exact(log.len() as u64), expected);
        }
    }

    #[test]
    fn poly_power_witness() {
        for degrees in [vec![2], vec![1, 1], vec![2, 1]] {
            let f = Family::BoundedDegreePoly { degrees };
            let mut adv = PolyPower::new(&f).unwrap();
            let log = drive(&mut adv, &f, |_| OutputValue::Rational(Scalar::zero()), 100);
            assert_eq!(log.len() as u64, f.dimension().unwrap() as u64);
        }
    }

    #[test]
    fn interpolation_oracle() {
        // y = 1 − t + t²/2 through t = 1, 2, 3.
        let pts = vec![(q(1, 1), q(1, 2)), (q(2, 1), q(1, 1)), (q(3, 1), q(5, 2))];
        assert_eq!(interpolate(&pts), vec![q(1, 1), q(-1, 1), q(1, 2)]);
    }

    #[test]
    fn floor_parity_all_zero_learner() {
        let f = Family::FloorParity;
        let mut adv = FloorParityAdversary::new();
        let log = drive(&mut adv, &f, |_| OutputValue::Bit(false), 30);
        assert!(log.iter().all(|(_, c)| *c == OutputValue::Bit(true)));
        let Some(Hidden::FloorParity { x }) = adv.witness() else { panic!() };
        assert_eq!(x, &Scalar::one() - &Scalar::pow2(-31));
        let seven_eighths = Hidden::FloorParity { x: q(7, 8) };
        for d in [2, 4, 8] {
            assert_eq!(f.eval_free(&seven_eighths, &Input::Real(vec![q(d, 1)])).unwrap(), OutputValue::Bit(true));
        }
    }

    #[test]
    fn bisection_errors_and_witness() {
        for alpha in [q(0, 1), q(1, 2)] {
            let f = Family::TwoLayerReluIndicator { alpha, epsilon: q(1, 4) };
            let mut adv = Bisection::new(&f).unwrap();
            let log = drive(&mut adv, &f, |_| OutputValue::Rational(q(1, 2)), 20);
            assert_eq!(log.len(), 20);
            let ones = log.iter().filter(|(_, c)| *c == OutputValue::Rational(q(1, 1))).count();
            assert_eq!(ones, 10);
        }
    }

    #[test]
    fn version_space_and_star() {
        let f = Family::FiniteExplicit { domain: 3, k: 3, members: vec![vec![0, 1, 2], vec![1, 1, 0], vec![2, 0, 0], vec![0, 0, 1]] };
        let mut adv = VersionSpace::new(&f).unwrap();
        drive(&mut adv, &f, |_| OutputValue::Label(0), 10);
        assert_eq!(adv.alive().len(), 1);
        let star = Family::CombinedStar { p: 3, n: 2 };
        let mut adv = StarComposed::new(&star, false).unwrap();
        let s2 = star.clone();
        assert_eq!(drive(&mut adv, &star, move |x| s2.default_output(x), 10).len(), 4);
        let sparse = Family::SparseSupport { k: 3, n: 2 };
        let mut adv = StarComposed::new(&sparse, true).unwrap();
        assert_eq!(drive(&mut adv, &sparse, |_| OutputValue::Label(0), 10).len(), 2);
    }

    #[test]
    fn lying_wrapper_budget_and_lies() {
        let f = Family::FiniteExplicit { domain: 4, k: 3, members: vec![vec![0, 1, 2, 0], vec![1, 1, 0, 2]] };
        let base = Box::new(Honest::scripted(f.clone(), Hidden::Table { index: 0 }, (0..4).map(Input::Point).collect()).unwrap());
        assert!(matches!(LyingWrapper::new(base, f.clone(), 1, &[0, 2], false), Err(Error::BudgetExceeded { scheduled: 2, eta: 1 })));
        for weak in [false, true] {
            let base = Box::new(Honest::scripted(f.clone(), Hidden::Table { index: 0 }, (0..4).map(Input::Point).collect()).unwrap());
            let mut adv = LyingWrapper::new(base, f.clone(), 1, &[2], weak).unwrap();
            let mut wrong = 0;
            while let Some(x) = adv.next_input().unwrap() {
                let c = adv.respond(&x, &OutputValue::Label(0)).unwrap();
                wrong += usize::from(f.eval_free(&Hidden::Table { index: 0 }, &x).unwrap() != c);
            }
            assert_eq!((wrong, adv.lies()), (1, 1));
        }
    }
}
