use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Feedback, Last, Learner};
use crate::error::{Error, Result};
use crate::families::{Constraint, Family, Hidden, Input, OutputValue};
use crate::numerics::{OpMeter, Scalar};

/// Answers the family default on unseen inputs and the remembered value on
/// repeats. Uses no arithmetic.
#[derive(Clone, Debug)]
pub struct Memorizer {
    family: Family,
    memo: HashMap<Input, OutputValue>,
    last: Option<Last>,
}

impl Memorizer {
    pub fn new(family: Family) -> Self {
        Memorizer { family, memo: HashMap::new(), last: None }
    }
}

impl Learner for Memorizer {
    fn name(&self) -> String {
        "memorizer".into()
    }

    fn predict(&mut self, x: &Input, _meter: &mut OpMeter) -> Result<OutputValue> {
        let guess = self.memo.get(x).cloned().unwrap_or_else(|| self.family.default_output(x));
        self.last = Some(Last { x: x.clone(), guess: guess.clone() });
        Ok(guess)
    }

    fn feedback(&mut self, fb: Feedback) -> Result<()> {
        if let Some(last) = self.last.take() {
            if let Some(y) = last.truth(&self.family, &fb) {
                self.memo.insert(last.x, y);
            }
        }
        Ok(())
    }

    fn box_clone(&self) -> Box<dyn Learner> {
        Box::new(self.clone())
    }
}

/// Learns a reciprocal-pair or reciprocal-tuple member with one mistake: after
/// the first revealed 1 at `z`, answers 1 on a new `q` iff `z_i q_i = 1` for
/// every coordinate, which costs `r` multiplications.
#[derive(Clone, Debug)]
pub struct ReciprocalCheck {
    r: usize,
    z: Option<Vec<Scalar>>,
    memo: HashMap<Input, OutputValue>,
    last: Option<Last>,
}

impl ReciprocalCheck {
    pub fn new(r: usize) -> Self {
        ReciprocalCheck { r, z: None, memo: HashMap::new(), last: None }
    }
}

impl Learner for ReciprocalCheck {
    fn name(&self) -> String {
        format!("reciprocal_check(r={})", self.r)
    }

    fn predict(&mut self, x: &Input, meter: &mut OpMeter) -> Result<OutputValue> {
        let guess = match (self.memo.get(x), &self.z, x) {
            (Some(y), _, _) => y.clone(),
            (None, None, _) => OutputValue::Bit(false),
            (None, Some(z), Input::Real(q)) if q.len() == self.r => {
                let mut all = true;
                for (zi, qi) in z.iter().zip(q) {
                    all &= meter.mul(zi, qi)? == Scalar::one();
                }
                OutputValue::Bit(all)
            }
            _ => return Err(Error::DomainMismatch(format!("{x} is not an {}-tuple", self.r))),
        };
        self.last = Some(Last { x: x.clone(), guess: guess.clone() });
        Ok(guess)
    }

    fn feedback(&mut self, fb: Feedback) -> Result<()> {
        let Some(last) = self.last.take() else { return Ok(()) };
        let y = match fb {
            Feedback::Reveal(y) => y,
            Feedback::Verdict(ok) => match last.guess {
                OutputValue::Bit(b) => OutputValue::Bit(b == ok),
                _ => return Ok(()),
            },
            Feedback::Skip => return Ok(()),
        };
        if y == OutputValue::Bit(true) && self.z.is_none() {
            if let Input::Real(v) = &last.x {
                self.z = Some(v.clone());
            }
        }
        self.memo.insert(last.x, y);
        Ok(())
    }

    fn box_clone(&self) -> Box<dyn Learner> {
        Box::new(self.clone())
    }
}

/// Answers with the first member consistent with all feedback so far.
#[derive(Clone, Debug)]
pub struct SequentialElimination {
    family: Family,
    current: usize,
    history: Vec<Constraint>,
    last: Option<Last>,
    exhausted: bool,
}

impl SequentialElimination {
    pub fn new(family: Family) -> Result<Self> {
        if !matches!(family, Family::FiniteExplicit { .. }) {
            return Err(Error::Validation("sequential elimination needs an explicit finite family".into()));
        }
        Ok(SequentialElimination { family, current: 0, history: Vec::new(), last: None, exhausted: false })
    }

    fn member_count(&self) -> usize {
        match &self.family {
            Family::FiniteExplicit { members, .. } => members.len(),
            _ => unreachable!(),
        }
    }

    pub fn current(&self) -> usize {
        self.current
    }

    fn fits(&self, index: usize) -> bool {
        let h = Hidden::Table { index };
        self.history.iter().all(|c| c.holds(&self.family.eval_free(&h, c.input()).expect("validated")))
    }
}

impl Learner for SequentialElimination {
    fn name(&self) -> String {
        "sequential_elimination".into()
    }

    fn predict(&mut self, x: &Input, meter: &mut OpMeter) -> Result<OutputValue> {
        if self.exhausted {
            return Err(Error::ExhaustedFamily);
        }
        let guess = self.family.evaluate(&Hidden::Table { index: self.current }, x, meter)?;
        self.last = Some(Last { x: x.clone(), guess: guess.clone() });
        Ok(guess)
    }

    fn feedback(&mut self, fb: Feedback) -> Result<()> {
        let Some(last) = self.last.take() else { return Ok(()) };
        let c = match fb {
            Feedback::Reveal(y) => Constraint::Equals(last.x, y),
            Feedback::Verdict(true) => Constraint::Equals(last.x, last.guess),
            Feedback::Verdict(false) => Constraint::NotEquals(last.x, last.guess),
            Feedback::Skip => return Ok(()),
        };
        self.history.push(c);
        if !self.fits(self.current) {
            match (self.current + 1..self.member_count()).find(|&i| self.fits(i)) {
                Some(i) => self.current = i,
                None => self.exhausted = true,
            }
        }
        Ok(())
    }

    fn box_clone(&self) -> Box<dyn Learner> {
        Box::new(self.clone())
    }

    fn diagnostics(&self) -> serde_json::Value {
        serde_json::json!({ "current": self.current, "exhausted": self.exhausted })
    }
}

/// Always answers the same small integer (in the family's output type).
#[derive(Clone, Debug)]
pub struct Constant {
    family: Family,
    value: i64,
}

impl Constant {
    pub fn new(family: Family, value: i64) -> Self {
        Constant { family, value }
    }
}

impl Learner for Constant {
    fn name(&self) -> String {
        format!("constant({})", self.value)
    }

    fn predict(&mut self, x: &Input, _meter: &mut OpMeter) -> Result<OutputValue> {
        Ok(self.family.output_from_int(x, self.value))
    }

    fn feedback(&mut self, _fb: Feedback) -> Result<()> {
        Ok(())
    }

    fn box_clone(&self) -> Box<dyn Learner> {
        Box::new(self.clone())
    }
}

/// Runs `base` and then spends exactly `ops` further multiplications per
/// answer, so that a base with no arithmetic becomes one whose per-round cost
/// is known in advance.
#[derive(Clone)]
pub struct Padded {
    base: Box<dyn Learner>,
    ops: u64,
}

impl Padded {
    pub fn new(base: Box<dyn Learner>, ops: u64) -> Self {
        Padded { base, ops }
    }
}

impl Learner for Padded {
    fn name(&self) -> String {
        format!("padded({})[{}]", self.ops, self.base.name())
    }

    fn predict(&mut self, x: &Input, meter: &mut OpMeter) -> Result<OutputValue> {
        let g = self.base.predict(x, meter)?;
        let one = Scalar::one();
        for _ in 0..self.ops {
            meter.mul(&one, &one)?;
        }
        Ok(g)
    }

    fn feedback(&mut self, fb: Feedback) -> Result<()> {
        self.base.feedback(fb)
    }

    fn box_clone(&self) -> Box<dyn Learner> {
        Box::new(self.clone())
    }

    fn diagnostics(&self) -> serde_json::Value {
        self.base.diagnostics()
    }
}

/// Answers 0, 1, 0, 1, ...
#[derive(Clone, Debug)]
pub struct Alternating {
    family: Family,
    round: i64,
}

impl Alternating {
    pub fn new(family: Family) -> Self {
        Alternating { family, round: 0 }
    }
}

impl Learner for Alternating {
    fn name(&self) -> String {
        "alternating".into()
    }

    fn predict(&mut self, x: &Input, _meter: &mut OpMeter) -> Result<OutputValue> {
        let v = self.round % 2;
        self.round += 1;
        Ok(self.family.output_from_int(x, v))
    }

    fn feedback(&mut self, _fb: Feedback) -> Result<()> {
        Ok(())
    }

    fn box_clone(&self) -> Box<dyn Learner> {
        Box::new(self.clone())
    }
}

/// Seeded uniform guesses over the codomain, or over `{−2..2}` when it is infinite.
#[derive(Clone, Debug)]
pub struct RandomGuess {
    family: Family,
    rng: ChaCha8Rng,
}

impl RandomGuess {
    pub fn new(family: Family, seed: u64) -> Self {
        RandomGuess { family, rng: ChaCha8Rng::seed_from_u64(seed) }
    }
}

impl Learner for RandomGuess {
    fn name(&self) -> String {
        "random".into()
    }

    fn predict(&mut self, x: &Input, _meter: &mut OpMeter) -> Result<OutputValue> {
        let v = match self.family.codomain_size() {
            Some(k) => self.rng.gen_range(0..k as i64),
            None => self.rng.gen_range(-2..=2),
        };
        Ok(self.family.output_from_int(x, v))
    }

    fn feedback(&mut self, _fb: Feedback) -> Result<()> {
        Ok(())
    }

    fn box_clone(&self) -> Box<dyn Learner> {
        Box::new(self.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Scalar {
        Scalar::ratio(n, d)
    }

    fn play(l: &mut dyn Learner, f: &Family, h: &Hidden, xs: &[Input], cap: Option<u64>) -> Result<(usize, u64)> {
        let mut mistakes = 0;
        let mut max_ops = 0;
        for x in xs {
            let mut m = OpMeter::new(cap);
            let g = l.predict(x, &mut m)?;
            max_ops = max_ops.max(m.used());
            let y = f.eval_free(h, x)?;
            if g != y {
                mistakes += 1;
            }
            l.feedback(Feedback::Reveal(y))?;
        }
        Ok((mistakes, max_ops))
    }

    #[test]
    fn memorizer_on_reciprocal_pair() {
        let f = Family::ReciprocalPair;
        let h = Hidden::Reciprocal { a: vec![q(2, 1)] };
        let xs: Vec<Input> = [q(2, 1), q(1, 2), q(3, 1), q(2, 1), q(1, 2)].into_iter().map(|v| Input::Real(vec![v])).collect();
        let mut l = Memorizer::new(f.clone());
        assert_eq!(play(&mut l, &f, &h, &xs, Some(0)).unwrap(), (2, 0));
    }

    #[test]
    fn reciprocal_check_one_mistake_and_cap() {
        let f = Family::ReciprocalTuple { r: 3 };
        let a = vec![q(2, 1), q(3, 1), q(4, 1)];
        let b = vec![q(1, 2), q(1, 3), q(1, 4)];
        let h = Hidden::Reciprocal { a: a.clone() };
        let xs = vec![Input::Real(a), Input::Real(vec![q(5, 1); 3]), Input::Real(b)];
        let mut l = ReciprocalCheck::new(3);
        assert_eq!(play(&mut l, &f, &h, &xs, Some(3)).unwrap(), (1, 3));
        let mut capped = ReciprocalCheck::new(3);
        let err = play(&mut capped, &f, &h, &xs, Some(2)).unwrap_err();
        assert!(err.is_cap_exceeded());
    }

    #[test]
    fn sequential_elimination_bounds() {
        let f = Family::FiniteExplicit { domain: 3, k: 2, members: vec![vec![0, 0, 0], vec![0, 0, 1], vec![0, 1, 1], vec![1, 1, 1]] };
        let xs: Vec<Input> = (0..3).rev().chain(0..3).map(Input::Point).collect();
        for index in 0..4 {
            let mut l = SequentialElimination::new(f.clone()).unwrap();
            let (m, ops) = play(&mut l, &f, &Hidden::Table { index }, &xs, Some(0)).unwrap();
            assert!(m <= 3);
            assert_eq!(ops, 0);
        }
        let single = Family::FiniteExplicit { domain: 2, k: 2, members: vec![vec![1, 0]] };
        let mut l = SequentialElimination::new(single.clone()).unwrap();
        assert_eq!(play(&mut l, &single, &Hidden::Table { index: 0 }, &[Input::Point(0), Input::Point(1)], None).unwrap().0, 0);
    }

    #[test]
    fn inconsistent_feedback_exhausts_the_family() {
        let f = Family::FiniteExplicit { domain: 2, k: 3, members: vec![vec![0, 0], vec![1, 1]] };
        let mut l = SequentialElimination::new(f).unwrap();
        let mut m = OpMeter::unlimited();
        l.predict(&Input::Point(0), &mut m).unwrap();
        l.feedback(Feedback::Reveal(OutputValue::Label(2))).unwrap();
        assert_eq!(l.predict(&Input::Point(1), &mut m).unwrap_err(), Error::ExhaustedFamily);
    }
}
