use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::families::{consistent, Constraint, Family, Input, OutputValue};
use crate::learners::{Feedback, Learner};
use crate::numerics::{OpMeter, Scalar};

/// How copies split after a mistake.
#[derive(Clone, Debug, PartialEq)]
pub enum Rule {
    /// Bandit feedback (`r = 1`) or one aggregate verdict for `r` outputs:
    /// every copy in the winning batch is replaced by one clone per
    /// (coordinate, other value), each at `alpha · w`.
    Ambiguous { r: usize, alpha: Scalar },
    /// Revealed, possibly false, value `q`: copies that voted `≠ q` split
    /// into a `q` clone at `w/3` and one clone per `i ≠ q` at `w/(3k)`.
    Strong,
    /// Possibly false verdict: on "wrong" for meta answer `q`, copies that
    /// voted `q` split into a `q` clone at `w/3` and one per `i ≠ q` at `w/(3k)`.
    Weak,
}

/// `⌊v · 2⁶⁴⌋ / 2⁶⁴`.
pub fn rationalize(v: f64) -> Scalar {
    let scaled = (v * 2f64.powi(64)).floor();
    let num = BigInt::from(scaled as u128);
    Scalar::from_rational(BigRational::new(num, BigInt::from(1u128 << 64)))
}

/// Default clone weight `1/(r k ln k)`, rationalized.
pub fn default_alpha(k: usize, r: usize) -> Scalar {
    rationalize(1.0 / (r as f64 * k as f64 * (k as f64).ln()))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DecayEvent {
    pub before: Scalar,
    pub after: Scalar,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CopyView {
    pub weight: Scalar,
    pub memory: Vec<(Input, OutputValue)>,
    /// Weight factors applied at each split, in order.
    pub factors: Vec<Scalar>,
}

/// Exact record of a voting learner's weights.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct VotingAudit {
    pub rule: String,
    pub k: usize,
    /// Guaranteed per-mistake bound on `W_after / W_before`.
    pub decay_factor: Scalar,
    pub events: Vec<DecayEvent>,
    /// Active copies at the start of each round.
    pub q_history: Vec<usize>,
    pub copies: Vec<CopyView>,
}

impl VotingAudit {
    pub fn max_q(&self) -> usize {
        self.q_history.iter().copied().max().unwrap_or(0)
    }

    /// Whether every recorded mistake shrank the total weight by at least the
    /// guaranteed factor.
    pub fn decay_holds(&self, factor: &Scalar) -> bool {
        self.events.iter().all(|e| e.after <= &e.before * factor)
    }
}

#[derive(Clone)]
struct Copy {
    weight: Scalar,
    learner: Box<dyn Learner>,
    memory: Vec<(Input, OutputValue)>,
    factors: Vec<Scalar>,
}

#[derive(Clone)]
struct Spawn {
    /// Children sharing a group share one weight multiplication.
    group: usize,
    parent_weight: Scalar,
    copy: Copy,
}

#[derive(Clone, Default)]
struct RoundState {
    xs: Vec<Input>,
    /// Per copy, per coordinate.
    answers: Vec<Vec<OutputValue>>,
    /// Per copy, per coordinate: the learner right after answering.
    snapshots: Vec<Vec<Box<dyn Learner>>>,
    agree: Vec<bool>,
    meta: Vec<OutputValue>,
    open: bool,
}

/// Weighted-majority voting over copies of a base learner, each copy
/// assuming a different history of corrections. Weight multiplications for
/// new copies and all vote additions are charged to the round's meter; the
/// consistency filter applied when spawning is free.
#[derive(Clone)]
pub struct Voting {
    family: Family,
    k: usize,
    rule: Rule,
    copies: Vec<Copy>,
    pending: Vec<Spawn>,
    round: RoundState,
    audit: VotingAudit,
}

impl Voting {
    /// `family` is the family the base learner learns (the coordinate family
    /// for batched inputs). Its codomain must be finite.
    pub fn new(base: Box<dyn Learner>, family: Family, rule: Rule) -> Result<Self> {
        let k = family.codomain_size().ok_or_else(|| Error::Validation(format!("voting needs a finite codomain, {} has none", family.name())))?;
        if k < 2 {
            return Err(Error::Validation("voting needs k ≥ 2".into()));
        }
        let decay_factor = match &rule {
            Rule::Ambiguous { r, alpha } => {
                if *r == 0 {
                    return Err(Error::Validation("r must be at least 1".into()));
                }
                let spread = &Scalar::int((r * (k - 1)) as i64) * alpha;
                if spread >= Scalar::one() {
                    return Err(Error::Validation(format!("r(k−1)α = {spread} must be below 1")));
                }
                let kr = Scalar::int((k as i64).pow(*r as u32));
                &Scalar::one() - &(&(&Scalar::one() - &spread) / &kr)
            }
            Rule::Strong => Scalar::ratio(5, 6),
            Rule::Weak => &Scalar::one() - &Scalar::ratio(1, 3 * k as i64),
        };
        let rule_name = match &rule {
            Rule::Ambiguous { r: 1, .. } => "bandit".to_string(),
            Rule::Ambiguous { r, .. } => format!("ambiguous(r={r})"),
            Rule::Strong => "agnostic_strong".into(),
            Rule::Weak => "agnostic_weak".into(),
        };
        let root = Copy { weight: Scalar::one(), learner: base, memory: Vec::new(), factors: Vec::new() };
        Ok(Voting {
            family,
            k,
            rule,
            copies: vec![root],
            pending: Vec::new(),
            round: RoundState::default(),
            audit: VotingAudit { rule: rule_name, k, decay_factor, events: Vec::new(), q_history: Vec::new(), copies: Vec::new() },
        })
    }

    fn r(&self) -> usize {
        match &self.rule {
            Rule::Ambiguous { r, .. } => *r,
            _ => 1,
        }
    }

    pub fn active_copies(&self) -> usize {
        self.copies.len() + self.pending.len()
    }

    fn total_weight(&self) -> Scalar {
        let mut w = Scalar::zero();
        for c in &self.copies {
            w = &w + &c.weight;
        }
        for s in &self.pending {
            w = &w + &(&s.parent_weight * s.copy.factors.last().expect("spawned copies carry a factor"));
        }
        w
    }

    fn begin_round(&mut self, meter: &mut OpMeter) -> Result<()> {
        let mut weights: BTreeMap<usize, Scalar> = BTreeMap::new();
        for spawn in std::mem::take(&mut self.pending) {
            let factor = spawn.copy.factors.last().expect("spawned copies carry a factor").clone();
            let w = match weights.get(&spawn.group) {
                Some(w) => w.clone(),
                None => {
                    let w = meter.mul(&spawn.parent_weight, &factor)?;
                    weights.insert(spawn.group, w.clone());
                    w
                }
            };
            self.copies.push(Copy { weight: w, ..spawn.copy });
        }
        if self.copies.is_empty() {
            return Err(Error::NoActiveCopies);
        }
        self.audit.q_history.push(self.copies.len());
        let n = self.copies.len();
        self.round = RoundState { answers: vec![Vec::new(); n], snapshots: vec![Vec::new(); n], agree: vec![true; n], open: true, ..RoundState::default() };
        Ok(())
    }

    fn answer_coordinate(&mut self, x: &Input, meter: &mut OpMeter) -> Result<OutputValue> {
        let keep_snapshots = self.r() > 1;
        for (i, c) in self.copies.iter_mut().enumerate() {
            let a = c.learner.predict(x, meter)?;
            if keep_snapshots && self.round.agree[i] {
                self.round.snapshots[i].push(c.learner.box_clone());
            }
            self.round.answers[i].push(a);
        }
        let coord = self.round.xs.len();
        let mut tally: BTreeMap<OutputValue, Scalar> = BTreeMap::new();
        for (i, c) in self.copies.iter().enumerate() {
            if self.round.agree[i] {
                let slot = tally.entry(self.round.answers[i][coord].clone()).or_insert_with(Scalar::zero);
                *slot = meter.add(slot, &c.weight)?;
            }
        }
        // Ascending order with a strict comparison: ties go to the lowest value.
        let mut best: Option<(&OutputValue, &Scalar)> = None;
        for (v, w) in &tally {
            if best.is_none_or(|(_, bw)| w > bw) {
                best = Some((v, w));
            }
        }
        let meta = best.expect("at least one agreeing copy").0.clone();
        for (i, agree) in self.round.agree.iter_mut().enumerate() {
            *agree &= self.round.answers[i][coord] == meta;
        }
        self.round.xs.push(x.clone());
        self.round.meta.push(meta.clone());
        Ok(meta)
    }

    /// Clones `learner`, feeds it `(x, v)` and queues it unless its memory
    /// becomes inconsistent with the family.
    fn spawn(&mut self, group: usize, parent: &Copy, learner: &dyn Learner, x: &Input, v: OutputValue, factor: Scalar) -> Result<()> {
        let mut memory = parent.memory.clone();
        memory.push((x.clone(), v.clone()));
        let constraints: Vec<Constraint> = memory.iter().map(|(x, y)| Constraint::Equals(x.clone(), y.clone())).collect();
        match consistent(&self.family, &constraints) {
            Ok(Some(_)) | Err(Error::UnsupportedConstraintPattern(_)) => {}
            Ok(None) => return Ok(()),
            Err(e) => return Err(e),
        }
        let mut child = learner.box_clone();
        child.feedback(Feedback::Reveal(v))?;
        let mut factors = parent.factors.clone();
        factors.push(factor);
        self.pending.push(Spawn { group, parent_weight: parent.weight.clone(), copy: Copy { weight: Scalar::zero(), learner: child, memory, factors } });
        Ok(())
    }

    fn codomain(&self, x: &Input) -> Result<Vec<OutputValue>> {
        self.family.codomain_at(x).ok_or_else(|| Error::Validation(format!("no finite codomain at {x}")))
    }

    /// Splits every copy selected by `split` the agnostic way around the
    /// value `q`; the rest get no feedback.
    fn agnostic_split(&mut self, q: &OutputValue, split: impl Fn(&OutputValue) -> bool) -> Result<()> {
        let x = self.round.xs[0].clone();
        let values = self.codomain(&x)?;
        if !values.contains(q) {
            return Err(Error::InconsistentFeedback(format!("{q} is not a possible output at {x}")));
        }
        let third = Scalar::ratio(1, 3);
        let small = Scalar::ratio(1, 3 * self.k as i64);
        let mut group = 0;
        for (i, mut c) in std::mem::take(&mut self.copies).into_iter().enumerate() {
            if split(&self.round.answers[i][0]) {
                let learner = c.learner.box_clone();
                self.spawn(group, &c, learner.as_ref(), &x, q.clone(), third.clone())?;
                group += 1;
                for v in values.iter().filter(|v| *v != q) {
                    self.spawn(group, &c, learner.as_ref(), &x, v.clone(), small.clone())?;
                }
                group += 1;
            } else {
                c.learner.feedback(Feedback::Skip)?;
                self.copies.push(c);
            }
        }
        Ok(())
    }

    fn ambiguous_split(&mut self, alpha: &Scalar) -> Result<()> {
        let xs = self.round.xs.clone();
        let mut group = 0;
        let answers = std::mem::take(&mut self.round.answers);
        let mut snapshots = std::mem::take(&mut self.round.snapshots);
        let agree = self.round.agree.clone();
        for (i, mut c) in std::mem::take(&mut self.copies).into_iter().enumerate() {
            if !agree[i] {
                c.learner.feedback(Feedback::Skip)?;
                self.copies.push(c);
                continue;
            }
            for (j, x) in xs.iter().enumerate() {
                let snapshot: Box<dyn Learner> = if xs.len() == 1 { c.learner.box_clone() } else { snapshots[i][j].box_clone() };
                for v in self.codomain(x)? {
                    if v != answers[i][j] {
                        self.spawn(group, &c, snapshot.as_ref(), x, v, alpha.clone())?;
                    }
                }
            }
            snapshots[i].clear();
            group += 1;
        }
        Ok(())
    }

    fn skip_all(&mut self) -> Result<()> {
        for c in &mut self.copies {
            c.learner.feedback(Feedback::Skip)?;
        }
        Ok(())
    }
}

impl Learner for Voting {
    fn name(&self) -> String {
        format!("{}[{}]", self.audit.rule, self.copies.first().map_or_else(String::new, |c| c.learner.name()))
    }

    fn predict(&mut self, x: &Input, meter: &mut OpMeter) -> Result<OutputValue> {
        let r = self.r();
        match x {
            Input::Batch(xs) if matches!(self.rule, Rule::Ambiguous { .. }) => {
                if xs.len() != r {
                    return Err(Error::DomainMismatch(format!("expected a batch of {r}")));
                }
                self.begin_round(meter)?;
                let mut out = Vec::with_capacity(r);
                for xi in xs {
                    out.push(self.answer_coordinate(xi, meter)?);
                }
                Ok(OutputValue::Tuple(out))
            }
            _ => {
                if !self.round.open || self.round.xs.len() >= r {
                    self.begin_round(meter)?;
                }
                self.answer_coordinate(x, meter)
            }
        }
    }

    fn feedback(&mut self, fb: Feedback) -> Result<()> {
        if !self.round.open {
            return Ok(());
        }
        self.round.open = false;
        let before = self.total_weight();
        let mistake = match (&self.rule.clone(), fb) {
            (Rule::Strong, Feedback::Reveal(q)) if q != self.round.meta[0] => {
                self.agnostic_split(&q, |a| *a != q)?;
                true
            }
            (Rule::Weak, Feedback::Verdict(false)) => {
                let q = self.round.meta[0].clone();
                self.agnostic_split(&q, |a| *a == q)?;
                true
            }
            (Rule::Ambiguous { alpha, .. }, Feedback::Verdict(false)) => {
                self.ambiguous_split(alpha)?;
                true
            }
            _ => {
                self.skip_all()?;
                false
            }
        };
        if mistake {
            let after = self.total_weight();
            self.audit.events.push(DecayEvent { before, after });
        }
        Ok(())
    }

    fn box_clone(&self) -> Box<dyn Learner> {
        Box::new(self.clone())
    }

    fn diagnostics(&self) -> serde_json::Value {
        serde_json::json!({
            "copies": self.active_copies(),
            "max_copies": self.audit.max_q(),
            "weight_events": self.audit.events.len(),
        })
    }

    fn audit(&self) -> Option<VotingAudit> {
        let mut a = self.audit.clone();
        a.copies = self
            .copies
            .iter()
            .map(|c| CopyView { weight: c.weight.clone(), memory: c.memory.clone(), factors: c.factors.clone() })
            .chain(self.pending.iter().map(|s| CopyView {
                weight: &s.parent_weight * s.copy.factors.last().expect("factor"),
                memory: s.copy.memory.clone(),
                factors: s.copy.factors.clone(),
            }))
            .collect();
        Some(a)
    }
}
