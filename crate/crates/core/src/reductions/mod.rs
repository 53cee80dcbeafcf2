//! Meta-learners built from a base learner: weighted-majority voting for
//! bandit, agnostic and delayed feedback, restarts, and reductions between
//! families.

mod voting;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::families::{Bound, Family, Input, OutputValue};
use crate::learners::{Eager, Feedback, FieldCodec, Learner, Memorizer, SpanSolver};
use crate::numerics::{OpMeter, Scalar};

pub use voting::{default_alpha, rationalize, CopyView, DecayEvent, Rule, Voting, VotingAudit};

/// Runs the base learner alone and starts over from scratch after every
/// `m + 1` mistakes it is told about.
#[derive(Clone)]
pub struct Restart {
    prototype: Box<dyn Learner>,
    current: Box<dyn Learner>,
    m: u64,
    since_restart: u64,
    restarts: u64,
    last_guess: Option<OutputValue>,
}

impl Restart {
    pub fn new(base: Box<dyn Learner>, m: u64) -> Self {
        Restart { current: base.box_clone(), prototype: base, m, since_restart: 0, restarts: 0, last_guess: None }
    }

    pub fn restarts(&self) -> u64 {
        self.restarts
    }

    fn restart(&mut self) {
        self.current = self.prototype.box_clone();
        self.since_restart = 0;
        self.restarts += 1;
    }
}

/// Errors a base learner raises when its feedback fits no member.
fn signals_inconsistency(e: &Error) -> bool {
    matches!(e, Error::ExhaustedFamily | Error::InconsistentFeedback(_) | Error::NoActiveCopies)
}

impl Learner for Restart {
    fn name(&self) -> String {
        format!("restart(m={})[{}]", self.m, self.prototype.name())
    }

    fn predict(&mut self, x: &Input, meter: &mut OpMeter) -> Result<OutputValue> {
        let g = match self.current.predict(x, meter) {
            Err(e) if signals_inconsistency(&e) => {
                self.restart();
                self.current.predict(x, meter)?
            }
            other => other?,
        };
        self.last_guess = Some(g.clone());
        Ok(g)
    }

    fn feedback(&mut self, fb: Feedback) -> Result<()> {
        let Some(guess) = self.last_guess.take() else { return Ok(()) };
        let wrong = match &fb {
            Feedback::Reveal(y) => *y != guess,
            Feedback::Verdict(ok) => !ok,
            Feedback::Skip => false,
        };
        match self.current.feedback(fb) {
            Err(e) if signals_inconsistency(&e) => {
                self.restart();
                return Ok(());
            }
            other => other?,
        }
        if wrong {
            self.since_restart += 1;
            if self.since_restart > self.m {
                self.restart();
            }
        }
        Ok(())
    }

    fn box_clone(&self) -> Box<dyn Learner> {
        Box::new(self.clone())
    }

    fn diagnostics(&self) -> serde_json::Value {
        serde_json::json!({ "restarts": self.restarts })
    }
}

/// How inputs of the smaller family embed into the larger one.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InputMap {
    Identity,
    /// Field vectors into the field side of a combined family.
    Left,
    /// Integers into the sparse side of a combined family.
    Right,
}

/// Learns `F` through a learner for `G` when `F ≾ G`: inputs go through `m`,
/// outputs through the per-input bijection, which is the identity for every
/// supported map. Both maps cost no operations.
#[derive(Clone)]
pub struct OrderReduction {
    inner: Box<dyn Learner>,
    map: InputMap,
}

impl OrderReduction {
    pub fn new(inner: Box<dyn Learner>, map: InputMap) -> Self {
        OrderReduction { inner, map }
    }

    /// Operations spent on the input map per round.
    pub const A_M: u64 = 0;
    /// Operations spent on the output bijection per round.
    pub const A_S: u64 = 0;

    fn map_input(&self, x: &Input) -> Result<Input> {
        match (self.map, x) {
            (InputMap::Identity, _) | (InputMap::Left, Input::Field(_)) | (InputMap::Right, Input::Int(_)) => Ok(x.clone()),
            _ => Err(Error::DomainMismatch(format!("{x} cannot be mapped by {:?}", self.map))),
        }
    }

    /// `s_x`: outputs of `F` to outputs of `G`.
    fn to_target(&self, y: OutputValue) -> OutputValue {
        match (self.map, y) {
            (InputMap::Right, OutputValue::Label(v)) => OutputValue::Label(v),
            (_, y) => y,
        }
    }

    /// `s_x⁻¹`.
    fn untarget(&self, y: OutputValue) -> OutputValue {
        y
    }
}

impl Learner for OrderReduction {
    fn name(&self) -> String {
        format!("order_reduction({:?})[{}]", self.map, self.inner.name())
    }

    fn predict(&mut self, x: &Input, meter: &mut OpMeter) -> Result<OutputValue> {
        let mx = self.map_input(x)?;
        let y = self.inner.predict(&mx, meter)?;
        Ok(self.untarget(y))
    }

    fn feedback(&mut self, fb: Feedback) -> Result<()> {
        let fb = match fb {
            Feedback::Reveal(y) => Feedback::Reveal(self.to_target(y)),
            other => other,
        };
        self.inner.feedback(fb)
    }

    fn box_clone(&self) -> Box<dyn Learner> {
        Box::new(self.clone())
    }

    fn diagnostics(&self) -> serde_json::Value {
        self.inner.diagnostics()
    }

    fn audit(&self) -> Option<VotingAudit> {
        self.inner.audit()
    }
}

/// Learner for the combined family: a span learner over `F_p` for field
/// inputs and a memorizer for integer inputs, at most `2n` mistakes.
#[derive(Clone)]
pub struct CombinedStarLearner {
    field: Eager<SpanSolver<FieldCodec>>,
    ints: Memorizer,
    last_was_field: Option<bool>,
}

impl CombinedStarLearner {
    pub fn new(p: u64, n: usize) -> Self {
        CombinedStarLearner {
            field: Eager::new(SpanSolver::new(FieldCodec { p, n })),
            ints: Memorizer::new(Family::CombinedStar { p, n }),
            last_was_field: None,
        }
    }
}

impl Learner for CombinedStarLearner {
    fn name(&self) -> String {
        "combined_star".into()
    }

    fn predict(&mut self, x: &Input, meter: &mut OpMeter) -> Result<OutputValue> {
        match x {
            Input::Field(_) => {
                self.last_was_field = Some(true);
                self.field.predict(x, meter)
            }
            Input::Int(_) => {
                self.last_was_field = Some(false);
                self.ints.predict(x, meter)
            }
            _ => Err(Error::DomainMismatch(format!("{x} is neither a field vector nor an integer"))),
        }
    }

    fn feedback(&mut self, fb: Feedback) -> Result<()> {
        match self.last_was_field.take() {
            Some(true) => self.field.feedback(fb),
            Some(false) => self.ints.feedback(fb),
            None => Ok(()),
        }
    }

    fn box_clone(&self) -> Box<dyn Learner> {
        Box::new(self.clone())
    }
}

/// A meta-learner wrapped around the configured base learner.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ReductionSpec {
    Bandit {
        #[serde(default)]
        alpha: Option<Scalar>,
    },
    /// `r` comes from the protocol.
    Ambiguous {
        #[serde(default)]
        alpha: Option<Scalar>,
    },
    AgnosticStrong,
    AgnosticWeak,
    /// Needs the base mistake bound `m` unless the family declares one.
    Restart {
        #[serde(default)]
        m: Option<u64>,
    },
    /// The learner is built for `target`; inputs are mapped by `map`.
    OrderReduction {
        target: Family,
        map: InputMap,
    },
}

/// The standard mistake bound declared by `family`, if finite.
pub fn declared_mistake_bound(family: &Family) -> Option<u64> {
    match family.declared().opt_std {
        Bound::Exact(m) | Bound::AtMost(m) => Some(m),
        Bound::Infinite => None,
    }
}

/// Wraps `base` according to `spec`. `family` is the family the game is
/// played on; `r` is the protocol's delay (1 when there is none).
pub fn build_reduction(spec: &ReductionSpec, base: Box<dyn Learner>, family: &Family, r: usize) -> Result<Box<dyn Learner>> {
    let coordinate_family = match family {
        Family::Cart { base, .. } => base.as_ref().clone(),
        f => f.clone(),
    };
    let k = || coordinate_family.codomain_size().ok_or_else(|| Error::Validation(format!("{} has an infinite codomain", family.name())));
    Ok(match spec {
        ReductionSpec::Bandit { alpha } => {
            let alpha = match alpha {
                Some(a) => a.clone(),
                None => default_alpha(k()?, 1),
            };
            Box::new(Voting::new(base, coordinate_family, Rule::Ambiguous { r: 1, alpha })?)
        }
        ReductionSpec::Ambiguous { alpha } => {
            let alpha = match alpha {
                Some(a) => a.clone(),
                None => default_alpha(k()?, r),
            };
            Box::new(Voting::new(base, coordinate_family, Rule::Ambiguous { r, alpha })?)
        }
        ReductionSpec::AgnosticStrong => Box::new(Voting::new(base, coordinate_family, Rule::Strong)?),
        ReductionSpec::AgnosticWeak => Box::new(Voting::new(base, coordinate_family, Rule::Weak)?),
        ReductionSpec::Restart { m } => {
            let m = m.or_else(|| declared_mistake_bound(family)).ok_or_else(|| Error::Validation("restart needs a finite mistake bound m".into()))?;
            Box::new(Restart::new(base, m))
        }
        ReductionSpec::OrderReduction { map, .. } => Box::new(OrderReduction::new(base, *map)),
    })
}
