//! Learners. Each round the engine calls [`Learner::predict`] on a fresh meter,
//! seals the meter, then hands over the round's feedback with
//! [`Learner::feedback`]. Feedback is only stored; any arithmetic it triggers
//! runs at the start of the next `predict` and is charged to that round.

mod basic;
mod phase;
mod span;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::families::{Family, Input, OutputValue};
use crate::numerics::OpMeter;

pub use basic::{Alternating, Constant, Memorizer, Padded, RandomGuess, ReciprocalCheck, SequentialElimination};
pub use phase::{Eager, Phased, SimpleOnline};
pub use span::{CappedSpan, Codec, FieldCodec, RealCodec, ReluLearner, SpanSolver, SPAN_OPS_CONSTANT};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Feedback {
    /// The true output.
    Reveal(OutputValue),
    /// Whether the answer was correct.
    Verdict(bool),
    /// Nothing is learned from this round.
    Skip,
}

pub trait Learner: Send + Sync {
    fn name(&self) -> String;

    /// Answers `x`, first finishing any work left over from earlier feedback.
    fn predict(&mut self, x: &Input, meter: &mut OpMeter) -> Result<OutputValue>;

    /// Records feedback on the latest answer. No arithmetic happens here.
    fn feedback(&mut self, fb: Feedback) -> Result<()>;

    fn box_clone(&self) -> Box<dyn Learner>;

    fn diagnostics(&self) -> serde_json::Value {
        serde_json::Value::Null
    }

    /// Exact weight records, for voting learners.
    fn audit(&self) -> Option<crate::reductions::VotingAudit> {
        None
    }
}

impl Clone for Box<dyn Learner> {
    fn clone(&self) -> Self {
        self.box_clone()
    }
}

/// The latest question and answer, kept until feedback arrives.
#[derive(Clone, Debug)]
pub(crate) struct Last {
    pub x: Input,
    pub guess: OutputValue,
}

impl Last {
    /// The true output implied by `fb`, when it determines one. A "wrong"
    /// verdict determines the output only on two-element codomains.
    pub fn truth(&self, family: &Family, fb: &Feedback) -> Option<OutputValue> {
        match fb {
            Feedback::Reveal(y) => Some(y.clone()),
            Feedback::Verdict(true) => Some(self.guess.clone()),
            Feedback::Verdict(false) => match family.codomain_at(&self.x) {
                Some(values) if values.len() == 2 => values.into_iter().find(|v| *v != self.guess),
                _ => None,
            },
            Feedback::Skip => None,
        }
    }
}

/// Which learner to build, as written in experiment configs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum LearnerSpec {
    Memorizer,
    ReciprocalCheck,
    SequentialElimination,
    Span {
        #[serde(default)]
        capped: bool,
    },
    Relu {
        #[serde(default)]
        capped: bool,
    },
    /// The span learner run under the two-phase schedule with per-round budget `w`.
    Phased {
        w: u64,
    },
    CombinedStar,
    Constant {
        value: i64,
    },
    Alternating,
    Random {
        seed: u64,
    },
    /// `base` plus exactly `ops` extra multiplications per answer.
    Padded {
        ops: u64,
        base: Box<LearnerSpec>,
    },
}

/// Builds a learner for `family`.
pub fn build_learner(spec: &LearnerSpec, family: &Family) -> Result<Box<dyn Learner>> {
    let unsupported = || Error::Validation(format!("learner {spec:?} does not apply to {}", family.name()));
    Ok(match spec {
        LearnerSpec::Memorizer => Box::new(Memorizer::new(family.clone())),
        LearnerSpec::ReciprocalCheck => match family {
            Family::ReciprocalPair => Box::new(ReciprocalCheck::new(1)),
            Family::ReciprocalTuple { r } => Box::new(ReciprocalCheck::new(*r)),
            _ => return Err(unsupported()),
        },
        LearnerSpec::SequentialElimination => match family {
            Family::FiniteExplicit { .. } => Box::new(SequentialElimination::new(family.clone())?),
            _ => return Err(unsupported()),
        },
        LearnerSpec::Span { capped } => match family {
            Family::LinearField { p, n } => {
                let codec = FieldCodec { p: *p, n: *n };
                if *capped {
                    Box::new(CappedSpan::new(codec))
                } else {
                    Box::new(Eager::new(SpanSolver::new(codec)))
                }
            }
            _ => {
                let codec = RealCodec::for_family(family).ok_or_else(unsupported)?;
                if *capped {
                    Box::new(CappedSpan::new(codec))
                } else {
                    Box::new(Eager::new(SpanSolver::new(codec)))
                }
            }
        },
        LearnerSpec::Relu { capped } => match family {
            Family::OneLayer { n, activation } if !activation.is_invertible() => Box::new(ReluLearner::new(*n, *capped)),
            _ => return Err(unsupported()),
        },
        LearnerSpec::Phased { w } => match family {
            Family::LinearField { p, n } => Box::new(Phased::new(SpanSolver::new(FieldCodec { p: *p, n: *n }), *w)),
            _ => Box::new(Phased::new(SpanSolver::new(RealCodec::for_family(family).ok_or_else(unsupported)?), *w)),
        },
        LearnerSpec::CombinedStar => match family {
            Family::CombinedStar { p, n } => Box::new(crate::reductions::CombinedStarLearner::new(*p, *n)),
            _ => return Err(unsupported()),
        },
        LearnerSpec::Constant { value } => Box::new(Constant::new(family.clone(), *value)),
        LearnerSpec::Alternating => Box::new(Alternating::new(family.clone())),
        LearnerSpec::Random { seed } => Box::new(RandomGuess::new(family.clone(), *seed)),
        LearnerSpec::Padded { ops, base } => Box::new(Padded::new(build_learner(base, family)?, *ops)),
    })
}
