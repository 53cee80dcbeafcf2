//! Game runner: protocol dispatch, per-round metering, transcripts and
//! post-hoc certification.

mod config;

use serde::{Deserialize, Serialize};

use crate::adversaries::Adversary;
use crate::error::{Error, Result};
use crate::families::{consistent, Constraint, Family, Hidden, Input, OutputValue};
use crate::learners::{Feedback, Learner};
use crate::numerics::{NumericError, OpMeter, Scalar};
use crate::reductions::VotingAudit;

pub use config::{sweep, ExperimentConfig};

/// Relative tolerance for comparisons in approximate mode.
pub const APPROX_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Protocol {
    /// The true output is revealed after each answer.
    Standard,
    /// Only "right" or "wrong".
    Bandit,
    /// A revealed output that may be false on up to `eta` rounds.
    AgnosticStrong { eta: usize },
    /// A verdict that may be false on up to `eta` rounds.
    AgnosticWeak { eta: usize },
    /// `r` inputs, each answered before the next arrives, then one verdict.
    DelayedAmbiguous { r: usize },
    /// `r` inputs delivered together, then one verdict.
    CartBandit { r: usize },
}

impl Protocol {
    pub fn eta(&self) -> usize {
        match self {
            Protocol::AgnosticStrong { eta } | Protocol::AgnosticWeak { eta } => *eta,
            _ => 0,
        }
    }

    pub fn delay(&self) -> usize {
        match self {
            Protocol::DelayedAmbiguous { r } | Protocol::CartBandit { r } => *r,
            _ => 1,
        }
    }

    fn reveals(&self) -> bool {
        matches!(self, Protocol::Standard | Protocol::AgnosticStrong { .. })
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    #[default]
    Exact,
    /// Outputs compared after realization, within [`APPROX_TOLERANCE`].
    Approx,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GameConfig {
    pub cap: Option<u64>,
    pub max_rounds: usize,
    pub mode: Mode,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Delivery {
    Single,
    Sequential,
    Together,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RoundRecord {
    pub round: usize,
    pub inputs: Vec<Input>,
    pub answers: Vec<OutputValue>,
    pub claims: Vec<OutputValue>,
    pub feedback: String,
    pub mistake: bool,
    /// `|answer − claim|` for real-valued outputs.
    pub error: Option<Scalar>,
    pub ops: u64,
    pub delivery: Delivery,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Status {
    Clean,
    /// The learner needed more than the cap in `round` and is disqualified.
    CapExceeded {
        round: usize,
    },
    LearnerError {
        round: usize,
        message: String,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    AdversaryExhausted,
    MaxRounds,
    Disqualified,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Certification {
    pub witness: Hidden,
    pub disagreements: usize,
    pub eta: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Transcript {
    pub family: String,
    pub learner: String,
    pub adversary: String,
    pub protocol: Protocol,
    pub cap: Option<u64>,
    pub rounds: Vec<RoundRecord>,
    pub mistakes: usize,
    pub max_ops: u64,
    pub total_error: Scalar,
    pub lies: usize,
    pub status: Status,
    pub termination: Termination,
    pub certification: Option<Certification>,
    pub diagnostics: serde_json::Value,
    pub audit: Option<VotingAudit>,
}

impl Transcript {
    pub fn is_clean(&self) -> bool {
        self.status == Status::Clean
    }

    /// Canonical JSON, used to compare runs byte for byte.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("transcripts serialize")
    }
}

fn error_between(a: &OutputValue, b: &OutputValue) -> Option<Scalar> {
    match (a, b) {
        (OutputValue::Rational(x), OutputValue::Rational(y)) => Some((x - y).abs()),
        _ => None,
    }
}

/// One game in progress, advanced a round at a time.
pub struct Game {
    family: Family,
    learner: Box<dyn Learner>,
    adversary: Box<dyn Adversary>,
    protocol: Protocol,
    config: GameConfig,
    rounds: Vec<RoundRecord>,
    status: Status,
    termination: Option<Termination>,
}

enum Step {
    Answered(Vec<Input>, Vec<OutputValue>, Vec<OutputValue>),
    Exhausted,
}

impl Game {
    pub fn new(family: Family, learner: Box<dyn Learner>, adversary: Box<dyn Adversary>, protocol: Protocol, config: GameConfig) -> Result<Self> {
        family.validate()?;
        if config.max_rounds == 0 {
            return Err(Error::Validation("rounds must be at least 1".into()));
        }
        match (&protocol, &family) {
            (Protocol::CartBandit { r }, Family::Cart { r: fr, .. }) if r == fr => {}
            (Protocol::CartBandit { .. }, _) => return Err(Error::Validation("the cart protocol needs a cart family of the same r".into())),
            (Protocol::DelayedAmbiguous { r: 0 }, _) => return Err(Error::Validation("r must be at least 1".into())),
            _ => {}
        }
        Ok(Game { family, learner, adversary, protocol, config, rounds: Vec::new(), status: Status::Clean, termination: None })
    }

    pub fn learner(&self) -> &dyn Learner {
        self.learner.as_ref()
    }

    pub fn adversary(&self) -> &dyn Adversary {
        self.adversary.as_ref()
    }

    pub fn rounds(&self) -> &[RoundRecord] {
        &self.rounds
    }

    pub fn is_over(&self) -> bool {
        self.termination.is_some()
    }

    fn same(&self, a: &OutputValue, b: &OutputValue) -> bool {
        match self.config.mode {
            Mode::Exact => a == b,
            Mode::Approx => a.approx_eq(b, APPROX_TOLERANCE),
        }
    }

    fn next_input(&mut self) -> Result<Option<Input>> {
        let x = self.adversary.next_input()?;
        if let Some(x) = &x {
            self.family.check_input(x).map_err(|e| Error::AdversaryInconsistent(format!("served an invalid input: {e}")))?;
        }
        Ok(x)
    }

    fn answer(&mut self, meter: &mut OpMeter) -> Result<std::result::Result<Step, Error>> {
        let r = self.protocol.delay();
        let mut xs = Vec::new();
        let mut guesses = Vec::new();
        let mut claims = Vec::new();
        match self.protocol {
            Protocol::DelayedAmbiguous { .. } => {
                for _ in 0..r {
                    let Some(x) = self.next_input()? else { break };
                    let g = match self.learner.predict(&x, meter) {
                        Ok(g) => g,
                        Err(e) => return Ok(Err(e)),
                    };
                    claims.push(self.adversary.respond(&x, &g)?);
                    xs.push(x);
                    guesses.push(g);
                }
                if xs.is_empty() {
                    return Ok(Ok(Step::Exhausted));
                }
            }
            Protocol::CartBandit { .. } => {
                let Some(x) = self.next_input()? else { return Ok(Ok(Step::Exhausted)) };
                let g = match self.learner.predict(&x, meter) {
                    Ok(g) => g,
                    Err(e) => return Ok(Err(e)),
                };
                let c = self.adversary.respond(&x, &g)?;
                match (x, g, c) {
                    (Input::Batch(x), OutputValue::Tuple(g), OutputValue::Tuple(c)) if x.len() == g.len() && g.len() == c.len() => {
                        xs = x;
                        guesses = g;
                        claims = c;
                    }
                    (_, g, _) => return Ok(Err(Error::DomainMismatch(format!("answer {g} is not a tuple matching the batch")))),
                }
            }
            _ => {
                let Some(x) = self.next_input()? else { return Ok(Ok(Step::Exhausted)) };
                let g = match self.learner.predict(&x, meter) {
                    Ok(g) => g,
                    Err(e) => return Ok(Err(e)),
                };
                claims.push(self.adversary.respond(&x, &g)?);
                xs.push(x);
                guesses.push(g);
            }
        }
        Ok(Ok(Step::Answered(xs, guesses, claims)))
    }

    /// Plays one round. Returns `false` once the game is over.
    pub fn step(&mut self) -> Result<bool> {
        if self.termination.is_some() {
            return Ok(false);
        }
        if self.rounds.len() >= self.config.max_rounds {
            self.termination = Some(Termination::MaxRounds);
            return Ok(false);
        }
        let round = self.rounds.len();
        let mut meter = OpMeter::new(self.config.cap);
        meter.reset();
        let (xs, guesses, claims) = match self.answer(&mut meter)? {
            Ok(Step::Answered(x, g, c)) => (x, g, c),
            Ok(Step::Exhausted) => {
                self.termination = Some(Termination::AdversaryExhausted);
                return Ok(false);
            }
            Err(e) => {
                self.disqualify(round, e);
                return Ok(false);
            }
        };
        meter.seal();
        let mistake = guesses.iter().zip(&claims).any(|(g, c)| !self.same(g, c));
        let feedback = match (&self.protocol, claims.as_slice()) {
            (p, [c]) if p.reveals() => Feedback::Reveal(c.clone()),
            _ => Feedback::Verdict(!mistake),
        };
        let feedback_text = match &feedback {
            Feedback::Reveal(y) => format!("reveal {y}"),
            Feedback::Verdict(ok) => if *ok { "right" } else { "wrong" }.to_string(),
            Feedback::Skip => "skip".to_string(),
        };
        let error = match (guesses.as_slice(), claims.as_slice()) {
            ([g], [c]) => error_between(g, c),
            _ => None,
        };
        let delivery = match self.protocol {
            Protocol::DelayedAmbiguous { .. } => Delivery::Sequential,
            Protocol::CartBandit { .. } => Delivery::Together,
            _ => Delivery::Single,
        };
        self.rounds.push(RoundRecord { round, inputs: xs, answers: guesses, claims, feedback: feedback_text, mistake, error, ops: meter.used(), delivery });
        if let Err(e) = self.learner.feedback(feedback) {
            self.disqualify(round, e);
            return Ok(false);
        }
        Ok(true)
    }

    fn disqualify(&mut self, round: usize, e: Error) {
        self.status = match e {
            Error::Numeric(NumericError::CapExceeded { .. }) => Status::CapExceeded { round },
            e => Status::LearnerError { round, message: e.to_string() },
        };
        self.termination = Some(Termination::Disqualified);
    }

    /// Plays the remaining rounds and certifies the transcript.
    pub fn finish(mut self) -> Result<Transcript> {
        while self.step()? {}
        let certification = certify(&self.rounds, &self.family, self.protocol.eta(), self.adversary.witness().as_ref())?;
        let rounds = std::mem::take(&mut self.rounds);
        let mut total_error = Scalar::zero();
        for e in rounds.iter().filter_map(|r| r.error.as_ref()) {
            total_error = &total_error + e;
        }
        Ok(Transcript {
            family: self.family.name(),
            learner: self.learner.name(),
            adversary: self.adversary.name(),
            protocol: self.protocol.clone(),
            cap: self.config.cap,
            mistakes: rounds.iter().filter(|r| r.mistake).count(),
            max_ops: rounds.iter().map(|r| r.ops).max().unwrap_or(0),
            total_error,
            lies: self.adversary.lies(),
            status: self.status.clone(),
            termination: self.termination.unwrap_or(Termination::MaxRounds),
            certification: Some(certification),
            diagnostics: self.learner.diagnostics(),
            audit: self.learner.audit(),
            rounds,
        })
    }
}

/// Plays a whole game.
pub fn run_game(family: &Family, learner: Box<dyn Learner>, adversary: Box<dyn Adversary>, protocol: Protocol, config: GameConfig) -> Result<Transcript> {
    Game::new(family.clone(), learner, adversary, protocol, config)?.finish()
}

fn claim_pairs(rounds: &[RoundRecord]) -> impl Iterator<Item = (usize, &Input, &OutputValue)> {
    rounds.iter().flat_map(|r| r.inputs.iter().zip(&r.claims).map(move |(x, c)| (r.round, x, c)))
}

/// Rounds on which `h` disagrees with some claim.
pub fn disagreements(rounds: &[RoundRecord], family: &Family, h: &Hidden) -> Result<usize> {
    let mut bad = std::collections::BTreeSet::new();
    for (round, x, c) in claim_pairs(rounds) {
        if family.eval_free(h, x)? != *c {
            bad.insert(round);
        }
    }
    Ok(bad.len())
}

/// Finds a member within `eta` disagreements of the claims. Tries `hint`
/// first, then the consistency oracle (`eta = 0`), then enumeration of
/// explicit families.
pub fn certify(rounds: &[RoundRecord], family: &Family, eta: usize, hint: Option<&Hidden>) -> Result<Certification> {
    let coordinate_family = match family {
        Family::Cart { base, .. } => base.as_ref(),
        f => f,
    };
    if let Some(h) = hint {
        if coordinate_family.check_member(h).is_ok() {
            let d = disagreements(rounds, coordinate_family, h)?;
            if d <= eta {
                return Ok(Certification { witness: h.clone(), disagreements: d, eta });
            }
        }
    }
    if eta == 0 {
        let constraints: Vec<Constraint> = claim_pairs(rounds).map(|(_, x, c)| Constraint::Equals(x.clone(), c.clone())).collect();
        if let Some(h) = consistent(coordinate_family, &constraints)? {
            return Ok(Certification { witness: h, disagreements: 0, eta });
        }
    } else if let Family::FiniteExplicit { members, .. } = coordinate_family {
        for index in 0..members.len() {
            let h = Hidden::Table { index };
            let d = disagreements(rounds, coordinate_family, &h)?;
            if d <= eta {
                return Ok(Certification { witness: h, disagreements: d, eta });
            }
        }
    }
    Err(Error::AdversaryInconsistent(format!("no member of {} within {eta} disagreements", family.name())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adversaries::{reciprocal_probe, Basis, Honest};
    use crate::learners::{build_learner, LearnerSpec, Memorizer, ReciprocalCheck};
    use std::collections::BTreeMap;

    fn cfg(cap: Option<u64>) -> GameConfig {
        GameConfig { cap, max_rounds: 50, mode: Mode::Exact }
    }

    #[test]
    fn span_basis_game() {
        let f = Family::LinearReal { n: 3 };
        let l = build_learner(&LearnerSpec::Span { capped: false }, &f).unwrap();
        let t = run_game(&f, l, Box::new(Basis::new(f.clone()).unwrap()), Protocol::Standard, cfg(None)).unwrap();
        assert_eq!(t.mistakes, 3);
        assert_eq!(t.termination, Termination::AdversaryExhausted);
        assert_eq!(t.certification.unwrap().disagreements, 0);
    }

    #[test]
    fn reciprocal_caps() {
        let f = Family::ReciprocalTuple { r: 3 };
        let h = Hidden::Reciprocal { a: vec![Scalar::int(2), Scalar::int(3), Scalar::ratio(1, 5)] };
        let play = |l: Box<dyn Learner>, cap| run_game(&f, l, Box::new(reciprocal_probe(&f, &h).unwrap()), Protocol::Standard, cfg(Some(cap))).unwrap();
        let t = play(Box::new(ReciprocalCheck::new(3)), 3);
        assert_eq!((t.mistakes, t.is_clean()), (1, true));
        let t = play(Box::new(ReciprocalCheck::new(3)), 2);
        assert_eq!(t.status, Status::CapExceeded { round: 1 });
        let t = play(Box::new(Memorizer::new(f.clone())), 0);
        assert_eq!((t.mistakes, t.is_clean()), (2, true));
    }

    #[test]
    fn fabricated_sparse_transcript_is_rejected() {
        let f = Family::SparseSupport { k: 3, n: 2 };
        let rounds: Vec<RoundRecord> = (0..3)
            .map(|i| RoundRecord {
                round: i,
                inputs: vec![Input::Int(i as i64)],
                answers: vec![OutputValue::Label(0)],
                claims: vec![OutputValue::Label(1)],
                feedback: "reveal 1".into(),
                mistake: true,
                error: None,
                ops: 0,
                delivery: Delivery::Single,
            })
            .collect();
        let bogus = Hidden::Sparse { support: BTreeMap::from([(0, 1), (1, 1)]) };
        assert!(matches!(certify(&rounds, &f, 0, Some(&bogus)), Err(Error::AdversaryInconsistent(_))));
    }

    #[test]
    fn honest_games_are_deterministic() {
        let f = Family::LinearField { p: 5, n: 3 };
        let h = Hidden::FieldLinear { alpha: vec![1, 4, 2] };
        let run = || {
            let l = build_learner(&LearnerSpec::Span { capped: true }, &f).unwrap();
            run_game(&f, l, Box::new(Honest::random(f.clone(), h.clone(), 11).unwrap()), Protocol::Bandit, cfg(None)).unwrap().to_json()
        };
        assert_eq!(run(), run());
    }
}
