//! Verification sweeps: games whose measured mistakes and operation counts
//! are compared with known exact values or closed-form bounds.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::adversaries::{AdversarySpec, LieSpec};
use crate::bounds::{self, Limit};
use crate::dag::{analyze, random_dag, sum_dag, DEFAULT_PROBES};
use crate::engine::{ExperimentConfig, Mode, Protocol, Status, Transcript};
use crate::families::{Activation, Family};
use crate::learners::{LearnerSpec, SPAN_OPS_CONSTANT};
use crate::numerics::Scalar;
use crate::reductions::{default_alpha, InputMap, ReductionSpec};

/// The named sweeps.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    ExactBounds,
    VotingBounds,
    OpCaps,
    DagLemma,
    Impossibility,
}

impl Suite {
    pub const ALL: [Suite; 5] = [Suite::ExactBounds, Suite::VotingBounds, Suite::OpCaps, Suite::DagLemma, Suite::Impossibility];

    pub fn name(self) -> &'static str {
        match self {
            Suite::ExactBounds => "exact-bounds",
            Suite::VotingBounds => "voting-bounds",
            Suite::OpCaps => "op-caps",
            Suite::DagLemma => "dag-lemma",
            Suite::Impossibility => "impossibility",
        }
    }

    pub fn from_name(name: &str) -> Option<Suite> {
        Suite::ALL.into_iter().find(|s| s.name() == name)
    }

    /// The games the suite plays.
    pub fn cases(self) -> Vec<Case> {
        match self {
            Suite::ExactBounds => [exact_count_cases(), cap_gap_cases(), partial_order_cases(), protocol_identity_cases(50)].concat(),
            Suite::VotingBounds => voting_cases(),
            Suite::OpCaps => [reduction_op_cases(), phase_cases(100)].concat(),
            Suite::DagLemma => Vec::new(),
            Suite::Impossibility => impossibility_cases(),
        }
    }

    /// Runs every row; rows keep a fixed order regardless of scheduling.
    pub fn run(self) -> Vec<ReportRow> {
        let mut rows = run_cases(&self.cases());
        if self == Suite::DagLemma {
            rows.extend(dag_lemma_rows(1000, 0));
        }
        rows
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// How the measured value must relate to the bound.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    Eq,
    Le,
    Ge,
    /// The learner must be disqualified for exceeding the cap.
    Disqualified,
}

/// One line of a verification table.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReportRow {
    pub id: String,
    pub measured: u64,
    pub relation: Relation,
    /// The bound, rounded up when it is not an integer.
    pub bound: u64,
    pub bound_value: f64,
    pub max_ops: u64,
    pub cap: Option<u64>,
    pub verdict: bool,
    pub detail: String,
}

/// What a game's transcript must show.
#[derive(Clone, Debug, PartialEq)]
pub enum Expect {
    Exactly(u64),
    AtMost(Limit),
    /// A mistake in every one of the configured rounds.
    EveryRound,
    /// Total absolute error at least half the configured rounds.
    HalfErrorPerRound,
    Disqualified,
    /// Mistakes within the phase wrapper's certificate `t(1 + ⌈s/W⌉)`.
    PhaseCertificate {
        w: u64,
    },
    /// The same number of mistakes as another game.
    SameMistakesAs(Box<ExperimentConfig>),
}

/// A game and the outcome it must have.
#[derive(Clone, Debug)]
pub struct Case {
    pub id: String,
    pub config: ExperimentConfig,
    pub expect: Expect,
    /// Per-mistake weight decay every voting event must meet.
    pub decay: Option<Scalar>,
}

impl Case {
    fn new(id: impl Into<String>, config: ExperimentConfig, expect: Expect) -> Self {
        Case { id: id.into(), config, expect, decay: None }
    }

    fn with_decay(mut self, factor: Scalar) -> Self {
        self.decay = Some(factor);
        self
    }

    pub fn run(&self) -> ReportRow {
        match self.config.run() {
            Ok(t) => self.judge(&t),
            Err(e) => self.failed(e.to_string()),
        }
    }

    fn failed(&self, detail: String) -> ReportRow {
        ReportRow {
            id: self.id.clone(),
            measured: 0,
            relation: Relation::Le,
            bound: 0,
            bound_value: 0.0,
            max_ops: 0,
            cap: self.config.cap,
            verdict: false,
            detail,
        }
    }

    /// Compares a transcript of this case's game with the expectation.
    pub fn judge(&self, t: &Transcript) -> ReportRow {
        let mistakes = t.mistakes as u64;
        let rounds = self.config.rounds as u64;
        let mut notes = Vec::new();
        let (measured, relation, limit, ok) = match &self.expect {
            Expect::Exactly(b) => (mistakes, Relation::Eq, Limit::Exact(*b), mistakes == *b),
            Expect::AtMost(l) => (mistakes, Relation::Le, *l, l.holds(mistakes)),
            Expect::EveryRound => {
                let played = t.rounds.len() as u64;
                notes.push(format!("rounds={played}"));
                (mistakes, Relation::Ge, Limit::Exact(rounds), played == rounds && mistakes >= rounds)
            }
            Expect::HalfErrorPerRound => {
                let need = Scalar::ratio(rounds as i64, 2);
                notes.push(format!("total_error={}", t.total_error));
                let floor = t.total_error.floor().to_i64().unwrap_or(0).max(0) as u64;
                (floor, Relation::Ge, Limit::Real(need.to_f64()), t.rounds.len() as u64 == rounds && t.total_error >= need)
            }
            Expect::Disqualified => {
                let hit = matches!(t.status, Status::CapExceeded { .. });
                (mistakes, Relation::Disqualified, Limit::Exact(0), hit)
            }
            Expect::PhaseCertificate { w } => {
                let get = |k: &str| t.diagnostics.get(k).and_then(|v| v.as_u64()).unwrap_or(0);
                let (updates, s) = (get("updates"), get("max_update_ops"));
                notes.push(format!("t={updates} s={s}"));
                let l = bounds::phased(updates, s, *w);
                (mistakes, Relation::Le, l, l.holds(mistakes))
            }
            Expect::SameMistakesAs(other) => match other.run() {
                Ok(o) => {
                    notes.push(format!("other={}", o.learner));
                    let b = o.mistakes as u64;
                    (mistakes, Relation::Eq, Limit::Exact(b), b == mistakes && o.is_clean())
                }
                Err(e) => return self.failed(e.to_string()),
            },
        };
        let status_ok = match self.expect {
            Expect::Disqualified => true,
            _ => t.is_clean(),
        };
        if !status_ok {
            notes.push(format!("status={:?}", t.status));
        }
        let ops_ok = self.config.cap.is_none_or(|c| t.max_ops <= c);
        let decay_ok = match &self.decay {
            None => true,
            Some(f) => {
                let held = t.audit.as_ref().is_some_and(|a| a.decay_holds(f));
                notes.push(format!("decay<={f} {}", if held { "held" } else { "violated" }));
                held
            }
        };
        if let Some(c) = &t.certification {
            notes.push(format!("disagreements={}", c.disagreements));
        }
        ReportRow {
            id: self.id.clone(),
            measured,
            relation,
            bound: limit.ceiling(),
            bound_value: limit.value(),
            max_ops: t.max_ops,
            cap: self.config.cap,
            verdict: ok && status_ok && ops_ok && decay_ok,
            detail: notes.join(" "),
        }
    }
}

/// Runs the cases in parallel; the output follows the input order.
pub fn run_cases(cases: &[Case]) -> Vec<ReportRow> {
    cases.par_iter().map(Case::run).collect()
}

/// Whether every row passed.
pub fn all_pass(rows: &[ReportRow]) -> bool {
    rows.iter().all(|r| r.verdict)
}

/// A standard-protocol game with no cap, 100 rounds and seed 0.
pub fn game(family: Family, learner: LearnerSpec, adversary: AdversarySpec) -> ExperimentConfig {
    ExperimentConfig {
        family,
        hidden: None,
        learner,
        reduction: None,
        adversary,
        lies: None,
        protocol: Protocol::Standard,
        cap: None,
        rounds: 100,
        seed: 0,
        mode: Mode::Exact,
    }
}

/// An explicit family of `members` distinct tables over `{0..domain−1}` with
/// values in `{0..k−1}`.
pub fn random_finite_family<R: Rng>(rng: &mut R, members: usize, domain: u32, k: u32) -> Family {
    assert!((k as f64).powi(domain as i32) >= members as f64, "not enough distinct tables");
    let mut tables: Vec<Vec<u32>> = Vec::new();
    while tables.len() < members {
        let t: Vec<u32> = (0..domain).map(|_| rng.gen_range(0..k)).collect();
        if !tables.contains(&t) {
            tables.push(t);
        }
    }
    Family::FiniteExplicit { domain, k, members: tables }
}

fn seq() -> LearnerSpec {
    LearnerSpec::SequentialElimination
}

fn padded(ops: u64) -> LearnerSpec {
    if ops == 0 {
        seq()
    } else {
        LearnerSpec::Padded { ops, base: Box::new(seq()) }
    }
}

/// Learners against the basis, polynomial and version-space adversaries.
pub fn exact_count_cases() -> Vec<Case> {
    let mut cases = Vec::new();
    let span = LearnerSpec::Span { capped: false };
    for n in 1..=6 {
        let f = Family::LinearReal { n };
        cases.push(Case::new(format!("span linear_real n={n}"), game(f, span.clone(), AdversarySpec::Basis), Expect::Exactly(n as u64)));
    }
    for (name, l) in [("constant", LearnerSpec::Constant { value: 0 }), ("alternating", LearnerSpec::Alternating), ("random", LearnerSpec::Random { seed: 3 })]
    {
        let f = Family::LinearReal { n: 3 };
        cases.push(Case::new(format!("{name} linear_real n=3"), game(f, l, AdversarySpec::Basis), Expect::Exactly(3)));
    }
    let activations = [
        ("leaky_relu(1/2)", Activation::LeakyRelu { alpha: Scalar::ratio(1, 2) }, Mode::Exact),
        ("sigmoid", Activation::Sigmoid, Mode::Approx),
        ("tanh", Activation::Tanh, Mode::Approx),
    ];
    for n in 1..=4 {
        for (name, act, mode) in &activations {
            let f = Family::OneLayer { n, activation: act.clone() };
            let mut c = game(f, span.clone(), AdversarySpec::Basis);
            c.mode = *mode;
            cases.push(Case::new(format!("affine {name} n={n}"), c, Expect::Exactly(n as u64 + 1)));
        }
        let f = Family::OneLayer { n, activation: Activation::Relu };
        cases.push(Case::new(format!("relu n={n}"), game(f, LearnerSpec::Relu { capped: false }, AdversarySpec::Basis), Expect::Exactly(n as u64 + 1)));
        for k in [2, 3] {
            let mut c = game(Family::SoftmaxLayer { n, k }, span.clone(), AdversarySpec::Basis);
            c.mode = Mode::Approx;
            cases.push(Case::new(format!("softmax k={k} n={n}"), c, Expect::Exactly(n as u64 + 1)));
        }
    }
    for degrees in [vec![2], vec![1, 1], vec![2, 1]] {
        let expected: u64 = degrees.iter().map(|&d| u64::from(d) + 1).product();
        let id = format!("poly degrees={degrees:?}");
        let f = Family::BoundedDegreePoly { degrees };
        cases.push(Case::new(id, game(f, span.clone(), AdversarySpec::PolyPower), Expect::Exactly(expected)));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    for i in 0..20 {
        let members = rng.gen_range(2..=8);
        let k = rng.gen_range(2..=4);
        let f = random_finite_family(&mut rng, members, 6, k);
        let c = game(f, seq(), AdversarySpec::VersionSpace);
        cases.push(Case::new(format!("sequential_elimination family={i} size={members}"), c, Expect::AtMost(Limit::Exact(members as u64 - 1))));
    }
    cases
}

/// Reciprocal families: the fallback learner without arithmetic and the
/// checking learner that needs `r` multiplications.
pub fn cap_gap_cases() -> Vec<Case> {
    let mut cases = Vec::new();
    let probe = |f: &Family, l: LearnerSpec, cap: u64| {
        let mut c = game(f.clone(), l, AdversarySpec::ReciprocalProbe);
        c.cap = Some(cap);
        c
    };
    let pair = Family::ReciprocalPair;
    cases.push(Case::new("reciprocal_pair cap=0 memorizer", probe(&pair, LearnerSpec::Memorizer, 0), Expect::Exactly(2)));
    cases.push(Case::new("reciprocal_pair cap=0 check", probe(&pair, LearnerSpec::ReciprocalCheck, 0), Expect::Disqualified));
    for cap in 1..=2 {
        cases.push(Case::new(format!("reciprocal_pair cap={cap} check"), probe(&pair, LearnerSpec::ReciprocalCheck, cap), Expect::Exactly(1)));
    }
    for r in [2usize, 3, 5] {
        let f = Family::ReciprocalTuple { r };
        for cap in 0..=r as u64 + 1 {
            if cap < r as u64 {
                cases.push(Case::new(format!("reciprocal_tuple r={r} cap={cap} memorizer"), probe(&f, LearnerSpec::Memorizer, cap), Expect::Exactly(2)));
                cases.push(Case::new(format!("reciprocal_tuple r={r} cap={cap} check"), probe(&f, LearnerSpec::ReciprocalCheck, cap), Expect::Disqualified));
            } else {
                cases.push(Case::new(format!("reciprocal_tuple r={r} cap={cap} check"), probe(&f, LearnerSpec::ReciprocalCheck, cap), Expect::Exactly(1)));
            }
        }
    }
    cases
}

/// Combined-family learner against the composed adversary, and the same
/// learner solving the field-linear family through the order reduction.
pub fn partial_order_cases() -> Vec<Case> {
    let mut cases = Vec::new();
    for (p, n) in [(2u64, 2usize), (3, 2), (5, 3)] {
        let star = Family::CombinedStar { p, n };
        let bound = Expect::AtMost(Limit::Exact(2 * n as u64));
        cases.push(Case::new(format!("combined_star p={p} n={n}"), game(star.clone(), LearnerSpec::CombinedStar, AdversarySpec::StarComposed), bound.clone()));
        let a = SPAN_OPS_CONSTANT * (n as u64).pow(3);
        for (name, adv) in [("basis", AdversarySpec::Basis), ("honest", AdversarySpec::Honest)] {
            let mut c = game(Family::LinearField { p, n }, LearnerSpec::CombinedStar, adv);
            c.reduction = Some(ReductionSpec::OrderReduction { target: star.clone(), map: InputMap::Left });
            c.cap = Some(a + crate::reductions::OrderReduction::A_M + crate::reductions::OrderReduction::A_S);
            c.rounds = 40;
            cases.push(Case::new(format!("order_reduction p={p} n={n} {name}"), c, bound.clone()));
        }
    }
    cases
}

/// Standard and bandit games on two-valued families, played by the same
/// deterministic learner against the same seeded adversary.
pub fn protocol_identity_cases(seeds: u64) -> Vec<Case> {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    (0..seeds)
        .map(|seed| {
            let f = random_finite_family(&mut rng, 5, 6, 2);
            let mut std = game(f, seq(), AdversarySpec::Honest);
            std.rounds = 20;
            std.seed = seed;
            let mut bandit = std.clone();
            bandit.protocol = Protocol::Bandit;
            Case::new(format!("protocol_identity k=2 seed={seed}"), std, Expect::SameMistakesAs(Box::new(bandit)))
        })
        .collect()
}

fn adversaries() -> [(&'static str, AdversarySpec); 2] {
    [("version_space", AdversarySpec::VersionSpace), ("honest", AdversarySpec::Honest)]
}

/// Agnostic and bandit voting on explicit families with `M ≤ 2`.
pub fn voting_cases() -> Vec<Case> {
    let mut cases = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for m in 1..=2u64 {
        for k in [2u32, 4, 8] {
            let f = random_finite_family(&mut rng, m as usize + 1, 6, k);
            for eta in 0..=2usize {
                let schedule: Vec<usize> = (0..eta).map(|i| 2 * i).collect();
                for (adv_name, adv) in adversaries() {
                    let base = |protocol: Protocol, reduction: ReductionSpec, weak: bool| {
                        let mut c = game(f.clone(), seq(), adv.clone());
                        c.protocol = protocol;
                        c.reduction = Some(reduction);
                        c.lies = Some(LieSpec { eta, schedule: schedule.clone(), weak });
                        c.rounds = 30;
                        c.seed = m * 100 + u64::from(k) * 10 + eta as u64;
                        c
                    };
                    let tag = format!("M={m} k={k} eta={eta} {adv_name}");
                    let (e, kk) = (eta as u64, u64::from(k));
                    cases.push(
                        Case::new(
                            format!("agnostic_strong {tag}"),
                            base(Protocol::AgnosticStrong { eta }, ReductionSpec::AgnosticStrong, false),
                            Expect::AtMost(bounds::agnostic_strong(m, e, kk)),
                        )
                        .with_decay(Scalar::ratio(5, 6)),
                    );
                    cases.push(
                        Case::new(
                            format!("agnostic_weak {tag}"),
                            base(Protocol::AgnosticWeak { eta }, ReductionSpec::AgnosticWeak, true),
                            Expect::AtMost(bounds::agnostic_weak(m, e, kk)),
                        )
                        .with_decay(Scalar::ratio(3 * k as i64 - 1, 3 * k as i64)),
                    );
                    cases.push(Case::new(
                        format!("agnostic_restart {tag}"),
                        base(Protocol::AgnosticStrong { eta }, ReductionSpec::Restart { m: None }, false),
                        Expect::AtMost(bounds::agnostic_restart(m, e)),
                    ));
                }
            }
        }
        for k in [2u32, 3, 4] {
            let f = random_finite_family(&mut rng, m as usize + 1, 6, k);
            let alpha = default_alpha(k as usize, 1);
            let decay = bounds::ambiguous_decay(u64::from(k), 1, &alpha);
            for (adv_name, adv) in adversaries() {
                let mut c = game(f.clone(), seq(), adv);
                c.protocol = Protocol::Bandit;
                c.reduction = Some(ReductionSpec::Bandit { alpha: None });
                c.rounds = 30;
                c.seed = m * 10 + u64::from(k);
                cases.push(
                    Case::new(format!("bandit M={m} k={k} {adv_name}"), c, Expect::AtMost(bounds::voting_mistakes(m, &alpha, &decay)))
                        .with_decay(bounds::bandit_decay_loose(u64::from(k), &alpha)),
                );
            }
        }
    }
    cases
}

/// Meter readings of the voting and restart reductions around a base
/// learner that spends exactly `a` operations per answer.
pub fn reduction_op_cases() -> Vec<Case> {
    let mut cases = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for m in 1..=2u32 {
        for k in [2u32, 3] {
            let f = random_finite_family(&mut rng, m as usize + 1, 6, k);
            let kk = u64::from(k);
            for a in [0u64, 1, 5] {
                let alpha = default_alpha(k as usize, 1);
                let decay = bounds::ambiguous_decay(kk, 1, &alpha);
                for (adv_name, adv) in adversaries() {
                    let mut c = game(f.clone(), padded(a), adv);
                    c.protocol = Protocol::Bandit;
                    c.reduction = Some(ReductionSpec::Bandit { alpha: None });
                    c.cap = Some(bounds::bandit_ops(m, kk, a).ceiling());
                    c.rounds = 30;
                    c.seed = u64::from(m) + kk + a;
                    cases.push(Case::new(
                        format!("bandit_ops M={m} k={k} a={a} {adv_name}"),
                        c,
                        Expect::AtMost(bounds::voting_mistakes(m.into(), &alpha, &decay)),
                    ));
                }
            }
            for r in [1usize, 2] {
                let alpha = default_alpha(k as usize, r);
                let decay = bounds::ambiguous_decay(kk, r as u32, &alpha);
                for a in [0u64, 1] {
                    let cap = bounds::ambiguous_ops(m, kk, r as u64, a).ceiling();
                    let mistakes = Expect::AtMost(bounds::voting_mistakes(m.into(), &alpha, &decay));
                    let mut delayed = game(f.clone(), padded(a), AdversarySpec::Honest);
                    delayed.protocol = Protocol::DelayedAmbiguous { r };
                    delayed.reduction = Some(ReductionSpec::Ambiguous { alpha: None });
                    delayed.cap = Some(cap);
                    delayed.rounds = 20;
                    delayed.seed = u64::from(m) * 7 + kk + a;
                    let mut cart = delayed.clone();
                    cart.family = Family::Cart { base: Box::new(f.clone()), r };
                    cart.protocol = Protocol::CartBandit { r };
                    let tag = format!("M={m} k={k} r={r} a={a}");
                    cases.push(Case::new(format!("ambiguous_ops delayed {tag}"), delayed, mistakes.clone()).with_decay(decay.clone()));
                    cases.push(Case::new(format!("ambiguous_ops cart {tag}"), cart, mistakes).with_decay(decay.clone()));
                }
            }
        }
    }
    for a in [0u64, 3] {
        for eta in [1usize, 2] {
            let f = random_finite_family(&mut rng, 3, 6, 3);
            let mut c = game(f, padded(a), AdversarySpec::Honest);
            c.protocol = Protocol::AgnosticStrong { eta };
            c.reduction = Some(ReductionSpec::Restart { m: None });
            c.lies = Some(LieSpec { eta, schedule: (0..eta).map(|i| 3 * i + 1).collect(), weak: false });
            c.cap = Some(a);
            c.rounds = 30;
            cases.push(Case::new(format!("restart_ops a={a} eta={eta}"), c, Expect::AtMost(bounds::agnostic_restart(2, eta as u64))));
        }
    }
    cases
}

/// The span learner for `n = 3` under the two-phase schedule, capped at the
/// cost of one hypothesis evaluation.
pub fn phase_cases(seeds: u64) -> Vec<Case> {
    let f = Family::LinearReal { n: 3 };
    let w = f.declared().w_f.expect("linear families declare their evaluation cost");
    (0..seeds)
        .map(|seed| {
            let mut c = game(f.clone(), LearnerSpec::Phased { w }, AdversarySpec::Honest);
            c.cap = Some(w);
            c.rounds = 40;
            c.seed = seed;
            Case::new(format!("phased span n=3 W={w} seed={seed}"), c, Expect::PhaseCertificate { w })
        })
        .collect()
}

/// Adversaries that force unbounded mistakes or error.
pub fn impossibility_cases() -> Vec<Case> {
    let learners = [("constant", LearnerSpec::Constant { value: 0 }), ("alternating", LearnerSpec::Alternating), ("random", LearnerSpec::Random { seed: 7 })];
    let mut cases = Vec::new();
    for (name, l) in &learners {
        let mut c = game(Family::FloorParity, l.clone(), AdversarySpec::FloorParity);
        c.rounds = 30;
        cases.push(Case::new(format!("floor_parity {name}"), c, Expect::EveryRound));
    }
    for alpha in [Scalar::zero(), Scalar::ratio(1, 2)] {
        for (name, l) in &learners {
            let f = Family::TwoLayerReluIndicator { alpha: alpha.clone(), epsilon: Scalar::ratio(1, 8) };
            let mut c = game(f, l.clone(), AdversarySpec::Bisection);
            c.rounds = 20;
            cases.push(Case::new(format!("bisection alpha={alpha} {name}"), c, Expect::HalfErrorPerRound));
        }
    }
    cases
}

/// The dependency lemma on `count` random programs plus the sum programs,
/// which meet it with equality.
pub fn dag_lemma_rows(count: usize, seed: u64) -> Vec<ReportRow> {
    let checked: Vec<(usize, usize, u64)> = (0..count)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(i as u64));
            let dag = random_dag(&mut rng, 6, 20);
            match analyze(&dag, DEFAULT_PROBES, i as u64) {
                Ok(reports) => {
                    let bad = reports.iter().filter(|r| !r.pass).count();
                    let ops = reports.iter().filter_map(|r| r.executed_ops_max).max().unwrap_or(0);
                    (reports.len(), bad, ops)
                }
                Err(_) => (0, 1, 0),
            }
        })
        .collect();
    let outputs: usize = checked.iter().map(|c| c.0).sum();
    let violations = checked.iter().map(|c| c.1).sum::<usize>() as u64;
    let mut rows = vec![ReportRow {
        id: format!("dag_lemma random count={count}"),
        measured: violations,
        relation: Relation::Le,
        bound: 0,
        bound_value: 0.0,
        max_ops: checked.iter().map(|c| c.2).max().unwrap_or(0),
        cap: None,
        verdict: violations == 0,
        detail: format!("outputs={outputs} violations={violations}"),
    }];
    for m in 2..=6 {
        let row = match analyze(&sum_dag(m), DEFAULT_PROBES, m as u64) {
            Ok(reports) => {
                let r = &reports[0];
                let deps = r.semantic.as_ref().map_or(0, |s| s.len());
                ReportRow {
                    id: format!("dag_lemma sum m={m}"),
                    measured: r.static_binary_ops as u64,
                    relation: Relation::Eq,
                    bound: r.bound as u64,
                    bound_value: r.bound as f64,
                    max_ops: r.executed_ops_max.unwrap_or(0),
                    cap: None,
                    verdict: r.pass && deps == m && r.static_binary_ops == r.bound,
                    detail: format!("semantic_deps={deps} witness_edges={}", r.witness.len()),
                }
            }
            Err(e) => ReportRow {
                id: format!("dag_lemma sum m={m}"),
                measured: 0,
                relation: Relation::Eq,
                bound: m as u64 - 1,
                bound_value: (m - 1) as f64,
                max_ops: 0,
                cap: None,
                verdict: false,
                detail: e.to_string(),
            },
        };
        rows.push(row);
    }
    rows
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_round_trip() {
        for s in Suite::ALL {
            assert_eq!(Suite::from_name(s.name()), Some(s));
        }
        assert_eq!(Suite::from_name("everything"), None);
    }

    #[test]
    fn random_families_have_distinct_members() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let Family::FiniteExplicit { members, .. } = random_finite_family(&mut rng, 4, 2, 2) else { panic!() };
        let mut sorted = members.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted.len(), 4);
    }

    #[test]
    fn bandit_op_row_matches_the_worked_value() {
        let rows = run_cases(&reduction_op_cases());
        let row = rows.iter().find(|r| r.id == "bandit_ops M=2 k=3 a=5 honest").unwrap();
        assert_eq!(row.cap, Some(28));
        assert!(row.verdict, "{row:?}");
    }
}
