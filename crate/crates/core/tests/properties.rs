use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use opcap::adversaries::{AdversarySpec, LieSpec};
use opcap::engine::{ExperimentConfig, Protocol, Status};
use opcap::families::{cart_lift, Family, Hidden, Input, OutputValue};
use opcap::learners::{Codec, FieldCodec, LearnerSpec, RealCodec, SPAN_OPS_CONSTANT};
use opcap::reductions::{default_alpha, ReductionSpec};
use opcap::verify::{game, random_finite_family};
use opcap::Scalar;

fn finite(seed: u64, members: usize, k: u32) -> Family {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_finite_family(&mut rng, members, 6, k)
}

fn elimination(family: Family, seed: u64) -> ExperimentConfig {
    let mut cfg = game(family, LearnerSpec::SequentialElimination, AdversarySpec::Honest);
    cfg.seed = seed;
    cfg.rounds = 40;
    cfg
}

fn witness_agrees(cfg: &ExperimentConfig) -> usize {
    let t = cfg.run().unwrap();
    let w = &t.certification.as_ref().unwrap().witness;
    t.rounds.iter().filter(|r| r.inputs.iter().zip(&r.claims).any(|(x, c)| cfg.family.eval_free(w, x).unwrap() != *c)).count()
}

fn small() -> impl Strategy<Value = Scalar> {
    (-20i64..=20, 1i64..=6).prop_map(|(n, d)| Scalar::ratio(n, d))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn engine_is_deterministic(seed in any::<u64>(), members in 2usize..8, k in 2u32..4) {
        let cfg = elimination(finite(seed, members, k), seed);
        prop_assert_eq!(cfg.run().unwrap().to_json(), cfg.run().unwrap().to_json());
    }

    #[test]
    fn realizable_games_have_a_consistent_witness(seed in any::<u64>(), n in 1usize..4) {
        let mut cfg = game(Family::LinearReal { n }, LearnerSpec::Span { capped: false }, AdversarySpec::Honest);
        cfg.seed = seed;
        cfg.rounds = 12;
        let t = cfg.run().unwrap();
        prop_assert_eq!(t.certification.as_ref().unwrap().disagreements, 0);
        prop_assert_eq!(witness_agrees(&cfg), 0);
    }

    #[test]
    fn span_learner_never_errs_twice_on_an_input(xs in prop::collection::vec(prop::collection::vec(small(), 3), 1..6)) {
        let inputs: Vec<Input> = xs.iter().chain(xs.iter()).map(|v| Input::Real(v.clone())).collect();
        let mut cfg = game(Family::LinearReal { n: 3 }, LearnerSpec::Span { capped: false }, AdversarySpec::Scripted { inputs });
        cfg.rounds = 2 * xs.len();
        let t = cfg.run().unwrap();
        prop_assert!(t.mistakes <= 3);
        for (i, r) in t.rounds.iter().enumerate() {
            let seen = t.rounds[..i].iter().any(|s| s.inputs == r.inputs);
            prop_assert!(!(seen && r.mistake), "repeat mistake at round {}", r.round);
        }
    }

    #[test]
    fn elimination_mistakes_bounded_by_members(seed in any::<u64>(), members in 2usize..10, k in 2u32..4) {
        let cfg = elimination(finite(seed, members, k), seed);
        let t = cfg.run().unwrap();
        prop_assert!(t.mistakes < members);
        prop_assert!(t.is_clean());
    }

    #[test]
    fn memorizer_uses_no_arithmetic(seed in any::<u64>(), n in 1usize..4) {
        let mut cfg = game(Family::LinearReal { n }, LearnerSpec::Memorizer, AdversarySpec::Honest);
        cfg.seed = seed;
        cfg.rounds = 20;
        cfg.cap = Some(0);
        let t = cfg.run().unwrap();
        prop_assert_eq!(t.max_ops, 0);
        prop_assert!(t.is_clean());
    }

    #[test]
    fn caps_are_never_silently_exceeded(seed in any::<u64>(), n in 1usize..4, cap in 0u64..30) {
        let mut cfg = game(Family::LinearReal { n }, LearnerSpec::Span { capped: false }, AdversarySpec::Honest);
        cfg.seed = seed;
        cfg.rounds = 15;
        cfg.cap = Some(cap);
        let t = cfg.run().unwrap();
        match t.status {
            Status::Clean => prop_assert!(t.max_ops <= cap),
            Status::CapExceeded { round } => {
                prop_assert!(t.rounds.iter().filter(|r| r.round < round).all(|r| r.ops <= cap));
                prop_assert!(t.rounds.iter().all(|r| r.round <= round));
            }
            Status::LearnerError { .. } => prop_assert!(false, "learner error"),
        }
    }

    #[test]
    fn capped_span_respects_its_budget(seed in any::<u64>(), n in 1usize..4) {
        let mut cfg = game(Family::LinearReal { n }, LearnerSpec::Span { capped: true }, AdversarySpec::Honest);
        cfg.seed = seed;
        cfg.rounds = 20;
        let t = cfg.run().unwrap();
        prop_assert!(t.is_clean());
        prop_assert!(t.max_ops <= SPAN_OPS_CONSTANT * (n as u64 + 1).pow(3));
    }

    #[test]
    fn feedback_matches_the_protocol(seed in any::<u64>(), members in 2usize..8) {
        let mut cfg = elimination(finite(seed, members, 3), seed);
        cfg.protocol = Protocol::Bandit;
        cfg.reduction = Some(ReductionSpec::Bandit { alpha: None });
        cfg.rounds = 25;
        let t = cfg.run().unwrap();
        for r in &t.rounds {
            prop_assert_eq!(r.mistake, r.answers != r.claims);
            prop_assert_eq!(&r.feedback, if r.mistake { "wrong" } else { "right" });
        }
        let revealed = elimination(finite(seed, members, 3), seed).run().unwrap();
        for r in &revealed.rounds {
            prop_assert_eq!(r.feedback.clone(), format!("reveal {}", r.claims[0]));
        }
    }

    #[test]
    fn bandit_voting_keeps_a_heavy_correct_copy(seed in any::<u64>(), members in 2usize..6, k in 2u32..4) {
        let family = finite(seed, members, k);
        let mut cfg = elimination(family.clone(), seed);
        cfg.protocol = Protocol::Bandit;
        cfg.reduction = Some(ReductionSpec::Bandit { alpha: None });
        let t = cfg.run().unwrap();
        let audit = t.audit.as_ref().unwrap();
        let m = (members - 1) as i32;
        let alpha = default_alpha(k as usize, 1);
        prop_assert!(audit.decay_holds(&audit.decay_factor));
        prop_assert!(audit.max_q() <= (k as usize - 1).pow(m as u32));
        let w = &t.certification.as_ref().unwrap().witness;
        let floor = (0..m).fold(Scalar::one(), |acc, _| &acc * &alpha);
        let correct = audit.copies.iter().find(|c| c.memory.iter().all(|(x, y)| family.eval_free(w, x).unwrap() == *y));
        prop_assert!(correct.is_some_and(|c| c.weight >= floor));
        let bound = f64::from(m) * -alpha.to_f64().ln() / -audit.decay_factor.to_f64().ln();
        prop_assert!(t.mistakes as f64 <= bound + 1e-9);
    }

    #[test]
    fn lies_stay_within_budget(seed in any::<u64>(), members in 2usize..6, eta in 0usize..4, spread in prop::collection::btree_set(0usize..30, 0..4)) {
        let mut cfg = elimination(finite(seed, members, 3), seed);
        let schedule: Vec<usize> = spread.into_iter().take(eta).collect();
        cfg.protocol = Protocol::AgnosticStrong { eta };
        cfg.reduction = Some(ReductionSpec::AgnosticStrong);
        cfg.lies = Some(LieSpec { eta, schedule, weak: false });
        cfg.rounds = 30;
        let t = cfg.run().unwrap();
        prop_assert!(t.lies <= eta);
        prop_assert!(t.certification.as_ref().unwrap().disagreements <= eta);
        prop_assert!(witness_agrees(&cfg) <= eta);
    }

    #[test]
    fn cart_lift_acts_coordinatewise(seed in any::<u64>(), members in 2usize..6, points in prop::collection::vec(0u32..6, 1..4)) {
        let base = finite(seed, members, 3);
        let lifted = cart_lift(&base, points.len());
        let h = Hidden::Table { index: seed as usize % members };
        let x = Input::Batch(points.iter().map(|&p| Input::Point(p)).collect());
        let each: Vec<OutputValue> = points.iter().map(|&p| base.eval_free(&h, &Input::Point(p)).unwrap()).collect();
        prop_assert_eq!(lifted.eval_free(&h, &x).unwrap(), OutputValue::Tuple(each));
    }

    #[test]
    fn real_codec_round_trips(v in small()) {
        let codec = RealCodec::for_family(&Family::LinearReal { n: 2 }).unwrap();
        let y = OutputValue::Rational(v);
        prop_assert_eq!(codec.decode(codec.encode(&y).unwrap()), y);
    }

    #[test]
    fn field_codec_round_trips(p in prop::sample::select(vec![2u64, 3, 5, 7, 11]), raw in any::<u64>()) {
        let codec = FieldCodec { p, n: 2 };
        let y = OutputValue::FieldElem(raw % p);
        prop_assert_eq!(codec.decode(codec.encode(&y).unwrap()), y);
        prop_assert!(codec.encode(&OutputValue::FieldElem(p)).is_err());
    }
}
