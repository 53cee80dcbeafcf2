// The span learner forced to its exact mistake count by the basis and
// interpolation adversaries.

use opcap::adversaries::{Basis, PolyPower};
use opcap::engine::{run_game, GameConfig, Mode, Protocol};
use opcap::families::Family;
use opcap::learners::{build_learner, LearnerSpec};

fn config() -> GameConfig {
    GameConfig { cap: None, max_rounds: 100, mode: Mode::Exact }
}

pub fn run_example() {
    let span = LearnerSpec::Span { capped: false };
    for f in [Family::LinearReal { n: 4 }, Family::LinearField { p: 7, n: 3 }] {
        let learner = build_learner(&span, &f).unwrap();
        let t = run_game(&f, learner, Box::new(Basis::new(f.clone()).unwrap()), Protocol::Standard, config()).unwrap();
        let w = t.certification.as_ref().unwrap();
        println!("{}: {} mistakes, max {} ops, witness {}", t.family, t.mistakes, t.max_ops, serde_json::to_string(&w.witness).unwrap());
        assert_eq!(t.mistakes as u64, f.dimension().unwrap() as u64);
    }

    let poly = Family::BoundedDegreePoly { degrees: vec![2, 1] };
    let learner = build_learner(&span, &poly).unwrap();
    let t = run_game(&poly, learner, Box::new(PolyPower::new(&poly).unwrap()), Protocol::Standard, config()).unwrap();
    println!("{}: {} mistakes", t.family, t.mistakes);
    assert_eq!(t.mistakes, 6);
    for r in &t.rounds {
        println!("  round {} x={} guess={} claim={}", r.round, r.inputs[0], r.answers[0], r.claims[0]);
    }
}

#[allow(dead_code)]
fn main() {
    run_example();
}
