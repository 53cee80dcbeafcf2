// Single neurons and a softmax layer learned from `n + 1` mistakes.

use opcap::adversaries::AdversarySpec;
use opcap::engine::Mode;
use opcap::families::{Activation, Family};
use opcap::learners::LearnerSpec;
use opcap::verify::game;
use opcap::Scalar;

pub fn run_example() {
    let n = 3;
    let cases = [
        (Activation::LeakyRelu { alpha: Scalar::ratio(1, 2) }, LearnerSpec::Span { capped: false }, Mode::Exact),
        (Activation::Sigmoid, LearnerSpec::Span { capped: false }, Mode::Approx),
        (Activation::Tanh, LearnerSpec::Span { capped: false }, Mode::Approx),
        (Activation::Relu, LearnerSpec::Relu { capped: false }, Mode::Exact),
    ];
    for (activation, learner, mode) in cases {
        let mut c = game(Family::OneLayer { n, activation }, learner, AdversarySpec::Basis);
        c.mode = mode;
        let t = c.run().unwrap();
        println!("{}: {} mistakes", t.family, t.mistakes);
        assert_eq!(t.mistakes, n + 1);
    }
    for k in [2, 3] {
        let mut c = game(Family::SoftmaxLayer { n, k }, LearnerSpec::Span { capped: false }, AdversarySpec::Basis);
        c.mode = Mode::Approx;
        let t = c.run().unwrap();
        println!("{}: {} mistakes", t.family, t.mistakes);
        assert_eq!(t.mistakes, n + 1);
    }

    // Against random inputs the neuron is learned and then never missed.
    let mut c = game(Family::OneLayer { n, activation: Activation::Tanh }, LearnerSpec::Span { capped: false }, AdversarySpec::Honest);
    c.mode = Mode::Approx;
    c.rounds = 50;
    let t = c.run().unwrap();
    let last_mistake = t.rounds.iter().filter(|r| r.mistake).map(|r| r.round).max();
    println!("honest tanh game: {} mistakes, last at round {last_mistake:?}", t.mistakes);
    assert!(t.mistakes <= n + 1);
}

#[allow(dead_code)]
fn main() {
    run_example();
}
