// Families no capped learner can learn: a mistake every round on floor
// parity, and error at least 1/2 per round on two-layer indicators.

use opcap::adversaries::AdversarySpec;
use opcap::families::{Family, Hidden, IndicatorNetwork};
use opcap::learners::LearnerSpec;
use opcap::verify::game;
use opcap::Scalar;

pub fn run_example() {
    let mut c = game(Family::FloorParity, LearnerSpec::Alternating, AdversarySpec::FloorParity);
    c.rounds = 30;
    let t = c.run().unwrap();
    let w = t.certification.unwrap().witness;
    println!("floor parity: {} mistakes in {} rounds, witness {}", t.mistakes, t.rounds.len(), serde_json::to_string(&w).unwrap());
    assert_eq!(t.mistakes, 30);

    for alpha in [Scalar::zero(), Scalar::ratio(1, 2)] {
        let f = Family::TwoLayerReluIndicator { alpha: alpha.clone(), epsilon: Scalar::ratio(1, 8) };
        let mut c = game(f, LearnerSpec::Constant { value: 0 }, AdversarySpec::Bisection);
        c.rounds = 20;
        let t = c.run().unwrap();
        let Hidden::Indicator { c: center, epsilon } = t.certification.unwrap().witness else { unreachable!() };
        let net = IndicatorNetwork::new(center.clone(), epsilon.clone(), alpha.clone());
        for r in &t.rounds {
            let opcap::families::Input::Real(x) = &r.inputs[0] else { unreachable!() };
            assert_eq!(opcap::families::OutputValue::Rational(net.value(&x[0])), r.claims[0]);
        }
        println!("alpha {alpha}: total error {} over {} rounds, witness c={center} eps={epsilon}", t.total_error, t.rounds.len());
        assert!(t.total_error >= Scalar::int(10));
    }
}

#[allow(dead_code)]
fn main() {
    run_example();
}
