// A learner for the combined field-and-support family, used directly and
// through an order reduction for the field-linear family alone.

use opcap::adversaries::AdversarySpec;
use opcap::families::Family;
use opcap::learners::{LearnerSpec, SPAN_OPS_CONSTANT};
use opcap::reductions::{InputMap, OrderReduction, ReductionSpec};
use opcap::verify::game;

pub fn run_example() {
    for (p, n) in [(2u64, 2usize), (3, 2), (5, 3)] {
        let star = Family::CombinedStar { p, n };
        let t = game(star.clone(), LearnerSpec::CombinedStar, AdversarySpec::StarComposed).run().unwrap();
        println!("{}: {} mistakes against the composed adversary (at most {})", t.family, t.mistakes, 2 * n);
        assert!(t.mistakes <= 2 * n);

        let a = SPAN_OPS_CONSTANT * (n as u64).pow(3);
        let mut c = game(Family::LinearField { p, n }, LearnerSpec::CombinedStar, AdversarySpec::Basis);
        c.reduction = Some(ReductionSpec::OrderReduction { target: star, map: InputMap::Left });
        c.cap = Some(a + OrderReduction::A_M + OrderReduction::A_S);
        let t = c.run().unwrap();
        println!("  via order reduction on {}: {} mistakes, max ops {}", t.family, t.mistakes, t.max_ops);
        assert!(t.is_clean() && t.mistakes <= 2 * n);
    }
}

#[allow(dead_code)]
fn main() {
    run_example();
}
